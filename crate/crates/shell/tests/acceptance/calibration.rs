use cogrisk::calibrate::{calibrate, pedestrian_report, CalibrationSpec};
use cogrisk::config::CalibrateConfig;
use cogrisk::generate::{recorded_crossings, GenerateConfig};
use cogrisk_core::{ModelParams, PedestrianModelKind};

use crate::Verdict;

const BUDGET: usize = 100;
const SCENARIOS: usize = 20;

/// The hidden parameters that generate the ground truth, away from the defaults.
fn truth_params() -> ModelParams {
    let mut p = ModelParams::default();
    p.sfm.v0 = 1.3;
    p.sfm.tau = 0.7;
    p.sfm.a_veh = 4.0;
    p.sfm.b_veh = 1.5;
    p.sfm.a_ped = 2.5;
    p.sfm.b_ped = 0.6;
    p
}

pub fn run() -> Verdict {
    let config = GenerateConfig {
        model: PedestrianModelKind::CrSfm,
        min_pedestrians: 3,
        max_pedestrians: 3,
        max_steps: 40,
        behavior_noise: 0.3,
        ..GenerateConfig::default()
    };
    let truth = truth_params();
    let train = recorded_crossings(SCENARIOS, 21, &config, &truth).unwrap();
    let held_out = recorded_crossings(SCENARIOS, 22, &config, &truth).unwrap();
    let ade = |model: PedestrianModelKind| {
        let spec = CalibrationSpec { model, parameters: CalibrateConfig::default().parameters, budget: BUDGET, seed: Some(5), base: ModelParams::default() };
        let fit = calibrate(&spec, &train, 0).unwrap();
        pedestrian_report(&held_out, model, &fit.params).unwrap().0.ade.unwrap()
    };
    let (cr, sfm, cv) = (ade(PedestrianModelKind::CrSfm), ade(PedestrianModelKind::Sfm), ade(PedestrianModelKind::Cv));
    Verdict::new(
        cr < sfm && sfm < cv,
        format!("held-out ADE over {SCENARIOS} scenarios, budget {BUDGET}: cr_sfm {cr:.4}, sfm {sfm:.4}, cv {cv:.4}"),
    )
}

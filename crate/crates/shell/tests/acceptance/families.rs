use cogrisk::generate::{family, Family, GenerateConfig};
use cogrisk_core::{run_replay, ModelParams, Outcome, PedestrianModelKind};

use crate::Verdict;

const SEEDS: usize = 30;

fn collisions(fam: Family, model: PedestrianModelKind) -> usize {
    let config = GenerateConfig { model, ..GenerateConfig::default() };
    family(fam, SEEDS, 0, &config, &ModelParams::default())
        .unwrap()
        .iter()
        .filter(|s| run_replay(s, &ModelParams::default(), s.max_steps).unwrap().outcome == Outcome::Collision)
        .count()
}

pub fn run() -> Verdict {
    let models = [PedestrianModelKind::CrSfm, PedestrianModelKind::RaSfm, PedestrianModelKind::Sfm];
    let mut pass = true;
    let mut parts = Vec::new();
    for fam in [Family::Collision, Family::Latent] {
        let [cr, ra, sfm] = models.map(|m| collisions(fam, m));
        pass &= cr <= ra && ra <= sfm;
        if fam == Family::Latent {
            pass &= cr == 0;
        }
        parts.push(format!("{fam:?} family ({SEEDS} seeds): cr_sfm {cr}, ra_sfm {ra}, sfm {sfm}"));
    }
    Verdict::new(pass, parts.join("; ").to_lowercase())
}

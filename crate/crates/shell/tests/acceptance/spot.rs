use cogrisk_core::risk::{fused_weight, goal_weight, physical_risk, virtual_distance};
use cogrisk_core::world::RelativeGeometry;
use cogrisk_core::{RiskParams, Vec2};
use cogrisk_neural::{Activation, Dense, Tensor2};
use cogrisk_sac::{critic_loss, critic_target, soft_update};

use crate::Verdict;

const TOL: f64 = 1e-9;

pub fn run() -> Verdict {
    let mut failed = Vec::new();
    let mut checked = 0;
    let mut check = |name: &str, got: f64, want: f64| {
        checked += 1;
        if (got - want).abs() > TOL {
            failed.push(format!("{name}: got {got}, want {want}"));
        }
    };

    // Head-on approach: the other agent closes at 2 m/s along the line of sight.
    let geom = RelativeGeometry { d_actual: 4.0, phi: 0.0, n_hat: Vec2::new(1.0, 0.0), closing_rate: -2.0, degenerate: false };
    let params = RiskParams { gamma1: 0.5, ..RiskParams::default() };
    check("virtual_distance", virtual_distance(&geom, 2.0, 0.0, &params), 4.0 * (1.0 + (-1.0f64).tanh()));
    check("virtual_distance static", virtual_distance(&geom, 0.0, 0.0, &params), 4.0);

    check("physical_risk", physical_risk(4.0, &RiskParams { gamma2: 0.5, ..RiskParams::default() }), 1.0 / 3.0);
    check("physical_risk unit", physical_risk(1.0, &RiskParams { gamma2: 1.0, ..RiskParams::default() }), 0.5);
    check("physical_risk contact", physical_risk(0.0, &RiskParams::default()), 1.0);

    check("fused_weight", fused_weight(0.5, 1.0, 1.0), 1.0);
    check("fused_weight no uncertainty", fused_weight(0.5, 0.0, 1.0), 0.5);

    let decay = RiskParams { lambda3: 1.0, ..RiskParams::default() };
    check("goal_weight", goal_weight(2f64.ln(), &[], &decay), 0.5);
    check("goal_weight pedestrian max", goal_weight(0.1, &[2f64.ln(), 0.3], &decay), 0.5);
    check("goal_weight risk free", goal_weight(0.0, &[0.0], &RiskParams::default()), 1.0);

    check("critic_target", critic_target(1.0, false, 2.0, -1.0, 0.99, 0.2), 3.18);
    check("critic_target terminal", critic_target(1.0, true, 2.0, -1.0, 0.99, 0.2), 1.0);
    check("critic_loss", critic_loss(&[0.0], &[0.0], &[2.0]), 2.0);

    let online = Dense::from_params(Tensor2::from_vec(1, 1, vec![2.0]).unwrap(), &[2.0], Activation::Identity).unwrap();
    let mut target = Dense::from_params(Tensor2::from_vec(1, 1, vec![0.0]).unwrap(), &[0.0], Activation::Identity).unwrap();
    soft_update(&mut target, &online, 0.5).unwrap();
    check("soft_update weight", target.weight.value.get(0, 0), 1.0);
    check("soft_update bias", target.bias.value.get(0, 0), 1.0);

    let pass = failed.is_empty();
    Verdict::new(pass, if pass { format!("{checked} values within 1e-9") } else { failed.join("; ") })
}

use cogrisk_core::cognition::{bayes_update, kl_gaussian};
use cogrisk_core::{GaussianBelief, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Verdict;

const CASES: usize = 1000;

fn log_density(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (x - mean).powi(2) / (2.0 * var)
}

/// ∫ p ln(p/o) by composite Simpson over ±14 standard deviations of p.
fn kl_by_integration(mp: f64, vp: f64, mo: f64, vo: f64) -> f64 {
    let intervals = 6000;
    let half = 14.0 * vp.sqrt();
    let (a, b) = (mp - half, mp + half);
    let h = (b - a) / intervals as f64;
    let f = |x: f64| {
        let lp = log_density(x, mp, vp);
        lp.exp() * (lp - log_density(x, mo, vo))
    };
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

fn belief(rng: &mut ChaCha8Rng) -> GaussianBelief {
    GaussianBelief::new(
        Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)),
        [rng.random_range(0.05..4.0), rng.random_range(0.05..4.0)],
    )
}

pub fn run() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
    let mut kl_err: f64 = 0.0;
    for _ in 0..CASES {
        let (p, o) = (belief(&mut rng), belief(&mut rng));
        let oracle = kl_by_integration(p.mean.x, p.variance[0], o.mean.x, o.variance[0])
            + kl_by_integration(p.mean.y, p.variance[1], o.mean.y, o.variance[1]);
        kl_err = kl_err.max((kl_gaussian(&p, &o).unwrap() - oracle).abs());
    }
    let mut precision_err: f64 = 0.0;
    let mut mean_err: f64 = 0.0;
    for _ in 0..CASES {
        let (prior, obs) = (belief(&mut rng), belief(&mut rng));
        let post = bayes_update(&prior, &obs).unwrap();
        let (pm, om, qm) = ([prior.mean.x, prior.mean.y], [obs.mean.x, obs.mean.y], [post.mean.x, post.mean.y]);
        for k in 0..2 {
            let sum = 1.0 / prior.variance[k] + 1.0 / obs.variance[k];
            precision_err = precision_err.max((1.0 / post.variance[k] - sum).abs() / sum);
            let weighted = pm[k] / prior.variance[k] + om[k] / obs.variance[k];
            mean_err = mean_err.max((qm[k] / post.variance[k] - weighted).abs() / weighted.abs().max(1.0));
        }
    }
    let pass = kl_err <= 1e-6 && precision_err <= 1e-12 && mean_err <= 1e-12;
    Verdict::new(pass, format!("kl max |err| {kl_err:.2e} over {CASES} cases; precision-sum rel err {precision_err:.2e}, mean identity {mean_err:.2e}"))
}

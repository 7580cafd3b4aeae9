//! Extrapolation of maximal size and the good-λ inequality.

use dhap_core::decompose::{extrapolate_check, good_lambda, SliceAlgorithm};
use dhap_core::function_space::maximal_size;
use dhap_core::{Error, TileSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{grid_upto, ok, Item};
use crate::config::RunConfig;
use crate::gen;
use crate::report::TrialLog;

pub(super) const ITEMS: &[Item] = &[
    Item::trial("extrapolate", "scaled_measure", scaled_measure),
    Item::trial("extrapolate", "good_lambda", lambda),
];

/// `μ′ = λ μ`: trees of `μ`-size at most `δ` have `μ′`-size at most `λ δ`.
fn scaled_measure(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 4);
    let mu = gen::weights(rng, grid);
    let lambda = rng.gen_range(0.1..3.0);
    let mu_prime = mu.scaled(lambda);
    let c1 = lambda * grid.intervals().enumerate().map(|(i, d)| mu.at(i) / d.length()).fold(0.0, f64::max);
    let delta = rng.gen_range(0.05..1.0) * maximal_size(&mu, &TileSet::full(grid)).max(1e-3);
    for algorithm in [SliceAlgorithm::Garnett, SliceAlgorithm::HeavyLight] {
        let name = algorithm.name();
        let Some(r) = ok(log, name, extrapolate_check(&mu, &mu_prime, delta, c1, lambda * delta, algorithm)) else {
            continue;
        };
        log.max(&format!("{name}_constant"), r.constant);
        log.max(&format!("{name}_alpha_tops"), r.alpha_tops);
        log.max(&format!("{name}_alpha_exceptional"), r.alpha_exceptional);
        log.check(name, r.maximal_size <= r.bound * (1.0 + 1e-9) + 1e-12, || format!("{} > {}", r.maximal_size, r.bound));
    }
}

/// Raises the level until the level-set hypothesis holds, then checks the
/// bound `size* ≤ A / η`.
fn lambda(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 5);
    let s = gen::random_convex_set(rng, grid, 0.4, 0.8);
    let a = gen::weights(rng, grid);
    let eta = rng.gen_range(0.05..1.0);
    let mut level = rng.gen_range(0.05..1.0);
    for _ in 0..64 {
        match good_lambda(&s, &a, level, eta) {
            Ok(r) => {
                log.max("size_over_bound", if r.bound > 0.0 { r.maximal_size / r.bound } else { 0.0 });
                log.check("good_lambda", r.maximal_size <= r.bound * (1.0 + 1e-9) && r.complete_sup <= r.bound * (1.0 + 1e-9), || {
                    format!("{r:?}")
                });
                return;
            }
            Err(Error::HypothesisFail(_)) => level *= 2.0,
            Err(e) => {
                log.error("good_lambda", &e);
                return;
            }
        }
    }
    log.error("good_lambda", &"level-set hypothesis never held");
}

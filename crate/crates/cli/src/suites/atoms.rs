//! Atomic decomposition in `H^p`.

use dhap_core::decompose::{atomic_decompose, verify_atoms};
use dhap_core::function_space::{haar, reconstruct, wavelet_transform, CoefficientMap};
use dhap_core::{Complex64, GridConfig, Tile};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ok, Item};
use crate::config::RunConfig;
use crate::gen;
use crate::report::TrialLog;

pub const ATOM_EXPONENTS: [f64; 2] = [0.5, 1.0];

pub(super) const ITEMS: &[Item] = &[
    Item::trial("atoms", "decompose", decompose),
    Item::fixed("atoms", "single_haar", single_haar),
];

/// Mean-zero test function: dense, or a few Haar terms at random scales.
fn test_function(rng: &mut ChaCha8Rng, grid: GridConfig) -> dhap_core::function_space::DyadicFunction {
    if rng.gen_bool(0.5) {
        return gen::mean_zero_function(rng, grid);
    }
    let mut c = CoefficientMap::zeros(grid);
    for _ in 0..rng.gen_range(1..8) {
        let i = rng.gen_range(0..grid.interior_count());
        c.dense_mut()[i] = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
    }
    reconstruct(&c)
}

fn decompose(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let f = test_function(rng, grid);
    for p in ATOM_EXPONENTS {
        let Some(dec) = ok(log, "atomic_decompose", atomic_decompose(&f, p)) else { continue };
        let v = verify_atoms(&f, &dec);
        for key in ["ratio", "residual", "atoms"] {
            if let Some(&x) = dec.measured.get(key) {
                log.max(&format!("{key}_p{p}"), x);
            }
        }
        log.check(&format!("atoms_p{p}"), v.is_empty(), || v.join("; "));
        let finite = dec.measured.get("ratio").is_some_and(|r| r.is_finite());
        log.check(&format!("ratio_finite_p{p}"), finite, || format!("{:?}", dec.measured));
    }
}

/// A single Haar function is one atom.
fn single_haar(cfg: &RunConfig, _: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let p0 = grid.interval_at(grid.interior_count() / 2);
    let Some(h) = ok(log, "haar", haar(grid, &Tile::lacunary(p0))) else { return };
    for p in ATOM_EXPONENTS {
        let Some(dec) = ok(log, "atomic_decompose", atomic_decompose(&h, p)) else { continue };
        let v = verify_atoms(&h, &dec);
        let w = wavelet_transform(&dec.atoms.first().map(|a| a.a.clone()).unwrap_or(h.clone()));
        let support_ok = w.entries().all(|(d, c)| c.norm() < 1e-12 || d.is_subset_of(&p0));
        log.check(&format!("single_atom_p{p}"), dec.atoms.len() == 1 && v.is_empty() && support_ok, || {
            format!("{} atoms, {v:?}", dec.atoms.len())
        });
    }
}

//! Perfect dyadic operators: splitting, dense oracle, `T1` certificates.

use dhap_core::czop::{
    apply, apply_adjoint, diagonal, kernel_admissibility, operator_norm, power_norm, splitting_residual, t1_certificate,
    t_one, t_star_one, PerfectDyadicKernel, T1Mode, DENSE_NORM_MAX_M,
};
use dhap_core::function_space::{haar, DyadicFunction};
use dhap_core::{Complex64, GridConfig, Tile};
use rand_chacha::ChaCha8Rng;

use super::{close, grid_upto, ok, Item};
use crate::config::RunConfig;
use crate::gen;
use crate::report::TrialLog;

pub(super) const ITEMS: &[Item] = &[
    Item::trial("t1", "splitting", splitting),
    Item::trial("t1", "dense_oracle", dense_oracle),
    Item::trial("t1", "certificate", certificate),
    Item::fixed("t1", "zero_kernel", zero_kernel),
];

fn splitting(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let k = gen::kernel(rng, grid);
    let f = gen::function(rng, grid);
    let Some(r) = ok(log, "splitting", splitting_residual(&k, &f)) else { return };
    log.max("splitting_residual", r);
    log.check("splitting", r <= cfg.tol.rel, || format!("residual {r:e}"));
}

/// `K(x, y)` from the sibling constants of the smallest interval holding both
/// cells, found by scanning every interval.
fn brute_entry(k: &PerfectDyadicKernel, x: usize, y: usize) -> Complex64 {
    let grid = k.grid();
    if x == y {
        return Complex64::new(0.0, 0.0);
    }
    let cx = grid.interval_at(grid.leaf_index(x));
    let cy = grid.interval_at(grid.leaf_index(y));
    let holder = grid
        .intervals()
        .filter(|d| cx.is_subset_of(d) && cy.is_subset_of(d))
        .min_by(|a, b| a.length().total_cmp(&b.length()))
        .expect("the top holds every cell");
    let (left, _) = holder.children(&grid).expect("holds two cells");
    let (lr, rl) = k.get(&holder).expect("grid tile");
    if cx.is_subset_of(&left) {
        lr
    } else {
        rl
    }
}

fn dense_apply(m: &[Vec<Complex64>], f: &DyadicFunction, w: f64, transpose: bool) -> Vec<Complex64> {
    let n = m.len();
    (0..n)
        .map(|x| (0..n).map(|y| if transpose { m[y][x] } else { m[x][y] } * f.values()[y] * w).sum())
        .collect()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `apply`, `apply_adjoint`, `t_one`, `t_star_one` and `diagonal` against the
/// dense kernel matrix (`M ≤ 3`).
fn dense_oracle(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 3);
    let k = gen::kernel(rng, grid);
    let n = grid.cells();
    let w = grid.cell_width();
    let m: Vec<Vec<Complex64>> = (0..n).map(|x| (0..n).map(|y| brute_entry(&k, x, y)).collect()).collect();
    let entry_err = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| (k.entry(x, y) - m[x][y]).norm()).fold(0.0, f64::max);
    log.check("entry", entry_err == 0.0, || format!("max error {entry_err:e}"));
    let f = gen::function(rng, grid);
    let one = DyadicFunction::constant(grid, Complex64::new(1.0, 0.0));
    let cases: [(&str, DyadicFunction, Vec<Complex64>); 4] = [
        ("apply", apply(&k, &f).expect("same grid"), dense_apply(&m, &f, w, false)),
        ("apply_adjoint", apply_adjoint(&k, &f).expect("same grid"), dense_apply(&m, &f, w, true)),
        ("t_one", t_one(&k), dense_apply(&m, &one, w, false)),
        ("t_star_one", t_star_one(&k), dense_apply(&m, &one, w, true)),
    ];
    for (name, got, want) in cases {
        let err = max_diff(got.values(), &want) / max_abs(&want).max(1.0);
        log.max(&format!("{name}_error"), err);
        log.check(name, err <= 1e-12, || format!("relative error {err:e}"));
    }
    let diag = diagonal(&k);
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for (i, d) in grid.intervals().enumerate() {
        let want = if grid.is_finest_index(i) {
            Complex64::new(0.0, 0.0)
        } else {
            let phi = haar(grid, &Tile::lacunary(d)).expect("interior tile");
            let tphi = dense_apply(&m, &phi, w, false);
            tphi.iter().zip(phi.values()).map(|(a, b)| a * b).sum::<Complex64>() * w
        };
        worst = worst.max((diag.dense()[i] - want).norm());
        scale = scale.max(want.norm());
    }
    let err = worst / scale;
    log.max("diagonal_error", err);
    log.check("diagonal", err <= 1e-12, || format!("relative error {err:e}"));
    let frob = m.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt() * w;
    let norm = operator_norm(&k);
    let lower = apply(&k, &f).expect("same grid").l2_norm() / f.l2_norm();
    log.check("norm_between_bounds", lower <= norm * (1.0 + 1e-9) && norm <= frob * (1.0 + 1e-9), || {
        format!("{lower} ≤ {norm} ≤ {frob} fails")
    });
}

fn certificate(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let k = gen::kernel(rng, grid);
    let ck = kernel_admissibility(&k);
    log.check("admissibility_normalized", grid.m() == 1 || close(ck, 1.0, 1e-12), || format!("C = {ck}"));
    for mode in [T1Mode::Global, T1Mode::Local] {
        let r = t1_certificate(&k, mode);
        let norm = r.constant("operator_norm").unwrap_or(f64::NAN);
        for (name, v) in &r.constants {
            if name != "operator_norm" && name != "converse_constant" {
                log.max(&format!("{name}_over_norm"), if norm > 0.0 { v / norm } else { 0.0 });
            }
        }
        log.max("operator_norm", norm);
        let failed: Vec<&String> = r.verdicts.iter().filter(|(_, v)| !**v).map(|(k, _)| k).collect();
        let label = if mode == T1Mode::Global { "global_converse" } else { "local_converse" };
        log.check(label, failed.is_empty(), || format!("failed {failed:?} with ‖T‖ = {norm}"));
    }
    let f = gen::function(rng, grid);
    let norm = operator_norm(&k);
    let lower = apply(&k, &f).expect("same grid").l2_norm() / f.l2_norm();
    log.check("norm_lower_bound", lower <= norm * (1.0 + 1e-9), || format!("‖Tf‖/‖f‖ = {lower} > {norm}"));
    if grid.m() <= DENSE_NORM_MAX_M {
        let power = power_norm(&k, 200);
        log.min("power_over_dense", if norm > 0.0 { power / norm } else { 1.0 });
        log.check("power_le_dense", power <= norm * (1.0 + 1e-9), || format!("{power} > {norm}"));
    }
}

/// `K ≡ 0` gives zero operator, zero certificates and passing verdicts.
fn zero_kernel(cfg: &RunConfig, _: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid: GridConfig = grid_upto(cfg, 4);
    let k = PerfectDyadicKernel::zero(grid);
    for mode in [T1Mode::Global, T1Mode::Local] {
        let r = t1_certificate(&k, mode);
        let nonzero: Vec<_> =
            r.constants.iter().filter(|(name, v)| name.as_str() != "converse_constant" && **v != 0.0).collect();
        log.check("zero_certificates", nonzero.is_empty() && r.passed(), || format!("{nonzero:?}"));
    }
}

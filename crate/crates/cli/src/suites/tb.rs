//! Accretive systems, adapted Haar bases and `Tb` certificates.

use dhap_core::czop::{
    accretivity, adapted_dual, adapted_norm, adapted_transform, adapted_wavelet, commutator_residual,
    global_tb_certificate, local_tb_certificate, ortho_check, semmes_t1, split_lemma_check, subtree_prune,
    subtree_reconstruct, t1_certificate, trunc_check, AccretiveSystem, AccretivityFlavor, PerfectDyadicKernel, Side,
    T1Mode, TbMode,
};
use dhap_core::function_space::DyadicFunction;
use dhap_core::{Complex64, GridConfig, Tree};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{grid_upto, ok, Item};
use crate::config::RunConfig;
use crate::gen;
use crate::report::TrialLog;

/// Largest grid for the certificate items.
pub const TB_CERTIFICATE_MAX_M: u32 = 4;

/// Tile pairs sampled per trial for biorthogonality.
pub const BIORTHOGONAL_PAIRS: usize = 64;

pub(super) const ITEMS: &[Item] = &[
    Item::trial("tb", "semmes", semmes),
    Item::trial("tb", "commutator", commutator),
    Item::trial("tb", "adapted_basis", adapted_basis),
    Item::trial("tb", "ortho", ortho),
    Item::trial("tb", "split_trunc", split_trunc),
    Item::trial("tb", "f_form", f_form),
    Item::trial("tb", "local_tb", local_tb),
    Item::trial("tb", "constant_system", constant_system),
    Item::trial("tb", "global_tb", global_tb),
    Item::fixed("tb", "zero_kernel", zero_kernel),
];

fn interior(rng: &mut ChaCha8Rng, grid: GridConfig) -> dhap_core::DyadicInterval {
    grid.interval_at(rng.gen_range(0..grid.interior_count()))
}

/// Recovering `T(1)` from `T(b)` for accretive `b`.
fn semmes(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let k = gen::kernel(rng, grid);
    let b = gen::accretive_b(rng, grid);
    let Some(r) = ok(log, "semmes", semmes_t1(&k, &b, cfg.c_acc)) else { return };
    log.max("semmes_residual", r.residual);
    log.min("semmes_margin", r.margin);
    log.check("semmes", r.residual <= cfg.tol.rel, || format!("residual {:e}", r.residual));
}

/// `<T* F, b φ^b_Q> = <T*(φ^b_Q F), b>` for `F` with mean zero on both
/// children of `Q`.
fn commutator(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 5);
    let k = gen::kernel(rng, grid);
    let b = gen::accretive_b(rng, grid);
    for _ in 0..4 {
        let q = interior(rng, grid);
        let mut f = gen::function(rng, grid);
        let (l, r) = q.children(&grid).expect("interior tile");
        for child in [l, r] {
            let a = f.average(&child);
            for c in grid.cell_range(&child) {
                f.values_mut()[c] -= a;
            }
        }
        let Some(res) = ok(log, "commutator", commutator_residual(&k, &b, &q, &f)) else { return };
        log.max("commutator_residual", res);
        log.check("commutator", res <= cfg.tol.rel, || format!("residual {res:e} at {q}"));
    }
}

/// Biorthogonality on sampled tile pairs, the weighted mean-zero condition,
/// the norm formula, and the full expansion on small grids.
fn adapted_basis(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let b = gen::accretive_b(rng, grid);
    let tol = cfg.tol.rel;
    let (mut bio, mut mean, mut calc) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..BIORTHOGONAL_PAIRS {
        let pi = rng.gen_range(0..grid.interior_count());
        let qi = match rng.gen_range(0..4) {
            0 => pi,
            1 => {
                let mut q = pi;
                while q > 0 && rng.gen_bool(0.7) {
                    q = (q - 1) / 2;
                }
                q
            }
            2 => {
                let mut q = pi;
                while 2 * q + 2 < grid.interior_count() && rng.gen_bool(0.7) {
                    q = 2 * q + 1 + rng.gen_range(0..2);
                }
                q
            }
            _ => rng.gen_range(0..grid.interior_count()),
        };
        let (p, q) = (grid.interval_at(pi), grid.interval_at(qi));
        let (Some(psi), Some(phi)) = (ok(log, "adapted_dual", adapted_dual(&b, &p)), ok(log, "adapted_wavelet", adapted_wavelet(&b, &q)))
        else {
            return;
        };
        let g = psi.pair(&phi).expect("same grid");
        let e = if pi == qi { 1.0 } else { 0.0 };
        bio = bio.max((g - e).norm());
        let phi_p = if pi == qi { phi.clone() } else { adapted_wavelet(&b, &p).expect("checked above") };
        let scale = phi_p.l2_norm() * b.l2_norm_on(&p);
        mean = mean.max(cfg.tol.relative(b.pair(&phi_p).expect("same grid").norm(), scale));
        let direct = phi_p.mul(&b).expect("same grid").pair(&phi_p).expect("same grid");
        let Some(formula) = ok(log, "adapted_norm", adapted_norm(&b, &p)) else { return };
        calc = calc.max(cfg.tol.relative((direct - formula).norm(), formula.norm()));
    }
    for (name, v) in [("biorthogonality", bio), ("weighted_mean_zero", mean), ("norm_formula", calc)] {
        log.max(&format!("{name}_residual"), v);
        log.check(name, v <= tol, || format!("residual {v:e}"));
    }
    if grid.m() <= 4 {
        let f = gen::function(rng, grid);
        let t = Tree::complete(grid, grid.top()).expect("complete tree");
        let Some(w) = ok(log, "adapted_transform", adapted_transform(&b, &f, &t)) else { return };
        let mut g = b.scale(f.average(&grid.top()) / b.average(&grid.top()));
        for (i, p) in grid.intervals().enumerate().take(grid.interior_count()) {
            let psi = adapted_dual(&b, &p).expect("accretive b");
            g = g.add(&psi.scale(w.dense()[i])).expect("same grid");
        }
        let res = cfg.tol.relative(g.sub(&f).expect("same grid").sup_norm(), f.sup_norm());
        log.max("expansion_residual", res);
        log.check("expansion", res <= tol, || format!("residual {res:e}"));
    }
}

/// Orthogonality ratios on random convex trees.
fn ortho(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 5);
    let top = interior(rng, grid);
    let keep = rng.gen_range(0.5..1.0);
    let mut tiles = dhap_core::TileSet::new(grid);
    let mut stack = vec![grid.index(&top)];
    while let Some(i) = stack.pop() {
        tiles.insert_index(i);
        if !grid.is_finest_index(i) {
            stack.extend([2 * i + 1, 2 * i + 2].into_iter().filter(|_| rng.gen_bool(keep)));
        }
    }
    let t = Tree::new(top, tiles).expect("rooted subtree");
    let b = gen::accretive_b(rng, grid);
    let b_prime = gen::accretive_b(rng, grid);
    let f = gen::function(rng, grid);
    let Some(r) = ok(log, "ortho", ortho_check(&t, &b, &f, &b_prime)) else { return };
    log.max("ortho_ratio1_over_bound", r.ratio1 / r.bound1);
    log.max("ortho_ratio2_over_bound", r.ratio2 / r.bound2);
    log.check("ortho", r.holds(), || format!("{r:?}"));
}

/// The splitting lemma and the truncation bound on random tiles.
fn split_trunc(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 5);
    let k = gen::kernel(rng, grid);
    let sys = gen::accretive_system(rng, grid);
    let pi = rng.gen_range(0..grid.tile_count());
    let p = grid.interval_at(pi);
    let f = gen::function(rng, grid);
    let mut qi = pi;
    while !grid.is_finest_index(qi) && rng.gen_bool(0.6) {
        qi = 2 * qi + 1 + rng.gen_range(0..2);
    }
    let q = grid.interval_at(qi);
    for side in [Side::B1, Side::B2] {
        if let Some(r) = ok(log, "split_lemma", split_lemma_check(&sys, &p, &f, side)) {
            log.max("split_ratio_over_bound", r.ratio / r.bound);
            log.check("split_lemma", r.holds(), || format!("{r:?} at {p}"));
        }
        if let Some(r) = ok(log, "trunc", trunc_check(&k, &p, &q, &sys, side)) {
            log.max("trunc_ratio_over_bound", r.ratio / r.bound);
            log.check("trunc", r.holds(), || format!("{r:?} at {p}, {q}"));
        }
    }
}

/// Subtree pruning of a random tile and exact reconstruction of `f`.
fn f_form(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let k = gen::kernel(rng, grid);
    let sys = gen::accretive_system(rng, grid);
    let p = interior(rng, grid);
    let f = gen::function(rng, grid).restrict(&p);
    for side in [Side::B1, Side::B2] {
        let Some(dec) = ok(log, "subtree_prune", subtree_prune(&k, &p, side, &sys, &f)) else { continue };
        let v = dec.violations();
        log.check("subtree_properties", v.is_empty(), || v.join("; "));
        let Some(g) = ok(log, "reconstruct", subtree_reconstruct(&dec, &sys, &f)) else { continue };
        let res = cfg.tol.relative(g.sub(&f).expect("same grid").l2_norm(), f.l2_norm());
        log.max("f_form_residual", res);
        log.check("f_form", res <= cfg.tol.rel, || format!("residual {res:e} at {p}"));
    }
}

fn record(log: &mut TrialLog, prefix: &str, r: &dhap_core::czop::CertificateReport) {
    for (name, v) in &r.constants {
        log.max(&format!("{prefix}{name}"), *v);
    }
    let failed: Vec<&String> = r.verdicts.iter().filter(|(_, v)| !**v).map(|(k, _)| k).collect();
    log.check(&format!("{prefix}verdicts"), failed.is_empty(), || format!("failed {failed:?}"));
}

fn local_tb(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, TB_CERTIFICATE_MAX_M);
    let k = gen::kernel(rng, grid);
    let sys = gen::accretive_system(rng, grid);
    for (mode, prefix) in [(TbMode::TwoSided, "two_sided/"), (TbMode::OneSided, "one_sided/")] {
        let Some(r) = ok(log, prefix, local_tb_certificate(&k, &sys, mode)) else { continue };
        record(log, prefix, &r);
        if mode == TbMode::TwoSided {
            let ratio = r.constant("pointwise_ratio").unwrap_or(f64::NAN);
            log.check(&format!("{prefix}pointwise_bounded"), ratio.is_finite(), || format!("ratio {ratio}"));
        }
    }
}

/// The constant system reproduces the local `T1` certificate.
fn constant_system(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, TB_CERTIFICATE_MAX_M);
    let k = gen::kernel(rng, grid);
    let sys = AccretiveSystem::constant(grid);
    let t1 = t1_certificate(&k, T1Mode::Local);
    let norm = t1.constant("operator_norm");
    for mode in [TbMode::TwoSided, TbMode::OneSided] {
        let Some(r) = ok(log, "local_tb", local_tb_certificate(&k, &sys, mode)) else { continue };
        let same = ["operator_norm", "local_t1", "local_t1_star"].iter().all(|n| r.constant(n) == t1.constant(n));
        log.check("constants_match_t1", same, || format!("{:?} vs {:?}", r.constants, t1.constants));
        let verdicts_match = ["local_t1", "local_t1_star"].iter().all(|n| {
            let tb_verdict = match (r.constant(n), norm) {
                (Some(v), Some(nm)) => cfg.tol.le(v, nm, nm),
                _ => false,
            };
            t1.verdicts.get(&format!("{n}_le_norm")) == Some(&tb_verdict)
        });
        log.check("verdicts_match_t1", verdicts_match, || format!("{:?}", t1.verdicts));
        log.check("passed", r.passed(), || format!("{:?}", r.verdicts));
    }
}

/// Global construction from para-accretive `b1`, `b2`.
fn global_tb(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, TB_CERTIFICATE_MAX_M);
    let k = gen::kernel(rng, grid);
    let mut para = || {
        let b = gen::accretive_b(rng, grid);
        if rng.gen_bool(0.5) {
            // Flip the sign on one half so some averages vanish while
            // neighbouring averages stay large.
            let half = grid.interval_at(rng.gen_range(1..3usize.min(grid.tile_count())));
            let mut v = b.clone();
            for c in grid.cell_range(&half) {
                v.values_mut()[c] = -v.values()[c] * 0.5;
            }
            v
        } else {
            b
        }
    };
    let b1 = para();
    let b2 = para();
    let theta = 0.25;
    for (name, b) in [("b1", &b1), ("b2", &b2)] {
        let s = dhap_core::TileSet::from_indices(grid, 0..grid.interior_count());
        if let Ok(r) = accretivity(b, &s, AccretivityFlavor::Para, cfg.c_acc.min(0.25), theta) {
            log.min(&format!("para_margin_{name}"), r.margin);
        }
    }
    match global_tb_certificate(&k, &b1, &b2, theta, cfg.c_acc.min(0.25)) {
        Ok(g) => {
            record(log, "", &g.report);
            log.max("tiles_moved", g.report.constant("tiles_moved").unwrap_or(0.0));
        }
        Err(dhap_core::Error::ParaAccretivityFail(_)) => log.sum("not_para_accretive", 1.0),
        Err(e) => log.error("global_tb", &e),
    }
}

/// `K ≡ 0`: every operator quantity of the certificates vanishes.
fn zero_kernel(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, TB_CERTIFICATE_MAX_M);
    let k = PerfectDyadicKernel::zero(grid);
    let sys = gen::accretive_system(rng, grid);
    let keys = ["operator_norm", "local_t1", "local_t1_star", "tcarl_size", "tcarl_size_star"];
    for mode in [TbMode::TwoSided, TbMode::OneSided] {
        let Some(r) = ok(log, "local_tb", local_tb_certificate(&k, &sys, mode)) else { continue };
        let nonzero: Vec<_> = keys.iter().filter(|n| r.constant(n).is_some_and(|v| v != 0.0)).collect();
        log.check("zero_certificates", nonzero.is_empty() && r.passed(), || format!("nonzero {nonzero:?}"));
    }
    let b = gen::accretive_b(rng, grid);
    if let Some(r) = ok(log, "semmes", semmes_t1(&k, &b, cfg.c_acc)) {
        log.check("zero_semmes", r.residual == 0.0 && r.t_one.sup_norm() == 0.0, || format!("residual {}", r.residual));
    }
    let one = DyadicFunction::constant(grid, Complex64::new(1.0, 0.0));
    if let Some(g) = ok(log, "global_tb", global_tb_certificate(&k, &one, &one, 0.25, cfg.c_acc)) {
        let keys = ["mwbp", "kernel_constant", "local_operator_norm"];
        let nonzero: Vec<_> = keys.iter().filter(|n| g.report.constant(n).is_some_and(|v| v != 0.0)).collect();
        log.check("zero_global", nonzero.is_empty() && g.report.passed(), || format!("nonzero {nonzero:?}"));
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::adapted::{adapted_transform_on, adapted_wavelet, best_in_window, window_depth};
use super::certificate::{local_t1_constant, weak_boundedness, CertificateReport};
use super::kernel::{
    apply, apply_adjoint, apply_local, diagonal, kernel_admissibility, operator_norm, t_one, t_star_one,
    PerfectDyadicKernel,
};
use super::subtree::subtree_prune;
use super::system::{AccretiveSystem, Side};
use crate::dyadic::{child_indices, depth_of, subtree_indices, DyadicInterval, GridConfig, TileSet};
use crate::error::{Error, Result};
use crate::function_space::{bmo_norm, maximal_size, reconstruct, wavelet_transform, CoefficientMap, DyadicFunction, Weights};
use crate::paraproduct::pi_hh;
use crate::tol::Tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tops sampled per scale by the local `Tb` certificate above
/// [`TB_FULL_SAMPLE_MAX_M`].
pub const TB_TOPS_PER_LEVEL: usize = 4;
/// Largest grid on which every tile above the finest scale is a sampled top.
pub const TB_FULL_SAMPLE_MAX_M: u32 = 4;
/// Generations below a top `P` from which the second tops `P′` are drawn.
pub const TB_SECOND_TOP_DEPTH: u32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SemmesReport {
    /// Wavelet part of `T(1)` recovered from `T(b)`.
    pub t_one: DyadicFunction,
    /// `max_P |W T(1)(P) - W(estimate)(P)|` relative to `max |W T(1)|`.
    pub residual: f64,
    pub margin: f64,
}

/// Recovers `T(1)` from `T(b)`: `W T(1)(P) = W G(P) / [b]_P` with
/// `G = T b - W^{-1} <T φ_P, φ_P> W b - π_hh(T*(1), b)`.
pub fn semmes_t1(k: &PerfectDyadicKernel, b: &DyadicFunction, c_acc: f64) -> Result<SemmesReport> {
    let grid = k.grid();
    if b.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let avg = b.averages();
    let (at, margin) = avg.iter().enumerate().map(|(i, v)| (i, v.norm())).fold((0, f64::INFINITY), |a, x| if x.1 < a.1 { x } else { a });
    if !(margin >= c_acc) || margin == 0.0 {
        return Err(Error::AccretivityFail(format!("|[b]| = {margin} < {c_acc} on {}", grid.interval_at(at))));
    }
    let wb = wavelet_transform(b);
    let diag = diagonal(k);
    let mut d = CoefficientMap::zeros(grid);
    for ((slot, a), w) in d.dense_mut().iter_mut().zip(diag.dense()).zip(wb.dense()) {
        *slot = a * w;
    }
    let g = apply(k, b)?.sub(&reconstruct(&d))?.sub(&pi_hh(&t_star_one(k), b)?)?;
    let wg = wavelet_transform(&g);
    let mut est = CoefficientMap::zeros(grid);
    for (i, slot) in est.dense_mut().iter_mut().enumerate().take(grid.interior_count()) {
        *slot = wg.dense()[i] / avg[i];
    }
    let exact = wavelet_transform(&t_one(k));
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (a, e) in est.dense().iter().zip(exact.dense()) {
        diff = diff.max((a - e).norm());
        scale = scale.max(e.norm());
    }
    Ok(SemmesReport { t_one: reconstruct(&est), residual: Tol::default().relative(diff, scale), margin })
}

/// `|<T* F, b φ^b_Q> - <T*(φ^b_Q F), b>|` relative to the larger term, for
/// `F` with mean zero on both children of `Q`.
pub fn commutator_residual(k: &PerfectDyadicKernel, b: &DyadicFunction, q: &DyadicInterval, f: &DyadicFunction) -> Result<f64> {
    let grid = k.grid();
    if b.grid() != grid || f.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let (l, r) = q.children(&grid)?;
    let l1 = f.abs().integral().re.max(1.0);
    for child in [l, r] {
        if f.integral_over(&child).norm() > Tol::default().rel * l1 {
            return Err(Error::HypothesisFail(format!("F does not have mean zero on {child}")));
        }
    }
    let phi = adapted_wavelet(b, q)?;
    let lhs = apply_adjoint(k, f)?.pair(&b.mul(&phi)?)?;
    let rhs = apply_adjoint(k, &phi.mul(f)?)?.pair(b)?;
    Ok(Tol::default().relative((lhs - rhs).norm(), lhs.norm().max(rhs.norm())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TbMode {
    TwoSided,
    OneSided,
}

/// Deterministic sample of tops: every tile above the finest scale on small
/// grids, otherwise evenly spaced tiles on each scale.
fn sampled_tops(grid: GridConfig) -> Vec<usize> {
    let n = grid.interior_count();
    if grid.m() <= TB_FULL_SAMPLE_MAX_M {
        return (0..n).collect();
    }
    let mut out = Vec::new();
    for depth in 0..grid.max_depth() {
        let start = grid.level_start(depth);
        let count = 1usize << depth;
        let take = count.min(TB_TOPS_PER_LEVEL);
        for t in 0..take {
            let o = if take == 1 { 0 } else { t * (count - 1) / (take - 1) };
            out.push(start + o);
        }
    }
    out
}

/// Bounded test function on `I_P`: the Thue–Morse signs.
fn test_function(grid: GridConfig, idx: usize) -> DyadicFunction {
    let mut f = DyadicFunction::zeros(grid);
    let range = grid.cell_range_at(idx);
    let start = range.start;
    for c in range {
        let s = if (c - start).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        f.values_mut()[c] = Complex64::new(s, 0.0);
    }
    f
}

struct Acc<'a> {
    r: &'a mut CertificateReport,
}

impl Acc<'_> {
    fn max(&mut self, name: &str, v: f64) {
        let e = self.r.constants.entry(name.to_string()).or_insert(0.0);
        if v > *e || !v.is_finite() {
            *e = v;
        }
    }

    fn min(&mut self, name: &str, v: f64) {
        let e = self.r.constants.entry(name.to_string()).or_insert(f64::INFINITY);
        if v < *e || !v.is_finite() {
            *e = v;
        }
    }
}

/// Measures the ingredients of the local `Tb` argument: normalisation and
/// bounds of the system, subtree pruning on sampled tops, the Carleson
/// quantity of the adapted coefficients of `T* χ_{I_P}`, and the pointwise
/// bound on `T1 ∩ T2`, together with the operator norm.
pub fn local_tb_certificate(k: &PerfectDyadicKernel, sys: &AccretiveSystem, mode: TbMode) -> Result<CertificateReport> {
    let grid = sys.grid();
    if k.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let tol = Tol::default();
    let norm_err = sys.normalization_error();
    if !(norm_err <= tol.rel) {
        return Err(Error::SystemInvalid(format!("normalisation error {norm_err}")));
    }
    let mut report = CertificateReport::default();
    report.set("normalization_error", norm_err);
    let b1_bound = (0..grid.tile_count()).map(|i| sys.tile_bound(k, Side::B1, i)).fold(0.0, f64::max);
    match mode {
        TbMode::TwoSided => report.set("B_sys", sys.b_sys(k)),
        TbMode::OneSided => {
            report.set("B_sys_b1", b1_bound);
            report.set("bmo_Tstar1", bmo_norm(&t_star_one(k)));
            report.set("wbp", weak_boundedness(k));
        }
    }
    let norm = operator_norm(k);
    report.set("operator_norm", norm);
    report.set("local_t1", local_t1_constant(k));
    report.set("local_t1_star", local_t1_constant(&k.transpose()));

    let tops = sampled_tops(grid);
    report.set("tops_sampled", tops.len() as f64);
    let tb = apply_all(k, sys, Side::B1);
    let mut subtree_ok = true;
    let mut pairs = 0usize;
    let mut acc = Acc { r: &mut report };
    for &pi in &tops {
        let p = grid.interval_at(pi);
        let f = test_function(grid, pi);
        let dec = subtree_prune(k, &p, Side::B1, sys, &f)?;
        subtree_ok &= dec.violations().is_empty();
        record_subtree(&mut acc, "b1_", &dec.measured);
        let beta = sys.function_at(Side::B1, pi);
        let avg = beta.averages();
        let t_beta = &tb[pi];
        let v = apply_adjoint(k, &DyadicFunction::indicator(grid, &p)?)?;
        let lhs = adapted_transform_on(&beta, &beta.mul(&v)?, &dec.t1)?;

        // Carleson quantity of |<T* χ_{I_P}, ψ_Q>|^2 on T1.
        let mut w = Weights::zeros(grid);
        for q in dec.t1.indices() {
            let (l, r) = child_indices(q);
            let n = avg[l] * avg[r] / avg[q];
            w.set_at(q, (lhs.dense()[q] / n).norm_sqr());
        }
        let total: f64 = dec.t1.indices().map(|q| w.at(q)).sum();
        acc.max("tcarl_size", total / p.length());
        acc.max("tcarl_size_star", maximal_size(&w, &dec.t1));

        if mode == TbMode::OneSided {
            continue;
        }
        let t_beta_w = adapted_transform_on(&beta, t_beta, &dec.t1)?;
        for pj in subtree_indices(grid, pi).take_while(|&j| depth_of(j) <= depth_of(pi) + TB_SECOND_TOP_DEPTH) {
            if grid.is_finest_index(pj) {
                continue;
            }
            let p2 = grid.interval_at(pj);
            let dec2 = subtree_prune(k, &p2, Side::B2, sys, &test_function(grid, pj))?;
            subtree_ok &= dec2.violations().is_empty();
            record_subtree(&mut acc, "b2_", &dec2.measured);
            let both = TileSet::from_indices(grid, dec.t1.intersection(&dec2.t1).indices());
            if both.is_empty() {
                continue;
            }
            let b2 = sys.function_at(Side::B2, pj);
            let wb2 = wavelet_transform(&b2);
            let t_star_b2 = apply_adjoint(k, &b2)?;
            let c1 = adapted_transform_on(&beta, &beta.mul(&t_star_b2)?, &both)?;
            let c2 = adapted_transform_on(&beta, &b2.mul(t_beta)?, &both)?;
            for q in both.indices() {
                let l = lhs.dense()[q].norm();
                let rhs = wb2.dense()[q].norm() + c1.dense()[q].norm() + c2.dense()[q].norm() + t_beta_w.dense()[q].norm();
                let floor = tol.abs * (1.0 + norm);
                let ratio = if rhs > floor {
                    l / rhs
                } else if l <= floor * 1e3 {
                    0.0
                } else {
                    f64::INFINITY
                };
                acc.max("pointwise_ratio", ratio);
                pairs += 1;
            }
        }
    }
    report.set("pointwise_tiles", pairs as f64);
    report.verdict("normalization", norm_err <= tol.rel);
    report.verdict("subtree_properties", subtree_ok);
    report.verdict("operator_norm_recorded", norm.is_finite());
    let finite = report.constants.values().all(|v| v.is_finite());
    report.verdict("constants_finite", finite);
    Ok(report)
}

fn record_subtree(acc: &mut Acc<'_>, prefix: &str, m: &crate::decompose::Measured) {
    let g = |k: &str| m.get(k).copied().unwrap_or(0.0);
    acc.min(&format!("{prefix}eps_min"), g("eps"));
    acc.max(&format!("{prefix}packing_max"), g("packing"));
    acc.max(&format!("{prefix}buffer_packing_max"), g("buffer_uniform_packing"));
    acc.min(&format!("{prefix}pseudo_margin_min"), g("pseudo_margin"));
    if let Some(s) = m.get("strong_margin") {
        acc.min(&format!("{prefix}strong_margin_min"), *s);
    }
    acc.max(&format!("{prefix}mean_ratio_max"), g("mean_star") / g("mean_threshold"));
    acc.max(&format!("{prefix}buffer_coefficients_max"), g("buffer_coefficients"));
    acc.max(&format!("{prefix}residual_max"), g("residual"));
}

/// `op b_P` as global functions for every tile, where `op` is `T` on `b¹`.
fn apply_all(k: &PerfectDyadicKernel, sys: &AccretiveSystem, side: Side) -> Vec<DyadicFunction> {
    let grid = sys.grid();
    (0..grid.tile_count())
        .map(|i| {
            let mut f = DyadicFunction::zeros(grid);
            f.values_mut()[grid.cell_range_at(i)].copy_from_slice(&sys.op_local(k, side, i));
            f
        })
        .collect()
}

/// `sup_K sup |<T(b1 χ_I), b2 χ_J>| / |K|` over `I, J ⊆ K` with
/// `|I|, |J| ≥ θ |K|`.
pub fn modified_wbp(k: &PerfectDyadicKernel, b1: &DyadicFunction, b2: &DyadicFunction, theta: f64) -> Result<f64> {
    let grid = k.grid();
    if b1.grid() != grid || b2.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let depth = window_depth(theta)?;
    let w = grid.cell_width();
    let mut best = 0.0f64;
    for kk in 0..grid.tile_count() {
        let window: Vec<usize> = subtree_indices(grid, kk).take_while(|&j| depth_of(j) <= depth_of(kk) + depth).collect();
        let range = grid.cell_range_at(kk);
        let start = range.start;
        for &i in &window {
            let ri = grid.cell_range_at(i);
            let vals: Vec<Complex64> =
                range.clone().map(|c| if ri.contains(&c) { b1.values()[c] } else { ZERO }).collect();
            let t = apply_local(k, kk, &vals, false);
            for &j in &window {
                let pair: Complex64 = grid.cell_range_at(j).map(|c| t[c - start] * b2.values()[c]).sum::<Complex64>() * w;
                best = best.max(pair.norm() / grid.length_at(kk));
            }
        }
    }
    Ok(best)
}

/// `b_P = (|I_P| / |I_Q|) b χ_{I_Q} / [b]_Q`, with `Q = P` when
/// `|[b]_P| ≥ c_acc` and otherwise the tile of largest `|[b]_Q|` in the
/// `θ` window of `P`. Returns the cell values on `I_P` and the chosen `Q`.
fn build_family(b: &DyadicFunction, depth: u32, c_acc: f64) -> Result<(Vec<Vec<Complex64>>, Vec<usize>)> {
    let grid = b.grid();
    let avg = b.averages();
    let mut fam = Vec::with_capacity(grid.tile_count());
    let mut chosen = Vec::with_capacity(grid.tile_count());
    for i in 0..grid.tile_count() {
        let q = if avg[i].norm() >= c_acc { i } else { best_in_window(grid, &avg, i, depth).0 };
        if !(avg[q].norm() >= c_acc) || avg[q] == ZERO {
            return Err(Error::ParaAccretivityFail(format!("no tile below {} has |[b]| ≥ {c_acc}", grid.interval_at(i))));
        }
        let scale = grid.length_at(i) / grid.length_at(q) / avg[q];
        let qr = grid.cell_range_at(q);
        fam.push(grid.cell_range_at(i).map(|c| if qr.contains(&c) { b.values()[c] * scale } else { ZERO }).collect());
        chosen.push(q);
    }
    Ok((fam, chosen))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalTb {
    pub system: AccretiveSystem,
    /// Tile `Q` chosen for each `P`, per family, in heap order.
    pub chosen_b1: Vec<DyadicInterval>,
    pub chosen_b2: Vec<DyadicInterval>,
    pub report: CertificateReport,
}

/// Builds an accretive system from para-accretive `b1, b2`, checks the
/// normalisation and the `L^2` bounds of the construction against the `BMO`
/// and modified weak boundedness constants, and runs the local certificate.
pub fn global_tb_certificate(
    k: &PerfectDyadicKernel,
    b1: &DyadicFunction,
    b2: &DyadicFunction,
    theta: f64,
    c_acc: f64,
) -> Result<GlobalTb> {
    let grid = k.grid();
    if b1.grid() != grid || b2.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let tol = Tol::default();
    let depth = window_depth(theta)?;
    let full = TileSet::full(grid);
    let mut report = CertificateReport::default();
    for (name, b) in [("b1", b1), ("b2", b2)] {
        let r = super::adapted::accretivity(b, &full, super::adapted::AccretivityFlavor::Para, c_acc, theta)?;
        if !r.holds {
            return Err(Error::ParaAccretivityFail(format!(
                "{name} has para margin {} < {c_acc} at {:?}",
                r.margin, r.witness
            )));
        }
        report.set(&format!("para_margin_{name}"), r.margin);
        report.set(&format!("bmo_{name}"), bmo_norm(b));
    }
    let (fam1, q1) = build_family(b1, depth, c_acc)?;
    let (fam2, q2) = build_family(b2, depth, c_acc)?;
    let system = AccretiveSystem::new(grid, fam1, fam2)?;

    let mwbp = modified_wbp(k, b1, b2, theta)?;
    let ck = kernel_admissibility(k);
    report.set("mwbp", mwbp);
    report.set("theta", theta);
    report.set("c_acc", c_acc);
    report.set("kernel_constant", ck);
    let avg1 = b1.averages();
    let avg2 = b2.averages();
    let kt = k.transpose();
    let mut l2_ok = true;
    let mut t_ok = true;
    let mut moved = 0usize;
    for (side, chosen, own, other, own_avg, other_avg, op) in [
        (Side::B1, &q1, b1, b2, &avg1, &avg2, k),
        (Side::B2, &q2, b2, b1, &avg2, &avg1, &kt),
    ] {
        let name = side.name();
        let bmo_b = bmo_norm(own);
        let bmo_tb = bmo_norm(&apply(op, own)?);
        report.set(&format!("bmo_T_{name}"), bmo_tb);
        let mut worst_l2 = 0.0f64;
        let mut worst_t = 0.0f64;
        for (i, &q) in chosen.iter().enumerate() {
            if q != i {
                moved += 1;
            }
            let r = grid.length_at(i) / grid.length_at(q);
            let lq = grid.length_at(q);
            let bq = own_avg[q].norm();
            let b_loc = system.local(side, i);
            let mean_sq = b_loc.iter().map(|z| z.norm_sqr()).sum::<f64>() / b_loc.len() as f64;
            let l2_bound = r * (bmo_b * bmo_b / (bq * bq) + 1.0);
            l2_ok &= tol.le(mean_sq, l2_bound, l2_bound);
            worst_l2 = worst_l2.max(mean_sq / l2_bound);

            let (rr, _) = best_in_window(grid, other_avg, q, depth);
            let other_l2 = grid.cell_range_at(rr).map(|c| other.values()[c].norm_sqr()).sum::<f64>() * grid.cell_width();
            let lambda = lq.sqrt() / (grid.length_at(rr) * other_avg[rr].norm());
            let x = (lambda * mwbp * lq + bmo_tb * lq.sqrt() * (1.0 + lambda * other_l2.sqrt())) / lq.sqrt();
            let t_bound = r * (x * x / (bq * bq) + ck * ck / 2.0);
            let t_loc = system.op_local(k, side, i);
            let t_mean = t_loc.iter().map(|z| z.norm_sqr()).sum::<f64>() / t_loc.len() as f64;
            t_ok &= tol.le(t_mean, t_bound, t_bound);
            if t_bound > 0.0 {
                worst_t = worst_t.max(t_mean / t_bound);
            }
        }
        report.set(&format!("l2_bound_ratio_{name}"), worst_l2);
        report.set(&format!("t_bound_ratio_{name}"), worst_t);
    }
    report.set("tiles_moved", moved as f64);
    report.verdict("construction_l2_bound", l2_ok);
    report.verdict("construction_t_bound", t_ok);
    let local = local_tb_certificate(k, &system, TbMode::TwoSided)?;
    report.merge("local_", &local);
    let to = |v: &Vec<usize>| v.iter().map(|&q| grid.interval_at(q)).collect();
    Ok(GlobalTb { chosen_b1: to(&q1), chosen_b2: to(&q2), system, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::czop::certificate::{t1_certificate, T1Mode};
    use crate::czop::testutil::{random_accretive, random_function, random_kernel, random_system};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn semmes_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let grid = GridConfig::new(2).unwrap();
        let one = DyadicFunction::constant(grid, Complex64::new(1.0, 0.0));
        let k = random_kernel(&mut rng, grid, 1.0);
        assert!(semmes_t1(&k, &one, 0.5).unwrap().residual <= 1e-12);
        let zero = PerfectDyadicKernel::zero(grid);
        let b = random_accretive(&mut rng, grid, 0.5);
        let r = semmes_t1(&zero, &b, 0.5).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.t_one.sup_norm(), 0.0);
        let bad = DyadicFunction::from_real(grid, &[1.0; 16].iter().enumerate().map(|(i, v)| if i < 8 { *v } else { -v }).collect::<Vec<_>>()).unwrap();
        assert!(matches!(semmes_t1(&k, &bad, 0.5), Err(Error::AccretivityFail(_))));
    }

    #[test]
    fn semmes_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..50 {
            let grid = GridConfig::new(1 + trial % 5).unwrap();
            let k = random_kernel(&mut rng, grid, 1.0);
            let b = random_accretive(&mut rng, grid, 0.5);
            assert!(semmes_t1(&k, &b, 0.5).unwrap().residual <= 1e-9);
        }
    }

    #[test]
    fn commutator_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for m in 1..=4 {
            let grid = GridConfig::new(m).unwrap();
            let k = random_kernel(&mut rng, grid, 1.0);
            let b = random_accretive(&mut rng, grid, 0.5);
            for _ in 0..10 {
                let q = grid.interval_at(rng.gen_range(0..grid.interior_count()));
                let mut f = random_function(&mut rng, grid);
                let (l, r) = q.children(&grid).unwrap();
                for child in [l, r] {
                    let a = f.average(&child);
                    for c in grid.cell_range(&child) {
                        f.values_mut()[c] -= a;
                    }
                }
                assert!(commutator_residual(&k, &b, &q, &f).unwrap() <= 1e-9);
            }
            let q = grid.interval_at(0);
            let g = DyadicFunction::constant(grid, Complex64::new(1.0, 0.0));
            assert!(matches!(commutator_residual(&k, &b, &q, &g), Err(Error::HypothesisFail(_))));
        }
    }

    #[test]
    fn zero_kernel_local_tb() {
        let grid = GridConfig::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let sys = random_system(&mut rng, grid, 0.5);
        let r = local_tb_certificate(&PerfectDyadicKernel::zero(grid), &sys, TbMode::TwoSided).unwrap();
        for key in ["operator_norm", "local_t1", "local_t1_star", "tcarl_size", "tcarl_size_star"] {
            assert_eq!(r.constant(key), Some(0.0), "{key}");
        }
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn constant_system_matches_t1_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let grid = GridConfig::new(3).unwrap();
        let k = random_kernel(&mut rng, grid, 0.5);
        let sys = AccretiveSystem::constant(grid);
        let r = local_tb_certificate(&k, &sys, TbMode::TwoSided).unwrap();
        let t1 = t1_certificate(&k, T1Mode::Local);
        assert_eq!(r.constant("local_t1"), t1.constant("local_t1"));
        assert_eq!(r.constant("operator_norm"), t1.constant("operator_norm"));
        assert!(r.passed(), "{r:?}");
        let one = local_tb_certificate(&k, &sys, TbMode::OneSided).unwrap();
        assert!(one.passed());
        assert!(one.constant("bmo_Tstar1").is_some());
    }

    #[test]
    fn random_local_tb_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        for m in 1..=4 {
            let grid = GridConfig::new(m).unwrap();
            let k = random_kernel(&mut rng, grid, 1.0);
            let sys = random_system(&mut rng, grid, 0.2);
            let r = local_tb_certificate(&k, &sys, TbMode::TwoSided).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn global_tb_constant_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let grid = GridConfig::new(3).unwrap();
        let k = random_kernel(&mut rng, grid, 1.0);
        let one = DyadicFunction::constant(grid, Complex64::new(1.0, 0.0));
        let g = global_tb_certificate(&k, &one, &one, 0.25, 0.5).unwrap();
        assert_eq!(g.system, AccretiveSystem::constant(grid));
        assert_eq!(g.report.constant("tiles_moved"), Some(0.0));
        assert!(g.report.passed(), "{:?}", g.report);
    }

    #[test]
    fn global_tb_accretive_keeps_every_tile() {
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        for m in 1..=3 {
            let grid = GridConfig::new(m).unwrap();
            let k = random_kernel(&mut rng, grid, 1.0);
            let b1 = random_accretive(&mut rng, grid, 0.5);
            let b2 = random_accretive(&mut rng, grid, 0.5);
            let g = global_tb_certificate(&k, &b1, &b2, 0.5, 0.5).unwrap();
            assert_eq!(g.report.constant("tiles_moved"), Some(0.0));
            assert!(g.report.passed(), "{:?}", g.report);
        }
    }

    #[test]
    fn global_tb_selects_a_child() {
        let grid = GridConfig::new(2).unwrap();
        // Zero average on [0, 2] with a large average on [0, 1].
        let mut v = vec![1.0; 16];
        for (c, x) in v.iter_mut().enumerate().take(8) {
            *x = if c < 4 { 2.0 } else { -2.0 };
        }
        let b1 = DyadicFunction::from_real(grid, &v).unwrap();
        let one = DyadicFunction::constant(grid, Complex64::new(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(49);
        let k = random_kernel(&mut rng, grid, 1.0);
        let p = grid.interval(1, 0).unwrap();
        assert_eq!(b1.average(&p), Complex64::new(0.0, 0.0));
        let g = global_tb_certificate(&k, &b1, &one, 0.5, 0.5).unwrap();
        assert_eq!(g.chosen_b1[grid.index(&p)], grid.interval(0, 0).unwrap());
        assert!(g.system.normalization_error() <= 1e-12);
        assert!(g.report.passed(), "{:?}", g.report);
        assert!(matches!(
            global_tb_certificate(&k, &b1, &one, 1.0, 0.5),
            Err(Error::ParaAccretivityFail(_))
        ));
    }

    #[test]
    fn mwbp_matches_direct_pairings() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let grid = GridConfig::new(2).unwrap();
        let k = random_kernel(&mut rng, grid, 1.0);
        let b1 = random_function(&mut rng, grid);
        let b2 = random_function(&mut rng, grid);
        let mut best = 0.0f64;
        for kk in grid.intervals() {
            for i in grid.intervals().filter(|i| i.is_subset_of(&kk) && i.length() >= 0.5 * kk.length()) {
                let ti = apply(&k, &b1.restrict(&i)).unwrap();
                for j in grid.intervals().filter(|j| j.is_subset_of(&kk) && j.length() >= 0.5 * kk.length()) {
                    best = best.max(ti.pair(&b2.restrict(&j)).unwrap().norm() / kk.length());
                }
            }
        }
        assert!((modified_wbp(&k, &b1, &b2, 0.5).unwrap() - best).abs() < 1e-12);
    }
}

//! Wavelet multipliers, dyadic paraproducts and their norm reports.

use num_complex::Complex64;

use crate::dyadic::{GridConfig, TileSet};
use crate::error::{Error, Result};
use crate::function_space::{
    bmo_norm, hardy_littlewood, lp_norm, maximal_size, normalized_indicator_sum, reconstruct, wavelet_transform,
    weak_lp_norm, CoefficientMap, DyadicFunction, Weights,
};

/// Symbol `a_P` of a wavelet multiplier.
pub type MultiplierSymbol = CoefficientMap;

fn same_grid(f: &DyadicFunction, g: &DyadicFunction) -> Result<GridConfig> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(f.grid())
}

fn scaled_reconstruct(grid: GridConfig, w: &CoefficientMap, by: &[Complex64]) -> DyadicFunction {
    let mut c = CoefficientMap::zeros(grid);
    for (slot, (a, b)) in c.dense_mut().iter_mut().zip(w.dense().iter().zip(by)) {
        *slot = a * b;
    }
    reconstruct(&c)
}

/// `W^{-1} a_P W f = Σ a_P W f(P) φ_P`.
pub fn multiplier_apply(a: &MultiplierSymbol, f: &DyadicFunction) -> Result<DyadicFunction> {
    if a.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(scaled_reconstruct(f.grid(), &wavelet_transform(f), a.dense()))
}

/// `π_hl(f, g) = Σ W f(P) [g]_P φ_P`.
pub fn pi_hl(f: &DyadicFunction, g: &DyadicFunction) -> Result<DyadicFunction> {
    let grid = same_grid(f, g)?;
    Ok(scaled_reconstruct(grid, &wavelet_transform(f), &g.averages()))
}

/// `π_lh(f, g) = Σ [f]_P W g(P) φ_P`.
pub fn pi_lh(f: &DyadicFunction, g: &DyadicFunction) -> Result<DyadicFunction> {
    pi_hl(g, f)
}

/// `π_hh(f, g) = Σ W f(P) W g(P) χ_{I_P} / |I_P|`.
pub fn pi_hh(f: &DyadicFunction, g: &DyadicFunction) -> Result<DyadicFunction> {
    let grid = same_grid(f, g)?;
    let (wf, wg) = (wavelet_transform(f), wavelet_transform(g));
    let prod: Vec<Complex64> = wf.dense().iter().zip(wg.dense()).map(|(a, b)| a * b).collect();
    Ok(normalized_indicator_sum(grid, &prod))
}

/// `max |fg - π_hl - π_lh - π_hh|` relative to `max(‖f g‖_∞, 1)`, for
/// `f, g ∈ S_0`.
pub fn product_identity_residual(f: &DyadicFunction, g: &DyadicFunction, abs_tol: f64) -> Result<f64> {
    let grid = same_grid(f, g)?;
    for (name, h) in [("f", f), ("g", g)] {
        if !h.is_mean_zero_on(&grid.top(), abs_tol) {
            return Err(Error::NotMeanZero(format!("{name} over the whole domain")));
        }
    }
    let fg = f.mul(g)?;
    let sum = pi_hl(f, g)?.add(&pi_lh(f, g)?)?.add(&pi_hh(f, g)?)?;
    let diff = fg.sub(&sum)?.sup_norm();
    Ok(diff / fg.sup_norm().max(1.0))
}

/// The six pairings of the paraproduct symmetry and related identities.
#[derive(Debug, Clone, PartialEq)]
pub struct PermuteReport {
    /// `Σ W f(P) W g(P) [h]_P`.
    pub common: Complex64,
    pub pairings: [Complex64; 6],
    /// Largest pairing discrepancy relative to the scale.
    pub max_discrepancy: f64,
    /// `π_hh(W^{-1} a W f, g)` against `π_hh(f, W^{-1} a W g)` with `a_P = [h]_P`.
    pub hh_mult: f64,
    /// `π_hl(f, g)` and `π_lh(f, g)` against their multiplier forms.
    pub hllh_mult: f64,
    /// `∫ π_hh(f, g) h` against the sum over father-wavelet pairings.
    pub tril: f64,
    pub scale: f64,
}

impl PermuteReport {
    pub fn worst(&self) -> f64 {
        self.max_discrepancy.max(self.hh_mult).max(self.hllh_mult).max(self.tril)
    }
}

pub fn permute_check(f: &DyadicFunction, g: &DyadicFunction, h: &DyadicFunction) -> Result<PermuteReport> {
    let grid = same_grid(f, g)?;
    same_grid(f, h)?;
    let (wf, wg) = (wavelet_transform(f), wavelet_transform(g));
    let havg = h.averages();
    let common: Complex64 = (0..grid.tile_count()).map(|i| wf.dense()[i] * wg.dense()[i] * havg[i]).sum();
    let pairings = [
        pi_hh(f, g)?.pair(h)?,
        pi_hl(g, h)?.pair(f)?,
        pi_lh(h, f)?.pair(g)?,
        pi_hh(g, f)?.pair(h)?,
        pi_hl(f, h)?.pair(g)?,
        pi_lh(h, g)?.pair(f)?,
    ];
    let scale = (f.l2_norm() * g.l2_norm() * h.sup_norm()).max(1.0);
    let max_discrepancy = pairings.iter().map(|p| (p - common).norm()).fold(0.0, f64::max) / scale;

    let symbol = MultiplierSymbol::from_dense(grid, havg.clone())?;
    let left = pi_hh(&multiplier_apply(&symbol, f)?, g)?;
    let right = pi_hh(f, &multiplier_apply(&symbol, g)?)?;
    let hh_scale = (left.sup_norm().max(right.sup_norm())).max(1.0);
    let hh_mult = left.sub(&right)?.sup_norm() / hh_scale;

    let gsym = MultiplierSymbol::from_dense(grid, g.averages())?;
    let fsym = MultiplierSymbol::from_dense(grid, f.averages())?;
    let hl = pi_hl(f, g)?;
    let lh = pi_lh(f, g)?;
    let hl_diff = hl.sub(&multiplier_apply(&gsym, f)?)?.sup_norm() / hl.sup_norm().max(1.0);
    let lh_diff = lh.sub(&multiplier_apply(&fsym, g)?)?.sup_norm() / lh.sup_norm().max(1.0);

    // Father pairing <h, φ_{P0(I)}> = |I|^{-1/2} ∫_I h, computed from cells.
    let w = grid.cell_width();
    let tril_sum: Complex64 = grid
        .intervals()
        .enumerate()
        .filter(|(i, _)| !grid.is_finest_index(*i))
        .map(|(i, d)| {
            let father: Complex64 = h.values()[grid.cell_range(&d)].iter().sum::<Complex64>() * w / d.length().sqrt();
            wf.dense()[i] * wg.dense()[i] * father / d.length().sqrt()
        })
        .sum();
    let tril = (pairings[0] - tril_sum).norm() / scale;

    Ok(PermuteReport { common, pairings, max_discrepancy, hh_mult, hllh_mult: hl_diff.max(lh_diff), tril, scale })
}

/// Carleson embedding ratio `Σ_S a(P) |[f]_P|^p / (size*(a, S) ‖f‖_p^p)`.
///
/// The bound is meant for convex collections `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedReport {
    pub left: f64,
    pub right: f64,
    pub ratio: f64,
}

pub fn carleson_embed_report(s: &TileSet, a: &Weights, f: &DyadicFunction, p: f64) -> Result<EmbedReport> {
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::ExponentRange(format!("p = {p}")));
    }
    if s.grid() != a.grid() || s.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let avg = f.averages();
    let left: f64 = s.indices().map(|i| a.at(i) * avg[i].norm().powf(p)).sum();
    let right = maximal_size(a, s) * lp_norm(f, p)?.powf(p);
    Ok(EmbedReport { left, right, ratio: guarded_ratio(left, right) })
}

pub(crate) fn guarded_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Which paraproduct estimate to measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    /// `‖π_hl(f, g)‖_2 / (‖f‖_2 ‖g‖_∞)`.
    HlL2Linf,
    /// `‖π_lh(f, g)‖_2 / (‖f‖_2 ‖g‖_BMO)`.
    LhL2Bmo,
    /// `‖π_hh(f, g)‖_2 / (‖f‖_2 ‖g‖_BMO)`.
    HhL2Bmo,
    /// `‖π_hh(f, g)‖_BMO / (‖f‖_BMO ‖g‖_BMO)`.
    HhBmoBmo,
    /// `‖π(f, g)‖_{r,∞} / (‖f‖_p ‖g‖_q)` for all three paraproducts.
    WeakLpLq { p: f64, q: f64 },
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::HlL2Linf => "hl_L2Linf",
            BoundKind::LhL2Bmo => "lh_L2BMO",
            BoundKind::HhL2Bmo => "hh_L2BMO",
            BoundKind::HhBmoBmo => "hh_BMOBMO",
            BoundKind::WeakLpLq { .. } => "weak_LpLq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub ratio: f64,
    /// For the weak mode: the restricted-type pairing ratio on `E'` and the
    /// constant `C` reached by doubling.
    pub witness_ratio: Option<f64>,
    pub witness_c: Option<f64>,
}

/// Measures one paraproduct estimate. The weak mode needs a set `E` of cells
/// and uses `E' = E \ {M|f|^p + M|g|^q ≥ C}` with `C` doubled until
/// `|E'| ≥ |E|/2`.
pub fn paraproduct_bound_report(
    kind: BoundKind,
    f: &DyadicFunction,
    g: &DyadicFunction,
    e: Option<&[bool]>,
) -> Result<BoundReport> {
    same_grid(f, g)?;
    let plain = |ratio| Ok(BoundReport { ratio, witness_ratio: None, witness_c: None });
    match kind {
        BoundKind::HlL2Linf => plain(guarded_ratio(pi_hl(f, g)?.l2_norm(), f.l2_norm() * g.sup_norm())),
        BoundKind::LhL2Bmo => plain(guarded_ratio(pi_lh(f, g)?.l2_norm(), f.l2_norm() * bmo_norm(g))),
        BoundKind::HhL2Bmo => plain(guarded_ratio(pi_hh(f, g)?.l2_norm(), f.l2_norm() * bmo_norm(g))),
        BoundKind::HhBmoBmo => plain(guarded_ratio(bmo_norm(&pi_hh(f, g)?), bmo_norm(f) * bmo_norm(g))),
        BoundKind::WeakLpLq { p, q } => weak_report(f, g, p, q, e),
    }
}

fn weak_report(f: &DyadicFunction, g: &DyadicFunction, p: f64, q: f64, e: Option<&[bool]>) -> Result<BoundReport> {
    if !(p > 1.0 && p.is_finite() && q > 1.0 && q.is_finite()) {
        return Err(Error::ExponentRange(format!("p = {p}, q = {q}")));
    }
    let grid = f.grid();
    let r = 1.0 / (1.0 / p + 1.0 / q);
    let (fp, gq) = (lp_norm(f, p)?, lp_norm(g, q)?);
    let denom = fp * gq;
    let products = [pi_hl(f, g)?, pi_lh(f, g)?, pi_hh(f, g)?];
    let mut ratio = 0.0f64;
    for h in &products {
        ratio = ratio.max(guarded_ratio(weak_lp_norm(h, r)?, denom));
    }
    let Some(e) = e else {
        return Ok(BoundReport { ratio, witness_ratio: None, witness_c: None });
    };
    if e.len() != grid.cells() {
        return Err(Error::Parse(format!("expected {} cells in E, got {}", grid.cells(), e.len())));
    }
    let w = grid.cell_width();
    let measure_e = e.iter().filter(|&&b| b).count() as f64 * w;
    if measure_e == 0.0 || denom == 0.0 {
        return Ok(BoundReport { ratio, witness_ratio: Some(0.0), witness_c: Some(1.0) });
    }
    // Normalise so that ‖f‖_p = ‖g‖_q = 1 and scale E to unit measure.
    let fn_ = f.scale(Complex64::new(1.0 / fp, 0.0));
    let gn = g.scale(Complex64::new(1.0 / gq, 0.0));
    let mf = hardy_littlewood(&fn_.map(|v| Complex64::new(v.norm().powf(p), 0.0)));
    let mg = hardy_littlewood(&gn.map(|v| Complex64::new(v.norm().powf(q), 0.0)));
    let level = |c: usize| (mf.values()[c].re + mg.values()[c].re) * measure_e;
    let mut big_c = 1.0f64;
    for _ in 0..=60 {
        let subset: Vec<bool> = (0..grid.cells()).map(|c| e[c] && level(c) < big_c).collect();
        let measure = subset.iter().filter(|&&b| b).count() as f64 * w;
        if measure >= measure_e / 2.0 {
            let mut worst = 0.0f64;
            for h in [pi_hl(&fn_, &gn)?, pi_lh(&fn_, &gn)?, pi_hh(&fn_, &gn)?] {
                let pairing: Complex64 =
                    h.values().iter().zip(&subset).filter(|(_, &b)| b).map(|(v, _)| *v).sum::<Complex64>() * w;
                worst = worst.max(pairing.norm() / measure_e.powf(1.0 - 1.0 / r));
            }
            return Ok(BoundReport { ratio, witness_ratio: Some(worst), witness_c: Some(big_c) });
        }
        big_c *= 2.0;
    }
    Err(Error::HypothesisFail("no admissible C within 60 doublings".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DyadicInterval, Tile};
    use crate::function_space::haar;

    fn grid(m: u32) -> GridConfig {
        GridConfig::new(m).unwrap()
    }

    #[test]
    fn haar_pairs_split_into_one_paraproduct() {
        let g = grid(2);
        let big = haar(g, &Tile::lacunary(DyadicInterval { k: 1, j: 0 })).unwrap();
        let small = haar(g, &Tile::lacunary(DyadicInterval { k: 0, j: 1 })).unwrap();
        let tol = 1e-12;
        for (f, h) in [(&big, &small), (&small, &big), (&big, &big)] {
            assert!(product_identity_residual(f, h, tol).unwrap() < 1e-14);
            let norms = [pi_hl(f, h).unwrap().sup_norm(), pi_lh(f, h).unwrap().sup_norm(), pi_hh(f, h).unwrap().sup_norm()];
            assert_eq!(norms.iter().filter(|&&n| n > 0.0).count(), 1);
        }
        // P >' Q: the larger wavelet is constant on the smaller interval.
        assert!(pi_hl(&small, &big).unwrap().sup_norm() > 0.0);
    }

    #[test]
    fn pi_hh_of_haar_square_example() {
        let g = grid(1);
        let phi = haar(g, &Tile::lacunary(g.top())).unwrap();
        let hh = pi_hh(&phi, &phi).unwrap();
        for v in hh.values() {
            assert!((v.re - 0.5).abs() < 1e-15);
        }
        let r = paraproduct_bound_report(BoundKind::HhBmoBmo, &phi, &phi, None).unwrap();
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn permute_on_haar() {
        let g = grid(1);
        let phi = haar(g, &Tile::lacunary(DyadicInterval { k: 0, j: 0 })).unwrap();
        let rep = permute_check(&phi, &phi, &phi).unwrap();
        assert!(rep.common.norm() < 1e-15);
        assert!(rep.worst() < 1e-14);
    }

    #[test]
    fn not_mean_zero_rejected() {
        let g = grid(1);
        let one = DyadicFunction::constant(g, Complex64::new(1.0, 0.0));
        assert!(matches!(product_identity_residual(&one, &one, 1e-12), Err(Error::NotMeanZero(_))));
    }

    #[test]
    fn weak_mode_exponents() {
        let g = grid(1);
        let one = DyadicFunction::constant(g, Complex64::new(1.0, 0.0));
        let kind = BoundKind::WeakLpLq { p: 1.0, q: 2.0 };
        assert!(matches!(paraproduct_bound_report(kind, &one, &one, None), Err(Error::ExponentRange(_))));
    }

    #[test]
    fn zero_weights_embed() {
        let g = grid(2);
        let f = DyadicFunction::constant(g, Complex64::new(1.0, 0.0));
        let rep = carleson_embed_report(&TileSet::full(g), &Weights::zeros(g), &f, 2.0).unwrap();
        assert_eq!(rep.ratio, 0.0);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::testutil::{mean_zero, random_complex, random_convex_set, random_weights};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn product_and_permutation_identities(m in 1u32..=5, seed: u64) {
            let grid = GridConfig::new(m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = mean_zero(&random_complex(&mut rng, grid));
            let g = mean_zero(&random_complex(&mut rng, grid));
            let h = random_complex(&mut rng, grid);
            prop_assert!(product_identity_residual(&f, &g, 1e-9).unwrap() <= 1e-9);
            let r = permute_check(&f, &g, &h).unwrap();
            prop_assert!(r.worst() <= 1e-9, "{:?}", r);
        }

        #[test]
        fn dyadic_embedding_constant(m in 1u32..=4, seed: u64) {
            let grid = GridConfig::new(m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let keep = rng.gen_range(0.3..1.0);
            let s = random_convex_set(&mut rng, grid, 0.3, keep);
            let a = random_weights(&mut rng, grid, 0.3);
            let f = random_complex(&mut rng, grid);
            let r = carleson_embed_report(&s, &a, &f, 2.0).unwrap();
            prop_assert!(r.ratio <= 4.0 * (1.0 + 1e-9), "{:?}", r);
        }
    }
}

use super::function::DyadicFunction;
use crate::error::{Error, Result};

/// `‖f‖_p` for `0 < p ≤ ∞` (a quasi-norm when `p < 1`).
pub fn lp_norm(f: &DyadicFunction, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::ExponentRange(format!("p = {p}")));
    }
    if p.is_infinite() {
        return Ok(f.sup_norm());
    }
    let w = f.grid().cell_width();
    Ok((f.values().iter().map(|v| v.norm().powf(p)).sum::<f64>() * w).powf(1.0 / p))
}

/// `‖f‖_{p,∞} = sup_λ λ |{|f| ≥ λ}|^{1/p}`; the supremum is attained at one
/// of the values of `|f|`.
pub fn weak_lp_norm(f: &DyadicFunction, p: f64) -> Result<f64> {
    if !(p > 0.0) || p.is_infinite() {
        return Err(Error::ExponentRange(format!("p = {p}")));
    }
    let w = f.grid().cell_width();
    let mut mags: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut best = 0.0f64;
    let mut i = 0;
    while i < mags.len() {
        let v = mags[i];
        while i < mags.len() && mags[i] == v {
            i += 1;
        }
        if v > 0.0 {
            best = best.max(v * (i as f64 * w).powf(1.0 / p));
        }
    }
    Ok(best)
}

/// Outcome of the restricted-weak-type witness construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakWitness {
    /// Cells of `E' ⊆ E`.
    pub subset: Vec<bool>,
    pub c: f64,
    pub measure: f64,
    pub pairing: f64,
    pub bound: f64,
}

impl WeakWitness {
    pub fn ratio(&self) -> f64 {
        if self.bound > 0.0 { self.pairing / self.bound } else { 0.0 }
    }
}

/// Builds `E' = E \ {|f| ≥ C A |E|^{-1/p}}`, doubling `C` from one until
/// `|E'| ≥ |E|/2`, and reports `|<f, χ_{E'}>|` against `A |E|^{1/p'}`.
pub fn weak_lp_witness(f: &DyadicFunction, e: &[bool], p: f64, a: f64) -> Result<WeakWitness> {
    let grid = f.grid();
    if e.len() != grid.cells() {
        return Err(Error::Parse(format!("expected {} cells in E, got {}", grid.cells(), e.len())));
    }
    let w = grid.cell_width();
    let measure_e = e.iter().filter(|&&b| b).count() as f64 * w;
    if measure_e == 0.0 {
        return Err(Error::HypothesisFail("E is empty".into()));
    }
    let weak = weak_lp_norm(f, p)?;
    if weak > a * (1.0 + 1e-12) {
        return Err(Error::HypothesisFail(format!("‖f‖_{{p,∞}} = {weak} exceeds A = {a}")));
    }
    let mut c = 1.0f64;
    for _ in 0..=60 {
        let lambda = c * a * measure_e.powf(-1.0 / p);
        let subset: Vec<bool> = e.iter().zip(f.values()).map(|(&in_e, v)| in_e && v.norm() < lambda).collect();
        let measure = subset.iter().filter(|&&b| b).count() as f64 * w;
        if measure >= measure_e / 2.0 {
            let pairing = f.values().iter().zip(&subset).filter(|(_, &b)| b).map(|(v, _)| *v).sum::<num_complex::Complex64>().norm() * w;
            let bound = a * measure_e.powf(1.0 - 1.0 / p);
            return Ok(WeakWitness { subset, c, measure, pairing, bound });
        }
        c *= 2.0;
    }
    Err(Error::HypothesisFail("no admissible C within 60 doublings".into()))
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::dyadic::GridConfig;
    use crate::testutil::random_complex;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `sup_λ λ |{|f| ≥ λ}|^{1/p}` scanned over every value of `|f|` and the
    /// midpoints between them.
    fn threshold_scan(f: &DyadicFunction, p: f64) -> f64 {
        let w = f.grid().cell_width();
        let mags: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
        let mut levels = mags.clone();
        levels.sort_by(f64::total_cmp);
        let mids: Vec<f64> = levels.windows(2).map(|x| (x[0] + x[1]) / 2.0).collect();
        levels.extend(mids);
        levels
            .into_iter()
            .filter(|&l| l > 0.0)
            .map(|l| l * (mags.iter().filter(|&&v| v >= l).count() as f64 * w).powf(1.0 / p))
            .fold(0.0, f64::max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn weak_norm_matches_threshold_scan(m in 1u32..=3, seed: u64, p in 0.25f64..4.0, ties: bool) {
            let grid = GridConfig::new(m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut f = random_complex(&mut rng, grid);
            if ties {
                f = f.map(|v| Complex64::new((v.re * 3.0).round(), 0.0));
            }
            let scan = threshold_scan(&f, p);
            prop_assert!((weak_lp_norm(&f, p).unwrap() - scan).abs() <= 1e-12 * scan.max(1.0));
            prop_assert!(weak_lp_norm(&f, p).unwrap() <= lp_norm(&f, p).unwrap() * (1.0 + 1e-12));
            let q = rng.gen_range(0.5..3.0);
            let r = lp_norm(&f, q).unwrap();
            prop_assert!(r.is_finite() && r >= 0.0);
        }
    }
}

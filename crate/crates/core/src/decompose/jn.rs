use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::function_space::{bmo_norm, lp_norm, DyadicFunction};
use crate::tol::Tol;

/// Exponents at which the `L^p` ratios are reported.
pub const JN_EXPONENTS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

#[derive(Debug, Clone, PartialEq)]
pub struct JnLevel {
    pub n: u32,
    /// `2 n ‖f‖_BMO`.
    pub threshold: f64,
    /// `|{x ∈ I : f(x) > threshold}|`.
    pub measure: f64,
    /// `2^{1-n} |I|`.
    pub bound: f64,
}

impl JnLevel {
    pub fn holds(&self) -> bool {
        self.measure <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JnReport {
    pub interval: DyadicInterval,
    pub bmo: f64,
    pub levels: Vec<JnLevel>,
    /// `(p, ‖f‖_p / ((1 + p) |I|^{1/p} ‖f‖_BMO))`.
    pub lp_ratios: Vec<(f64, f64)>,
}

impl JnReport {
    pub fn holds(&self) -> bool {
        self.levels.iter().all(JnLevel::holds)
    }
}

/// Distribution of a real mean-zero function supported in `I` against the
/// exponential decay `2^{1-n} |I|` at the levels `2 n ‖f‖_BMO`.
pub fn john_nirenberg_check(f: &DyadicFunction, interval: &DyadicInterval) -> Result<JnReport> {
    let grid = f.grid();
    grid.check(interval)?;
    if !f.is_real() {
        return Err(Error::NotReal);
    }
    let range = grid.cell_range(interval);
    if f.values().iter().enumerate().any(|(c, v)| !range.contains(&c) && v.norm() != 0.0) {
        return Err(Error::SupportViolation(format!("f is not supported in {interval}")));
    }
    if !f.is_mean_zero_on(interval, Tol::default().rel) {
        return Err(Error::NotMeanZero(format!("∫ f = {} on {interval}", f.integral().re)));
    }
    let bmo = bmo_norm(f);
    let w = grid.cell_width();
    let vals: Vec<f64> = f.values()[range].iter().map(|v| v.re).collect();
    let mut levels = Vec::new();
    for n in 1u32.. {
        let threshold = 2.0 * n as f64 * bmo;
        let measure = vals.iter().filter(|&&v| v > threshold).count() as f64 * w;
        levels.push(JnLevel { n, threshold, measure, bound: (1.0 - n as f64).exp2() * interval.length() });
        if measure == 0.0 || n >= 1024 {
            break;
        }
    }
    let lp_ratios = JN_EXPONENTS
        .iter()
        .map(|&p| {
            let norm = lp_norm(f, p)?;
            let denom = (1.0 + p) * interval.length().powf(1.0 / p) * bmo;
            Ok((p, if denom > 0.0 { norm / denom } else { 0.0 }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JnReport { interval: *interval, bmo, levels, lp_ratios })
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::dyadic::GridConfig;
    use crate::testutil::random_real;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn distribution_decays(m in 1u32..=5, seed: u64, spiky: bool) {
            let grid = GridConfig::new(m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let i = grid.interval_at(rng.gen_range(0..grid.interior_count()));
            let mut f = random_real(&mut rng, grid);
            if spiky {
                f = f.map(|v| Complex64::new(v.re.powi(9) * 50.0, 0.0));
            }
            let f = f.restrict(&i);
            let avg = f.average(&i);
            let mut g = f.clone();
            for c in grid.cell_range(&i) {
                g.values_mut()[c] -= avg;
            }
            let r = john_nirenberg_check(&g, &i).unwrap();
            prop_assert!(r.holds(), "{:?}", r.levels);
        }
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{apply_local, kernel_admissibility, PerfectDyadicKernel};
use crate::dyadic::{parent_index, DyadicInterval, GridConfig};
use crate::error::{Error, Result};
use crate::function_space::DyadicFunction;
use crate::tol::Tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `b¹_P` paired with `T`.
    B1,
    /// `b²_P` paired with `T*`.
    B2,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::B1 => Side::B2,
            Side::B2 => Side::B1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::B1 => "b1",
            Side::B2 => "b2",
        }
    }

    /// Whether the side is paired with the transpose.
    pub(crate) fn transpose(self) -> bool {
        self == Side::B2
    }
}

/// Two families `b¹_P, b²_P ∈ S(I_P)` indexed by every tile, stored by their
/// values on the cells of `I_P`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccretiveSystem {
    grid: GridConfig,
    b1: Vec<Vec<Complex64>>,
    b2: Vec<Vec<Complex64>>,
}

impl AccretiveSystem {
    /// Builds a system from per-tile cell values, in heap order. Lengths must
    /// match the cell counts of the tiles; the normalisation `[b_P]_P = 1`
    /// is checked to the relative tolerance.
    pub fn new(grid: GridConfig, b1: Vec<Vec<Complex64>>, b2: Vec<Vec<Complex64>>) -> Result<Self> {
        for fam in [&b1, &b2] {
            if fam.len() != grid.tile_count() {
                return Err(Error::SystemInvalid(format!("expected {} tiles, got {}", grid.tile_count(), fam.len())));
            }
            for (i, v) in fam.iter().enumerate() {
                if v.len() != grid.cells_in(i) {
                    return Err(Error::SystemInvalid(format!("wrong cell count on {}", grid.interval_at(i))));
                }
                if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::SystemInvalid(format!("non-finite value on {}", grid.interval_at(i))));
                }
            }
        }
        let sys = AccretiveSystem { grid, b1, b2 };
        let err = sys.normalization_error();
        if !(err <= Tol::default().rel) {
            return Err(Error::SystemInvalid(format!("normalisation error {err}")));
        }
        Ok(sys)
    }

    /// Builds a system from global functions supported on the tiles.
    pub fn from_functions(grid: GridConfig, b1: &[DyadicFunction], b2: &[DyadicFunction]) -> Result<Self> {
        let local = |fam: &[DyadicFunction]| -> Result<Vec<Vec<Complex64>>> {
            if fam.len() != grid.tile_count() {
                return Err(Error::SystemInvalid(format!("expected {} tiles, got {}", grid.tile_count(), fam.len())));
            }
            fam.iter()
                .enumerate()
                .map(|(i, f)| {
                    if f.grid() != grid {
                        return Err(Error::GridMismatch);
                    }
                    let range = grid.cell_range_at(i);
                    let outside = f.values().iter().enumerate().any(|(c, v)| !range.contains(&c) && v.norm() != 0.0);
                    if outside {
                        return Err(Error::SystemInvalid(format!("b_P not supported in {}", grid.interval_at(i))));
                    }
                    Ok(f.values()[range].to_vec())
                })
                .collect()
        };
        AccretiveSystem::new(grid, local(b1)?, local(b2)?)
    }

    /// `b¹_P = b²_P = χ_{I_P}`.
    pub fn constant(grid: GridConfig) -> Self {
        let fam: Vec<Vec<Complex64>> =
            (0..grid.tile_count()).map(|i| vec![Complex64::new(1.0, 0.0); grid.cells_in(i)]).collect();
        AccretiveSystem { grid, b1: fam.clone(), b2: fam }
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    /// Cell values of `b^side_P` on `I_P`.
    pub fn local(&self, side: Side, idx: usize) -> &[Complex64] {
        match side {
            Side::B1 => &self.b1[idx],
            Side::B2 => &self.b2[idx],
        }
    }

    /// `b^side_P` as a function on the whole grid.
    pub fn function(&self, side: Side, p: &DyadicInterval) -> Result<DyadicFunction> {
        self.grid.check(p)?;
        Ok(self.function_at(side, self.grid.index(p)))
    }

    pub(crate) fn function_at(&self, side: Side, idx: usize) -> DyadicFunction {
        let mut f = DyadicFunction::zeros(self.grid);
        f.values_mut()[self.grid.cell_range_at(idx)].copy_from_slice(self.local(side, idx));
        f
    }

    /// `max_P |[b^i_P]_P - 1|` over both families.
    pub fn normalization_error(&self) -> f64 {
        let avg = |v: &[Complex64]| v.iter().sum::<Complex64>() / v.len() as f64;
        self.b1.iter().chain(&self.b2).map(|v| (avg(v) - 1.0).norm()).fold(0.0, f64::max)
    }

    /// `op b^side_P` on `I_P`, where `op` is `T` for `b¹` and `T*` for `b²`.
    pub(crate) fn op_local(&self, k: &PerfectDyadicKernel, side: Side, idx: usize) -> Vec<Complex64> {
        apply_local(k, idx, self.local(side, idx), side.transpose())
    }

    /// `(1/|I_P|) ∫_{I_P} (|b_P|^2 + |op b_P|^2)` for one side.
    pub fn tile_bound(&self, k: &PerfectDyadicKernel, side: Side, idx: usize) -> f64 {
        let op = self.op_local(k, side, idx);
        let b = self.local(side, idx);
        b.iter().chain(&op).map(|z| z.norm_sqr()).sum::<f64>() / b.len() as f64
    }

    /// `B_sys = sup_P (1/|I_P|) ∫_{I_P} (|b¹|^2 + |T b¹|^2 + |b²|^2 + |T* b²|^2)`.
    pub fn b_sys(&self, k: &PerfectDyadicKernel) -> f64 {
        (0..self.grid.tile_count())
            .map(|i| self.tile_bound(k, Side::B1, i) + self.tile_bound(k, Side::B2, i))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitReport {
    /// `‖f‖ / (‖f - [f]_P‖ + |I_P|^{-1/2} |<f, b_P>|)` on `I_P`; zero for `f = 0`.
    pub ratio: f64,
    /// `1 + ((1/|I_P|) ∫ |b_P|^2)^{1/2}`.
    pub bound: f64,
}

impl SplitReport {
    pub fn holds(&self) -> bool {
        Tol::default().le(self.ratio, self.bound, self.bound)
    }
}

/// Controls `f ∈ S(I_P)` by its oscillation and its pairing with `b_P`. Only
/// the values of `f` on `I_P` are used.
pub fn split_lemma_check(sys: &AccretiveSystem, p: &DyadicInterval, f: &DyadicFunction, side: Side) -> Result<SplitReport> {
    let grid = sys.grid;
    if f.grid() != grid {
        return Err(Error::GridMismatch);
    }
    grid.check(p)?;
    let idx = grid.index(p);
    let range = grid.cell_range_at(idx);
    let vals = &f.values()[range];
    let b = sys.local(side, idx);
    let w = grid.cell_width();
    let len = p.length();
    let mean = vals.iter().sum::<Complex64>() / vals.len() as f64;
    let norm = (vals.iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt();
    let osc = (vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() * w).sqrt();
    let pairing = vals.iter().zip(b).map(|(x, y)| x * y).sum::<Complex64>() * w;
    let den = osc + pairing.norm() / len.sqrt();
    let b_mean = b.iter().map(|v| v.norm_sqr()).sum::<f64>() / b.len() as f64;
    Ok(SplitReport { ratio: if norm > 0.0 { norm / den } else { 0.0 }, bound: 1.0 + b_mean.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncReport {
    /// `(1/|I_Q|) ∫_{I_Q} (|op b_P|^2 + |b_P|^2)`.
    pub k_hyp: f64,
    /// `∫_{2 I_Q} |op(b_P χ_{I_Q})|^2 / (K_hyp |I_Q|)`; zero when `K_hyp = 0`.
    pub ratio: f64,
    /// `(1 + B_sys^{1/2})^4 + C_K^2 / 4`.
    pub bound: f64,
}

impl TruncReport {
    pub fn holds(&self) -> bool {
        Tol::default().le(self.ratio, self.bound, self.bound)
    }
}

/// Truncation of `b_P` to `I_Q` for `I_Q ⊆ I_P`. The doubled interval is
/// the parent of `I_Q` (or `I_Q` itself at the top).
pub fn trunc_check(
    k: &PerfectDyadicKernel,
    p: &DyadicInterval,
    q: &DyadicInterval,
    sys: &AccretiveSystem,
    side: Side,
) -> Result<TruncReport> {
    trunc_check_with(k, p, q, sys, side, sys.b_sys(k))
}

pub(crate) fn trunc_check_with(
    k: &PerfectDyadicKernel,
    p: &DyadicInterval,
    q: &DyadicInterval,
    sys: &AccretiveSystem,
    side: Side,
    b_sys: f64,
) -> Result<TruncReport> {
    let grid = sys.grid;
    if k.grid() != grid {
        return Err(Error::GridMismatch);
    }
    grid.check(p)?;
    grid.check(q)?;
    if !q.is_subset_of(p) {
        return Err(Error::HypothesisFail(format!("{q} is not inside {p}")));
    }
    let (pi, qi) = (grid.index(p), grid.index(q));
    let b = sys.local(side, pi);
    let op = sys.op_local(k, side, pi);
    let p_start = grid.cell_range_at(pi).start;
    let q_range = grid.cell_range_at(qi);
    let local = |c: usize| c - p_start;
    let k_hyp = q_range.clone().map(|c| b[local(c)].norm_sqr() + op[local(c)].norm_sqr()).sum::<f64>()
        / q_range.len() as f64;
    let di = if qi == 0 { 0 } else { parent_index(qi) };
    let d_range = grid.cell_range_at(di);
    let truncated: Vec<Complex64> = d_range
        .clone()
        .map(|c| if q_range.contains(&c) { b[local(c)] } else { Complex64::new(0.0, 0.0) })
        .collect();
    let t = apply_local(k, di, &truncated, side.transpose());
    let num = t.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_width();
    let ck = kernel_admissibility(k);
    let ratio = if k_hyp > 0.0 { num / (k_hyp * q.length()) } else { 0.0 };
    Ok(TruncReport { k_hyp, ratio, bound: (1.0 + b_sys.sqrt()).powi(4) + ck * ck / 4.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::czop::kernel::apply;
    use crate::czop::testutil::{random_function, random_kernel, random_system};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_system_is_normalised() {
        let grid = GridConfig::new(2).unwrap();
        let sys = AccretiveSystem::constant(grid);
        assert_eq!(sys.normalization_error(), 0.0);
        let k = PerfectDyadicKernel::zero(grid);
        assert_eq!(sys.b_sys(&k), 2.0);
    }

    #[test]
    fn rejects_unnormalised_system() {
        let grid = GridConfig::new(1).unwrap();
        let mut fam: Vec<Vec<Complex64>> = (0..grid.tile_count()).map(|i| vec![Complex64::new(1.0, 0.0); grid.cells_in(i)]).collect();
        fam[0][0] = Complex64::new(2.0, 0.0);
        assert!(matches!(AccretiveSystem::new(grid, fam.clone(), fam), Err(Error::SystemInvalid(_))));
    }

    #[test]
    fn split_lemma_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let grid = GridConfig::new(2).unwrap();
        let sys = random_system(&mut rng, grid, 0.5);
        let p = grid.interval(0, 1).unwrap();
        let b = sys.function(Side::B1, &p).unwrap();
        let r = split_lemma_check(&sys, &p, &b, Side::B1).unwrap();
        assert!(r.ratio.is_finite() && r.holds());
        // Mean zero on I_P and orthogonal to b: build f = g - (<g, b>/<h, b>) h.
        let range = grid.cell_range(&p);
        let mut g = DyadicFunction::zeros(grid);
        let mut h = DyadicFunction::zeros(grid);
        let mid = range.start + range.len() / 2;
        for c in range.clone() {
            g.values_mut()[c] = if c < mid { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) };
        }
        h.values_mut()[range.start] = Complex64::new(1.0, 0.0);
        h.values_mut()[range.start + 1] = Complex64::new(-1.0, 0.0);
        let hb = h.pair(&b).unwrap();
        if hb.norm() > 1e-6 {
            let f = g.sub(&h.scale(g.pair(&b).unwrap() / hb)).unwrap();
            let r = split_lemma_check(&sys, &p, &f, Side::B1).unwrap();
            assert!((r.ratio - 1.0).abs() < 1e-9);
        }
        let z = split_lemma_check(&sys, &p, &DyadicFunction::zeros(grid), Side::B2).unwrap();
        assert_eq!(z.ratio, 0.0);
    }

    #[test]
    fn split_lemma_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for m in 1..=4 {
            let grid = GridConfig::new(m).unwrap();
            let sys = random_system(&mut rng, grid, 0.5);
            for _ in 0..20 {
                let p = grid.interval_at(rng.gen_range(0..grid.tile_count()));
                let f = random_function(&mut rng, grid);
                for side in [Side::B1, Side::B2] {
                    assert!(split_lemma_check(&sys, &p, &f, side).unwrap().holds());
                }
            }
        }
    }

    #[test]
    fn trunc_examples_and_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let grid = GridConfig::new(2).unwrap();
        let sys = random_system(&mut rng, grid, 0.5);
        let zero = PerfectDyadicKernel::zero(grid);
        let p = grid.interval(0, 0).unwrap();
        let q = grid.interval(-1, 1).unwrap();
        assert_eq!(trunc_check(&zero, &p, &q, &sys, Side::B1).unwrap().ratio, 0.0);
        for m in 1..=4 {
            let grid = GridConfig::new(m).unwrap();
            let k = random_kernel(&mut rng, grid, 1.0);
            let sys = random_system(&mut rng, grid, 0.5);
            for _ in 0..20 {
                let pi = rng.gen_range(0..grid.tile_count());
                let p = grid.interval_at(pi);
                let same = trunc_check(&k, &p, &p, &sys, Side::B1).unwrap();
                assert!(same.holds(), "{same:?}");
                let mut qi = pi;
                while !grid.is_finest_index(qi) && rng.gen_bool(0.6) {
                    qi = 2 * qi + 1 + rng.gen_range(0..2);
                }
                for side in [Side::B1, Side::B2] {
                    let r = trunc_check(&k, &p, &grid.interval_at(qi), &sys, side).unwrap();
                    assert!(r.holds(), "{r:?}");
                }
            }
        }
    }

    #[test]
    fn trunc_numerator_matches_global_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let grid = GridConfig::new(3).unwrap();
        let k = random_kernel(&mut rng, grid, 1.0);
        let sys = random_system(&mut rng, grid, 0.5);
        let p = grid.interval(1, 1).unwrap();
        let q = grid.interval(-1, 5).unwrap();
        let r = trunc_check(&k, &p, &q, &sys, Side::B1).unwrap();
        let bq = sys.function(Side::B1, &p).unwrap().restrict(&q);
        let t = apply(&k, &bq).unwrap();
        let parent = q.parent(&grid).unwrap();
        let num = t.l2_norm_on(&parent).powi(2);
        assert!((r.ratio * r.k_hyp * q.length() - num).abs() < 1e-10 * num.max(1.0));
    }
}

use num_complex::Complex64;

use crate::dyadic::{child_indices, DyadicInterval, GridConfig};
use crate::error::{Error, Result};

/// A complex function on `[0, 2^M]`, constant on each finest cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicFunction {
    grid: GridConfig,
    values: Vec<Complex64>,
}

impl DyadicFunction {
    pub fn new(grid: GridConfig, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::Parse(format!("expected {} cell values, got {}", grid.cells(), values.len())));
        }
        Ok(DyadicFunction { grid, values })
    }

    pub fn from_real(grid: GridConfig, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(grid: GridConfig) -> Self {
        DyadicFunction { grid, values: vec![Complex64::new(0.0, 0.0); grid.cells()] }
    }

    pub fn constant(grid: GridConfig, c: Complex64) -> Self {
        DyadicFunction { grid, values: vec![c; grid.cells()] }
    }

    /// `χ_I`.
    pub fn indicator(grid: GridConfig, interval: &DyadicInterval) -> Result<Self> {
        grid.check(interval)?;
        let mut f = Self::zeros(grid);
        for c in grid.cell_range(interval) {
            f.values[c] = Complex64::new(1.0, 0.0);
        }
        Ok(f)
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        DyadicFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn abs(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(DyadicFunction { grid: self.grid, values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    /// `f χ_I`.
    pub fn restrict(&self, interval: &DyadicInterval) -> Self {
        let range = self.grid.cell_range(interval);
        let mut out = Self::zeros(self.grid);
        out.values[range.clone()].copy_from_slice(&self.values[range]);
        out
    }

    /// `∫ f`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_width()
    }

    /// `∫_I f`.
    pub fn integral_over(&self, interval: &DyadicInterval) -> Complex64 {
        self.values[self.grid.cell_range(interval)].iter().sum::<Complex64>() * self.grid.cell_width()
    }

    /// `[f]_I`.
    pub fn average(&self, interval: &DyadicInterval) -> Complex64 {
        let range = self.grid.cell_range(interval);
        let n = range.len() as f64;
        self.values[range].iter().sum::<Complex64>() / n
    }

    /// Cell sums over every interval, in heap order.
    pub fn node_sums(&self) -> Vec<Complex64> {
        node_sums(self.grid, &self.values)
    }

    /// `[f]_I` for every interval, in heap order.
    pub fn averages(&self) -> Vec<Complex64> {
        let mut s = self.node_sums();
        for (i, v) in s.iter_mut().enumerate() {
            *v /= self.grid.cells_in(i) as f64;
        }
        s
    }

    /// The real pairing `∫ f g` (no conjugation).
    pub fn pair(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).sum::<Complex64>() * self.grid.cell_width())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_width()).sqrt()
    }

    pub fn l2_norm_on(&self, interval: &DyadicInterval) -> f64 {
        let w = self.grid.cell_width();
        (self.values[self.grid.cell_range(interval)].iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Membership in `S_0(I)`: supported in `I` with `|∫ f|` below tolerance
    /// relative to `‖f‖_1`.
    pub fn is_mean_zero_on(&self, interval: &DyadicInterval, abs_tol: f64) -> bool {
        let range = self.grid.cell_range(interval);
        let outside = self.values.iter().enumerate().any(|(c, v)| !range.contains(&c) && *v != Complex64::new(0.0, 0.0));
        let l1: f64 = self.values.iter().map(|v| v.norm()).sum::<f64>() * self.grid.cell_width();
        !outside && self.integral().norm() <= abs_tol * l1.max(1.0)
    }
}

pub(crate) fn node_sums(grid: GridConfig, values: &[Complex64]) -> Vec<Complex64> {
    let mut s = vec![Complex64::new(0.0, 0.0); grid.tile_count()];
    let leaf = grid.cells() - 1;
    s[leaf..].copy_from_slice(values);
    for i in (0..leaf).rev() {
        let (l, r) = child_indices(i);
        s[i] = s[l] + s[r];
    }
    s
}

/// Pushes per-interval increments down to the cells: cell `c` receives the
/// sum over ancestors `I` of `left(I)` or `right(I)` depending on the child
/// of `I` that contains `c`.
pub(crate) fn accumulate_down(grid: GridConfig, mut step: impl FnMut(usize) -> (Complex64, Complex64)) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.tile_count()];
    let leaf = grid.cells() - 1;
    for i in 0..leaf {
        let (a, b) = step(i);
        let (l, r) = child_indices(i);
        acc[l] = acc[i] + a;
        acc[r] = acc[i] + b;
    }
    acc.split_off(leaf)
}

use num_complex::Complex64;

use crate::dyadic::{DyadicInterval, GridConfig};
use crate::error::{Error, Result};

/// Complex coefficients indexed by lacunary tiles, stored densely in heap
/// order. Absent tiles carry zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMap {
    grid: GridConfig,
    values: Vec<Complex64>,
}

impl CoefficientMap {
    pub fn zeros(grid: GridConfig) -> Self {
        CoefficientMap { grid, values: vec![Complex64::new(0.0, 0.0); grid.tile_count()] }
    }

    pub fn from_dense(grid: GridConfig, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.tile_count() {
            return Err(Error::Parse(format!("expected {} coefficients, got {}", grid.tile_count(), values.len())));
        }
        Ok(CoefficientMap { grid, values })
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn get(&self, d: &DyadicInterval) -> Complex64 {
        self.values[self.grid.index(d)]
    }

    pub fn set(&mut self, d: &DyadicInterval, v: Complex64) {
        let i = self.grid.index(d);
        self.values[i] = v;
    }

    pub fn dense(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dense_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// `|c(P)|^2` as nonnegative weights.
    pub fn abs_sqr(&self) -> Weights {
        Weights { grid: self.grid, values: self.values.iter().map(|v| v.norm_sqr()).collect() }
    }

    /// Nonzero entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (DyadicInterval, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
            .map(move |(i, v)| (self.grid.interval_at(i), *v))
    }
}

/// Nonnegative weights on lacunary tiles, stored densely in heap order.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    grid: GridConfig,
    values: Vec<f64>,
}

impl Weights {
    pub fn zeros(grid: GridConfig) -> Self {
        Weights { grid, values: vec![0.0; grid.tile_count()] }
    }

    pub fn from_dense(grid: GridConfig, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.tile_count() {
            return Err(Error::Parse(format!("expected {} weights, got {}", grid.tile_count(), values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Parse(format!("weight {v} is not a finite nonnegative number")));
        }
        Ok(Weights { grid, values })
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn get(&self, d: &DyadicInterval) -> f64 {
        self.values[self.grid.index(d)]
    }

    pub fn at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Sets a weight; negative or non-finite values are clamped to zero.
    pub fn set(&mut self, d: &DyadicInterval, v: f64) {
        let i = self.grid.index(d);
        self.set_at(i, v);
    }

    pub fn set_at(&mut self, idx: usize, v: f64) {
        self.values[idx] = if v.is_finite() && v > 0.0 { v } else { 0.0 };
    }

    pub fn dense(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Weights {
        Weights { grid: self.grid, values: self.values.iter().map(|v| v * c.max(0.0)).collect() }
    }
}

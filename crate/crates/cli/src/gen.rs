//! Seeded random instances.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, Result};
use dhap_core::czop::{kernel_admissibility, AccretiveSystem, PerfectDyadicKernel};
use dhap_core::function_space::{maximal_size, DyadicFunction, Weights};
use dhap_core::json::{self, FunctionJson, KernelJson, SystemJson, WeightsJson};
use dhap_core::{Complex64, GridConfig, TileSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Function,
    MeanZeroFunction,
    Weights,
    CarlesonWeights,
    Kernel,
    AccretiveB,
    AccretiveSystem,
}

impl GenKind {
    pub const ALL: [GenKind; 7] = [
        GenKind::Function,
        GenKind::MeanZeroFunction,
        GenKind::Weights,
        GenKind::CarlesonWeights,
        GenKind::Kernel,
        GenKind::AccretiveB,
        GenKind::AccretiveSystem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenKind::Function => "function",
            GenKind::MeanZeroFunction => "mean_zero_function",
            GenKind::Weights => "weights",
            GenKind::CarlesonWeights => "carleson_weights",
            GenKind::Kernel => "kernel",
            GenKind::AccretiveB => "accretive_b",
            GenKind::AccretiveSystem => "accretive_system",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        GenKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| anyhow!("unknown kind {s:?}; expected one of {:?}", GenKind::ALL.map(|k| k.name())))
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Cell values uniform in the square `[-1, 1]^2`.
pub fn function(rng: &mut impl Rng, grid: GridConfig) -> DyadicFunction {
    DyadicFunction::new(grid, (0..grid.cells()).map(|_| unit(rng)).collect()).expect("cell count")
}

/// Real cell values uniform in `[-1, 1]`.
pub fn real_function(rng: &mut impl Rng, grid: GridConfig) -> DyadicFunction {
    let v: Vec<f64> = (0..grid.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DyadicFunction::from_real(grid, &v).expect("cell count")
}

pub fn mean_zero(f: &DyadicFunction) -> DyadicFunction {
    let avg = f.average(&f.grid().top());
    f.map(|v| v - avg)
}

pub fn mean_zero_function(rng: &mut impl Rng, grid: GridConfig) -> DyadicFunction {
    mean_zero(&function(rng, grid))
}

/// `a(P) = U |I_P|` with `U` uniform in `[0, 1)`, zero on about a third of
/// the tiles.
pub fn weights(rng: &mut impl Rng, grid: GridConfig) -> Weights {
    let v = (0..grid.tile_count())
        .map(|i| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) * grid.length_at(i) })
        .collect();
    Weights::from_dense(grid, v).expect("nonnegative weights")
}

/// Weights rescaled so that the maximal size over all tiles is one.
pub fn carleson_weights(rng: &mut impl Rng, grid: GridConfig) -> Weights {
    let v: Vec<f64> = (0..grid.tile_count()).map(|i| rng.gen_range(0.01..1.0) * grid.length_at(i)).collect();
    let a = Weights::from_dense(grid, v).expect("nonnegative weights");
    let max = maximal_size(&a, &TileSet::full(grid));
    a.scaled(1.0 / max)
}

/// Kernel with random sibling constants, rescaled to admissibility constant
/// one (zero when `M = 1`, where only the top carries constants).
pub fn kernel(rng: &mut impl Rng, grid: GridConfig) -> PerfectDyadicKernel {
    let n = grid.interior_count();
    let zero = Complex64::new(0.0, 0.0);
    let mut lr = vec![zero; n];
    let mut rl = vec![zero; n];
    for i in 1..n {
        lr[i] = unit(rng) / grid.length_at(i);
        rl[i] = unit(rng) / grid.length_at(i);
    }
    let k = PerfectDyadicKernel::from_constants(grid, lr, rl).expect("finite constants");
    let c = kernel_admissibility(&k);
    if c > 0.0 {
        k.scaled(Complex64::new(1.0 / c, 0.0))
    } else {
        k
    }
}

/// `Re b ∈ [1/2, 3/2]`, `Im b ∈ [-1, 1]`.
pub fn accretive_b(rng: &mut impl Rng, grid: GridConfig) -> DyadicFunction {
    let v = (0..grid.cells()).map(|_| Complex64::new(rng.gen_range(0.5..=1.5), rng.gen_range(-1.0..=1.0))).collect();
    DyadicFunction::new(grid, v).expect("cell count")
}

/// Each `b_P` is an independent accretive function on `I_P` divided by its
/// average.
pub fn accretive_system(rng: &mut impl Rng, grid: GridConfig) -> AccretiveSystem {
    let mut fam = || -> Vec<Vec<Complex64>> {
        (0..grid.tile_count())
            .map(|i| {
                let v: Vec<Complex64> = (0..grid.cells_in(i))
                    .map(|_| Complex64::new(rng.gen_range(0.5..=1.5), rng.gen_range(-1.0..=1.0)))
                    .collect();
                let avg = v.iter().sum::<Complex64>() / v.len() as f64;
                v.into_iter().map(|z| z / avg).collect()
            })
            .collect()
    };
    let b1 = fam();
    let b2 = fam();
    AccretiveSystem::new(grid, b1, b2).expect("normalised system")
}

/// Each tile independently with probability `p`.
pub fn random_set(rng: &mut impl Rng, grid: GridConfig, p: f64) -> TileSet {
    TileSet::from_indices(grid, (0..grid.tile_count()).filter(|_| rng.gen_bool(p)))
}

/// Disjoint union of rooted subtrees: a tile joins when its parent is a
/// member (probability `keep`) or when no ancestor was ever a member
/// (probability `start`).
pub fn random_convex_set(rng: &mut impl Rng, grid: GridConfig, start: f64, keep: f64) -> TileSet {
    let n = grid.tile_count();
    let mut member = vec![false; n];
    let mut touched = vec![false; n];
    for i in 0..n {
        let (pm, pt) = if i == 0 { (false, false) } else { (member[(i - 1) / 2], touched[(i - 1) / 2]) };
        member[i] = if pm { rng.gen_bool(keep) } else { !pt && rng.gen_bool(start) };
        touched[i] = pt || member[i];
    }
    TileSet::from_indices(grid, (0..n).filter(|&i| member[i]))
}

/// JSON text of a seeded instance.
pub fn generate(kind: GenKind, grid: GridConfig, seed: u64) -> Result<String> {
    let r = &mut rng(seed);
    let text = match kind {
        GenKind::Function => json::to_string(&FunctionJson::from(&function(r, grid))),
        GenKind::MeanZeroFunction => json::to_string(&FunctionJson::from(&mean_zero_function(r, grid))),
        GenKind::Weights => json::to_string(&WeightsJson::from(&weights(r, grid))),
        GenKind::CarlesonWeights => json::to_string(&WeightsJson::from(&carleson_weights(r, grid))),
        GenKind::Kernel => json::to_string(&KernelJson::from(&kernel(r, grid))),
        GenKind::AccretiveB => json::to_string(&FunctionJson::from(&accretive_b(r, grid))),
        GenKind::AccretiveSystem => json::to_string(&SystemJson::from(&accretive_system(r, grid))),
    }?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dhap_core::czop::{accretivity, AccretivityFlavor};

    #[test]
    fn kinds_parse() {
        for k in GenKind::ALL {
            assert_eq!(k.name().parse::<GenKind>().unwrap(), k);
        }
        assert!("nope".parse::<GenKind>().is_err());
    }

    #[test]
    fn deterministic_and_valid() {
        let grid = GridConfig::new(3).unwrap();
        for k in GenKind::ALL {
            assert_eq!(generate(k, grid, 7).unwrap(), generate(k, grid, 7).unwrap());
        }
        let a = carleson_weights(&mut rng(1), GridConfig::new(4).unwrap());
        assert!((maximal_size(&a, &TileSet::full(a.grid())) - 1.0).abs() <= 1e-9);
        let k = kernel(&mut rng(2), grid);
        assert!((kernel_admissibility(&k) - 1.0).abs() <= 1e-12);
        let b = accretive_b(&mut rng(3), grid);
        let r = accretivity(&b, &TileSet::full(grid), AccretivityFlavor::Pseudo, 0.5, 1.0).unwrap();
        assert!(r.holds && r.margin >= 0.5);
        let text = generate(GenKind::AccretiveSystem, grid, 4).unwrap();
        let sys = json::from_str::<SystemJson>(&text).unwrap().to_system().unwrap();
        assert!(sys.normalization_error() <= 1e-12);
    }
}

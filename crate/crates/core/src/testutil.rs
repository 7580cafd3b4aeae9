use rand::Rng;

use crate::dyadic::{parent_index, GridConfig, TileSet};
use crate::function_space::{DyadicFunction, Weights};
use crate::Complex64;

pub fn random_complex(rng: &mut impl Rng, grid: GridConfig) -> DyadicFunction {
    let v = (0..grid.cells()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    DyadicFunction::new(grid, v).unwrap()
}

pub fn random_real(rng: &mut impl Rng, grid: GridConfig) -> DyadicFunction {
    let v: Vec<f64> = (0..grid.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DyadicFunction::from_real(grid, &v).unwrap()
}

/// `f - [f]` over the whole domain.
pub fn mean_zero(f: &DyadicFunction) -> DyadicFunction {
    let avg = f.average(&f.grid().top());
    f.map(|v| v - avg)
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
        let (pm, pt) = if i == 0 { (false, false) } else { (member[parent_index(i)], touched[parent_index(i)]) };
        member[i] = if pm { rng.gen_bool(keep) } else { !pt && rng.gen_bool(start) };
        touched[i] = pt || member[i];
    }
    TileSet::from_indices(grid, (0..n).filter(|&i| member[i]))
}

/// Weights in `[0, 1)` times the tile length, zero with probability `zero`.
pub fn random_weights(rng: &mut impl Rng, grid: GridConfig, zero: f64) -> Weights {
    let v = (0..grid.tile_count())
        .map(|i| if rng.gen_bool(zero) { 0.0 } else { rng.gen_range(0.0..1.0) * grid.length_at(i) })
        .collect();
    Weights::from_dense(grid, v).unwrap()
}

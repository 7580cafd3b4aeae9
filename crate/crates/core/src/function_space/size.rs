use super::coeffs::Weights;
use super::function::DyadicFunction;
use super::haar::wavelet_transform;
use crate::dyadic::{child_indices, DyadicInterval, TileSet, Tree};

/// `size(a, T) = Σ_{P ∈ T} a(P) / |I_T|`.
pub fn size(a: &Weights, tree: &Tree) -> f64 {
    set_size(a, tree.tiles(), &tree.top())
}

/// `Σ_{P ∈ S} a(P) / |I|` for an arbitrary set normalised by `I`.
pub fn set_size(a: &Weights, s: &TileSet, top: &DyadicInterval) -> f64 {
    s.indices().map(|i| a.at(i)).sum::<f64>() / top.length()
}

/// For every member `Q` of `S`, the total weight of the tiles of `S` that are
/// chained to `Q` inside `S`, in heap order (zero off `S`).
pub(crate) fn chained_mass(a: &Weights, s: &TileSet) -> Vec<f64> {
    let grid = s.grid();
    let mut reach = vec![0.0f64; grid.tile_count()];
    for i in (0..grid.tile_count()).rev() {
        if !s.contains_index(i) {
            continue;
        }
        let mut v = a.at(i);
        if !grid.is_finest_index(i) {
            let (l, r) = child_indices(i);
            v += reach[l] + reach[r];
        }
        reach[i] = v;
    }
    reach
}

/// `size*(a, S)`: supremum of `size(a, T)` over convex trees `T ⊆ S`.
///
/// With nonnegative weights the best tree with top `Q` is the set of members
/// chained to `Q` within `S`.
pub fn maximal_size(a: &Weights, s: &TileSet) -> f64 {
    let grid = s.grid();
    let reach = chained_mass(a, s);
    s.indices().map(|i| reach[i] / grid.length_at(i)).fold(0.0, f64::max)
}

/// Tile attaining the maximal size, if the set is non-empty.
pub fn maximal_size_top(a: &Weights, s: &TileSet) -> Option<(DyadicInterval, f64)> {
    let grid = s.grid();
    let reach = chained_mass(a, s);
    s.indices()
        .map(|i| (grid.interval_at(i), reach[i] / grid.length_at(i)))
        .fold(None, |best: Option<(DyadicInterval, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
}

/// `‖f‖_BMO = size*(|W f|^2, P⁺)^{1/2}`.
pub fn bmo_norm(f: &DyadicFunction) -> f64 {
    let a = wavelet_transform(f).abs_sqr();
    maximal_size(&a, &TileSet::full(f.grid())).sqrt()
}

/// `mean(f, P) = [|f|]_{I_P}`.
pub fn mean(f: &DyadicFunction, interval: &DyadicInterval) -> f64 {
    f.abs().average(interval).re
}

/// `mean*(f, S)`: supremum of the top mean over convex trees in `S`, which is
/// the largest mean over members.
pub fn maximal_mean(f: &DyadicFunction, s: &TileSet) -> f64 {
    let avg = f.abs().averages();
    s.indices().map(|i| avg[i].re).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::GridConfig;

    #[test]
    fn column_weights_have_bounded_size() {
        let grid = GridConfig::new(2).unwrap();
        let mut a = Weights::zeros(grid);
        // one spatial column through the left endpoint
        for k in -2..=2 {
            let d = DyadicInterval { k, j: 0 };
            a.set(&d, d.length());
        }
        let full = TileSet::full(grid);
        assert!((maximal_size(&a, &full) - 1.9375).abs() < 1e-15);
        let tree = Tree::complete(grid, grid.top()).unwrap();
        assert!((size(&a, &tree) - 1.9375).abs() < 1e-15);
    }

    #[test]
    fn gaps_break_chains() {
        let grid = GridConfig::new(1).unwrap();
        let top = grid.top();
        let small = DyadicInterval { k: -1, j: 0 };
        let mut a = Weights::zeros(grid);
        a.set(&top, 2.0);
        a.set(&small, 0.5);
        let s = TileSet::from_intervals(grid, [top, small]).unwrap();
        assert!((maximal_size(&a, &s) - 1.0).abs() < 1e-15);
        assert_eq!(maximal_size(&a, &TileSet::new(grid)), 0.0);
    }

    #[test]
    fn bmo_of_haar() {
        let grid = GridConfig::new(1).unwrap();
        let phi = crate::function_space::haar(grid, &crate::dyadic::Tile::lacunary(DyadicInterval { k: 0, j: 0 })).unwrap();
        assert!((bmo_norm(&phi) - 1.0).abs() < 1e-15);
    }
}

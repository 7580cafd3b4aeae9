use num_complex::Complex64;

use super::coeffs::CoefficientMap;
use super::function::{accumulate_down, DyadicFunction};
use crate::dyadic::{child_indices, depth_of, parent_index, GridConfig, Tile, TileKind};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The Haar function of a tile: `|I|^{-1/2}(χ_{I_l} - χ_{I_r})` for a lacunary
/// tile and `|I|^{-1/2} χ_I` for a non-lacunary one.
pub fn haar(grid: GridConfig, tile: &Tile) -> Result<DyadicFunction> {
    grid.check(&tile.interval)?;
    let norm = tile.interval.length().sqrt().recip();
    let range = grid.cell_range(&tile.interval);
    let mut f = DyadicFunction::zeros(grid);
    match tile.kind {
        TileKind::NonLacunary => {
            for c in range {
                f.values_mut()[c] = Complex64::new(norm, 0.0);
            }
        }
        TileKind::Lacunary => {
            if range.len() < 2 {
                return Err(Error::BottomScale);
            }
            let mid = range.start + range.len() / 2;
            for c in range.clone() {
                let s = if c < mid { norm } else { -norm };
                f.values_mut()[c] = Complex64::new(s, 0.0);
            }
        }
    }
    Ok(f)
}

/// `W f(P) = <f, φ_P>` for every lacunary tile with children; finest tiles
/// carry zero.
pub fn wavelet_transform(f: &DyadicFunction) -> CoefficientMap {
    let grid = f.grid();
    let sums = f.node_sums();
    let w = grid.cell_width();
    let mut out = CoefficientMap::zeros(grid);
    let dense = out.dense_mut();
    for (i, slot) in dense.iter_mut().enumerate().take(grid.interior_count()) {
        let (l, r) = child_indices(i);
        *slot = (sums[l] - sums[r]) * (w / grid.length_at(i).sqrt());
    }
    out
}

/// `Σ c(P) φ_P`; coefficients on finest tiles are ignored.
pub fn reconstruct(c: &CoefficientMap) -> DyadicFunction {
    let grid = c.grid();
    let dense = c.dense();
    let values = accumulate_down(grid, |i| {
        let v = dense[i] / grid.length_at(i).sqrt();
        (v, -v)
    });
    DyadicFunction::new(grid, values).expect("cell count matches grid")
}

/// Checks the pairwise disjointness rules for a tile collection.
pub fn check_disjoint(grid: GridConfig, tiles: &[Tile]) -> Result<()> {
    let n = grid.tile_count();
    let mut lac = vec![false; n];
    let mut non = vec![false; n];
    for t in tiles {
        grid.check(&t.interval)?;
        let i = grid.index(&t.interval);
        let slot = if t.is_lacunary() { &mut lac } else { &mut non };
        if slot[i] {
            return Err(Error::DisjointnessViolation(format!("tile over {} appears twice", t.interval)));
        }
        slot[i] = true;
    }
    for t in tiles.iter().filter(|t| !t.is_lacunary()) {
        let mut i = grid.index(&t.interval);
        while i > 0 {
            i = parent_index(i);
            if non[i] {
                return Err(Error::DisjointnessViolation(format!(
                    "non-lacunary tiles over {} and {} overlap",
                    t.interval,
                    grid.interval_at(i)
                )));
            }
            if lac[i] {
                return Err(Error::DisjointnessViolation(format!(
                    "non-lacunary tile over {} lies inside lacunary tile over {}",
                    t.interval,
                    grid.interval_at(i)
                )));
            }
        }
    }
    Ok(())
}

/// `Π_S f = Σ_{P ∈ S} <f, φ_P> φ_P` for a pairwise disjoint tile collection.
pub fn project(f: &DyadicFunction, tiles: &[Tile]) -> Result<DyadicFunction> {
    let grid = f.grid();
    check_disjoint(grid, tiles)?;
    let full = wavelet_transform(f);
    let mut masked = CoefficientMap::zeros(grid);
    let mut fathers = Vec::new();
    for t in tiles {
        match t.kind {
            TileKind::Lacunary => {
                if grid.is_finest_index(grid.index(&t.interval)) {
                    return Err(Error::BottomScale);
                }
                masked.set(&t.interval, full.get(&t.interval));
            }
            TileKind::NonLacunary => fathers.push(t.interval),
        }
    }
    let mut out = reconstruct(&masked);
    for d in fathers {
        let avg = f.average(&d);
        for c in grid.cell_range(&d) {
            out.values_mut()[c] += avg;
        }
    }
    Ok(out)
}

/// `|S f|(x) = (Σ_P |W f(P)|^2 χ_{I_P}(x) / |I_P|)^{1/2}`.
pub fn square_function(f: &DyadicFunction) -> DyadicFunction {
    let grid = f.grid();
    let wf = wavelet_transform(f);
    let acc = accumulate_down(grid, |i| {
        let v = Complex64::new(wf.dense()[i].norm_sqr() / grid.length_at(i), 0.0);
        (v, v)
    });
    DyadicFunction::new(grid, acc.into_iter().map(|v| Complex64::new(v.re.sqrt(), 0.0)).collect())
        .expect("cell count matches grid")
}

/// `M̃ f(x) = sup_{I ∋ x} |[f]_I|` over dyadic intervals of the grid.
pub fn cancellative_maximal(f: &DyadicFunction) -> DyadicFunction {
    let grid = f.grid();
    let avg = f.averages();
    let mut best = vec![0.0f64; grid.tile_count()];
    for i in 0..grid.tile_count() {
        let here = avg[i].norm();
        best[i] = if i == 0 { here } else { here.max(best[parent_index(i)]) };
    }
    let leaf = grid.cells() - 1;
    DyadicFunction::new(grid, best[leaf..].iter().map(|&v| Complex64::new(v, 0.0)).collect())
        .expect("cell count matches grid")
}

/// Dyadic Hardy–Littlewood maximal function `M f = M̃ |f|`.
pub fn hardy_littlewood(f: &DyadicFunction) -> DyadicFunction {
    cancellative_maximal(&f.abs())
}

/// Sum of `c(P) χ_{I_P} / |I_P|` over all tiles, evaluated on cells.
pub(crate) fn normalized_indicator_sum(grid: GridConfig, c: &[Complex64]) -> DyadicFunction {
    let values = accumulate_down(grid, |i| {
        let v = c[i] / grid.length_at(i);
        (v, v)
    });
    let mut f = DyadicFunction::new(grid, values).expect("cell count matches grid");
    // Finest tiles contribute to their own cell as well.
    let leaf = grid.cells() - 1;
    for (cell, v) in f.values_mut().iter_mut().enumerate() {
        let i = leaf + cell;
        debug_assert_eq!(depth_of(i), grid.max_depth());
        if c[i] != ZERO {
            *v += c[i] / grid.length_at(i);
        }
    }
    f
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::testutil::random_complex;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn parseval_and_inversion(m in 1u32..=6, seed: u64) {
            let grid = GridConfig::new(m).unwrap();
            let f = random_complex(&mut ChaCha8Rng::seed_from_u64(seed), grid);
            let w = wavelet_transform(&f);
            let top = grid.top();
            let energy: f64 = w.dense().iter().map(|v| v.norm_sqr()).sum::<f64>() + f.integral().norm_sqr() / top.length();
            let l2 = f.l2_norm().powi(2);
            prop_assert!((energy - l2).abs() <= 1e-9 * l2.max(1.0));
            let avg = f.average(&top);
            let back = reconstruct(&w);
            let diff = back.values().iter().zip(f.values()).map(|(a, b)| (a + avg - b).norm()).fold(0.0, f64::max);
            prop_assert!(diff <= 1e-9);
            let s = square_function(&f);
            let centred = f.map(|v| v - avg);
            prop_assert!((s.l2_norm() - centred.l2_norm()).abs() <= 1e-9 * centred.l2_norm().max(1.0));
        }

        #[test]
        fn transform_matches_pairings(m in 1u32..=3, seed: u64) {
            let grid = GridConfig::new(m).unwrap();
            let f = random_complex(&mut ChaCha8Rng::seed_from_u64(seed), grid);
            let w = wavelet_transform(&f);
            for d in grid.intervals().take(grid.interior_count()) {
                let direct = f.pair(&haar(grid, &Tile::lacunary(d)).unwrap()).unwrap();
                prop_assert!((direct - w.get(&d)).norm() <= 1e-12);
            }
        }

        #[test]
        fn maximal_functions_match_brute_force(m in 1u32..=3, seed: u64) {
            let grid = GridConfig::new(m).unwrap();
            let f = random_complex(&mut ChaCha8Rng::seed_from_u64(seed), grid);
            let mt = cancellative_maximal(&f);
            let mh = hardy_littlewood(&f);
            for c in 0..grid.cells() {
                let cell = grid.interval_at(grid.leaf_index(c));
                let over = grid.intervals().filter(|d| cell.is_subset_of(d));
                let (mut a, mut b) = (0.0f64, 0.0f64);
                for d in over {
                    a = a.max(f.average(&d).norm());
                    b = b.max(f.abs().average(&d).re);
                }
                prop_assert!((mt.values()[c].re - a).abs() <= 1e-12);
                prop_assert!((mh.values()[c].re - b).abs() <= 1e-12);
            }
        }
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::{child_indices, is_convex, maximal_tiles, DyadicInterval, GridConfig, TileSet, Tree};
use crate::error::{Error, Result};
use crate::function_space::{maximal_mean, maximal_size, wavelet_transform, CoefficientMap, DyadicFunction};
use crate::tol::Tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccretivityFlavor {
    Pseudo,
    Strong,
    Para,
}

impl AccretivityFlavor {
    pub fn name(&self) -> &'static str {
        match self {
            AccretivityFlavor::Pseudo => "pseudo",
            AccretivityFlavor::Strong => "strong",
            AccretivityFlavor::Para => "para",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccretivityReport {
    pub flavor: AccretivityFlavor,
    /// Smallest relevant `|[b]|`; infinite for an empty set.
    pub margin: f64,
    pub threshold: f64,
    pub holds: bool,
    /// Tile attaining the margin.
    pub witness: Option<DyadicInterval>,
}

/// Number of generations below `I` reachable with `|I_Q| ≥ θ |I|`.
pub(crate) fn window_depth(theta: f64) -> Result<u32> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::ScaleViolation(format!("para scale θ = {theta} outside (0, 1]")));
    }
    Ok((1.0 / theta).log2().floor().min(64.0) as u32)
}

/// Heap index of the tile `Q ⊆ I_i` within `depth` generations with the
/// largest `|[b]_Q|`, and that value. Ties go to the coarsest, leftmost tile.
pub(crate) fn best_in_window(grid: GridConfig, avg: &[Complex64], i: usize, depth: u32) -> (usize, f64) {
    let mut best = (i, avg[i].norm());
    let mut level = vec![i];
    for _ in 0..depth {
        if grid.is_finest_index(level[0]) {
            break;
        }
        level = level
            .iter()
            .flat_map(|&q| {
                let (l, r) = child_indices(q);
                [l, r]
            })
            .collect();
        for &q in &level {
            let v = avg[q].norm();
            if v > best.1 {
                best = (q, v);
            }
        }
    }
    best
}

/// Accretivity margin of `b` over `S`.
///
/// `pseudo`: `min |[b]_P|`; `strong`: also over both children of each `P`;
/// `para`: `min_P max |[b]_Q|` over `Q ⊆ I_P` with `|I_Q| ≥ θ |I_P|`.
pub fn accretivity(
    b: &DyadicFunction,
    s: &TileSet,
    flavor: AccretivityFlavor,
    c: f64,
    theta: f64,
) -> Result<AccretivityReport> {
    let grid = b.grid();
    if s.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let avg = b.averages();
    let depth = match flavor {
        AccretivityFlavor::Para => window_depth(theta)?,
        _ => 0,
    };
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for i in s.indices() {
        let (v, at) = match flavor {
            AccretivityFlavor::Pseudo => (avg[i].norm(), i),
            AccretivityFlavor::Strong => {
                if grid.is_finest_index(i) {
                    return Err(Error::ScaleViolation(format!(
                        "strong accretivity needs children of {}",
                        grid.interval_at(i)
                    )));
                }
                let (l, r) = child_indices(i);
                [i, l, r].into_iter().map(|q| (avg[q].norm(), q)).fold((f64::INFINITY, i), |a, x| if x.0 < a.0 { x } else { a })
            }
            AccretivityFlavor::Para => {
                let (q, v) = best_in_window(grid, &avg, i, depth);
                (v, q)
            }
        };
        if v < margin {
            margin = v;
            witness = Some(grid.interval_at(if flavor == AccretivityFlavor::Para { i } else { at }));
        }
    }
    Ok(AccretivityReport { flavor, margin, threshold: c, holds: margin >= c, witness })
}

/// `([b]_{P_l}, [b]_{P_r}, [b]_P)` for a tile above the finest scale.
fn child_averages(b: &DyadicFunction, p: &DyadicInterval) -> Result<(Complex64, Complex64, Complex64)> {
    let grid = b.grid();
    grid.check(p)?;
    if p.length() <= grid.cell_width() {
        return Err(Error::ScaleViolation(format!("{p} is at the finest scale")));
    }
    let (l, r) = p.children(&grid)?;
    let (bl, br) = (b.average(&l), b.average(&r));
    Ok((bl, br, (bl + br) / 2.0))
}

/// `φ^b_P = |I_P|^{-1/2} ([b]_{P_r} χ_{P_l} - [b]_{P_l} χ_{P_r}) / [b]_P`.
pub fn adapted_wavelet(b: &DyadicFunction, p: &DyadicInterval) -> Result<DyadicFunction> {
    let grid = b.grid();
    let (bl, br, bp) = child_averages(b, p)?;
    if bp == ZERO {
        return Err(Error::DegenerateAverage(p.to_string()));
    }
    let norm = p.length().sqrt().recip();
    let (l, r) = p.children(&grid)?;
    let mut f = DyadicFunction::zeros(grid);
    for c in grid.cell_range(&l) {
        f.values_mut()[c] = br / bp * norm;
    }
    for c in grid.cell_range(&r) {
        f.values_mut()[c] = -bl / bp * norm;
    }
    Ok(f)
}

/// `∫ φ^b_P b φ^b_P = [b]_{P_l} [b]_{P_r} / [b]_P`.
pub fn adapted_norm(b: &DyadicFunction, p: &DyadicInterval) -> Result<Complex64> {
    let (bl, br, bp) = child_averages(b, p)?;
    if bp == ZERO {
        return Err(Error::DegenerateAverage(p.to_string()));
    }
    Ok(bl * br / bp)
}

/// `ψ^b_P = φ^b_P b / ∫ φ^b_P b φ^b_P`.
pub fn adapted_dual(b: &DyadicFunction, p: &DyadicInterval) -> Result<DyadicFunction> {
    let n = adapted_norm(b, p)?;
    if n == ZERO {
        return Err(Error::DegenerateAverage(format!("child of {p}")));
    }
    Ok(adapted_wavelet(b, p)?.mul(b)?.scale(n.inv()))
}

/// `W_b f(P) = <f, φ^b_P>` for the tiles of `T` above the finest scale;
/// zero elsewhere.
pub fn adapted_transform(b: &DyadicFunction, f: &DyadicFunction, t: &Tree) -> Result<CoefficientMap> {
    let grid = b.grid();
    if f.grid() != grid || t.grid() != grid {
        return Err(Error::GridMismatch);
    }
    adapted_transform_on(b, f, t.tiles())
}

pub(crate) fn adapted_transform_on(b: &DyadicFunction, f: &DyadicFunction, s: &TileSet) -> Result<CoefficientMap> {
    let grid = b.grid();
    let bs = b.node_sums();
    let fs = f.node_sums();
    let w = grid.cell_width();
    let mut out = CoefficientMap::zeros(grid);
    for i in s.indices() {
        if grid.is_finest_index(i) {
            continue;
        }
        let (l, r) = child_indices(i);
        if bs[i] == ZERO {
            return Err(Error::DegenerateAverage(grid.interval_at(i).to_string()));
        }
        // [b]_r / [b]_P = 2 S_r(b) / S_P(b)
        let v = (bs[r] * fs[l] - bs[l] * fs[r]) * 2.0 / bs[i];
        out.dense_mut()[i] = v * (w / grid.length_at(i).sqrt());
    }
    Ok(out)
}

/// Smallness threshold for accretive selection:
/// `min(δ / (2(1+δ)), δ^2 / (4 C0^2))`.
pub fn accrete_eps(c0: f64, delta: f64) -> f64 {
    let a = delta / (2.0 * (1.0 + delta));
    if c0 > 0.0 {
        a.min(delta * delta / (4.0 * c0 * c0))
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccreteSelection {
    pub eps: f64,
    /// `Tree(P) ∩ T0` for the maximal tiles `P` with `|[b]_P| ≤ ε`.
    pub trees: Vec<Tree>,
    /// `Σ |I_tops| / |I_{T0}|`.
    pub packing: f64,
    /// Whether the halved threshold was needed.
    pub retried: bool,
}

/// `‖Π_S b‖_2`.
pub(crate) fn projection_norm(b: &DyadicFunction, s: &TileSet) -> f64 {
    let w = wavelet_transform(b);
    s.indices().map(|i| w.dense()[i].norm_sqr()).sum::<f64>().sqrt()
}

/// Removes the tiles of small `b`-average from a convex tree so that the
/// removed tops form a `(1 - ε)`-packing.
pub fn accrete_select(t0: &Tree, b: &DyadicFunction, c0: f64, delta: f64) -> Result<AccreteSelection> {
    let tol = Tol::default();
    let grid = t0.grid();
    if b.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if !is_convex(t0.tiles()) {
        return Err(Error::NonConvexTree);
    }
    let top = t0.top();
    let len = top.length();
    let proj = projection_norm(b, t0.tiles());
    if !tol.le(proj, c0 * len.sqrt(), c0 * len.sqrt()) {
        return Err(Error::HypothesisFail(format!("‖Π b‖ = {proj} exceeds C0 |I|^(1/2) = {}", c0 * len.sqrt())));
    }
    let top_avg = b.average(&top).norm();
    if !(delta > 0.0) || !tol.le(delta, top_avg, delta) {
        return Err(Error::HypothesisFail(format!("|[b]_top| = {top_avg} below δ = {delta}")));
    }
    let avg = b.averages();
    let eps0 = accrete_eps(c0, delta);
    for (eps, retried) in [(eps0, false), (eps0 / 2.0, true)] {
        let small = TileSet::from_indices(grid, t0.tiles().indices().filter(|&i| avg[i].norm() <= eps));
        let tops = maximal_tiles(&small);
        let packing = tops.iter().map(|d| d.length()).sum::<f64>() / len;
        if packing <= 1.0 - eps {
            let trees = tops
                .into_iter()
                .map(|p| {
                    let tiles = TileSet::complete_tree(grid, &p)?.intersection(t0.tiles());
                    Tree::new(p, tiles)
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(AccreteSelection { eps, trees, packing, retried });
        }
    }
    Err(Error::PackingViolation(format!("removed tops exceed 1 - ε at ε = {}", eps0 / 2.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoReport {
    /// `(Σ_T |W_b f|^2)^{1/2} / ‖f‖_2`.
    pub ratio1: f64,
    /// `(Σ_T |W_b(b′ f)|^2)^{1/2} / (‖f‖_2 ‖|b′|^2‖_{mean*(T)}^{1/2})`.
    pub ratio2: f64,
    /// `min_T |[b]_P|`.
    pub margin: f64,
    /// `‖|b|^2‖_{mean*(T)}`.
    pub mean_b: f64,
    /// `‖|b′|^2‖_{mean*(T)}`.
    pub mean_b_prime: f64,
    /// `size*(|W b|^2, T)`.
    pub size_wb: f64,
    /// `1 + 2 size*(|Wb|^2, T)^{1/2} / margin`: Bessel plus Carleson embedding.
    pub bound1: f64,
    /// `√2 · bound1`: averaging over the leaves of `T`.
    pub bound2: f64,
}

impl OrthoReport {
    pub fn holds(&self) -> bool {
        let tol = Tol::default();
        tol.le(self.ratio1, self.bound1, self.bound1) && tol.le(self.ratio2, self.bound2, self.bound2)
    }
}

/// Orthogonality ratios of the adapted coefficients on a convex tree. Tiles
/// at the finest scale carry no adapted wavelet and are skipped.
pub fn ortho_check(t: &Tree, b: &DyadicFunction, f: &DyadicFunction, b_prime: &DyadicFunction) -> Result<OrthoReport> {
    let grid = t.grid();
    if b.grid() != grid || f.grid() != grid || b_prime.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if !is_convex(t.tiles()) {
        return Err(Error::NonConvexTree);
    }
    let s = TileSet::from_indices(grid, t.tiles().indices().filter(|&i| !grid.is_finest_index(i)));
    let avg = b.averages();
    let margin = s.indices().map(|i| avg[i].norm()).fold(f64::INFINITY, f64::min);
    if !(margin > 0.0) {
        return Err(Error::AccretivityFail(format!("margin {margin} on the tree at {}", t.top())));
    }
    let sq = |v: &DyadicFunction| v.map(|z| Complex64::new(z.norm_sqr(), 0.0));
    let mean_b = maximal_mean(&sq(b), t.tiles());
    let mean_bp = maximal_mean(&sq(b_prime), t.tiles());
    let size_wb = maximal_size(&wavelet_transform(b).abs_sqr(), &s);
    let l2 = |c: &CoefficientMap| c.dense().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let fnorm = f.l2_norm();
    let n1 = l2(&adapted_transform_on(b, f, &s)?);
    let n2 = l2(&adapted_transform_on(b, &b_prime.mul(f)?, &s)?);
    let ratio1 = if fnorm > 0.0 { n1 / fnorm } else { 0.0 };
    let den2 = fnorm * mean_bp.sqrt();
    let ratio2 = if den2 > 0.0 { n2 / den2 } else { 0.0 };
    let bound1 = 1.0 + 2.0 * size_wb.sqrt() / margin;
    Ok(OrthoReport {
        ratio1,
        ratio2,
        margin: if margin.is_finite() { margin } else { 0.0 },
        mean_b,
        mean_b_prime: mean_bp,
        size_wb,
        bound1,
        bound2: std::f64::consts::SQRT_2 * bound1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::czop::testutil::{random_accretive, random_function};
    use crate::dyadic::Tile;
    use crate::function_space::haar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_b_margins() {
        let grid = GridConfig::new(2).unwrap();
        let b = DyadicFunction::constant(grid, c(1.0));
        let s = TileSet::from_indices(grid, 0..grid.interior_count());
        for flavor in [AccretivityFlavor::Pseudo, AccretivityFlavor::Strong, AccretivityFlavor::Para] {
            let r = accretivity(&b, &s, flavor, 0.5, 0.25).unwrap();
            assert_eq!(r.margin, 1.0);
            assert!(r.holds);
        }
    }

    #[test]
    fn haar_b_has_zero_pseudo_margin() {
        let grid = GridConfig::new(1).unwrap();
        let b = DyadicFunction::from_real(grid, &[1.0, 1.0, -1.0, -1.0]).unwrap();
        let s = TileSet::from_intervals(grid, [grid.top()]).unwrap();
        let r = accretivity(&b, &s, AccretivityFlavor::Pseudo, 0.5, 1.0).unwrap();
        assert_eq!(r.margin, 0.0);
        assert!(!r.holds);
        assert_eq!(r.witness, Some(grid.top()));
        let p = accretivity(&b, &s, AccretivityFlavor::Para, 0.5, 0.5).unwrap();
        assert_eq!(p.margin, 1.0);
    }

    #[test]
    fn strong_rejects_finest_tiles() {
        let grid = GridConfig::new(1).unwrap();
        let b = DyadicFunction::constant(grid, c(1.0));
        assert!(matches!(
            accretivity(&b, &TileSet::full(grid), AccretivityFlavor::Strong, 0.5, 1.0),
            Err(Error::ScaleViolation(_))
        ));
        assert!(accretivity(&b, &TileSet::full(grid), AccretivityFlavor::Para, 0.5, 0.0).is_err());
    }

    #[test]
    fn accretive_b_pseudo_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=4 {
            let grid = GridConfig::new(m).unwrap();
            let b = random_accretive(&mut rng, grid, 0.3);
            let r = accretivity(&b, &TileSet::full(grid), AccretivityFlavor::Pseudo, 0.3, 1.0).unwrap();
            assert!(r.margin >= 0.3 - 1e-12);
        }
    }

    #[test]
    fn constant_b_collapses_to_haar() {
        let grid = GridConfig::new(2).unwrap();
        let b = DyadicFunction::constant(grid, c(3.0));
        for (i, p) in grid.intervals().enumerate().take(grid.interior_count()) {
            let phi = haar(grid, &Tile::lacunary(p)).unwrap();
            let dual = adapted_dual(&b, &p).unwrap();
            assert!(adapted_wavelet(&b, &p).unwrap().sub(&phi).unwrap().sup_norm() < 1e-14, "{i}");
            // ψ = φ b / (3) = φ.
            assert!(dual.sub(&phi).unwrap().sup_norm() < 1e-14);
        }
    }

    #[test]
    fn hand_computed_wavelet() {
        let grid = GridConfig::new(1).unwrap();
        let p = grid.interval(0, 0).unwrap();
        let b = DyadicFunction::from_real(grid, &[1.0, 2.0, 5.0, 5.0]).unwrap();
        let phi = adapted_wavelet(&b, &p).unwrap();
        let expect = [4.0 / 3.0, -2.0 / 3.0, 0.0, 0.0];
        for (v, e) in phi.values().iter().zip(expect) {
            assert!((v - c(e)).norm() < 1e-14);
        }
        assert!(phi.pair(&b).unwrap().norm() < 1e-14);
        let n = phi.mul(&b).unwrap().pair(&phi).unwrap();
        assert!((n - c(4.0 / 3.0)).norm() < 1e-14);
        assert!((adapted_norm(&b, &p).unwrap() - c(4.0 / 3.0)).norm() < 1e-14);
    }

    #[test]
    fn degenerate_averages() {
        let grid = GridConfig::new(1).unwrap();
        let p = grid.interval(0, 0).unwrap();
        let b = DyadicFunction::from_real(grid, &[1.0, -1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(adapted_wavelet(&b, &p), Err(Error::DegenerateAverage(_))));
        let b = DyadicFunction::from_real(grid, &[0.0, 2.0, 1.0, 1.0]).unwrap();
        assert!(matches!(adapted_dual(&b, &p), Err(Error::DegenerateAverage(_))));
        let cell = grid.interval(-1, 0).unwrap();
        assert!(matches!(adapted_wavelet(&b, &cell), Err(Error::ScaleViolation(_))));
    }

    #[test]
    fn biorthogonality_and_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for m in 1..=3 {
            let grid = GridConfig::new(m).unwrap();
            let b = random_accretive(&mut rng, grid, 0.5);
            let tiles: Vec<_> = grid.intervals().take(grid.interior_count()).collect();
            let phis: Vec<_> = tiles.iter().map(|p| adapted_wavelet(&b, p).unwrap()).collect();
            let psis: Vec<_> = tiles.iter().map(|p| adapted_dual(&b, p).unwrap()).collect();
            for (i, psi) in psis.iter().enumerate() {
                assert!(psi.integral().norm() < 1e-12);
                for (j, phi) in phis.iter().enumerate() {
                    let g = psi.pair(phi).unwrap();
                    let e = if i == j { c(1.0) } else { c(0.0) };
                    assert!((g - e).norm() < 1e-9, "({i}, {j}): {g}");
                }
            }
            let f = random_function(&mut rng, grid);
            let t = Tree::complete(grid, grid.top()).unwrap();
            let w = adapted_transform(&b, &f, &t).unwrap();
            let mut g = b.scale(f.average(&grid.top()) / b.average(&grid.top()));
            for (i, psi) in psis.iter().enumerate() {
                assert!((w.dense()[i] - f.pair(&phis[i]).unwrap()).norm() < 1e-12);
                g = g.add(&psi.scale(w.dense()[i])).unwrap();
            }
            assert!(g.sub(&f).unwrap().sup_norm() < 1e-9);
        }
    }

    #[test]
    fn accrete_select_examples() {
        let grid = GridConfig::new(1).unwrap();
        let t0 = Tree::complete(grid, grid.top()).unwrap();
        let one = DyadicFunction::constant(grid, c(1.0));
        let sel = accrete_select(&t0, &one, 0.0, 1.0).unwrap();
        assert!(sel.trees.is_empty());
        let b = DyadicFunction::from_real(grid, &[2.0, 2.0, 0.0, 0.0]).unwrap();
        let sel = accrete_select(&t0, &b, 1.0, 1.0).unwrap();
        assert_eq!(sel.trees.len(), 1);
        assert_eq!(sel.trees[0].top(), grid.interval(0, 1).unwrap());
        assert_eq!(sel.packing, 0.5);
        assert!(sel.packing <= 1.0 - sel.eps);
        assert!(matches!(accrete_select(&t0, &b, 0.5, 1.0), Err(Error::HypothesisFail(_))));
        assert!(matches!(accrete_select(&t0, &b, 1.0, 2.0), Err(Error::HypothesisFail(_))));
    }

    #[test]
    fn accrete_select_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..200 {
            let grid = GridConfig::new(1 + trial % 5).unwrap();
            let values: Vec<Complex64> = (0..grid.cells())
                .map(|_| {
                    if rng.gen_bool(0.3) {
                        c(0.0)
                    } else {
                        Complex64::new(rng.gen_range(-2.0..3.0), rng.gen_range(-1.0..1.0))
                    }
                })
                .collect();
            let b = DyadicFunction::new(grid, values).unwrap();
            let top = grid.interval_at(rng.gen_range(0..grid.interior_count()));
            let t0 = Tree::complete(grid, top).unwrap();
            let delta = b.average(&top).norm();
            if delta < 1e-3 {
                continue;
            }
            let c0 = projection_norm(&b, t0.tiles()) / top.length().sqrt();
            let sel = accrete_select(&t0, &b, c0, delta).unwrap();
            assert!(sel.packing <= 1.0 - sel.eps);
            let mut removed = TileSet::new(grid);
            for t in &sel.trees {
                removed = removed.union(t.tiles());
            }
            let avg = b.averages();
            for i in t0.tiles().difference(&removed).indices() {
                assert!(avg[i].norm() > sel.eps);
            }
        }
    }

    #[test]
    fn ortho_examples_and_bounds() {
        let grid = GridConfig::new(2).unwrap();
        let t = Tree::complete(grid, grid.top()).unwrap();
        let one = DyadicFunction::constant(grid, c(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let f = random_function(&mut rng, grid);
        let r = ortho_check(&t, &one, &f, &one).unwrap();
        assert!(r.ratio1 <= 1.0 + 1e-12);
        let z = ortho_check(&t, &one, &DyadicFunction::zeros(grid), &one).unwrap();
        assert_eq!((z.ratio1, z.ratio2), (0.0, 0.0));
        for m in 1..=5 {
            let grid = GridConfig::new(m).unwrap();
            for _ in 0..10 {
                let b = random_accretive(&mut rng, grid, 0.2);
                let bp = random_function(&mut rng, grid);
                let f = random_function(&mut rng, grid);
                let top = grid.interval_at(rng.gen_range(0..grid.interior_count()));
                let t = Tree::complete(grid, top).unwrap();
                let r = ortho_check(&t, &b, &f, &bp).unwrap();
                assert!(r.holds(), "{r:?}");
            }
        }
    }
}

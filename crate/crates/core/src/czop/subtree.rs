use num_complex::Complex64;

use super::adapted::{accrete_select, adapted_dual, adapted_transform_on, projection_norm};
use super::kernel::PerfectDyadicKernel;
use super::system::{AccretiveSystem, Side};
use crate::decompose::Measured;
use crate::dyadic::{
    child_indices, is_convex, maximal_tiles, parent_index, subtree_indices, uniform_packing_constant, DyadicInterval,
    TileSet, Tree,
};
use crate::error::{Error, Result};
use crate::function_space::{CoefficientMap, DyadicFunction};
use crate::tol::Tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `φ_Q = a β χ_{Q_l} + a′ β χ_{Q_r} + a″ b_{Q_l} + a‴ b_{Q_r}` for a buffer
/// tile `Q`, where `β = b_P` and `b_{Q_l}, b_{Q_r}` come from the system.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferTerm {
    pub tile: DyadicInterval,
    pub a: [Complex64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubtreeDecomposition {
    pub top: DyadicInterval,
    pub side: Side,
    pub eps: f64,
    /// Tiles where `b_P` is strongly pseudo-accretive.
    pub t1: TileSet,
    /// Tiles of the kept region with a child outside it, and kept finest tiles.
    pub buffer: TileSet,
    /// Complete trees with sibling-free tops.
    pub removed: Vec<Tree>,
    /// `[f]_P`.
    pub top_coefficient: Complex64,
    /// `W_{b_P} f(Q)` on `T1`.
    pub t1_coefficients: CoefficientMap,
    pub buffer_terms: Vec<BufferTerm>,
    pub measured: Measured,
}

impl SubtreeDecomposition {
    /// Advertised properties that fail on this output, re-checked from the
    /// measured constants and the tile sets.
    pub fn violations(&self) -> Vec<String> {
        let tol = Tol::default();
        let m = |k: &str| self.measured.get(k).copied().unwrap_or(f64::NAN);
        let mut out = Vec::new();
        let grid = self.t1.grid();
        let mut cover = self.t1.union(&self.buffer);
        let mut overlap = !self.t1.is_disjoint(&self.buffer);
        for t in &self.removed {
            overlap |= !cover.is_disjoint(t.tiles());
            cover = cover.union(t.tiles());
        }
        let full = TileSet::complete_tree(grid, &self.top).expect("top lies in the grid");
        if overlap || cover != full {
            out.push("T1, buffer and removed trees do not partition Tree(P)".into());
        }
        if !is_convex(&self.t1.union(&self.buffer)) {
            out.push("T1 ∪ buffer is not convex".into());
        }
        if !tol.le(m("packing"), 1.0 - self.eps, 1.0) {
            out.push(format!("removed tops pack {} > 1 - ε", m("packing")));
        }
        if !tol.le(m("buffer_uniform_packing"), 2.0, 2.0) {
            out.push(format!("buffer packing {} > 2", m("buffer_uniform_packing")));
        }
        if !(m("pseudo_margin") > 0.0) || (self.t1.indices().next().is_some() && !(m("strong_margin") > 0.0)) {
            out.push("accretivity margin vanishes".into());
        }
        if !(m("mean_star") < m("mean_threshold")) {
            out.push(format!("mean* {} reaches the threshold {}", m("mean_star"), m("mean_threshold")));
        }
        if !tol.le(m("buffer_coefficients"), m("buffer_coefficients_bound"), m("buffer_coefficients_bound")) {
            out.push(format!("buffer coefficients {} exceed {}", m("buffer_coefficients"), m("buffer_coefficients_bound")));
        }
        if !tol.accepts_residual(m("residual")) {
            out.push(format!("reconstruction residual {}", m("residual")));
        }
        out
    }
}

/// Partitions `Tree(P)` into a good tree `T1`, a buffer and removed complete
/// trees, and expands `f ∈ S(I_P)` accordingly.
///
/// Removed tops come from accretive selection (`|[b_P]| ≤ ε_acc`) and from
/// the maximal tiles whose mean of `|b_P|^2 + |op b_P|^2` reaches `B_P / ε`,
/// with `ε = ε_acc / 2` and `B_P` that mean over `I_P`.
pub fn subtree_prune(
    k: &PerfectDyadicKernel,
    p: &DyadicInterval,
    side: Side,
    sys: &AccretiveSystem,
    f: &DyadicFunction,
) -> Result<SubtreeDecomposition> {
    let tol = Tol::default();
    let grid = sys.grid();
    if k.grid() != grid || f.grid() != grid {
        return Err(Error::GridMismatch);
    }
    grid.check(p)?;
    let pi = grid.index(p);
    let range = grid.cell_range_at(pi);
    if f.values().iter().enumerate().any(|(c, v)| !range.contains(&c) && v.norm() != 0.0) {
        return Err(Error::HypothesisFail(format!("f is not supported in {p}")));
    }
    let beta = sys.function_at(side, pi);
    let op = sys.op_local(k, side, pi);
    let mut u = DyadicFunction::zeros(grid);
    for (c, (b, t)) in range.clone().zip(sys.local(side, pi).iter().zip(&op)) {
        u.values_mut()[c] = Complex64::new(b.norm_sqr() + t.norm_sqr(), 0.0);
    }
    let u_avg = u.averages();
    let b_p = u_avg[pi].re;

    let tree_p = Tree::complete(grid, *p)?;
    let c0 = projection_norm(&beta, tree_p.tiles()) / p.length().sqrt();
    let sel = accrete_select(&tree_p, &beta, c0, 1.0)?;
    let eps = sel.eps / 2.0;
    let threshold = b_p / eps;

    let mut light = TileSet::new(grid);
    for t in &sel.trees {
        light = light.union(t.tiles());
    }
    let t2 = tree_p.tiles().difference(&light);
    let heavy = TileSet::from_indices(grid, t2.indices().filter(|&i| u_avg[i].re >= threshold));

    // Maximal tops, completed, then sibling-free.
    let mut is_top = vec![false; grid.tile_count()];
    for d in maximal_tiles(&TileSet::from_intervals(grid, sel.trees.iter().map(|t| t.top()))?.union(&heavy)) {
        is_top[grid.index(&d)] = true;
    }
    let indices: Vec<usize> = subtree_indices(grid, pi).collect();
    let mut merges = 0usize;
    for &i in indices.iter().rev() {
        if i != pi && i % 2 == 0 && is_top[i] && is_top[i - 1] {
            is_top[i] = false;
            is_top[i - 1] = false;
            is_top[parent_index(i)] = true;
            merges += 1;
        }
    }
    if is_top[pi] {
        return Err(Error::PackingViolation(format!("sibling merging removed all of Tree({p})")));
    }
    let tops: Vec<usize> = indices.iter().copied().filter(|&i| is_top[i]).collect();
    let mut removed_set = TileSet::new(grid);
    let mut removed = Vec::with_capacity(tops.len());
    for &t in &tops {
        let tree = Tree::complete(grid, grid.interval_at(t))?;
        removed_set = removed_set.union(tree.tiles());
        removed.push(tree);
    }
    let t3 = tree_p.tiles().difference(&removed_set);
    let buffer = TileSet::from_indices(
        grid,
        t3.indices().filter(|&i| {
            if grid.is_finest_index(i) {
                return true;
            }
            let (l, r) = child_indices(i);
            !t3.contains_index(l) || !t3.contains_index(r)
        }),
    );
    let t1 = t3.difference(&buffer);

    let b_avg = beta.averages();
    let f_avg = f.averages();
    let top_coefficient = f_avg[pi];
    let t1_coefficients = adapted_transform_on(&beta, f, &t1)?;
    let mut buffer_terms = Vec::new();
    let mut buffer_coefficients = 0.0f64;
    for q in buffer.indices() {
        if grid.is_finest_index(q) {
            buffer_terms.push(BufferTerm { tile: grid.interval_at(q), a: [ZERO; 4] });
            continue;
        }
        let (l, r) = child_indices(q);
        if b_avg[q] == ZERO {
            return Err(Error::DegenerateAverage(grid.interval_at(q).to_string()));
        }
        let a0 = -f_avg[q] / b_avg[q];
        let a = if is_top[l] {
            if b_avg[r] == ZERO {
                return Err(Error::DegenerateAverage(grid.interval_at(r).to_string()));
            }
            [a0, a0 + f_avg[r] / b_avg[r], f_avg[l], ZERO]
        } else {
            if b_avg[l] == ZERO {
                return Err(Error::DegenerateAverage(grid.interval_at(l).to_string()));
            }
            [a0 + f_avg[l] / b_avg[l], a0, ZERO, f_avg[r]]
        };
        buffer_coefficients = buffer_coefficients.max(a.iter().map(|z| z.norm()).sum());
        buffer_terms.push(BufferTerm { tile: grid.interval_at(q), a });
    }

    let mut measured = Measured::new();
    let fsup = f.sup_norm();
    let pseudo = t3.indices().map(|i| b_avg[i].norm()).fold(f64::INFINITY, f64::min);
    measured.insert("eps".into(), eps);
    measured.insert("eps_accrete".into(), sel.eps);
    measured.insert("removed_trees".into(), removed.len() as f64);
    measured.insert("sibling_merges".into(), merges as f64);
    measured.insert("packing".into(), tops.iter().map(|&t| grid.length_at(t)).sum::<f64>() / p.length());
    measured.insert("buffer_uniform_packing".into(), uniform_packing_constant(grid, buffer.iter()));
    measured.insert("pseudo_margin".into(), pseudo);
    if t1.indices().next().is_some() {
        let strong = t1
            .indices()
            .map(|i| {
                let (l, r) = child_indices(i);
                b_avg[i].norm().min(b_avg[l].norm()).min(b_avg[r].norm())
            })
            .fold(f64::INFINITY, f64::min);
        measured.insert("strong_margin".into(), strong);
    }
    measured.insert("b_p".into(), b_p);
    measured.insert("mean_threshold".into(), threshold);
    measured.insert("mean_star".into(), t3.indices().map(|i| u_avg[i].re).fold(0.0, f64::max));
    measured.insert("buffer_coefficients".into(), if fsup > 0.0 { buffer_coefficients / fsup } else { 0.0 });
    measured.insert("buffer_coefficients_bound".into(), 1.0 + 3.0 / pseudo);

    let mut dec = SubtreeDecomposition {
        top: *p,
        side,
        eps,
        t1,
        buffer,
        removed,
        top_coefficient,
        t1_coefficients,
        buffer_terms,
        measured,
    };
    let rec = subtree_reconstruct(&dec, sys, f)?;
    let diff = rec.sub(f)?.l2_norm();
    dec.measured.insert("residual".into(), tol.relative(diff, f.l2_norm()));
    Ok(dec)
}

/// Evaluates the right-hand side of the expansion of `f`.
pub fn subtree_reconstruct(dec: &SubtreeDecomposition, sys: &AccretiveSystem, f: &DyadicFunction) -> Result<DyadicFunction> {
    let grid = sys.grid();
    let pi = grid.index(&dec.top);
    let beta = sys.function_at(dec.side, pi);
    let mut out = beta.scale(dec.top_coefficient);
    for q in dec.t1.indices() {
        let c = dec.t1_coefficients.dense()[q];
        if c != ZERO {
            out = out.add(&adapted_dual(&beta, &grid.interval_at(q))?.scale(c))?;
        }
    }
    let f_avg = f.averages();
    for t in &dec.removed {
        let ti = grid.index(&t.top());
        let b_top = sys.function_at(dec.side, ti);
        let vals = out.values_mut();
        for c in grid.cell_range_at(ti) {
            vals[c] += f.values()[c] - f_avg[ti] * b_top.values()[c];
        }
    }
    for term in &dec.buffer_terms {
        let q = grid.index(&term.tile);
        if grid.is_finest_index(q) {
            continue;
        }
        let (l, r) = child_indices(q);
        let bl = sys.function_at(dec.side, l);
        let br = sys.function_at(dec.side, r);
        let vals = out.values_mut();
        for c in grid.cell_range_at(l) {
            vals[c] += term.a[0] * beta.values()[c] + term.a[2] * bl.values()[c];
        }
        for c in grid.cell_range_at(r) {
            vals[c] += term.a[1] * beta.values()[c] + term.a[3] * br.values()[c];
        }
    }
    Ok(out)
}

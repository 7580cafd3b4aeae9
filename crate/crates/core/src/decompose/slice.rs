use std::collections::VecDeque;

use super::convexify::convexify;
use super::{partition_error, trees_below, LabeledTree, Measured, TreeDecomposition, TreeLabel};
use crate::dyadic::{ancestors, child_indices, is_convex, subtree_indices, uniform_packing_constant, TileSet, Tree};
use crate::error::{Error, Result};
use crate::function_space::{chained_mass, maximal_size, set_size, Weights};
use crate::tol::Tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAlgorithm {
    /// Exceptional large tiles, convexification and greedy growth of
    /// subtrees of size between `δ/2` and `δ`.
    Garnett,
    /// Recursive slicing into heavy, light, buffer and small pieces.
    HeavyLight,
}

impl SliceAlgorithm {
    pub fn name(&self) -> &'static str {
        match self {
            SliceAlgorithm::Garnett => "garnett",
            SliceAlgorithm::HeavyLight => "heavy_light",
        }
    }
}

/// Splits a convex tree with `size*(a, T0) ≤ C0` into trees of maximal size
/// at most `δ` plus exceptional tiles with `a(P) ≤ C0 |I_P|`.
pub fn tree_slice(t0: &Tree, a: &Weights, c0: f64, delta: f64, algorithm: SliceAlgorithm) -> Result<TreeDecomposition> {
    let tol = Tol::default();
    if !is_convex(t0.tiles()) {
        return Err(Error::HypothesisFail("T0 is not convex".into()));
    }
    if !(delta > 0.0) || !tol.le(delta, c0, c0) {
        return Err(Error::HypothesisFail(format!("need 0 < δ ≤ C0, got δ = {delta}, C0 = {c0}")));
    }
    let max = maximal_size(a, t0.tiles());
    if !tol.le(max, c0, c0) {
        return Err(Error::HypothesisFail(format!("maximal size {max} exceeds C0 = {c0}")));
    }
    let grid = t0.grid();
    let mut dec = if max <= delta {
        TreeDecomposition {
            trees: vec![LabeledTree { label: TreeLabel::Small, tree: t0.clone() }],
            exceptional: TileSet::new(grid),
            measured: Measured::new(),
        }
    } else {
        match algorithm {
            SliceAlgorithm::Garnett => garnett(t0, a, delta)?,
            SliceAlgorithm::HeavyLight => heavy_light(t0, a, delta)?,
        }
    };
    let m = &mut dec.measured;
    m.insert("trees".into(), dec.trees.len() as f64);
    m.insert("exceptional_tiles".into(), dec.exceptional.len() as f64);
    m.insert("tops_uniform_packing".into(), uniform_packing_constant(grid, dec.trees.iter().map(|t| t.tree.top())));
    m.insert("exceptional_uniform_packing".into(), uniform_packing_constant(grid, dec.exceptional.iter()));
    m.insert("c0".into(), c0);
    if algorithm == SliceAlgorithm::Garnett {
        // Padding adds at most δ|J|/2 per piece top inside J on top of C0|J|.
        m.insert("garnett_bound".into(), 4.0 * c0 / delta + 2.0);
        m.insert("exceptional_bound".into(), 2.0 * c0 / delta);
        m.insert("tops_over_2c0_delta".into(), m["tops_uniform_packing"] * delta / (2.0 * c0));
    }
    m.insert("delta".into(), delta);
    m.insert("input_maximal_size".into(), max);
    Ok(dec)
}

/// Greedy growth inside `Tree(root)`: the largest tree `T*` (grown in
/// canonical order) whose ancestor-rooted sizes stay below `half`, completed
/// by the tiles just below it.
fn greedy(grid: crate::dyadic::GridConfig, root: usize, pad: &Weights, half: f64, sum: &mut [f64]) -> TileSet {
    let mut star = TileSet::new(grid);
    let mut full = TileSet::new(grid);
    let admissible = |i: usize, sum: &[f64], star: &TileSet| {
        let w = pad.at(i);
        if !(w < half * grid.length_at(i)) {
            return false;
        }
        ancestors(i)
            .take_while(|&p| star.contains_index(p))
            .all(|p| sum[p] + w < half * grid.length_at(p))
    };
    let mut queue = VecDeque::new();
    if admissible(root, sum, &star) {
        star.insert_index(root);
        sum[root] = pad.at(root);
        queue.push_back(root);
    }
    while let Some(t) = queue.pop_front() {
        let (l, r) = child_indices(t);
        for c in [l, r] {
            if admissible(c, sum, &star) {
                let w = pad.at(c);
                star.insert_index(c);
                sum[c] = w;
                for p in ancestors(c).take_while(|&p| star.contains_index(p)) {
                    sum[p] += w;
                }
                queue.push_back(c);
            }
        }
    }
    for i in star.indices() {
        sum[i] = 0.0;
        full.insert_index(i);
        let (l, r) = child_indices(i);
        full.insert_index(l);
        full.insert_index(r);
    }
    if star.is_empty() {
        full.insert_index(root);
    }
    full
}

fn garnett(t0: &Tree, a: &Weights, delta: f64) -> Result<TreeDecomposition> {
    let grid = t0.grid();
    let tol = Tol::default();
    let half = delta / 2.0;
    let big = TileSet::from_indices(grid, t0.tiles().indices().filter(|&i| a.at(i) >= half * grid.length_at(i)));
    let pieces = convexify(t0, &big)?;
    let mut trees = Vec::new();
    let mut raise = 0.0f64;
    let mut td_violations = 0usize;
    let mut min_full_size = f64::INFINITY;
    let mut sum = vec![0.0f64; grid.tile_count()];
    for piece in &pieces {
        let q = grid.index(&piece.top());
        // Weights on Tree(q): the piece's weights, zero on the holes, and the
        // finest scale raised to δ|I|/2.
        let mut pad = Weights::zeros(grid);
        for i in subtree_indices(grid, q) {
            let w = if piece.tiles().contains_index(i) { a.at(i) } else { 0.0 };
            if grid.is_finest_index(i) {
                let target = half * grid.length_at(i);
                raise += target - w;
                pad.set_at(i, target);
            } else {
                pad.set_at(i, w);
            }
        }
        let mut queue = VecDeque::from([q]);
        while let Some(r) = queue.pop_front() {
            let full = greedy(grid, r, &pad, half, &mut sum);
            let top = grid.interval_at(r);
            let s = set_size(&pad, &full, &top);
            let ms = maximal_size(&pad, &full);
            min_full_size = min_full_size.min(s);
            if !(tol.le(half, s, delta) && tol.le(ms, delta, delta)) {
                td_violations += 1;
            }
            let kept = full.intersection(piece.tiles());
            if !kept.is_empty() {
                trees.push(LabeledTree { label: TreeLabel::Small, tree: Tree::new(top, kept)? });
            }
            for i in full.indices() {
                if !grid.is_finest_index(i) {
                    let (l, rr) = child_indices(i);
                    for c in [l, rr] {
                        if !full.contains_index(c) {
                            queue.push_back(c);
                        }
                    }
                }
            }
        }
    }
    let mut measured = Measured::new();
    measured.insert("big_tiles".into(), big.len() as f64);
    measured.insert("pieces".into(), pieces.len() as f64);
    measured.insert("padding_raise".into(), raise);
    measured.insert("td_violations".into(), td_violations as f64);
    measured.insert("td_min_size".into(), if min_full_size.is_finite() { min_full_size } else { 0.0 });
    Ok(TreeDecomposition { trees, exceptional: big, measured })
}

fn heavy_light(t0: &Tree, a: &Weights, delta: f64) -> Result<TreeDecomposition> {
    let grid = t0.grid();
    let tol = Tol::default();
    let half = delta / 2.0;
    let mut trees = Vec::new();
    let mut exceptional = TileSet::new(grid);
    let mut t2_violations = 0usize;
    let mut levels = 0usize;
    let mut light_depth = 0usize;
    let mut worst_t2 = 0.0f64;
    // (tree, first-level label, consecutive light recursions)
    let mut work: VecDeque<(Tree, Option<TreeLabel>, usize)> = VecDeque::from([(t0.clone(), None, 0)]);
    while let Some((tree, label, depth)) = work.pop_front() {
        let emit = label.unwrap_or(TreeLabel::Small);
        if maximal_size(a, tree.tiles()) <= delta {
            trees.push(LabeledTree { label: emit, tree });
            continue;
        }
        levels += 1;
        light_depth = light_depth.max(depth);
        let top = tree.top();
        let c = set_size(a, tree.tiles(), &top);
        let mass = chained_mass(a, tree.tiles());
        let fluctuates = |i: usize| (mass[i] / grid.length_at(i) - c).abs() >= half;
        let mut tops = Vec::new();
        {
            let mut blocked = vec![false; grid.tile_count()];
            for i in tree.tiles().indices() {
                let above = ancestors(i).next().is_some_and(|p| blocked[p]);
                if above || fluctuates(i) {
                    blocked[i] = true;
                    if !above {
                        tops.push(i);
                    }
                }
            }
        }
        let fluct = trees_below(tree.tiles(), &tops);
        let mut t1 = tree.tiles().clone();
        for f in &fluct {
            for i in f.tiles().indices() {
                t1.remove_index(i);
            }
        }
        let heavy_width: f64 = fluct
            .iter()
            .filter(|f| mass[grid.index(&f.top())] / f.top().length() >= c + half)
            .map(|f| f.top().length())
            .sum();
        let bound = c / (c + half) * top.length();
        worst_t2 = worst_t2.max(if bound > 0.0 { heavy_width / bound } else { 0.0 });
        if !tol.le(heavy_width, bound, top.length()) {
            t2_violations += 1;
        }
        let buffer = TileSet::from_indices(
            grid,
            t1.indices().filter(|&i| {
                grid.is_finest_index(i) || {
                    let (l, r) = child_indices(i);
                    !t1.contains_index(l) || !t1.contains_index(r)
                }
            }),
        );
        let small = convexify(&Tree::new(top, t1)?, &buffer)?;
        trees.extend(small.into_iter().map(|tree| LabeledTree { label: emit, tree }));
        exceptional = exceptional.union(&buffer);
        for f in fluct {
            let heavy = mass[grid.index(&f.top())] / f.top().length() >= c + half;
            let (lab, d) = if heavy { (TreeLabel::Heavy, 0) } else { (TreeLabel::Light, depth + 1) };
            work.push_back((f, Some(label.unwrap_or(lab)), d));
        }
    }
    let mut measured = Measured::new();
    measured.insert("slice_levels".into(), levels as f64);
    measured.insert("light_depth".into(), light_depth as f64);
    measured.insert("t2_violations".into(), t2_violations as f64);
    measured.insert("t2_worst_ratio".into(), worst_t2);
    Ok(TreeDecomposition { trees, exceptional, measured })
}

/// Re-checks a [`tree_slice`] output from the output alone.
pub fn verify_tree_slice(t0: &Tree, a: &Weights, c0: f64, delta: f64, dec: &TreeDecomposition) -> Vec<String> {
    let tol = Tol::default();
    let grid = t0.grid();
    let mut out = Vec::new();
    if let Some(e) = partition_error(t0.tiles(), dec.trees.iter().map(|t| t.tree.tiles()).chain([&dec.exceptional])) {
        out.push(format!("partition: {e}"));
    }
    for t in &dec.trees {
        let tr = &t.tree;
        if !tr.tiles().contains(&tr.top()) || tr.tiles().iter().any(|d| !d.is_subset_of(&tr.top())) {
            out.push(format!("tree at {} is malformed", tr.top()));
        }
        if !is_convex(tr.tiles()) {
            out.push(format!("tree at {} is not convex", tr.top()));
        }
        let ms = maximal_size(a, tr.tiles());
        if !tol.le(ms, delta, delta) {
            out.push(format!("tree at {} has maximal size {ms} > δ = {delta}", tr.top()));
        }
    }
    for i in dec.exceptional.indices() {
        if !tol.le(a.at(i), c0 * grid.length_at(i), c0 * grid.length_at(i)) {
            out.push(format!("exceptional tile {} violates a(P) ≤ C0|I_P|", grid.interval_at(i)));
        }
    }
    let tops = uniform_packing_constant(grid, dec.trees.iter().map(|t| t.tree.top()));
    let exc = uniform_packing_constant(grid, dec.exceptional.iter());
    for (key, value) in [("tops_uniform_packing", tops), ("exceptional_uniform_packing", exc)] {
        match dec.measured.get(key) {
            Some(&m) if m == value && m.is_finite() => {}
            other => out.push(format!("{key}: recorded {other:?}, recomputed {value}")),
        }
    }
    for (key, bound) in [("tops_uniform_packing", "garnett_bound"), ("exceptional_uniform_packing", "exceptional_bound")] {
        if let (Some(&v), Some(&b)) = (dec.measured.get(key), dec.measured.get(bound)) {
            if !tol.le(v, b, b) {
                out.push(format!("{key} = {v} exceeds {bound} = {b}"));
            }
        }
    }
    for key in ["td_violations", "t2_violations"] {
        if let Some(&v) = dec.measured.get(key) {
            if v != 0.0 {
                out.push(format!("{key} = {v}"));
            }
        }
    }
    out
}

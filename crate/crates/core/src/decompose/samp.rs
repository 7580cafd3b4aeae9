use std::collections::BTreeMap;

use crate::dyadic::{child_indices, subtree_indices, DyadicInterval, TileSet, Tree};
use crate::error::{Error, Result};
use crate::function_space::{maximal_size, Weights};
use crate::tol::Tol;

/// Witness for one complete tree `Tree(Q) ∩ S`: subtrees to remove and the
/// size bound `A` of what is left.
#[derive(Debug, Clone, PartialEq)]
pub struct SampWitness {
    pub a: f64,
    pub removed: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampReport {
    /// Largest witness level `A`.
    pub a: f64,
    pub eta: f64,
    /// `A / η`.
    pub bound: f64,
    pub maximal_size: f64,
    /// `sup_Q size(a, Tree(Q) ∩ S)`.
    pub complete_sup: f64,
    /// `bound - maximal_size`.
    pub slack: f64,
}

/// Checks the witnesses for every complete tree of `S` and asserts the
/// resulting bound `size*(a, S) ≤ A / η`.
pub fn tree_samp_bound(
    s: &TileSet,
    a: &Weights,
    witnesses: &BTreeMap<DyadicInterval, SampWitness>,
    eta: f64,
) -> Result<SampReport> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::HypothesisFail(format!("η = {eta} outside (0, 1]")));
    }
    let tol = Tol::default();
    let grid = s.grid();
    let mut level = 0.0f64;
    let mut complete_sup = 0.0f64;
    for q in s.indices() {
        let top = grid.interval_at(q);
        let w = witnesses
            .get(&top)
            .ok_or_else(|| Error::WitnessInvalid(format!("no witness for the tree at {top}")))?;
        let mut left = TileSet::from_indices(grid, subtree_indices(grid, q).filter(|&i| s.contains_index(i)));
        let total: f64 = left.indices().map(|i| a.at(i)).sum();
        complete_sup = complete_sup.max(total / top.length());
        let mut width = 0.0;
        for t in &w.removed {
            if !t.top().is_subset_of(&top) {
                return Err(Error::WitnessInvalid(format!("removed tree at {} is not below {top}", t.top())));
            }
            for i in t.tiles().indices() {
                if !left.remove_index(i) {
                    return Err(Error::WitnessInvalid(format!(
                        "tile {} of the removed tree at {} is outside the tree or removed twice",
                        grid.interval_at(i),
                        t.top()
                    )));
                }
            }
            width += t.top().length();
        }
        let rest: f64 = left.indices().map(|i| a.at(i)).sum::<f64>() / top.length();
        if !tol.le(rest, w.a, w.a) {
            return Err(Error::WitnessInvalid(format!("tree at {top}: remaining size {rest} exceeds A = {}", w.a)));
        }
        if !tol.le(width, (1.0 - eta) * top.length(), top.length()) {
            return Err(Error::WitnessInvalid(format!(
                "tree at {top}: removed tops have total length {width} > (1 - η)|I| = {}",
                (1.0 - eta) * top.length()
            )));
        }
        level = level.max(w.a);
    }
    let bound = level / eta;
    let max = maximal_size(a, s);
    if !tol.le(max, bound, bound) || !tol.le(complete_sup, bound, bound) {
        return Err(Error::WitnessInvalid(format!("maximal size {max} exceeds A/η = {bound}")));
    }
    Ok(SampReport { a: level, eta, bound, maximal_size: max, complete_sup, slack: bound - max })
}

/// Checks the level-set hypothesis on every complete tree of `S`, builds the
/// witnesses from the maximal tiles of the level set and delegates to
/// [`tree_samp_bound`].
pub fn good_lambda(s: &TileSet, a: &Weights, level: f64, eta: f64) -> Result<SampReport> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::HypothesisFail(format!("η = {eta} outside (0, 1]")));
    }
    let tol = Tol::default();
    let grid = s.grid();
    let mut witnesses = BTreeMap::new();
    let mut v = vec![0.0f64; grid.tile_count()];
    for q in s.indices() {
        let top = grid.interval_at(q);
        let member = |i: usize| s.contains_index(i);
        // v(P) = Σ a(P')/|I_P'| over members P' of Tree(Q) with P ≤ P'.
        let mut tops = Vec::new();
        let mut measure = 0.0;
        for i in subtree_indices(grid, q) {
            let own = if member(i) { a.at(i) / grid.length_at(i) } else { 0.0 };
            v[i] = if i == q { own } else { v[crate::dyadic::parent_index(i)] + own };
            if grid.is_finest_index(i) && v[i] >= level {
                measure += grid.length_at(i);
            }
        }
        if !tol.le(measure, (1.0 - eta) * top.length(), top.length()) {
            return Err(Error::HypothesisFail(format!(
                "tree at {top}: level set of measure {measure} exceeds (1 - η)|I| = {}",
                (1.0 - eta) * top.length()
            )));
        }
        let mut blocked = TileSet::new(grid);
        for i in subtree_indices(grid, q) {
            if blocked.contains_index(i) {
                if !grid.is_finest_index(i) {
                    let (l, r) = child_indices(i);
                    blocked.insert_index(l);
                    blocked.insert_index(r);
                }
                continue;
            }
            if member(i) && v[i] >= level {
                tops.push(i);
                blocked.insert_index(i);
                if !grid.is_finest_index(i) {
                    let (l, r) = child_indices(i);
                    blocked.insert_index(l);
                    blocked.insert_index(r);
                }
            }
        }
        let removed = tops
            .iter()
            .map(|&t| {
                let tiles = TileSet::from_indices(grid, subtree_indices(grid, t).filter(|&i| member(i)));
                Tree::new(grid.interval_at(t), tiles)
            })
            .collect::<Result<Vec<_>>>()?;
        witnesses.insert(top, SampWitness { a: level, removed });
    }
    if witnesses.is_empty() {
        return Ok(SampReport { a: level, eta, bound: level / eta, maximal_size: 0.0, complete_sup: 0.0, slack: level / eta });
    }
    tree_samp_bound(s, a, &witnesses, eta)
}

use super::{partition_error, trees_below, Measured};
use crate::dyadic::{is_convex, parent_index, TileSet, Tree};
use crate::error::{Error, Result};
use crate::function_space::{chained_mass, maximal_mean, maximal_size, size, DyadicFunction, Weights};
use crate::tol::Tol;

/// Output of a Calderón–Zygmund selection at level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub n: i32,
    pub trees: Vec<Tree>,
    pub remainder: TileSet,
    pub measured: Measured,
}

/// Maximal members (under `≤'`) of `s` satisfying `eligible`.
fn maximal_eligible(s: &TileSet, eligible: impl Fn(usize) -> bool) -> Vec<usize> {
    let grid = s.grid();
    let mut blocked = vec![false; grid.tile_count()];
    let mut tops = Vec::new();
    for i in 0..grid.tile_count() {
        let above = i > 0 && blocked[parent_index(i)];
        if above {
            blocked[i] = true;
        } else if s.contains_index(i) && eligible(i) {
            blocked[i] = true;
            tops.push(i);
        }
    }
    tops
}

fn finish(s: &TileSet, n: i32, trees: Vec<Tree>, mut measured: Measured) -> Selection {
    let mut remainder = s.clone();
    for t in &trees {
        for i in t.tiles().indices() {
            remainder.remove_index(i);
        }
    }
    measured.insert("trees".into(), trees.len() as f64);
    Selection { n, trees, remainder, measured }
}

/// Selects the maximal `Q ∈ P_n` with `size(a, Tree(Q) ∩ P_n) ≥ 2^{n-1}`.
pub fn tree_select(p_n: &TileSet, a: &Weights, n: i32) -> Result<Selection> {
    if !is_convex(p_n) {
        return Err(Error::NonConvexTree);
    }
    let level = (n as f64).exp2();
    let tol = Tol::default();
    let max = maximal_size(a, p_n);
    if !tol.le(max, level, level) {
        return Err(Error::SizeHypothesisFail(format!("maximal size {max} exceeds 2^{n}")));
    }
    let grid = p_n.grid();
    let mass = chained_mass(a, p_n);
    let half = level / 2.0;
    let tops = maximal_eligible(p_n, |i| mass[i] >= half * grid.length_at(i));
    let trees = trees_below(p_n, &tops);
    Ok(finish(p_n, n, trees, Measured::new()))
}

/// Selects the maximal `Q ∈ P_n` with `[|f|]_{I_Q} ≥ 2^{n-1}`.
pub fn mean_select(p_n: &TileSet, f: &DyadicFunction, n: i32) -> Result<Selection> {
    if !is_convex(p_n) {
        return Err(Error::NonConvexTree);
    }
    let level = (n as f64).exp2();
    let tol = Tol::default();
    let max = maximal_mean(f, p_n);
    if !tol.le(max, level, level) {
        return Err(Error::MeanHypothesisFail(format!("maximal mean {max} exceeds 2^{n}")));
    }
    let avg = f.abs().averages();
    let half = level / 2.0;
    let tops = maximal_eligible(p_n, |i| avg[i].re >= half);
    let trees = trees_below(p_n, &tops);
    // Each top has mean ≥ 2^{n-1}, hence Σ|I_T| ≤ 4·2^{-n} ∫_{|f| ≥ 2^{n-2}} |f|.
    let width: f64 = trees.iter().map(|t| t.top().length()).sum();
    let w = f.grid().cell_width();
    let tail = |t: f64| f.values().iter().map(|v| v.norm()).filter(|&v| v >= t).sum::<f64>() * w;
    let mut measured = Measured::new();
    let ratio = |mass: f64| if width == 0.0 { 0.0 } else { width / (mass / level) };
    measured.insert("cheb_constant".into(), ratio(tail(level / 4.0)));
    measured.insert("cheb_constant_half".into(), ratio(tail(half)));
    measured.insert("tree_width".into(), width);
    Ok(finish(p_n, n, trees, measured))
}

fn common_checks(p_n: &TileSet, sel: &Selection, out: &mut Vec<String>) {
    let grid = p_n.grid();
    if let Some(e) = partition_error(p_n, sel.trees.iter().map(|t| t.tiles()).chain(std::iter::once(&sel.remainder))) {
        out.push(format!("partition: {e}"));
    }
    for t in &sel.trees {
        let complete = TileSet::complete_tree(grid, &t.top()).map(|c| c.intersection(p_n));
        if complete.as_ref().ok() != Some(t.tiles()) {
            out.push(format!("tree at {} is not complete in the input", t.top()));
        }
        if !is_convex(t.tiles()) {
            out.push(format!("tree at {} is not convex", t.top()));
        }
    }
    for (x, s) in sel.trees.iter().enumerate() {
        for t in &sel.trees[x + 1..] {
            if !s.top().is_disjoint_from(&t.top()) {
                out.push(format!("tops {} and {} overlap", s.top(), t.top()));
            }
        }
    }
    if !is_convex(&sel.remainder) {
        out.push("remainder is not convex".into());
    }
}

/// Re-checks every advertised property of a [`tree_select`] output.
pub fn verify_tree_select(p_n: &TileSet, a: &Weights, sel: &Selection) -> Vec<String> {
    let mut out = Vec::new();
    common_checks(p_n, sel, &mut out);
    let tol = Tol::default();
    let level = (sel.n as f64).exp2();
    for t in &sel.trees {
        let s = size(a, t);
        let ms = maximal_size(a, t.tiles());
        if !(s >= level / 2.0 && tol.le(s, level, level) && tol.le(ms, level, level)) {
            out.push(format!("tree at {}: size {s}, maximal size {ms} outside [2^{{n-1}}, 2^n]", t.top()));
        }
    }
    let rest = maximal_size(a, &sel.remainder);
    if !tol.le(rest, level / 2.0, level) {
        out.push(format!("remainder maximal size {rest} exceeds 2^{{n-1}}"));
    }
    out
}

/// Re-checks every advertised property of a [`mean_select`] output.
pub fn verify_mean_select(p_n: &TileSet, f: &DyadicFunction, sel: &Selection) -> Vec<String> {
    let mut out = Vec::new();
    common_checks(p_n, sel, &mut out);
    let tol = Tol::default();
    let level = (sel.n as f64).exp2();
    let avg = f.abs().averages();
    let grid = p_n.grid();
    for t in &sel.trees {
        let m = avg[grid.index(&t.top())].re;
        let mm = maximal_mean(f, t.tiles());
        if !(m >= level / 2.0 && tol.le(m, level, level) && tol.le(mm, level, level)) {
            out.push(format!("tree at {}: top mean {m}, maximal mean {mm} outside [2^{{n-1}}, 2^n]", t.top()));
        }
    }
    let rest = maximal_mean(f, &sel.remainder);
    if !(rest < level / 2.0 || sel.remainder.is_empty()) {
        out.push(format!("remainder maximal mean {rest} is not below 2^{{n-1}}"));
    }
    if sel.measured.get("cheb_constant").copied().unwrap_or(0.0) > 4.0 * (1.0 + tol.rel) {
        out.push("tree width exceeds 4·2^{-n}∫_{|f|≥2^{n-2}}|f|".into());
    }
    out
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::dyadic::GridConfig;
    use crate::testutil::{random_complex, random_convex_set, random_weights};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tree_select_postconditions(m in 1u32..=5, seed: u64, n in -3i32..4, fill in 0.05f64..1.0) {
            let grid = GridConfig::new(m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let keep = rng.gen_range(0.5..1.0);
            let s = random_convex_set(&mut rng, grid, 0.3, keep);
            let a = random_weights(&mut rng, grid, 0.3);
            let max = maximal_size(&a, &s);
            let a = if max > 0.0 { a.scaled(fill * (n as f64).exp2() / max) } else { a };
            let sel = tree_select(&s, &a, n).unwrap();
            prop_assert!(verify_tree_select(&s, &a, &sel).is_empty(), "{:?}", verify_tree_select(&s, &a, &sel));
        }

        #[test]
        fn mean_select_postconditions(m in 1u32..=5, seed: u64, n in -3i32..4, fill in 0.05f64..1.0) {
            let grid = GridConfig::new(m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let keep = rng.gen_range(0.5..1.0);
            let s = random_convex_set(&mut rng, grid, 0.3, keep);
            let f = random_complex(&mut rng, grid);
            let max = maximal_mean(&f, &s);
            let f = if max > 0.0 { f.scale(Complex64::new(fill * (n as f64).exp2() / max, 0.0)) } else { f };
            let sel = mean_select(&s, &f, n).unwrap();
            prop_assert!(verify_mean_select(&s, &f, &sel).is_empty(), "{:?}", verify_mean_select(&s, &f, &sel));
        }
    }
}

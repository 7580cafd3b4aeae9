//! Stopping-time decompositions and their postconditions.

use dhap_core::czop::{accrete_eps, accrete_select, subtree_prune, Side};
use dhap_core::decompose::{
    convexify, mean_select, tree_select, tree_slice, verify_convexify, verify_mean_select, verify_tree_select,
    verify_tree_slice, SliceAlgorithm,
};
use dhap_core::function_space::{maximal_mean, maximal_size, wavelet_transform, DyadicFunction, Weights};
use dhap_core::{is_convex, maximal_tiles, Complex64, GridConfig, TileSet, Tree};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{grid_upto, ok, Item};
use crate::config::RunConfig;
use crate::gen;
use crate::report::TrialLog;

/// Largest grid for the randomized decomposition items.
pub const DECOMPOSE_MAX_M: u32 = 5;

pub(super) const ITEMS: &[Item] = &[
    Item::trial("decompose", "tree_select", select_trees),
    Item::trial("decompose", "mean_select", select_means),
    Item::trial("decompose", "tree_slice_garnett", slice_garnett),
    Item::trial("decompose", "tree_slice_heavy_light", slice_heavy_light),
    Item::fixed("decompose", "tree_slice_fixtures", slice_fixtures),
    Item::trial("decompose", "convexify", convexify_trees),
    Item::trial("decompose", "accrete_select", accrete),
    Item::trial("decompose", "subtree_prune", prune),
];

fn report(log: &mut TrialLog, name: &str, violations: Vec<String>) {
    log.sum(&format!("{name}_violations"), violations.len() as f64);
    log.check(name, violations.is_empty(), || violations.join("; "));
}

/// Smallest `n` with `x ≤ 2^n`.
fn exponent_above(x: f64) -> i32 {
    if x > 0.0 {
        x.log2().ceil() as i32
    } else {
        0
    }
}

fn sparse_weights(rng: &mut ChaCha8Rng, grid: GridConfig) -> Weights {
    let a = gen::weights(rng, grid);
    let scale = 2f64.powf(rng.gen_range(-3.0..3.0));
    a.scaled(scale)
}

fn select_trees(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, DECOMPOSE_MAX_M);
    let density = rng.gen_range(0.1..1.0);
    let s = gen::random_convex_set(rng, grid, 0.3, density);
    let a = sparse_weights(rng, grid);
    let n = exponent_above(maximal_size(&a, &s));
    let Some(sel) = ok(log, "tree_select", tree_select(&s, &a, n)) else { return };
    log.max("trees", sel.trees.len() as f64);
    report(log, "tree_select", verify_tree_select(&s, &a, &sel));
}

fn select_means(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, DECOMPOSE_MAX_M);
    let density = rng.gen_range(0.1..1.0);
    let s = gen::random_convex_set(rng, grid, 0.3, density);
    let mut f = gen::function(rng, grid);
    if rng.gen_bool(0.5) {
        let power = rng.gen_range(2..8);
        f = f.map(|v| v.powi(power) * 20.0);
    }
    let n = exponent_above(maximal_mean(&f.abs(), &s));
    let Some(sel) = ok(log, "mean_select", mean_select(&s, &f, n)) else { return };
    for key in ["cheb_constant", "cheb_constant_half", "tree_width"] {
        if let Some(&v) = sel.measured.get(key) {
            log.max(key, v);
        }
    }
    report(log, "mean_select", verify_mean_select(&s, &f, &sel));
}

/// Convex input tree: the complete tree of a random tile, or a random rooted
/// subtree of it.
fn input_tree(rng: &mut ChaCha8Rng, grid: GridConfig) -> Tree {
    let top = grid.interval_at(rng.gen_range(0..grid.interior_count().max(1)));
    let full = Tree::complete(grid, top).expect("complete tree");
    if rng.gen_bool(0.5) {
        return full;
    }
    let keep = rng.gen_range(0.6..1.0);
    let mut tiles = TileSet::new(grid);
    let root = grid.index(&top);
    let mut stack = vec![root];
    while let Some(i) = stack.pop() {
        tiles.insert_index(i);
        if !grid.is_finest_index(i) {
            for c in [2 * i + 1, 2 * i + 2] {
                if rng.gen_bool(keep) {
                    stack.push(c);
                }
            }
        }
    }
    Tree::new(top, tiles).expect("rooted subtree")
}

fn slice(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog, algorithm: SliceAlgorithm) {
    let grid = grid_upto(cfg, DECOMPOSE_MAX_M);
    let t0 = input_tree(rng, grid);
    let a = sparse_weights(rng, grid);
    let c0 = maximal_size(&a, t0.tiles()).max(1e-6);
    let delta = c0 * rng.gen_range(0.05..1.0);
    let Some(dec) = ok(log, "tree_slice", tree_slice(&t0, &a, c0, delta, algorithm)) else { return };
    for (k, v) in &dec.measured {
        if matches!(k.as_str(), "tops_uniform_packing" | "exceptional_uniform_packing" | "tops_over_2c0_delta" | "td_min_size" | "t2_worst_ratio" | "slice_levels" | "padding_raise") {
            log.max(k, *v);
        }
    }
    report(log, "tree_slice", verify_tree_slice(&t0, &a, c0, delta, &dec));
}

fn slice_garnett(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    slice(cfg, rng, log, SliceAlgorithm::Garnett);
}

fn slice_heavy_light(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    slice(cfg, rng, log, SliceAlgorithm::HeavyLight);
}

/// Zero weights give one small tree; uniform weights give Garnett trees of
/// size between `δ/2` and `δ`.
fn slice_fixtures(cfg: &RunConfig, _: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 4);
    let t0 = Tree::complete(grid, grid.top()).expect("complete tree");
    for algorithm in [SliceAlgorithm::Garnett, SliceAlgorithm::HeavyLight] {
        let zero = Weights::zeros(grid);
        match tree_slice(&t0, &zero, 1.0, 1.0, algorithm) {
            Ok(dec) => log.check("zero_weights_single_tree", dec.trees.len() == 1 && dec.exceptional.is_empty(), || {
                format!("{} trees, {} exceptional", dec.trees.len(), dec.exceptional.len())
            }),
            Err(e) => {
                log.error("zero_weights_single_tree", &e);
                false
            }
        };
    }
    let mut a = Weights::zeros(grid);
    for i in 0..grid.tile_count() {
        a.set_at(i, 0.25 * grid.length_at(i));
    }
    let c0 = maximal_size(&a, t0.tiles());
    let delta = c0 / 3.0;
    if let Some(dec) = ok(log, "uniform_fixture", tree_slice(&t0, &a, c0, delta, SliceAlgorithm::Garnett)) {
        let sizes: Vec<f64> = dec.trees.iter().map(|t| maximal_size(&a, t.tree.tiles())).collect();
        let within = sizes.iter().all(|&s| s <= delta * (1.0 + 1e-12));
        log.check("uniform_fixture", within && verify_tree_slice(&t0, &a, c0, delta, &dec).is_empty(), || {
            format!("sizes {sizes:?} against δ = {delta}")
        });
    }
}

fn convexify_trees(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, DECOMPOSE_MAX_M);
    let t = input_tree(rng, grid);
    let p = rng.gen_range(0.0..0.6);
    let removed = TileSet::from_indices(grid, t.tiles().indices().filter(|_| rng.gen_bool(p)));
    let Some(trees) = ok(log, "convexify", convexify(&t, &removed)) else { return };
    log.max("trees", trees.len() as f64);
    report(log, "convexify", verify_convexify(&t, &removed, &trees));
}

/// `b = 1 + c g` for random `g`: averages of `b` vary in sign at fine scales.
fn accrete(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, DECOMPOSE_MAX_M);
    let t0 = input_tree(rng, grid);
    let c = rng.gen_range(0.5..4.0);
    let g = gen::function(rng, grid);
    let b = g.map(|v| Complex64::new(1.0, 0.0) + v * c);
    let top = t0.top();
    let w = wavelet_transform(&b);
    let proj = t0.tiles().indices().map(|i| w.dense()[i].norm_sqr()).sum::<f64>().sqrt();
    let c0 = proj / top.length().sqrt() * rng.gen_range(1.0..2.0);
    let delta = b.average(&top).norm();
    if !(delta > 0.0) {
        return;
    }
    let Some(sel) = ok(log, "accrete_select", accrete_select(&t0, &b, c0, delta)) else { return };
    let mut violations = Vec::new();
    let eps0 = accrete_eps(c0, delta);
    let expect = if sel.retried { eps0 / 2.0 } else { eps0 };
    if sel.eps != expect {
        violations.push(format!("ε = {} but the computed value is {expect}", sel.eps));
    }
    let avg = b.averages();
    let small = TileSet::from_indices(grid, t0.tiles().indices().filter(|&i| avg[i].norm() <= sel.eps));
    let tops = maximal_tiles(&small);
    let got: Vec<_> = sel.trees.iter().map(|t| t.top()).collect();
    if got != tops {
        violations.push(format!("tops {got:?} differ from the maximal small tiles {tops:?}"));
    }
    let packing = tops.iter().map(|d| d.length()).sum::<f64>() / top.length();
    if packing > (1.0 - sel.eps) * (1.0 + 1e-12) || (packing - sel.packing).abs() > 1e-12 {
        violations.push(format!("packing {packing} (reported {}) against 1 - ε = {}", sel.packing, 1.0 - sel.eps));
    }
    for t in &sel.trees {
        let want = TileSet::complete_tree(grid, &t.top()).expect("tile").intersection(t0.tiles());
        if *t.tiles() != want || !is_convex(t.tiles()) {
            violations.push(format!("tree at {} is not Tree(Q) ∩ T0", t.top()));
        }
    }
    log.max("packing_over_one_minus_eps", packing / (1.0 - sel.eps));
    log.sum("retried", if sel.retried { 1.0 } else { 0.0 });
    report(log, "accrete_select", violations);
}

fn local_function(rng: &mut ChaCha8Rng, grid: GridConfig, p: &dhap_core::DyadicInterval) -> DyadicFunction {
    gen::function(rng, grid).restrict(p)
}

fn prune(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, DECOMPOSE_MAX_M);
    let k = gen::kernel(rng, grid);
    let sys = gen::accretive_system(rng, grid);
    let p = grid.interval_at(rng.gen_range(0..grid.interior_count()));
    let f = local_function(rng, grid, &p);
    for side in [Side::B1, Side::B2] {
        let Some(dec) = ok(log, "subtree_prune", subtree_prune(&k, &p, side, &sys, &f)) else { continue };
        for key in ["buffer_uniform_packing", "packing", "mean_star", "buffer_coefficients", "residual"] {
            if let Some(&v) = dec.measured.get(key) {
                log.max(key, v);
            }
        }
        if let (Some(&pack), Some(&eps)) = (dec.measured.get("packing"), dec.measured.get("eps")) {
            log.max("removed_packing_over_one_minus_eps", pack / (1.0 - eps));
        }
        report(log, "subtree_prune", dec.violations());
    }
}

//! Tile combinatorics: order, nesting, convexity, packing.

use dhap_core::{
    doubled_tiles, is_convex, maximal_tiles, packing_constant, tile_leq, uniform_packing_constant, DyadicInterval,
    GridConfig, Tile, TileSet, Tree,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{close, grid_upto, Item};
use crate::config::RunConfig;
use crate::gen;
use crate::report::TrialLog;

pub(super) const ITEMS: &[Item] = &[
    Item::fixed("core", "order", order),
    Item::fixed("core", "examples", examples),
    Item::trial("core", "convexity", convexity),
    Item::trial("core", "packing", packing),
];

/// Exhaustive index, order and nesting checks on every grid up to `min(M, 4)`.
fn order(cfg: &RunConfig, _: &mut ChaCha8Rng, log: &mut TrialLog) {
    for m in 1..=cfg.m.min(4) {
        let grid = GridConfig::new(m).expect("valid M");
        let all: Vec<DyadicInterval> = grid.intervals().collect();
        let mut index_ok = all.len() == grid.tile_count();
        let mut nest_ok = true;
        let mut order_ok = true;
        let mut family_ok = true;
        for (i, a) in all.iter().enumerate() {
            index_ok &= grid.index(a) == i && grid.interval_at(i) == *a;
            index_ok &= grid.cell_range_at(i).len() == grid.cells_in(i);
            index_ok &= close(a.length(), grid.cells_in(i) as f64 * grid.cell_width(), 1e-15);
            if !grid.is_finest_index(i) {
                let (l, r) = a.children(&grid).expect("interior tile");
                family_ok &= grid.index(&l) == 2 * i + 1 && grid.index(&r) == 2 * i + 2;
                family_ok &= l.parent(&grid).ok() == Some(*a) && r.parent(&grid).ok() == Some(*a);
                family_ok &= l.end() == r.start() && l.start() == a.start() && r.end() == a.end();
            }
            for (j, b) in all.iter().enumerate() {
                let meet = a.start() < b.end() && b.start() < a.end();
                let sub = a.is_subset_of(b);
                let ancestor = {
                    let mut x = i;
                    while x > j {
                        x = (x - 1) / 2;
                    }
                    x == j
                };
                nest_ok &= !meet || sub || b.is_subset_of(a);
                nest_ok &= meet != a.is_disjoint_from(b);
                nest_ok &= sub == ancestor;
                order_ok &= tile_leq(&Tile::lacunary(*a), &Tile::lacunary(*b)) == sub;
                order_ok &= (i.cmp(&j)) == a.cmp(b);
                if sub && b.is_subset_of(a) {
                    order_ok &= i == j;
                }
            }
        }
        // Transitivity on a strided sample of triples.
        let n = all.len();
        let step = (n / 40).max(1);
        for i in (0..n).step_by(step) {
            for j in (0..n).step_by(step) {
                for k in (0..n).step_by(step) {
                    let (a, b, c) = (&all[i], &all[j], &all[k]);
                    if a.is_subset_of(b) && b.is_subset_of(c) {
                        order_ok &= a.is_subset_of(c);
                    }
                }
            }
        }
        log.check("index_roundtrip", index_ok, || format!("M = {m}"));
        log.check("children_parent", family_ok, || format!("M = {m}"));
        log.check("nesting", nest_ok, || format!("M = {m}"));
        log.check("partial_order", order_ok, || format!("M = {m}"));
    }
}

fn iv(grid: &GridConfig, k: i32, j: u64) -> DyadicInterval {
    grid.interval(k, j).expect("fixture interval")
}

/// Hand-computed fixtures.
fn examples(_: &RunConfig, _: &mut ChaCha8Rng, log: &mut TrialLog) {
    let g1 = GridConfig::new(1).expect("valid M");
    let t = Tree::complete(g1, iv(&g1, 0, 0)).expect("complete tree");
    let expect = [iv(&g1, 0, 0), iv(&g1, -1, 0), iv(&g1, -1, 1)];
    let mut got: Vec<_> = t.tiles().iter().collect();
    got.sort();
    let mut want = expect.to_vec();
    want.sort();
    log.check("complete_tree_example", got == want, || format!("{got:?}"));
    let gap = TileSet::from_intervals(g1, [g1.top(), iv(&g1, -1, 0)]).expect("tiles");
    log.check("convex_gap_example", !is_convex(&gap), String::new);
    log.check("convex_empty", is_convex(&TileSet::new(g1)), String::new);

    let g2 = GridConfig::new(2).expect("valid M");
    let s = [iv(&g2, 0, 0), iv(&g2, 0, 1), iv(&g2, 1, 0)];
    let top = g2.top();
    let plain = packing_constant(s.iter().copied(), &top);
    let uniform = uniform_packing_constant(g2, s.iter().copied());
    log.check("packing_example", close(plain, 1.0, 1e-15) && close(uniform, 2.0, 1e-15), || {
        format!("non-uniform {plain}, uniform {uniform}")
    });
    log.check("packing_top_and_empty", packing_constant([top], &top) == 1.0 && packing_constant([], &top) == 0.0, String::new);
    let halves = TileSet::from_intervals(g1, [iv(&g1, -1, 0), iv(&g1, -1, 1)]).expect("tiles");
    let d = doubled_tiles(&halves).map(|d| d.iter().collect::<Vec<_>>());
    log.check("doubled_example", d.as_ref().ok() == Some(&vec![iv(&g1, 0, 0)]), || format!("{d:?}"));
    log.check("doubled_top_rejected", doubled_tiles(&TileSet::full(g1)).is_err(), String::new);
}

/// `is_convex` against the chain definition, and complete trees.
fn convexity(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 3);
    let p = rng.gen_range(0.0..1.0);
    let s = gen::random_set(rng, grid, p);
    let brute = brute_convex(&s);
    log.check("convex_vs_definition", is_convex(&s) == brute, || format!("brute {brute}, density {p}"));
    let keep = rng.gen_range(0.0..1.0);
    let c = gen::random_convex_set(rng, grid, 0.3, keep);
    log.check("generated_convex", is_convex(&c) && brute_convex(&c), String::new);
    let q = grid.interval_at(rng.gen_range(0..grid.tile_count()));
    let t = Tree::complete(grid, q).expect("complete tree");
    log.check("complete_tree_convex", is_convex(t.tiles()), || format!("{q}"));
}

fn brute_convex(s: &TileSet) -> bool {
    let grid = s.grid();
    let members: Vec<DyadicInterval> = s.iter().collect();
    members.iter().all(|a| {
        members
            .iter()
            .filter(|b| a.is_proper_subset_of(b))
            .all(|b| grid.intervals().all(|r| !(a.is_subset_of(&r) && r.is_subset_of(b)) || s.contains(&r)))
    })
}

/// Maximal tiles, uniform packing and doubling against brute force.
fn packing(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 4);
    let p = rng.gen_range(0.0..0.5);
    let s = gen::random_set(rng, grid, p);
    let max = maximal_tiles(&s);
    let brute: Vec<DyadicInterval> = s.iter().filter(|a| !s.iter().any(|b| a.is_proper_subset_of(&b))).collect();
    log.check("maximal_tiles", max == brute, || format!("{} vs {} tiles", max.len(), brute.len()));
    let disjoint = max.iter().enumerate().all(|(i, a)| max[i + 1..].iter().all(|b| a.is_disjoint_from(b)));
    log.check("maximal_disjoint", disjoint, String::new);
    let mut best = 0.0f64;
    for j in grid.intervals() {
        best = best.max(packing_constant(s.iter().filter(|d| d.is_subset_of(&j)), &j));
    }
    let uniform = uniform_packing_constant(grid, s.iter());
    log.check("uniform_packing", close(uniform, best, 1e-12), || format!("{uniform} vs {best}"));
    let below_top = TileSet::from_indices(grid, s.indices().filter(|&i| i != 0));
    match doubled_tiles(&below_top) {
        Ok(d) => {
            let mut parents: Vec<DyadicInterval> = below_top.iter().map(|x| x.parent(&grid).expect("below top")).collect();
            parents.sort();
            parents.dedup();
            log.check("doubled_parents", d.iter().collect::<Vec<_>>() == parents, String::new);
            let before = uniform_packing_constant(grid, below_top.iter());
            let after = uniform_packing_constant(grid, d.iter());
            log.check("doubled_packing", after <= 2.0 * before * (1.0 + 1e-12), || format!("{after} > 2 * {before}"));
        }
        Err(e) => log.error("doubled_parents", &e),
    }
}

//! Haar transform, maximal functions, sizes and norms.

use dhap_core::decompose::john_nirenberg_check;
use dhap_core::function_space::{
    bmo_norm, cancellative_maximal, haar, hardy_littlewood, lp_norm, maximal_size, reconstruct, set_size,
    square_function, wavelet_transform, weak_lp_norm, weak_lp_witness, DyadicFunction, Weights,
};
use dhap_core::{Complex64, Tile, TileSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{close, grid_upto, ok, Item};
use crate::config::RunConfig;
use crate::gen;
use crate::report::TrialLog;

pub(super) const ITEMS: &[Item] = &[
    Item::trial("norms", "parseval", parseval),
    Item::trial("norms", "haar_pairings", haar_pairings),
    Item::trial("norms", "maximal_functions", maximal_functions),
    Item::trial("norms", "bmo", bmo),
    Item::trial("norms", "maximal_size", maximal_size_oracles),
    Item::trial("norms", "weak_lp", weak_lp),
    Item::trial("norms", "john_nirenberg", john_nirenberg),
];

/// Energy identity, inversion and the square function at the configured `M`.
fn parseval(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let f = gen::function(rng, grid);
    let w = wavelet_transform(&f);
    let top = grid.top();
    let energy: f64 = w.dense().iter().map(|v| v.norm_sqr()).sum::<f64>() + f.integral().norm_sqr() / top.length();
    let l2 = f.l2_norm().powi(2);
    let res = cfg.tol.relative((energy - l2).abs(), l2);
    log.max("parseval_residual", res);
    log.check("parseval", res <= cfg.tol.rel, || format!("residual {res:e}"));
    let avg = f.average(&top);
    let back = reconstruct(&w);
    let diff = back.values().iter().zip(f.values()).map(|(a, b)| (a + avg - b).norm()).fold(0.0, f64::max);
    let res = cfg.tol.relative(diff, f.sup_norm());
    log.max("inversion_residual", res);
    log.check("inversion", res <= cfg.tol.rel, || format!("residual {res:e}"));
    let s = square_function(&f);
    let centred = f.map(|v| v - avg);
    let res = cfg.tol.relative((s.l2_norm() - centred.l2_norm()).abs(), centred.l2_norm());
    log.max("square_function_residual", res);
    log.check("square_function_l2", res <= cfg.tol.rel, || format!("residual {res:e}"));
}

/// `W f(P)` against the pairing with the Haar function of `P`.
fn haar_pairings(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 3);
    let f = gen::function(rng, grid);
    let w = wavelet_transform(&f);
    let mut worst = 0.0f64;
    for d in grid.intervals().take(grid.interior_count()) {
        let Some(h) = ok(log, "haar", haar(grid, &Tile::lacunary(d))) else { return };
        let direct = f.pair(&h).expect("same grid");
        worst = worst.max((direct - w.get(&d)).norm());
    }
    log.max("pairing_error", worst);
    log.check("transform_vs_pairings", worst <= 1e-12, || format!("max error {worst:e}"));
}

/// Dyadic maximal functions against the maximum over all containing intervals.
fn maximal_functions(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 3);
    let f = gen::function(rng, grid);
    let mt = cancellative_maximal(&f);
    let mh = hardy_littlewood(&f);
    let mut worst = 0.0f64;
    for c in 0..grid.cells() {
        let cell = grid.interval_at(grid.leaf_index(c));
        let (mut a, mut b) = (0.0f64, 0.0f64);
        for d in grid.intervals().filter(|d| cell.is_subset_of(d)) {
            a = a.max(f.average(&d).norm());
            b = b.max(f.abs().average(&d).re);
        }
        worst = worst.max((mt.values()[c].re - a).abs()).max((mh.values()[c].re - b).abs());
    }
    log.max("maximal_function_error", worst);
    log.check("maximal_functions_vs_brute", worst <= 1e-12, || format!("max error {worst:e}"));
}

/// `‖f‖_BMO` against the oscillation supremum and the maximal size of `|W f|^2`.
fn bmo(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 4);
    let mut f = gen::function(rng, grid);
    if rng.gen_bool(0.5) {
        let c = grid.interval_at(rng.gen_range(0..grid.tile_count()));
        f = f.restrict(&c);
    }
    let mut best = 0.0f64;
    for d in grid.intervals() {
        let avg = f.average(&d);
        let osc: f64 = grid.cell_range(&d).map(|c| (f.values()[c] - avg).norm_sqr()).sum::<f64>()
            / grid.cells_in(grid.index(&d)) as f64;
        best = best.max(osc);
    }
    let b = bmo_norm(&f);
    log.check("bmo_vs_oscillation", close(b, best.sqrt(), 1e-12), || format!("{b} vs {}", best.sqrt()));
    let ms = maximal_size(&wavelet_transform(&f).abs_sqr(), &TileSet::full(grid));
    log.check("bmo_vs_maximal_size", close(b * b, ms, 1e-12), || format!("{} vs {ms}", b * b));
}

const ENUMERATION_CAP: usize = 600_000;

/// Every convex tree of `S` with top `q`, as bit masks over heap indices.
fn convex_trees(s: &TileSet, q: usize) -> Option<Vec<u128>> {
    let grid = s.grid();
    let mut out = vec![1u128 << q];
    if grid.is_finest_index(q) {
        return Some(out);
    }
    for c in [2 * q + 1, 2 * q + 2] {
        if !s.contains_index(c) {
            continue;
        }
        let below = convex_trees(s, c)?;
        if out.len() * (below.len() + 1) > ENUMERATION_CAP {
            return None;
        }
        let mut next = Vec::with_capacity(out.len() * (below.len() + 1));
        for &x in &out {
            next.push(x);
            next.extend(below.iter().map(|&y| x | y));
        }
        out = next;
    }
    Some(out)
}

/// `size*` by enumerating every convex tree, or `None` past the cap.
fn enumeration_oracle(a: &Weights, s: &TileSet) -> Option<f64> {
    let grid = s.grid();
    let mut best = 0.0f64;
    for q in s.indices() {
        for t in convex_trees(s, q)? {
            let total: f64 = (0..grid.tile_count()).filter(|&i| t >> i & 1 == 1).map(|i| a.at(i)).sum();
            best = best.max(total / grid.length_at(q));
        }
    }
    Some(best)
}

/// For nonnegative weights the best convex tree below `Q` is everything of
/// `S` reachable from `Q` through members.
fn reachable_oracle(a: &Weights, s: &TileSet) -> f64 {
    let grid = s.grid();
    let mut best = 0.0f64;
    for q in s.indices() {
        let mut stack = vec![q];
        let mut total = 0.0;
        while let Some(i) = stack.pop() {
            total += a.at(i);
            if !grid.is_finest_index(i) {
                stack.extend([2 * i + 1, 2 * i + 2].into_iter().filter(|&c| s.contains_index(c)));
            }
        }
        best = best.max(total / grid.length_at(q));
    }
    best
}

/// `maximal_size` against enumeration of all convex trees (`M ≤ 3`) and
/// against the reachable-set oracle at the configured `M`.
fn maximal_size_oracles(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let small = grid_upto(cfg, 3);
    let zero = rng.gen_range(0.0..0.9);
    let a = gen::weights(rng, small);
    let a = Weights::from_dense(small, a.dense().iter().map(|&v| if rng.gen_bool(zero) { 0.0 } else { v }).collect())
        .expect("nonnegative weights");
    let mut p = rng.gen_range(0.05..1.0);
    let mut found = None;
    for _ in 0..12 {
        let s = gen::random_set(rng, small, p);
        if let Some(best) = enumeration_oracle(&a, &s) {
            found = Some((s, best));
            break;
        }
        p /= 2.0;
    }
    match found {
        Some((s, best)) => {
            let got = maximal_size(&a, &s);
            log.max("enumeration_error", (got - best).abs());
            log.check("maximal_size_vs_enumeration", (got - best).abs() <= 1e-12 * best.max(1.0), || {
                format!("{got} vs {best} on {} tiles", s.len())
            });
            log.sum("enumerated_instances", 1.0);
        }
        None => log.error("maximal_size_vs_enumeration", &"no instance within the enumeration cap"),
    }
    let grid = cfg.grid();
    let a = gen::weights(rng, grid);
    let density = rng.gen_range(0.05..1.0);
    let s = gen::random_set(rng, grid, density);
    let got = maximal_size(&a, &s);
    let want = reachable_oracle(&a, &s);
    log.check("maximal_size_vs_reachable", close(got, want, 1e-12), || format!("{got} vs {want}"));
    let top = grid.top();
    let direct = set_size(&a, &TileSet::full(grid), &top);
    let total: f64 = a.dense().iter().sum::<f64>() / top.length();
    log.check("set_size_full", close(direct, total, 1e-12), || format!("{direct} vs {total}"));
}

/// `sup_λ λ |{|f| ≥ λ}|^{1/p}` scanned over every value of `|f|` and the
/// midpoints between them.
fn threshold_scan(f: &DyadicFunction, p: f64) -> f64 {
    let w = f.grid().cell_width();
    let mags: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let mut levels = mags.clone();
    levels.sort_by(f64::total_cmp);
    let mids: Vec<f64> = levels.windows(2).map(|x| (x[0] + x[1]) / 2.0).collect();
    levels.extend(mids);
    levels
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| l * (mags.iter().filter(|&&v| v >= l).count() as f64 * w).powf(1.0 / p))
        .fold(0.0, f64::max)
}

/// Weak `L^p` against the threshold scan, plus the restricted weak witness.
fn weak_lp(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = grid_upto(cfg, 3);
    let mut f = gen::function(rng, grid);
    if rng.gen_bool(0.5) {
        f = f.map(|v| Complex64::new((v.re * 3.0).round(), 0.0));
    }
    let p = rng.gen_range(0.25..4.0);
    let scan = threshold_scan(&f, p);
    let Some(weak) = ok(log, "weak_lp_norm", weak_lp_norm(&f, p)) else { return };
    log.check("weak_lp_vs_scan", (weak - scan).abs() <= 1e-12 * scan.max(1.0), || format!("{weak} vs {scan}, p = {p}"));
    let Some(strong) = ok(log, "lp_norm", lp_norm(&f, p)) else { return };
    log.check("weak_le_strong", weak <= strong * (1.0 + 1e-12), || format!("{weak} > {strong}"));
    let p = rng.gen_range(1.1..4.0);
    let e: Vec<bool> = (0..grid.cells()).map(|_| rng.gen_bool(0.5)).collect();
    if e.iter().any(|&x| x) {
        let Some(a) = ok(log, "weak_lp_norm", weak_lp_norm(&f, p)) else { return };
        if let Some(w) = ok(log, "weak_witness", weak_lp_witness(&f, &e, p, a.max(1e-300))) {
            let measure_e = e.iter().filter(|&&x| x).count() as f64 * grid.cell_width();
            log.max("weak_witness_ratio_over_c", w.ratio() / w.c);
            log.check("weak_witness", w.measure >= measure_e / 2.0 && w.ratio() <= w.c * (1.0 + 1e-12), || {
                format!("ratio {} with C = {}", w.ratio(), w.c)
            });
        }
    }
}

/// Exponential decay of the distribution of mean-zero real functions.
fn john_nirenberg(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let i = if rng.gen_bool(0.5) { grid.top() } else { grid.interval_at(rng.gen_range(0..grid.interior_count())) };
    let mut f = gen::real_function(rng, grid);
    if rng.gen_bool(0.5) {
        let power = rng.gen_range(3..12);
        f = f.map(|v| Complex64::new(v.re.powi(power) * 50.0, 0.0));
    }
    let f = f.restrict(&i);
    let avg = f.average(&i).re;
    let mut g = f.clone();
    for c in grid.cell_range(&i) {
        g.values_mut()[c] -= avg;
    }
    let Some(r) = ok(log, "john_nirenberg", john_nirenberg_check(&g, &i)) else { return };
    let worst = r.levels.iter().map(|l| l.measure / l.bound).fold(0.0, f64::max);
    log.max("distribution_over_bound", worst);
    for (p, ratio) in &r.lp_ratios {
        log.max(&format!("lp_ratio_p{p}"), *ratio);
    }
    log.check("john_nirenberg", r.holds(), || {
        let bad: Vec<_> = r.levels.iter().filter(|l| !l.holds()).map(|l| (l.n, l.measure, l.bound)).collect();
        format!("levels (n, measure, bound) {bad:?} on {i}")
    });
}

//! Carleson embedding ratios.

use dhap_core::paraproduct::carleson_embed_report;
use dhap_core::TileSet;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ok, Item};
use crate::config::RunConfig;
use crate::gen;
use crate::report::TrialLog;

pub const EMBED_EXPONENTS: [f64; 3] = [1.5, 2.0, 4.0];

/// Cap on the `p = 2` ratio over normalized weights.
pub const EMBED_P2_CAP: f64 = 8.0;

pub(super) const ITEMS: &[Item] = &[Item::trial("embed", "carleson", carleson)];

fn carleson(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let a = gen::carleson_weights(rng, grid);
    let s = if rng.gen_bool(0.5) {
        TileSet::full(grid)
    } else {
        let keep = rng.gen_range(0.3..1.0);
        gen::random_convex_set(rng, grid, 0.3, keep)
    };
    let f = gen::function(rng, grid);
    for p in EMBED_EXPONENTS {
        let Some(r) = ok(log, "embed", carleson_embed_report(&s, &a, &f, p)) else { continue };
        log.max(&format!("ratio_p{p}"), r.ratio);
        log.check(&format!("finite_p{p}"), r.ratio.is_finite(), || format!("{r:?}"));
        if p == 2.0 {
            log.check("p2_cap", r.ratio <= EMBED_P2_CAP, || format!("ratio {} > {EMBED_P2_CAP}", r.ratio));
        }
    }
}

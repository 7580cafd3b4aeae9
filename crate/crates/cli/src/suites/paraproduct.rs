//! Paraproduct identities and bound ratios.

use dhap_core::paraproduct::{paraproduct_bound_report, permute_check, pi_hl, product_identity_residual, BoundKind};
use rand_chacha::ChaCha8Rng;

use super::{ok, Item};
use crate::config::RunConfig;
use crate::gen;
use crate::report::TrialLog;

/// Exponent pairs of the weak-type report.
pub const WEAK_EXPONENTS: [(f64, f64); 3] = [(2.0, 2.0), (1.5, 3.0), (4.0, 1.25)];

pub(super) const ITEMS: &[Item] = &[
    Item::trial("paraproduct", "identities", identities),
    Item::trial("paraproduct", "bounds", bounds),
];

/// Product decomposition, pairing symmetries and multiplier identities.
fn identities(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let f = gen::mean_zero_function(rng, grid);
    let g = gen::mean_zero_function(rng, grid);
    let h = gen::function(rng, grid);
    let bound = cfg.tol.rel;
    if let Some(r) = ok(log, "product_identity", product_identity_residual(&f, &g, cfg.tol.abs.max(bound))) {
        log.max("product_identity_residual", r);
        log.check("product_identity", r <= bound, || format!("residual {r:e}"));
    }
    let Some(r) = ok(log, "permute", permute_check(&f, &g, &h)) else { return };
    for (name, v) in [("permute", r.max_discrepancy), ("tril", r.tril), ("hh_mult", r.hh_mult), ("hllh_mult", r.hllh_mult)] {
        log.max(&format!("{name}_residual"), v);
        log.check(name, v <= bound, || format!("residual {v:e}"));
    }
}

/// Ratios of the paraproduct estimates; each must be finite.
fn bounds(cfg: &RunConfig, rng: &mut ChaCha8Rng, log: &mut TrialLog) {
    let grid = cfg.grid();
    let f = gen::function(rng, grid);
    let g = gen::function(rng, grid);
    for kind in [BoundKind::HlL2Linf, BoundKind::LhL2Bmo, BoundKind::HhL2Bmo, BoundKind::HhBmoBmo] {
        let name = kind.name();
        let Some(r) = ok(log, name, paraproduct_bound_report(kind, &f, &g, None)) else { continue };
        log.max(&format!("{name}_ratio"), r.ratio);
        log.check(&format!("{name}_finite"), r.ratio.is_finite(), || format!("ratio {}", r.ratio));
    }
    // E is where one product is positive, so the witness pairing cannot cancel.
    let Some(h) = ok(log, "witness_set", pi_hl(&f, &g)) else { return };
    let e: Vec<bool> = h.values().iter().map(|v| v.re > 0.0).collect();
    for (p, q) in WEAK_EXPONENTS {
        let kind = BoundKind::WeakLpLq { p, q };
        let name = format!("weak_L{p}L{q}");
        let Some(r) = ok(log, &name, paraproduct_bound_report(kind, &f, &g, Some(&e))) else { continue };
        log.max(&format!("{name}_ratio"), r.ratio);
        let witness = r.witness_ratio.unwrap_or(0.0);
        log.max(&format!("{name}_witness_ratio"), witness);
        log.check(&format!("{name}_finite"), r.ratio.is_finite() && witness.is_finite(), || format!("{r:?}"));
    }
}

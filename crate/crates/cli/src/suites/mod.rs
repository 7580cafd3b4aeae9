//! Verification suites. Each suite runs a fixed part once and a randomized
//! part per trial; trial `t` uses the seed `seed + t`, which is logged with
//! every failure.

mod atoms;
mod tiles;
mod decompose;
mod embed;
mod extrapolate;
mod norms;
mod paraproduct;
mod t1;
mod tb;

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{bail, Result};
use dhap_core::GridConfig;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::gen;
use crate::report::{SuiteReport, TrialLog};

pub const SUITES: [&str; 9] = ["core", "norms", "decompose", "extrapolate", "atoms", "paraproduct", "embed", "t1", "tb"];

pub type Body = fn(&RunConfig, &mut ChaCha8Rng, &mut TrialLog);

/// One named verification item. Fixed items run once with the base seed;
/// trial items run once per trial with the trial seed.
#[derive(Clone, Copy)]
pub struct Item {
    pub suite: &'static str,
    pub name: &'static str,
    pub per_trial: bool,
    pub body: Body,
}

impl Item {
    pub const fn fixed(suite: &'static str, name: &'static str, body: Body) -> Self {
        Item { suite, name, per_trial: false, body }
    }

    pub const fn trial(suite: &'static str, name: &'static str, body: Body) -> Self {
        Item { suite, name, per_trial: true, body }
    }

    pub fn id(&self) -> String {
        format!("{}/{}", self.suite, self.name)
    }
}

/// Every item of every suite.
pub fn items() -> Vec<Item> {
    [
        tiles::ITEMS,
        norms::ITEMS,
        decompose::ITEMS,
        extrapolate::ITEMS,
        atoms::ITEMS,
        paraproduct::ITEMS,
        embed::ITEMS,
        t1::ITEMS,
        tb::ITEMS,
    ]
    .concat()
}

/// Runs one suite, or every suite for `"all"`. Returns the report and the
/// wall-clock seconds per suite.
pub fn run(name: &str, cfg: &RunConfig) -> Result<(SuiteReport, BTreeMap<String, f64>)> {
    if name != "all" && !SUITES.contains(&name) {
        bail!("unknown suite {name:?}; expected one of {SUITES:?} or \"all\"");
    }
    run_items(name, cfg, |it| name == "all" || it.suite == name)
}

/// Runs the selected items. Checks are named `suite/item/check`; timings are
/// keyed by `suite/item`.
pub fn run_items(
    label: &str,
    cfg: &RunConfig,
    select: impl Fn(&Item) -> bool,
) -> Result<(SuiteReport, BTreeMap<String, f64>)> {
    cfg.validate()?;
    let mut chosen: Vec<Item> = items().into_iter().filter(|it| select(it)).collect();
    chosen.sort_by_key(Item::id);
    if chosen.is_empty() {
        bail!("no verification items selected for {label:?}");
    }
    let mut report = SuiteReport::new(label, cfg.m, cfg.seed, cfg.trials);
    let mut timings = BTreeMap::new();
    for it in chosen {
        let start = Instant::now();
        let runs: Vec<(usize, u64)> =
            if it.per_trial { (0..cfg.trials).map(|t| (t, cfg.trial_seed(t))).collect() } else { vec![(0, cfg.seed)] };
        let logs: Vec<TrialLog> = runs
            .into_par_iter()
            .map(|(t, seed)| {
                let mut log = TrialLog::new(t, seed);
                (it.body)(cfg, &mut gen::rng(seed), &mut log);
                log
            })
            .collect();
        let prefix = format!("{}/", it.id());
        for log in logs {
            report.absorb(&prefix, log);
        }
        timings.insert(it.id(), start.elapsed().as_secs_f64());
    }
    Ok((report, timings))
}

/// The configured grid, capped at `max` for items whose cost grows too fast.
pub(crate) fn grid_upto(cfg: &RunConfig, max: u32) -> GridConfig {
    GridConfig::new(cfg.m.min(max)).expect("validated M")
}

/// `|a - b| ≤ rel · max(|a|, |b|, 1)`.
pub(crate) fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Records a check that an operation succeeded, returning its value.
pub(crate) fn ok<T, E: std::fmt::Display>(log: &mut TrialLog, name: &str, r: std::result::Result<T, E>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            log.error(name, &e);
            None
        }
    }
}

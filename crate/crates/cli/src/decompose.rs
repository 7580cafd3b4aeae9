//! The `decompose` command: runs one decomposition on a JSON input.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use dhap_core::decompose::{atomic_decompose, mean_select, tree_select, tree_slice, SliceAlgorithm};
use dhap_core::function_space::{maximal_mean, maximal_size};
use dhap_core::json::{self, DecompositionJson, FunctionJson, WeightsJson};
use dhap_core::{TileSet, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecomposeKind {
    TreeSlice,
    TreeSelect,
    MeanSelect,
    Atoms,
}

impl DecomposeKind {
    pub const ALL: [DecomposeKind; 4] =
        [DecomposeKind::TreeSlice, DecomposeKind::TreeSelect, DecomposeKind::MeanSelect, DecomposeKind::Atoms];

    pub fn name(self) -> &'static str {
        match self {
            DecomposeKind::TreeSlice => "tree_slice",
            DecomposeKind::TreeSelect => "tree_select",
            DecomposeKind::MeanSelect => "mean_select",
            DecomposeKind::Atoms => "atoms",
        }
    }
}

impl fmt::Display for DecomposeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecomposeKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        DecomposeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| anyhow!("unknown kind {s:?}; expected one of {:?}", DecomposeKind::ALL.map(|k| k.name())))
    }
}

pub fn parse_algorithm(s: &str) -> Result<SliceAlgorithm> {
    match s {
        "garnett" => Ok(SliceAlgorithm::Garnett),
        "heavy-light" | "heavy_light" => Ok(SliceAlgorithm::HeavyLight),
        _ => bail!("unknown algorithm {s:?}; expected garnett or heavy-light"),
    }
}

#[derive(Debug, Clone)]
pub struct DecomposeParams {
    pub delta: Option<f64>,
    pub c0: Option<f64>,
    pub algorithm: SliceAlgorithm,
    pub n: Option<i32>,
    pub p: f64,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        DecomposeParams { delta: None, c0: None, algorithm: SliceAlgorithm::Garnett, n: None, p: 1.0 }
    }
}

/// Smallest `n` with `x ≤ 2^n`.
fn exponent_above(x: f64) -> i32 {
    if x > 0.0 {
        x.log2().ceil() as i32
    } else {
        0
    }
}

/// Runs the decomposition on the input JSON text.
///
/// `tree_slice` and `tree_select` read weights and use the complete tree of
/// the whole domain; `mean_select` and `atoms` read a function.
pub fn run(kind: DecomposeKind, input: &str, params: &DecomposeParams) -> Result<DecompositionJson> {
    match kind {
        DecomposeKind::TreeSlice | DecomposeKind::TreeSelect => {
            let a = json::from_str::<WeightsJson>(input).context("reading weights")?.to_weights()?;
            let grid = a.grid();
            let t0 = Tree::complete(grid, grid.top())?;
            let max = maximal_size(&a, t0.tiles());
            if kind == DecomposeKind::TreeSlice {
                let delta = params.delta.ok_or_else(|| anyhow!("tree_slice needs --delta"))?;
                let c0 = params.c0.unwrap_or(max.max(delta));
                let dec = tree_slice(&t0, &a, c0, delta, params.algorithm)
                    .with_context(|| format!("tree_slice with C0 = {c0}, δ = {delta}"))?;
                Ok(DecompositionJson::from_trees(kind.name(), &dec))
            } else {
                let n = params.n.unwrap_or_else(|| exponent_above(max));
                let sel = tree_select(&TileSet::full(grid), &a, n).with_context(|| format!("tree_select with n = {n}"))?;
                Ok(DecompositionJson::from_selection(kind.name(), &sel))
            }
        }
        DecomposeKind::MeanSelect | DecomposeKind::Atoms => {
            let f = json::from_str::<FunctionJson>(input).context("reading function")?.to_function()?;
            let grid = f.grid();
            if kind == DecomposeKind::MeanSelect {
                let full = TileSet::full(grid);
                let n = params.n.unwrap_or_else(|| exponent_above(maximal_mean(&f.abs(), &full)));
                let sel = mean_select(&full, &f, n).with_context(|| format!("mean_select with n = {n}"))?;
                Ok(DecompositionJson::from_selection(kind.name(), &sel))
            } else {
                let dec = atomic_decompose(&f, params.p).with_context(|| format!("atoms with p = {}", params.p))?;
                Ok(DecompositionJson::from_atoms(grid, &dec))
            }
        }
    }
}

//! Stopping-time decompositions of tile collections.
//!
//! Every algorithm returns plain data and every output has an independent
//! checker (`verify_*`) that re-derives the advertised properties from the
//! output alone.

mod atoms;
mod convexify;
mod extrapolate;
mod jn;
mod samp;
mod select;
mod slice;

use std::collections::BTreeMap;

use crate::dyadic::{parent_index, GridConfig, TileSet, Tree};

pub use atoms::{atomic_decompose, verify_atoms, Atom, AtomicDecomposition};
pub use convexify::{convexify, verify_convexify};
pub use extrapolate::{extrapolate_check, ExtrapolateReport};
pub use jn::{john_nirenberg_check, JnLevel, JnReport, JN_EXPONENTS};
pub use samp::{good_lambda, tree_samp_bound, SampReport, SampWitness};
pub use select::{mean_select, tree_select, verify_mean_select, verify_tree_select, Selection};
pub use slice::{tree_slice, verify_tree_slice, SliceAlgorithm};

/// Named measured constants, ordered for stable serialisation.
pub type Measured = BTreeMap<String, f64>;

/// Role of a tree in a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeLabel {
    Small,
    Heavy,
    Light,
    Iterate,
    Selected,
}

impl TreeLabel {
    pub fn name(&self) -> &'static str {
        match self {
            TreeLabel::Small => "small",
            TreeLabel::Heavy => "heavy",
            TreeLabel::Light => "light",
            TreeLabel::Iterate => "iterate",
            TreeLabel::Selected => "selected",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "small" => TreeLabel::Small,
            "heavy" => TreeLabel::Heavy,
            "light" => TreeLabel::Light,
            "iterate" => TreeLabel::Iterate,
            "selected" => TreeLabel::Selected,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTree {
    pub label: TreeLabel,
    pub tree: Tree,
}

/// Trees plus exceptional tiles partitioning an input collection.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeDecomposition {
    pub trees: Vec<LabeledTree>,
    pub exceptional: TileSet,
    pub measured: Measured,
}

/// `Tree(Q) ∩ S` for pairwise incomparable tops `Q`, in the order given.
pub(crate) fn trees_below(s: &TileSet, tops: &[usize]) -> Vec<Tree> {
    let grid = s.grid();
    let mut owner: Vec<Option<usize>> = vec![None; grid.tile_count()];
    let mut slot = vec![usize::MAX; grid.tile_count()];
    for (n, &t) in tops.iter().enumerate() {
        slot[t] = n;
    }
    let mut members: Vec<TileSet> = tops.iter().map(|_| TileSet::new(grid)).collect();
    for i in 0..grid.tile_count() {
        let o = if slot[i] != usize::MAX {
            Some(slot[i])
        } else if i > 0 {
            owner[parent_index(i)]
        } else {
            None
        };
        owner[i] = o;
        if let Some(n) = o {
            if s.contains_index(i) {
                members[n].insert_index(i);
            }
        }
    }
    tops.iter()
        .zip(members)
        .map(|(&t, m)| Tree::new(grid.interval_at(t), m).expect("top is a member"))
        .collect()
}

/// Describes why `parts` fail to partition `whole` exactly, if they do.
pub(crate) fn partition_error<'a>(whole: &TileSet, parts: impl IntoIterator<Item = &'a TileSet>) -> Option<String> {
    let grid: GridConfig = whole.grid();
    let mut seen = vec![false; grid.tile_count()];
    for part in parts {
        for i in part.indices() {
            if seen[i] {
                return Some(format!("tile {} appears in two parts", grid.interval_at(i)));
            }
            if !whole.contains_index(i) {
                return Some(format!("tile {} is not in the input", grid.interval_at(i)));
            }
            seen[i] = true;
        }
    }
    whole.indices().find(|&i| !seen[i]).map(|i| format!("tile {} is not covered", grid.interval_at(i)))
}

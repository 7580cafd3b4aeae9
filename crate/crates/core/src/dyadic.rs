//! Dyadic intervals, tiles and tile collections on `[0, 2^M]`.
//!
//! Intervals are stored as integer pairs and indexed in heap order: the top
//! interval `[0, 2^M]` is index 0 and interval `i` has children `2i + 1` and
//! `2i + 2`. Heap order coincides with the canonical order used everywhere
//! (decreasing scale, then increasing position).

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Resolution parameter: the domain is `[0, 2^M]` and the finest cells have
/// width `2^-M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridConfig {
    m: u32,
}

impl GridConfig {
    pub const MAX_M: u32 = 12;

    pub fn new(m: u32) -> Result<Self> {
        if (1..=Self::MAX_M).contains(&m) {
            Ok(GridConfig { m })
        } else {
            Err(Error::InvalidGrid(m))
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of finest cells, `4^M`.
    pub fn cells(&self) -> usize {
        1usize << (2 * self.m)
    }

    pub fn cell_width(&self) -> f64 {
        (-(self.m as f64)).exp2()
    }

    /// Number of dyadic intervals in the grid, `2^(2M+1) - 1`.
    pub fn tile_count(&self) -> usize {
        (1usize << (2 * self.m + 1)) - 1
    }

    /// Number of intervals with children, `4^M - 1`.
    pub fn interior_count(&self) -> usize {
        self.cells() - 1
    }

    /// Depth of the finest scale in heap order, `2M`.
    pub fn max_depth(&self) -> u32 {
        2 * self.m
    }

    pub fn top(&self) -> DyadicInterval {
        DyadicInterval { k: self.m as i32, j: 0 }
    }

    pub fn domain_length(&self) -> f64 {
        (self.m as f64).exp2()
    }

    pub fn interval(&self, k: i32, j: u64) -> Result<DyadicInterval> {
        let d = DyadicInterval { k, j };
        self.check(&d)?;
        Ok(d)
    }

    pub fn check(&self, d: &DyadicInterval) -> Result<()> {
        let m = self.m as i32;
        if d.k < -m || d.k > m || d.j >= (1u64 << (m - d.k)) {
            return Err(Error::InvalidInterval { k: d.k, j: d.j });
        }
        Ok(())
    }

    pub fn contains_interval(&self, d: &DyadicInterval) -> bool {
        self.check(d).is_ok()
    }

    /// Heap index of an interval; the interval must lie in the grid.
    pub fn index(&self, d: &DyadicInterval) -> usize {
        let depth = (self.m as i32 - d.k) as u32;
        (1usize << depth) - 1 + d.j as usize
    }

    pub fn interval_at(&self, idx: usize) -> DyadicInterval {
        let depth = depth_of(idx);
        DyadicInterval {
            k: self.m as i32 - depth as i32,
            j: (idx + 1 - (1usize << depth)) as u64,
        }
    }

    /// Range of finest cells covered by the interval.
    pub fn cell_range(&self, d: &DyadicInterval) -> std::ops::Range<usize> {
        let len = 1usize << (d.k + self.m as i32);
        let start = d.j as usize * len;
        start..start + len
    }

    pub fn cell_range_at(&self, idx: usize) -> std::ops::Range<usize> {
        let depth = depth_of(idx);
        let len = 1usize << (2 * self.m - depth);
        let start = (idx + 1 - (1usize << depth)) * len;
        start..start + len
    }

    /// Number of finest cells inside the interval with heap index `idx`.
    pub fn cells_in(&self, idx: usize) -> usize {
        1usize << (2 * self.m - depth_of(idx))
    }

    /// Length `|I|` of the interval with heap index `idx`.
    pub fn length_at(&self, idx: usize) -> f64 {
        (self.m as f64 - depth_of(idx) as f64).exp2()
    }

    pub fn is_finest_index(&self, idx: usize) -> bool {
        depth_of(idx) == 2 * self.m
    }

    /// Heap index of the finest interval equal to cell `c`.
    pub fn leaf_index(&self, c: usize) -> usize {
        self.cells() - 1 + c
    }

    /// First heap index at a given depth.
    pub fn level_start(&self, depth: u32) -> usize {
        (1usize << depth) - 1
    }

    /// Iterates over every interval of the grid in canonical order.
    pub fn intervals(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        (0..self.tile_count()).map(move |i| self.interval_at(i))
    }
}

pub(crate) fn depth_of(idx: usize) -> u32 {
    usize::BITS - 1 - (idx + 1).leading_zeros()
}

pub(crate) fn parent_index(idx: usize) -> usize {
    (idx - 1) / 2
}

pub(crate) fn child_indices(idx: usize) -> (usize, usize) {
    (2 * idx + 1, 2 * idx + 2)
}

/// Heap indices of `Tree(root)` in canonical order.
pub(crate) fn subtree_indices(grid: GridConfig, root: usize) -> impl Iterator<Item = usize> {
    let d0 = depth_of(root);
    (d0..=grid.max_depth()).flat_map(move |depth| {
        let shift = depth - d0;
        let first = ((root + 1) << shift) - 1;
        first..first + (1usize << shift)
    })
}

/// Ancestors of heap index `idx`, nearest first, excluding `idx`.
pub(crate) fn ancestors(idx: usize) -> impl Iterator<Item = usize> {
    std::iter::successors(Some(idx), |&i| if i == 0 { None } else { Some(parent_index(i)) }).skip(1)
}

/// The interval `[j 2^k, (j+1) 2^k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    pub k: i32,
    pub j: u64,
}

impl DyadicInterval {
    pub fn length(&self) -> f64 {
        (self.k as f64).exp2()
    }

    pub fn start(&self) -> f64 {
        self.j as f64 * self.length()
    }

    pub fn end(&self) -> f64 {
        (self.j + 1) as f64 * self.length()
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &DyadicInterval) -> bool {
        self.k <= other.k && (self.j >> (other.k - self.k)) == other.j
    }

    pub fn is_proper_subset_of(&self, other: &DyadicInterval) -> bool {
        self.k < other.k && self.is_subset_of(other)
    }

    pub fn is_disjoint_from(&self, other: &DyadicInterval) -> bool {
        !self.is_subset_of(other) && !other.is_subset_of(self)
    }

    pub fn parent(&self, grid: &GridConfig) -> Result<DyadicInterval> {
        grid.check(self)?;
        if self.k == grid.m() as i32 {
            return Err(Error::TopScale);
        }
        Ok(DyadicInterval { k: self.k + 1, j: self.j >> 1 })
    }

    pub fn children(&self, grid: &GridConfig) -> Result<(DyadicInterval, DyadicInterval)> {
        grid.check(self)?;
        if self.k == -(grid.m() as i32) {
            return Err(Error::BottomScale);
        }
        let k = self.k - 1;
        Ok((DyadicInterval { k, j: 2 * self.j }, DyadicInterval { k, j: 2 * self.j + 1 }))
    }
}

impl Ord for DyadicInterval {
    fn cmp(&self, other: &Self) -> Ordering {
        other.k.cmp(&self.k).then(self.j.cmp(&other.j))
    }
}

impl PartialOrd for DyadicInterval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start(), self.end())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TileKind {
    Lacunary,
    NonLacunary,
}

/// A Heisenberg box: the lacunary tile carries the Haar wavelet of its
/// interval, the non-lacunary tile carries the normalised indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tile {
    pub interval: DyadicInterval,
    pub kind: TileKind,
}

impl Tile {
    pub fn lacunary(interval: DyadicInterval) -> Self {
        Tile { interval, kind: TileKind::Lacunary }
    }

    pub fn nonlacunary(interval: DyadicInterval) -> Self {
        Tile { interval, kind: TileKind::NonLacunary }
    }

    pub fn is_lacunary(&self) -> bool {
        self.kind == TileKind::Lacunary
    }
}

/// Tile order: `P ≤' P'` iff `I_P ⊆ I_P'`.
pub fn tile_leq(p: &Tile, q: &Tile) -> bool {
    p.interval.is_subset_of(&q.interval)
}

/// A set of lacunary tiles, stored as a membership mask in heap order.
#[derive(Clone, PartialEq, Eq)]
pub struct TileSet {
    grid: GridConfig,
    member: Vec<bool>,
    len: usize,
}

impl fmt::Debug for TileSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl TileSet {
    pub fn new(grid: GridConfig) -> Self {
        TileSet { grid, member: vec![false; grid.tile_count()], len: 0 }
    }

    /// Every lacunary tile of the grid.
    pub fn full(grid: GridConfig) -> Self {
        TileSet { grid, member: vec![true; grid.tile_count()], len: grid.tile_count() }
    }

    /// `Tree(I)`: every lacunary tile whose interval lies in `I`.
    pub fn complete_tree(grid: GridConfig, top: &DyadicInterval) -> Result<Self> {
        grid.check(top)?;
        let mut s = TileSet::new(grid);
        s.insert_subtree(grid.index(top));
        Ok(s)
    }

    pub fn from_intervals<I: IntoIterator<Item = DyadicInterval>>(grid: GridConfig, it: I) -> Result<Self> {
        let mut s = TileSet::new(grid);
        for d in it {
            grid.check(&d)?;
            s.insert(&d);
        }
        Ok(s)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(grid: GridConfig, it: I) -> Self {
        let mut s = TileSet::new(grid);
        for i in it {
            s.insert_index(i);
        }
        s
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, d: &DyadicInterval) -> bool {
        self.grid.contains_interval(d) && self.member[self.grid.index(d)]
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.member[idx]
    }

    pub fn insert(&mut self, d: &DyadicInterval) -> bool {
        self.insert_index(self.grid.index(d))
    }

    pub fn insert_index(&mut self, idx: usize) -> bool {
        if self.member[idx] {
            false
        } else {
            self.member[idx] = true;
            self.len += 1;
            true
        }
    }

    pub fn remove_index(&mut self, idx: usize) -> bool {
        if self.member[idx] {
            self.member[idx] = false;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    pub fn remove(&mut self, d: &DyadicInterval) -> bool {
        self.grid.contains_interval(d) && self.remove_index(self.grid.index(d))
    }

    /// Inserts every tile below (and including) heap index `idx`.
    pub fn insert_subtree(&mut self, idx: usize) {
        for i in subtree_indices(self.grid, idx) {
            self.insert_index(i);
        }
    }

    /// Heap indices of the members in canonical order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn iter(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        self.indices().map(move |i| self.grid.interval_at(i))
    }

    pub fn union(&self, other: &TileSet) -> TileSet {
        let mut s = self.clone();
        for i in other.indices() {
            s.insert_index(i);
        }
        s
    }

    pub fn difference(&self, other: &TileSet) -> TileSet {
        TileSet::from_indices(self.grid, self.indices().filter(|&i| !other.member[i]))
    }

    pub fn intersection(&self, other: &TileSet) -> TileSet {
        TileSet::from_indices(self.grid, self.indices().filter(|&i| other.member[i]))
    }

    pub fn is_subset(&self, other: &TileSet) -> bool {
        self.indices().all(|i| other.member[i])
    }

    pub fn is_disjoint(&self, other: &TileSet) -> bool {
        self.indices().all(|i| !other.member[i])
    }

    pub(crate) fn mask(&self) -> &[bool] {
        &self.member
    }
}

/// A convex-tree candidate: a set of tiles with a distinguished top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    top: DyadicInterval,
    tiles: TileSet,
}

impl Tree {
    /// Checks that the top is a member and that every member lies below it.
    pub fn new(top: DyadicInterval, tiles: TileSet) -> Result<Self> {
        if !tiles.contains(&top) {
            return Err(Error::NotATree(format!("top {top} is not a member")));
        }
        if let Some(bad) = tiles.iter().find(|d| !d.is_subset_of(&top)) {
            return Err(Error::NotATree(format!("{bad} is not below the top {top}")));
        }
        Ok(Tree { top, tiles })
    }

    pub fn complete(grid: GridConfig, top: DyadicInterval) -> Result<Self> {
        let tiles = TileSet::complete_tree(grid, &top)?;
        Ok(Tree { top, tiles })
    }

    pub fn top(&self) -> DyadicInterval {
        self.top
    }

    pub fn tiles(&self) -> &TileSet {
        &self.tiles
    }

    pub fn into_tiles(self) -> TileSet {
        self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn grid(&self) -> GridConfig {
        self.tiles.grid()
    }
}

/// A set is convex when every tile lying between two members is a member.
pub fn is_convex(s: &TileSet) -> bool {
    let mask = s.mask();
    for i in s.indices() {
        // Walk upward; once the chain leaves the set it may not re-enter.
        let mut idx = i;
        let mut left = false;
        while idx > 0 {
            idx = parent_index(idx);
            if mask[idx] {
                if left {
                    return false;
                }
            } else {
                left = true;
            }
        }
    }
    true
}

/// Members without a strict ancestor in the set, in canonical order.
pub fn maximal_tiles(s: &TileSet) -> Vec<DyadicInterval> {
    let grid = s.grid();
    let mut covered = vec![false; grid.tile_count()];
    let mut out = Vec::new();
    for i in 0..grid.tile_count() {
        let above = i > 0 && covered[parent_index(i)];
        if above || s.contains_index(i) {
            covered[i] = true;
            if !above {
                out.push(grid.interval_at(i));
            }
        }
    }
    out
}

/// `Σ |I| / |I_T|` over the given intervals.
pub fn packing_constant<I: IntoIterator<Item = DyadicInterval>>(intervals: I, top: &DyadicInterval) -> f64 {
    intervals.into_iter().map(|d| d.length()).sum::<f64>() / top.length()
}

/// `sup_J Σ_{I ⊆ J} |I| / |J|` over all dyadic `J` of the grid; zero for an
/// empty family.
pub fn uniform_packing_constant<I: IntoIterator<Item = DyadicInterval>>(grid: GridConfig, intervals: I) -> f64 {
    let mut mass = vec![0.0f64; grid.tile_count()];
    for d in intervals {
        mass[grid.index(&d)] += d.length();
    }
    let mut best = 0.0f64;
    for i in (0..grid.tile_count()).rev() {
        if !grid.is_finest_index(i) {
            let (l, r) = child_indices(i);
            mass[i] += mass[l] + mass[r];
        }
        best = best.max(mass[i] / grid.length_at(i));
    }
    best
}

/// Replaces each tile by its parent, merging duplicates.
pub fn doubled_tiles(s: &TileSet) -> Result<TileSet> {
    let mut out = TileSet::new(s.grid());
    for i in s.indices() {
        if i == 0 {
            return Err(Error::TopScale);
        }
        out.insert_index(parent_index(i));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: u32) -> GridConfig {
        GridConfig::new(m).unwrap()
    }

    #[test]
    fn grid_bounds() {
        assert!(GridConfig::new(0).is_err());
        assert!(GridConfig::new(13).is_err());
        let grid = g(2);
        assert_eq!(grid.cells(), 16);
        assert_eq!(grid.tile_count(), 31);
        assert!(grid.interval(-2, 15).is_ok());
        assert!(grid.interval(-2, 16).is_err());
        assert!(grid.interval(3, 0).is_err());
    }

    #[test]
    fn index_roundtrip_and_order() {
        let grid = g(3);
        let all: Vec<_> = grid.intervals().collect();
        for (i, d) in all.iter().enumerate() {
            assert_eq!(grid.index(d), i);
        }
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn parent_and_children() {
        let grid = g(2);
        let d = grid.interval(0, 1).unwrap();
        assert_eq!(d.parent(&grid).unwrap(), grid.interval(1, 0).unwrap());
        let (l, r) = d.children(&grid).unwrap();
        assert_eq!((l.k, l.j, r.k, r.j), (-1, 2, -1, 3));
        assert_eq!(grid.top().parent(&grid), Err(Error::TopScale));
        assert_eq!(grid.interval(-2, 0).unwrap().children(&grid), Err(Error::BottomScale));
        assert_eq!(grid.cell_range(&d), 4..8);
    }

    #[test]
    fn convexity() {
        let grid = g(2);
        let top = grid.top();
        let (l, _) = top.children(&grid).unwrap();
        let (ll, _) = l.children(&grid).unwrap();
        let gap = TileSet::from_intervals(grid, [top, ll]).unwrap();
        assert!(!is_convex(&gap));
        let chain = TileSet::from_intervals(grid, [top, l, ll]).unwrap();
        assert!(is_convex(&chain));
        assert!(is_convex(&TileSet::new(grid)));
        assert!(is_convex(&TileSet::full(grid)));
    }

    #[test]
    fn packing_examples() {
        let grid = g(2);
        let top = grid.top();
        let (l, r) = top.children(&grid).unwrap();
        assert_eq!(packing_constant([l, r], &top), 1.0);
        assert_eq!(uniform_packing_constant(grid, [l, r]), 1.0);
        assert_eq!(uniform_packing_constant(grid, std::iter::empty()), 0.0);
        let nested: Vec<_> = TileSet::full(grid).iter().collect();
        assert_eq!(uniform_packing_constant(grid, nested), 5.0);
    }

    #[test]
    fn doubling_merges_siblings() {
        let grid = g(1);
        let (l, r) = grid.interval(0, 0).unwrap().children(&grid).unwrap();
        let s = TileSet::from_intervals(grid, [l, r]).unwrap();
        let d = doubled_tiles(&s).unwrap();
        assert_eq!(d.iter().collect::<Vec<_>>(), vec![grid.interval(0, 0).unwrap()]);
        assert_eq!(doubled_tiles(&TileSet::full(grid)), Err(Error::TopScale));
    }

    #[test]
    fn trees_require_top() {
        let grid = g(1);
        let top = grid.top();
        let (l, r) = top.children(&grid).unwrap();
        let s = TileSet::from_intervals(grid, [l, r]).unwrap();
        assert!(Tree::new(top, s.clone()).is_err());
        assert!(Tree::new(l, s).is_err());
        assert_eq!(maximal_tiles(&TileSet::from_intervals(grid, [l, r]).unwrap()), vec![l, r]);
    }
}

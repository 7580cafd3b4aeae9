use super::partition_error;
use crate::dyadic::{is_convex, parent_index, uniform_packing_constant, TileSet, Tree};
use crate::error::{Error, Result};

/// Partitions `T \ P` into convex trees. The tops are the tiles `Q ∈ T \ P`
/// whose parent is not in `T \ P`; each remaining tile joins its nearest top.
pub fn convexify(t: &Tree, p: &TileSet) -> Result<Vec<Tree>> {
    if !is_convex(t.tiles()) {
        return Err(Error::NonConvexTree);
    }
    if !p.is_subset(t.tiles()) {
        return Err(Error::NotATree("removed tiles must lie in the tree".into()));
    }
    let rest = t.tiles().difference(p);
    let tops: Vec<usize> = rest.indices().filter(|&i| i == 0 || !rest.contains_index(parent_index(i))).collect();
    // Tops can be nested; each tile joins its nearest top.
    let mut trees = Vec::with_capacity(tops.len());
    let grid = t.grid();
    let mut owner = vec![usize::MAX; grid.tile_count()];
    for i in rest.indices() {
        owner[i] = if i == 0 || !rest.contains_index(parent_index(i)) { i } else { owner[parent_index(i)] };
    }
    let mut members: Vec<TileSet> = tops.iter().map(|_| TileSet::new(grid)).collect();
    let slot: std::collections::HashMap<usize, usize> = tops.iter().enumerate().map(|(n, &q)| (q, n)).collect();
    for i in rest.indices() {
        members[slot[&owner[i]]].insert_index(i);
    }
    for (q, m) in tops.iter().zip(members) {
        trees.push(Tree::new(grid.interval_at(*q), m)?);
    }
    Ok(trees)
}

/// Re-checks a [`convexify`] output: exact partition of `T \ P`, convex
/// trees, and the uniform `(α + 1)`-packing of the tops.
pub fn verify_convexify(t: &Tree, p: &TileSet, trees: &[Tree]) -> Vec<String> {
    let mut out = Vec::new();
    let rest = t.tiles().difference(p);
    if let Some(e) = partition_error(&rest, trees.iter().map(|t| t.tiles())) {
        out.push(format!("partition: {e}"));
    }
    for tr in trees {
        if !is_convex(tr.tiles()) {
            out.push(format!("tree at {} is not convex", tr.top()));
        }
    }
    let grid = t.grid();
    let alpha = uniform_packing_constant(grid, p.iter());
    let tops = uniform_packing_constant(grid, trees.iter().map(|t| t.top()));
    if tops > alpha + 1.0 + 1e-12 {
        out.push(format!("tops form a uniform {tops}-packing, above α + 1 = {}", alpha + 1.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::GridConfig;

    #[test]
    fn empty_removal_keeps_tree() {
        let grid = GridConfig::new(2).unwrap();
        let t = Tree::complete(grid, grid.top()).unwrap();
        let out = convexify(&t, &TileSet::new(grid)).unwrap();
        assert_eq!(out, vec![t]);
    }

    #[test]
    fn removing_top_splits_into_children() {
        let grid = GridConfig::new(2).unwrap();
        let t = Tree::complete(grid, grid.top()).unwrap();
        let p = TileSet::from_intervals(grid, [grid.top()]).unwrap();
        let out = convexify(&t, &p).unwrap();
        let (l, r) = grid.top().children(&grid).unwrap();
        assert_eq!(out.iter().map(|t| t.top()).collect::<Vec<_>>(), vec![l, r]);
        assert!(verify_convexify(&t, &p, &out).is_empty());
    }

    #[test]
    fn nested_tops_are_clipped() {
        let grid = GridConfig::new(2).unwrap();
        let t = Tree::complete(grid, grid.top()).unwrap();
        let (l, _) = grid.top().children(&grid).unwrap();
        let p = TileSet::from_intervals(grid, [l]).unwrap();
        let out = convexify(&t, &p).unwrap();
        assert_eq!(out.len(), 3);
        assert!(verify_convexify(&t, &p, &out).is_empty());
    }
}

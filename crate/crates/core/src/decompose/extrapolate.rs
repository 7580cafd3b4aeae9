use super::slice::{tree_slice, SliceAlgorithm};
use crate::dyadic::{Tree, TileSet};
use crate::error::{Error, Result};
use crate::function_space::{maximal_size, size, Weights};
use crate::tol::Tol;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolateReport {
    /// `size*(μ′, P⁺)`.
    pub maximal_size: f64,
    /// `sup_Q (C2 Σ|I_T| + C1 Σ|I_P|) / |I_Q|` from the slices of `μ`.
    pub bound: f64,
    /// `sup_Q Σ_T |I_T| / |I_Q|`: the coefficient of `C2`.
    pub alpha_tops: f64,
    /// `sup_Q Σ_P |I_P| / |I_Q|`: the coefficient of `C1`.
    pub alpha_exceptional: f64,
    /// `bound / (C1 + C2)`.
    pub constant: f64,
    /// Largest `size(μ′, T)` over the sampled trees of small `μ`-size.
    pub sampled_c2: f64,
}

/// Bounds the maximal size of `μ′` from the tree slices of `μ` at level `δ`.
///
/// For every complete tree `Tree(Q)` the slice of `μ` supplies trees with
/// maximal `μ`-size at most `δ` (on which `μ′` has size at most `C2`) and
/// exceptional tiles (on which `μ′(P) ≤ C1 |I_P|`).
pub fn extrapolate_check(
    mu: &Weights,
    mu_prime: &Weights,
    delta: f64,
    c1: f64,
    c2: f64,
    algorithm: SliceAlgorithm,
) -> Result<ExtrapolateReport> {
    let tol = Tol::default();
    let grid = mu.grid();
    if mu_prime.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if !(delta > 0.0) {
        return Err(Error::HypothesisFail(format!("δ = {delta} must be positive")));
    }
    for (i, d) in grid.intervals().enumerate() {
        if !tol.le(mu_prime.at(i), c1 * d.length(), c1 * d.length()) {
            return Err(Error::HypothesisFail(format!("μ′({d}) = {} exceeds C1|I| = {}", mu_prime.at(i), c1 * d.length())));
        }
    }
    let mut bound = 0.0f64;
    let mut alpha_tops = 0.0f64;
    let mut alpha_exc = 0.0f64;
    let mut sampled = 0.0f64;
    for q in grid.intervals() {
        let t0 = Tree::complete(grid, q)?;
        let c0 = maximal_size(mu, t0.tiles()).max(delta);
        let dec = tree_slice(&t0, mu, c0, delta, algorithm)?;
        let mut tops = 0.0;
        for t in &dec.trees {
            let s = size(mu_prime, &t.tree);
            sampled = sampled.max(s);
            if !tol.le(s, c2, c2) {
                return Err(Error::HypothesisFail(format!(
                    "tree at {} has μ-size at most δ but μ′-size {s} > C2 = {c2}",
                    t.tree.top()
                )));
            }
            tops += t.tree.top().length();
        }
        let exc: f64 = dec.exceptional.iter().map(|d| d.length()).sum();
        bound = bound.max((c2 * tops + c1 * exc) / q.length());
        alpha_tops = alpha_tops.max(tops / q.length());
        alpha_exc = alpha_exc.max(exc / q.length());
    }
    let max = maximal_size(mu_prime, &TileSet::full(grid));
    if !tol.le(max, bound, bound) {
        return Err(Error::HypothesisFail(format!("maximal size {max} of μ′ exceeds the bound {bound}")));
    }
    let sum = c1 + c2;
    Ok(ExtrapolateReport {
        maximal_size: max,
        bound,
        alpha_tops,
        alpha_exceptional: alpha_exc,
        constant: if sum > 0.0 { bound / sum } else { 0.0 },
        sampled_c2: sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::GridConfig;

    fn uniform(grid: GridConfig, c: f64) -> Weights {
        let mut a = Weights::zeros(grid);
        for (i, d) in grid.intervals().enumerate() {
            a.set_at(i, c * d.length());
        }
        a
    }

    #[test]
    fn zero_target_gives_zero() {
        let grid = GridConfig::new(2).unwrap();
        let mu = uniform(grid, 0.3);
        let r = extrapolate_check(&mu, &Weights::zeros(grid), 0.5, 1.0, 1.0, SliceAlgorithm::Garnett).unwrap();
        assert_eq!(r.maximal_size, 0.0);
    }

    #[test]
    fn identity_with_large_delta() {
        let grid = GridConfig::new(2).unwrap();
        let mu = uniform(grid, 0.1);
        let c2 = maximal_size(&mu, &TileSet::full(grid));
        let r = extrapolate_check(&mu, &mu, c2, 0.1, c2, SliceAlgorithm::HeavyLight).unwrap();
        assert!((r.bound - c2).abs() < 1e-12);
        assert!((r.maximal_size - c2).abs() < 1e-12);
    }

    #[test]
    fn c1_violation_rejected() {
        let grid = GridConfig::new(1).unwrap();
        let mu = uniform(grid, 1.0);
        assert!(extrapolate_check(&mu, &mu, 1.0, 0.5, 10.0, SliceAlgorithm::Garnett).is_err());
    }
}

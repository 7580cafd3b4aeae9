use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dyadic::{child_indices, DyadicInterval, GridConfig};
use crate::error::{Error, Result};
use crate::function_space::{accumulate_down, node_sums, reconstruct, wavelet_transform, CoefficientMap, DyadicFunction};
use crate::paraproduct::{pi_hh, pi_hl, MultiplierSymbol};
use crate::tol::Tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest grid for which the operator norm is computed from a dense SVD.
pub const DENSE_NORM_MAX_M: u32 = 4;

/// A perfect dyadic Calderón–Zygmund kernel, stored as the two constants
/// `K = lr_I` on `I_l × I_r` and `K = rl_I` on `I_r × I_l` for every interval
/// `I` above the finest scale. Both constants vanish at the top interval and
/// `K` vanishes on finest diagonal squares.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfectDyadicKernel {
    grid: GridConfig,
    lr: Vec<Complex64>,
    rl: Vec<Complex64>,
}

impl PerfectDyadicKernel {
    pub fn zero(grid: GridConfig) -> Self {
        let n = grid.interior_count();
        PerfectDyadicKernel { grid, lr: vec![ZERO; n], rl: vec![ZERO; n] }
    }

    /// Builds a kernel from dense constants over the intervals above the
    /// finest scale, in canonical order.
    pub fn from_constants(grid: GridConfig, lr: Vec<Complex64>, rl: Vec<Complex64>) -> Result<Self> {
        let n = grid.interior_count();
        if lr.len() != n || rl.len() != n {
            return Err(Error::InvalidKernel(format!("expected {n} sibling constants per orientation")));
        }
        if lr[0] != ZERO || rl[0] != ZERO {
            return Err(Error::InvalidKernel("constants at the top interval must vanish".into()));
        }
        if lr.iter().chain(&rl).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidKernel("constants must be finite".into()));
        }
        Ok(PerfectDyadicKernel { grid, lr, rl })
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn lr(&self) -> &[Complex64] {
        &self.lr
    }

    pub fn rl(&self) -> &[Complex64] {
        &self.rl
    }

    /// The constants `(lr_I, rl_I)` of an interval above the finest scale.
    pub fn get(&self, d: &DyadicInterval) -> Result<(Complex64, Complex64)> {
        let i = self.interior_index(d)?;
        Ok((self.lr[i], self.rl[i]))
    }

    pub fn set(&mut self, d: &DyadicInterval, lr: Complex64, rl: Complex64) -> Result<()> {
        let i = self.interior_index(d)?;
        if i == 0 && (lr != ZERO || rl != ZERO) {
            return Err(Error::InvalidKernel("constants at the top interval must vanish".into()));
        }
        self.lr[i] = lr;
        self.rl[i] = rl;
        Ok(())
    }

    fn interior_index(&self, d: &DyadicInterval) -> Result<usize> {
        self.grid.check(d)?;
        let i = self.grid.index(d);
        if self.grid.is_finest_index(i) {
            return Err(Error::BottomScale);
        }
        Ok(i)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        PerfectDyadicKernel {
            grid: self.grid,
            lr: self.lr.iter().map(|v| v * c).collect(),
            rl: self.rl.iter().map(|v| v * c).collect(),
        }
    }

    /// Kernel of the transpose `T*` for the bilinear pairing `∫ f g`.
    pub fn transpose(&self) -> Self {
        PerfectDyadicKernel { grid: self.grid, lr: self.rl.clone(), rl: self.lr.clone() }
    }

    /// `K(x, y)` for cells `x`, `y`.
    pub fn entry(&self, x: usize, y: usize) -> Complex64 {
        if x == y {
            return ZERO;
        }
        let leaf = self.grid.cells() - 1;
        let (mut a, mut b) = (leaf + x, leaf + y);
        let (mut ca, mut cb) = (a, b);
        while a != b {
            ca = a;
            cb = b;
            a = (a - 1) / 2;
            b = (b - 1) / 2;
        }
        if ca < cb {
            self.lr[a]
        } else {
            self.rl[a]
        }
    }
}

/// Smallest `C` with `|lr_I|, |rl_I| ≤ C / |I|` for all `I`.
pub fn kernel_admissibility(k: &PerfectDyadicKernel) -> f64 {
    (0..k.grid.interior_count())
        .map(|i| k.grid.length_at(i) * k.lr[i].norm().max(k.rl[i].norm()))
        .fold(0.0, f64::max)
}

fn check_grid(k: &PerfectDyadicKernel, f: &DyadicFunction) -> Result<()> {
    if k.grid != f.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `T f(x) = ∫ K(x, y) f(y) dy`, exact.
pub fn apply(k: &PerfectDyadicKernel, f: &DyadicFunction) -> Result<DyadicFunction> {
    check_grid(k, f)?;
    let grid = k.grid;
    let w = grid.cell_width();
    let sums = node_sums(grid, f.values());
    let values = accumulate_down(grid, |i| {
        let (l, r) = child_indices(i);
        (k.lr[i] * sums[r] * w, k.rl[i] * sums[l] * w)
    });
    DyadicFunction::new(grid, values)
}

/// `T* f(y) = ∫ K(x, y) f(x) dx`, the transpose for the bilinear pairing.
pub fn apply_adjoint(k: &PerfectDyadicKernel, f: &DyadicFunction) -> Result<DyadicFunction> {
    apply(&k.transpose(), f)
}

/// `T(1)`.
pub fn t_one(k: &PerfectDyadicKernel) -> DyadicFunction {
    apply(k, &DyadicFunction::constant(k.grid, Complex64::new(1.0, 0.0))).expect("same grid")
}

/// `T f` restricted to `I_root` for `f` supported in `I_root`, both given by
/// their values on the cells of `I_root`. Sibling rectangles above `I_root`
/// do not meet `I_root × I_root`, so only the subtree is visited.
pub(crate) fn apply_local(k: &PerfectDyadicKernel, root: usize, values: &[Complex64], transpose: bool) -> Vec<Complex64> {
    let n = values.len();
    let depth = n.trailing_zeros() as usize;
    let w = k.grid.cell_width();
    let (lr, rl) = if transpose { (&k.rl, &k.lr) } else { (&k.lr, &k.rl) };
    // sums[d][o]: cell sum of the descendant at relative depth d, offset o.
    let mut sums: Vec<Vec<Complex64>> = vec![Vec::new(); depth + 1];
    sums[depth] = values.to_vec();
    for d in (0..depth).rev() {
        sums[d] = sums[d + 1].chunks(2).map(|c| c[0] + c[1]).collect();
    }
    let mut acc = vec![ZERO];
    for d in 0..depth {
        let first = ((root + 1) << d) - 1;
        let mut next = Vec::with_capacity(acc.len() * 2);
        for (o, base) in acc.iter().enumerate() {
            let i = first + o;
            let (sl, sr) = (sums[d + 1][2 * o], sums[d + 1][2 * o + 1]);
            next.push(base + lr[i] * sr * w);
            next.push(base + rl[i] * sl * w);
        }
        acc = next;
    }
    acc
}

/// `T*(1)`.
pub fn t_star_one(k: &PerfectDyadicKernel) -> DyadicFunction {
    apply_adjoint(k, &DyadicFunction::constant(k.grid, Complex64::new(1.0, 0.0))).expect("same grid")
}

/// `<T φ_P, φ_P>` for every tile; zero at the finest scale.
pub fn diagonal(k: &PerfectDyadicKernel) -> MultiplierSymbol {
    let grid = k.grid;
    let n = grid.interior_count();
    // below[i] = Σ_{J ⊆ I_i} (lr_J + rl_J) |J|^2 / 4
    let mut below = vec![ZERO; grid.tile_count()];
    let mut out = CoefficientMap::zeros(grid);
    for i in (0..n).rev() {
        let len = grid.length_at(i);
        let own = (k.lr[i] + k.rl[i]) * (len * len / 4.0);
        let (l, r) = child_indices(i);
        let inner = below[l] + below[r];
        below[i] = own + inner;
        out.dense_mut()[i] = -(k.lr[i] + k.rl[i]) * (len / 4.0) + inner / len;
    }
    out
}

/// `max_P |W(T f)(P) - W(RHS)(P)|` for the splitting
/// `T f ≡ W^{-1} <T φ_P, φ_P> W f + π_hl(T(1), f) + π_hh(T*(1), f)`,
/// relative to the largest coefficient (floored at one).
pub fn splitting_residual(k: &PerfectDyadicKernel, f: &DyadicFunction) -> Result<f64> {
    check_grid(k, f)?;
    let grid = k.grid;
    let lhs = wavelet_transform(&apply(k, f)?);
    let diag = diagonal(k);
    let wf = wavelet_transform(f);
    let mut d = CoefficientMap::zeros(grid);
    for ((slot, a), b) in d.dense_mut().iter_mut().zip(diag.dense()).zip(wf.dense()) {
        *slot = a * b;
    }
    let rhs_fn = reconstruct(&d).add(&pi_hl(&t_one(k), f)?)?.add(&pi_hh(&t_star_one(k), f)?)?;
    let rhs = wavelet_transform(&rhs_fn);
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (a, b) in lhs.dense().iter().zip(rhs.dense()) {
        diff = diff.max((a - b).norm());
        scale = scale.max(a.norm()).max(b.norm());
    }
    Ok(Tol::default().relative(diff, scale))
}

/// Dense matrix of `T` acting on cell values: entry `(x, y)` is
/// `K(x, y) · 2^{-M}`. Its spectral norm is `‖T‖_{2→2}`.
pub fn dense_matrix(k: &PerfectDyadicKernel) -> DMatrix<Complex64> {
    let n = k.grid.cells();
    let w = k.grid.cell_width();
    DMatrix::from_fn(n, n, |x, y| k.entry(x, y) * w)
}

/// `‖T‖_{2→2}`: dense SVD up to [`DENSE_NORM_MAX_M`], power iteration on
/// `T^H T` above.
pub fn operator_norm(k: &PerfectDyadicKernel) -> f64 {
    if k.grid.m() <= DENSE_NORM_MAX_M {
        dense_norm(k)
    } else {
        power_norm(k, 200)
    }
}

pub(crate) fn dense_norm(k: &PerfectDyadicKernel) -> f64 {
    dense_matrix(k).singular_values().iter().copied().fold(0.0, f64::max)
}

/// Power iteration on `T^H T` with a deterministic start vector.
pub fn power_norm(k: &PerfectDyadicKernel, iterations: usize) -> f64 {
    let grid = k.grid;
    let tol = Tol::default();
    let conj = |f: &DyadicFunction| f.map(|v| v.conj());
    let start: Vec<Complex64> = (0..grid.cells())
        .map(|c| {
            let t = (c as f64 + 1.0) * 0.618_033_988_749_895;
            Complex64::new(1.0 + (t - t.floor()), 0.5 * (t * 3.0).sin())
        })
        .collect();
    let mut v = DyadicFunction::new(grid, start).expect("cell count matches grid");
    let mut est = 0.0f64;
    for _ in 0..iterations {
        let n = v.l2_norm();
        if n == 0.0 {
            return 0.0;
        }
        v = v.scale(Complex64::new(1.0 / n, 0.0));
        let tv = apply(k, &v).expect("same grid");
        // T^H g = conj(T* conj(g)) for the transpose T*.
        let next = conj(&apply_adjoint(k, &conj(&tv)).expect("same grid"));
        let lambda = next.l2_norm();
        let converged = (lambda - est).abs() <= tol.rel * lambda.max(tol.abs);
        est = lambda;
        v = next;
        if converged {
            break;
        }
    }
    est.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Tile;
    use crate::function_space::haar;

    fn k1() -> PerfectDyadicKernel {
        let grid = GridConfig::new(1).unwrap();
        let mut k = PerfectDyadicKernel::zero(grid);
        k.set(&grid.interval(0, 0).unwrap(), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        k
    }

    #[test]
    fn admissibility_examples() {
        let k = k1();
        assert_eq!(kernel_admissibility(&PerfectDyadicKernel::zero(k.grid())), 0.0);
        assert_eq!(kernel_admissibility(&k), 1.0);
        assert_eq!(kernel_admissibility(&k.scaled(Complex64::new(3.0, 0.0))), 3.0);
    }

    #[test]
    fn top_constants_rejected() {
        let grid = GridConfig::new(1).unwrap();
        let mut k = PerfectDyadicKernel::zero(grid);
        assert!(k.set(&grid.top(), Complex64::new(1.0, 0.0), ZERO).is_err());
    }

    #[test]
    fn k1_application() {
        let k = k1();
        let grid = k.grid();
        let f = DyadicFunction::indicator(grid, &grid.interval(-1, 1).unwrap()).unwrap();
        let tf = apply(&k, &f).unwrap();
        let expect = [0.5, 0.0, 0.0, 0.0];
        for (v, e) in tf.values().iter().zip(expect) {
            assert!((v - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
        let t1 = t_one(&k);
        let expect = [0.5, 0.5, 0.0, 0.0];
        for (v, e) in t1.values().iter().zip(expect) {
            assert!((v - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn k1_diagonal_matches_direct_pairing() {
        let k = k1();
        let grid = k.grid();
        let d = diagonal(&k);
        for (i, p) in grid.intervals().enumerate().take(grid.interior_count()) {
            let phi = haar(grid, &Tile::lacunary(p)).unwrap();
            let direct = apply(&k, &phi).unwrap().pair(&phi).unwrap();
            assert!((d.dense()[i] - direct).norm() < 1e-14);
        }
        assert!((d.get(&grid.interval(0, 0).unwrap()) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn k1_splitting() {
        let k = k1();
        let grid = k.grid();
        let f = DyadicFunction::from_real(grid, &[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert!(splitting_residual(&k, &f).unwrap() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let k = k1();
        assert!((power_norm(&k, 500) - dense_norm(&k)).abs() < 1e-8);
    }

    mod randomized {
        use super::super::*;
        use crate::czop::testutil::{random_function, random_kernel};
        use crate::dyadic::Tile;
        use crate::function_space::haar;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        /// Cell-by-cell matrix built from the interval that separates the two
        /// cells, independent of the heap walk used by `entry`.
        fn oracle(k: &PerfectDyadicKernel) -> Vec<Vec<Complex64>> {
            let grid = k.grid();
            let n = grid.cells();
            let mut m = vec![vec![ZERO; n]; n];
            for d in grid.intervals() {
                if d.length() <= grid.cell_width() {
                    continue;
                }
                let (l, r) = d.children(&grid).unwrap();
                let (lr, rl) = k.get(&d).unwrap();
                for x in grid.cell_range(&l) {
                    for y in grid.cell_range(&r) {
                        m[x][y] = lr;
                        m[y][x] = rl;
                    }
                }
            }
            m
        }

        fn matvec(m: &[Vec<Complex64>], f: &DyadicFunction, w: f64) -> Vec<Complex64> {
            m.iter().map(|row| row.iter().zip(f.values()).map(|(a, b)| a * b).sum::<Complex64>() * w).collect()
        }

        fn transpose(m: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
            (0..m.len()).map(|j| m.iter().map(|row| row[j]).collect()).collect()
        }

        fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
            a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
        }

        #[test]
        fn dense_oracle_agreement() {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for m in 1..=3 {
                let grid = GridConfig::new(m).unwrap();
                for _ in 0..5 {
                    let k = random_kernel(&mut rng, grid, 1.0);
                    let mat = oracle(&k);
                    let mt = transpose(&mat);
                    let w = grid.cell_width();
                    let f = random_function(&mut rng, grid);
                    assert!(close(apply(&k, &f).unwrap().values(), &matvec(&mat, &f, w), 1e-12));
                    assert!(close(apply_adjoint(&k, &f).unwrap().values(), &matvec(&mt, &f, w), 1e-12));
                    let one = DyadicFunction::constant(grid, Complex64::new(1.0, 0.0));
                    assert!(close(t_one(&k).values(), &matvec(&mat, &one, w), 1e-12));
                    assert!(close(t_star_one(&k).values(), &matvec(&mt, &one, w), 1e-12));
                    let d = diagonal(&k);
                    for (i, p) in grid.intervals().enumerate() {
                        if grid.is_finest_index(i) {
                            assert_eq!(d.dense()[i], ZERO);
                            continue;
                        }
                        let phi = haar(grid, &Tile::lacunary(p)).unwrap();
                        let tphi = DyadicFunction::new(grid, matvec(&mat, &phi, w)).unwrap();
                        assert!((tphi.pair(&phi).unwrap() - d.dense()[i]).norm() < 1e-12);
                    }
                    for (x, row) in mat.iter().enumerate() {
                        for (y, v) in row.iter().enumerate() {
                            assert_eq!(k.entry(x, y), *v);
                        }
                    }
                }
            }
        }

        #[test]
        fn local_application_matches_global() {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for m in 1..=4 {
                let grid = GridConfig::new(m).unwrap();
                let k = random_kernel(&mut rng, grid, 1.0);
                for (i, d) in grid.intervals().enumerate() {
                    let f = random_function(&mut rng, grid).restrict(&d);
                    let range = grid.cell_range(&d);
                    for transpose in [false, true] {
                        let local = apply_local(&k, i, &f.values()[range.clone()], transpose);
                        let global = if transpose { apply_adjoint(&k, &f) } else { apply(&k, &f) }.unwrap();
                        assert!(close(&local, &global.values()[range.clone()], 1e-12));
                    }
                }
            }
        }

        #[test]
        fn adjoint_identity() {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            for m in 1..=5 {
                let grid = GridConfig::new(m).unwrap();
                let k = random_kernel(&mut rng, grid, 1.0);
                let f = random_function(&mut rng, grid);
                let g = random_function(&mut rng, grid);
                let lhs = apply(&k, &f).unwrap().pair(&g).unwrap();
                let rhs = f.pair(&apply_adjoint(&k, &g).unwrap()).unwrap();
                assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm().max(1.0));
            }
        }

        #[test]
        fn mean_zero_functions_stay_in_their_interval() {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for m in 1..=4 {
                let grid = GridConfig::new(m).unwrap();
                let k = random_kernel(&mut rng, grid, 1.0);
                for d in grid.intervals() {
                    let mut f = random_function(&mut rng, grid).restrict(&d);
                    let avg = f.average(&d);
                    for c in grid.cell_range(&d) {
                        f.values_mut()[c] -= avg;
                    }
                    let tf = apply(&k, &f).unwrap();
                    let range = grid.cell_range(&d);
                    let scale = f.sup_norm() * k.lr().len() as f64;
                    for (c, v) in tf.values().iter().enumerate() {
                        if !range.contains(&c) {
                            assert!(v.norm() <= 1e-12 * scale.max(1.0), "{d} cell {c}: {v}");
                        }
                    }
                }
            }
        }

        #[test]
        fn splitting_identity_randomized() {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            for trial in 0..100 {
                let grid = GridConfig::new(1 + trial % 5).unwrap();
                let k = random_kernel(&mut rng, grid, 2.0);
                let f = random_function(&mut rng, grid);
                assert!(splitting_residual(&k, &f).unwrap() <= 1e-9);
            }
        }

        #[test]
        fn power_iteration_validated_against_svd() {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for m in 1..=3 {
                for _ in 0..5 {
                    let k = random_kernel(&mut rng, GridConfig::new(m).unwrap(), 1.0);
                    let svd = dense_norm(&k);
                    let pow = power_norm(&k, 200);
                    assert!((svd - pow).abs() <= 1e-6 * svd.max(1.0), "{svd} vs {pow}");
                }
            }
        }

        #[test]
        fn admissibility_is_homogeneous() {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let k = random_kernel(&mut rng, GridConfig::new(3).unwrap(), 1.0);
            let c = kernel_admissibility(&k);
            assert!(c <= 1.0 + 1e-12);
            let scaled = kernel_admissibility(&k.scaled(Complex64::new(0.0, -2.5)));
            assert!((scaled - 2.5 * c).abs() < 1e-12);
        }
    }
}

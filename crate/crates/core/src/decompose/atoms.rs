use super::select::tree_select;
use super::Measured;
use crate::dyadic::{DyadicInterval, TileSet};
use crate::error::{Error, Result};
use crate::function_space::{
    cancellative_maximal, lp_norm, maximal_size, reconstruct, square_function, wavelet_transform, CoefficientMap,
    DyadicFunction,
};
use crate::tol::Tol;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub interval: DyadicInterval,
    /// Selection level: the tree has size in `[2^{n-1}, 2^n]`.
    pub n: i32,
    pub c: f64,
    pub a: DyadicFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDecomposition {
    pub p: f64,
    pub atoms: Vec<Atom>,
    pub measured: Measured,
}

/// `f = Σ c_I a_I` with `H^p` atoms from iterated size selection on `|W f|^2`.
pub fn atomic_decompose(f: &DyadicFunction, p: f64) -> Result<AtomicDecomposition> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::ExponentRange(format!("p = {p} outside (0, 1]")));
    }
    let grid = f.grid();
    if !f.is_mean_zero_on(&grid.top(), Tol::default().rel) {
        return Err(Error::NotMeanZero(format!("∫ f = {}", f.integral())));
    }
    let wf = wavelet_transform(f);
    let a = wf.abs_sqr();
    let mut rest = TileSet::full(grid);
    let mut atoms = Vec::new();
    let top = maximal_size(&a, &rest);
    if top > 0.0 {
        let mut n = top.log2().ceil() as i32;
        while rest.indices().any(|i| a.at(i) > 0.0) {
            let sel = tree_select(&rest, &a, n)?;
            for t in &sel.trees {
                let mut coeffs = CoefficientMap::zeros(grid);
                for i in t.tiles().indices() {
                    coeffs.dense_mut()[i] = wf.dense()[i];
                }
                let c = (n as f64 / 2.0).exp2() * t.top().length().powf(1.0 / p);
                let atom = reconstruct(&coeffs).scale((1.0 / c).into());
                atoms.push(Atom { interval: t.top(), n, c, a: atom });
            }
            rest = sel.remainder;
            n -= 1;
        }
    }
    let sum_cp: f64 = atoms.iter().map(|at| at.c.powf(p)).sum();
    let sf = lp_norm(&square_function(f), p)?.powf(p);
    let mf = lp_norm(&cancellative_maximal(f), p)?.powf(p);
    let low = sf.min(mf);
    let mut measured = Measured::new();
    measured.insert("atoms".into(), atoms.len() as f64);
    measured.insert("sum_c_p".into(), sum_cp);
    measured.insert("square_function_p".into(), sf);
    measured.insert("maximal_function_p".into(), mf);
    measured.insert("ratio".into(), if low > 0.0 { sum_cp / low } else { 0.0 });
    let dec = AtomicDecomposition { p, atoms, measured };
    let residual = reconstruction_residual(f, &dec);
    let mut dec = dec;
    dec.measured.insert("residual".into(), residual);
    Ok(dec)
}

fn reconstruction_residual(f: &DyadicFunction, dec: &AtomicDecomposition) -> f64 {
    let mut sum = DyadicFunction::zeros(f.grid());
    for at in &dec.atoms {
        for (s, v) in sum.values_mut().iter_mut().zip(at.a.values()) {
            *s += v * at.c;
        }
    }
    let diff = sum.values().iter().zip(f.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Tol::default().relative(diff, f.sup_norm())
}

/// Re-checks reconstruction, the atom normalisation and supports.
pub fn verify_atoms(f: &DyadicFunction, dec: &AtomicDecomposition) -> Vec<String> {
    let tol = Tol::default();
    let mut out = Vec::new();
    let residual = reconstruction_residual(f, dec);
    if !tol.accepts_residual(residual) {
        out.push(format!("reconstruction residual {residual}"));
    }
    for at in &dec.atoms {
        let i = &at.interval;
        let scale = at.a.sup_norm().max(1.0);
        if !at.a.is_mean_zero_on(i, tol.rel) {
            out.push(format!("atom on {i} is not in S_0(I)"));
        }
        let cap = i.length().powf(0.5 - 1.0 / dec.p);
        if !tol.le(at.a.l2_norm(), cap, cap) {
            out.push(format!("atom on {i} has L2 norm {} above {cap}", at.a.l2_norm()));
        }
        let w = wavelet_transform(&at.a);
        if w.entries().any(|(d, v)| !d.is_subset_of(i) && v.norm() > tol.rel * scale) {
            out.push(format!("wavelet coefficients of the atom on {i} leave Tree(I)"));
        }
        if !(at.c >= 0.0) {
            out.push(format!("negative coefficient on {i}"));
        }
    }
    out
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::dyadic::GridConfig;
    use crate::testutil::{mean_zero, random_complex};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn atoms_verify(m in 1u32..=4, seed: u64, half: bool) {
            let grid = GridConfig::new(m).unwrap();
            let f = mean_zero(&random_complex(&mut ChaCha8Rng::seed_from_u64(seed), grid));
            let p = if half { 0.5 } else { 1.0 };
            let dec = atomic_decompose(&f, p).unwrap();
            let v = verify_atoms(&f, &dec);
            prop_assert!(v.is_empty(), "{:?}", v);
        }
    }
}

use rand::Rng;

use super::kernel::PerfectDyadicKernel;
use crate::dyadic::GridConfig;
use crate::function_space::DyadicFunction;
use crate::Complex64;

fn unit(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Kernel with `|c_I| ≤ c / |I|` below the top.
pub fn random_kernel(rng: &mut impl Rng, grid: GridConfig, c: f64) -> PerfectDyadicKernel {
    let n = grid.interior_count();
    let mut lr = vec![Complex64::new(0.0, 0.0); n];
    let mut rl = lr.clone();
    for i in 1..n {
        let s = c / grid.length_at(i) / std::f64::consts::SQRT_2;
        lr[i] = unit(rng) * s;
        rl[i] = unit(rng) * s;
    }
    PerfectDyadicKernel::from_constants(grid, lr, rl).unwrap()
}

pub fn random_function(rng: &mut impl Rng, grid: GridConfig) -> DyadicFunction {
    DyadicFunction::new(grid, (0..grid.cells()).map(|_| unit(rng)).collect()).unwrap()
}

/// `b` with `Re b ≥ delta` and `|b| ≤ 2`.
pub fn random_accretive(rng: &mut impl Rng, grid: GridConfig, delta: f64) -> DyadicFunction {
    let values = (0..grid.cells())
        .map(|_| Complex64::new(rng.gen_range(delta..1.5), rng.gen_range(-1.0..1.0)))
        .collect();
    DyadicFunction::new(grid, values).unwrap()
}

/// System whose tiles carry `b / [b]_P` for random accretive `b`.
pub fn random_system(rng: &mut impl Rng, grid: GridConfig, delta: f64) -> super::system::AccretiveSystem {
    let mut fam = || -> Vec<Vec<Complex64>> {
        (0..grid.tile_count())
            .map(|i| {
                let v: Vec<Complex64> = (0..grid.cells_in(i))
                    .map(|_| Complex64::new(rng.gen_range(delta..1.5), rng.gen_range(-1.0..1.0)))
                    .collect();
                let avg = v.iter().sum::<Complex64>() / v.len() as f64;
                v.into_iter().map(|z| z / avg).collect()
            })
            .collect()
    };
    let b1 = fam();
    let b2 = fam();
    super::system::AccretiveSystem::new(grid, b1, b2).unwrap()
}

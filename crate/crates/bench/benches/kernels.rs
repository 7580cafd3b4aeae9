use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use dhap_core::czop::{apply, PerfectDyadicKernel};
use dhap_core::decompose::{tree_slice, SliceAlgorithm};
use dhap_core::function_space::{maximal_size, wavelet_transform, DyadicFunction, Weights};
use dhap_core::{Complex64, GridConfig, TileSet, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRIDS: [u32; 3] = [4, 6, 8];

fn unit(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn function(rng: &mut impl Rng, grid: GridConfig) -> DyadicFunction {
    DyadicFunction::new(grid, (0..grid.cells()).map(|_| unit(rng)).collect()).unwrap()
}

fn weights(rng: &mut impl Rng, grid: GridConfig) -> Weights {
    let v = (0..grid.tile_count()).map(|i| rng.gen_range(0.0..1.0) * grid.length_at(i)).collect();
    Weights::from_dense(grid, v).unwrap()
}

fn kernel(rng: &mut impl Rng, grid: GridConfig) -> PerfectDyadicKernel {
    let n = grid.interior_count();
    let zero = Complex64::new(0.0, 0.0);
    let lr = (0..n).map(|i| if i == 0 { zero } else { unit(rng) / grid.length_at(i) }).collect();
    let rl = (0..n).map(|i| if i == 0 { zero } else { unit(rng) / grid.length_at(i) }).collect();
    PerfectDyadicKernel::from_constants(grid, lr, rl).unwrap()
}

fn benches(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for m in GRIDS {
        let grid = GridConfig::new(m).unwrap();
        let f = function(&mut rng, grid);
        let k = kernel(&mut rng, grid);
        let a = weights(&mut rng, grid);
        let full = TileSet::full(grid);
        c.bench_with_input(BenchmarkId::new("apply", m), &m, |b, _| b.iter(|| apply(&k, black_box(&f)).unwrap()));
        c.bench_with_input(BenchmarkId::new("wavelet_transform", m), &m, |b, _| {
            b.iter(|| wavelet_transform(black_box(&f)))
        });
        c.bench_with_input(BenchmarkId::new("maximal_size", m), &m, |b, _| {
            b.iter(|| maximal_size(black_box(&a), &full))
        });
        let tree = Tree::complete(grid, grid.top()).unwrap();
        let c0 = maximal_size(&a, &full).max(1e-6);
        c.bench_with_input(BenchmarkId::new("tree_slice", m), &m, |b, _| {
            b.iter(|| tree_slice(&tree, black_box(&a), c0, c0 / 4.0, SliceAlgorithm::Garnett).unwrap())
        });
    }
}

criterion_group!(kernels, benches);
criterion_main!(kernels);

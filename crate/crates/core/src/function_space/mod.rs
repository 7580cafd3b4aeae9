//! Piecewise-constant functions, the Haar basis, sizes and norms.

mod coeffs;
mod function;
mod haar;
mod norms;
mod size;

pub use coeffs::{CoefficientMap, Weights};
pub use function::DyadicFunction;
pub(crate) use function::{accumulate_down, node_sums};
pub(crate) use haar::normalized_indicator_sum;
pub use haar::{
    cancellative_maximal, check_disjoint, haar, hardy_littlewood, project, reconstruct, square_function,
    wavelet_transform,
};
pub use norms::{lp_norm, weak_lp_norm, weak_lp_witness, WeakWitness};
pub(crate) use size::chained_mass;
pub use size::{bmo_norm, maximal_mean, maximal_size, maximal_size_top, mean, set_size, size};

//! Dyadic Haar analysis on `[0, 2^M]`.
//!
//! Functions are constant on cells of width `2^-M`. The crate provides the
//! tile combinatorics, Haar transforms and Carleson-type sizes, stopping-time
//! decompositions of tile collections, dyadic paraproducts, and perfect
//! dyadic Calderón–Zygmund operators with their `T1`/`Tb` certificates.

pub mod czop;
pub mod decompose;
pub mod dyadic;
pub mod error;
pub mod function_space;
pub mod json;
pub mod paraproduct;
pub mod tol;

#[cfg(test)]
pub(crate) mod testutil;

pub use dyadic::{
    doubled_tiles, is_convex, maximal_tiles, packing_constant, tile_leq, uniform_packing_constant, DyadicInterval,
    GridConfig, Tile, TileKind, TileSet, Tree,
};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use tol::Tol;

//! Verification harness for `dhap-core`: run configuration, random instance
//! generators, verification suites, reports, decompositions and SVG
//! rendering of tile collections.

pub mod config;
pub mod decompose;
pub mod gen;
pub mod render;
pub mod report;
pub mod suites;

pub use config::RunConfig;
pub use report::SuiteReport;

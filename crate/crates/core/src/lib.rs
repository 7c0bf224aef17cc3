//! Large deviations of the range of a planar random walk on the scale of its mean.
//!
//! The crate bundles
//!
//! - [`step_models`]: validated step laws on Z^2 and reproducible random streams,
//! - [`kernels`]: Gaussian, wrapped-Gaussian and exact lattice heat kernels on the torus,
//! - [`range_engine`]: Monte Carlo estimators for the range `R_n` and an exhaustive oracle,
//! - [`skeleton_lab`]: skeleton walks, pair empirical measures, hole cutting and bridge diagnostics,
//! - [`rate_solver`]: the radial variational problem behind the rate function `I(b)`,
//! - [`experiment`]: manifest-driven runs that write CSV artifacts and a claim report.

pub mod experiment;
pub mod kernels;
pub mod quadrature;
pub mod range_engine;
pub mod rate_solver;
pub mod skeleton_lab;
pub mod stats;
pub mod step_models;

pub use step_models::{RngStream, StepDistribution, StepSpec};

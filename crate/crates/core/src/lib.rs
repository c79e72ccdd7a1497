//! Scalable bigraphical lasso.
//!
//! Simultaneous l1-penalized estimation of the row-side precision `Ψ`
//! (n×n) and column-side precision `Θ` (p×p) of a matrix-variate
//! Gaussian whose joint precision is the Kronecker sum `Ψ ⊕ Θ`. The
//! solver works entirely through the eigendecompositions of the two
//! factors, so memory stays `O(n² + p²)` instead of the `O(n²p²)` a
//! dense treatment of the joint precision would need. A rank-based
//! (nonparanormal) front end extends the model to count data, and the
//! [`simulate`] / [`evaluate`] modules cover synthetic benchmarks and
//! support-recovery scoring.
//!
//! Data orientation throughout: a data matrix `Y` is `p × n`, features
//! along rows and samples along columns. The sample-side covariance
//! estimate `T̂` (n×n) pairs with `Ψ`, the feature-side `Ŝ` (p×p) with
//! `Θ`.
//!
//! With the default `parallel` feature the embarrassingly parallel
//! inner loops run on rayon; every parallel site computes independent
//! output cells, so results are bit-identical to the sequential build
//! (`--no-default-features`) at any thread count.

pub mod covariance;
pub mod data;
mod error;
pub mod evaluate;
pub mod linalg;
pub mod nonparanormal;
pub mod oracle;
mod par;
pub mod simulate;
pub mod solver;

pub use crate::error::{Error, Result};
pub use crate::par::configure_thread_pool;

//! Error type shared across the crate.

/// Errors reported by matrix construction, estimation and the solver.
///
/// Variants are grouped so a caller can map them onto coarse failure
/// classes: invalid configuration, malformed data, or a numerical
/// failure discovered mid-computation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shape or size constraint violated.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An input entry was NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// Strict construction of a symmetric matrix saw an asymmetric input.
    #[error("asymmetric input: max |m[i,j] - m[j,i]| = {max_dev:e}")]
    Asymmetric { max_dev: f64 },

    /// The iterative eigensolver hit its sweep cap before the
    /// off-diagonal mass dropped below tolerance.
    #[error("eigendecomposition did not converge: off-diagonal residual {residual:e}")]
    EigenNonConvergence { residual: f64 },

    /// A Kronecker-sum eigenvalue pair sum was not positive.
    #[error("positive definiteness violated: {0}")]
    PositiveDefiniteness(String),

    /// Solver aborted mid-run; carries where it happened.
    #[error("solver aborted at iteration {iteration}, column {column}: {detail}")]
    SolverAbort {
        iteration: usize,
        column: usize,
        detail: String,
    },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violated its invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The requested covariance estimator is not valid in this context.
    #[error("estimator error: {0}")]
    Estimator(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Shared numerical kernels.
//!
//! Everything here is pure and deterministic: the same inputs produce
//! bit-identical outputs regardless of thread count.

mod eigen;
mod fit;
mod gauss;
mod logsum;
mod quad;
mod sup;

pub use eigen::{symmetric_eigenvalues, symmetric_eigenvalues_with};
pub use fit::least_squares_line;
pub use gauss::{
    gaussian_lower_tail, gaussian_upper_tail, log_gaussian_density, log_lower_tail,
    log_upper_tail, LN_SQRT_2PI,
};
pub use logsum::{log_add_exp, log_sum_exp, log_sum_exp_unweighted};
pub use quad::{adaptive_quadrature, integrate, QuadConfig, QuadResult};
pub(crate) use quad::integrate_best_effort;
pub use sup::{golden_section_max, sup_search, sup_search_with, SupConfig, SupResult};
pub(crate) use sup::{grid, refine_on_grid};

use thiserror::Error;

/// Default relative/absolute tolerance for quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
/// Default bracket width for sup refinement.
pub const DEFAULT_SUP_TOL: f64 = 1e-8;
/// Default symmetry/accuracy tolerance for the eigensolver.
pub const DEFAULT_EIG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integrand returned non-finite value {value} at x = {at}")]
    IntegrandFailure { at: f64, value: f64 },

    #[error("objective returned non-finite value {value} at x = {at}")]
    EvaluationFailure { at: f64, value: f64 },

    /// Quadrature did not reach the requested tolerance within its subdivision
    /// budget. `best` carries the estimate at the point of giving up.
    #[error("quadrature budget exceeded (error estimate {:e})", best.abs_error_estimate)]
    QuadBudgetExceeded { best: QuadResult },

    #[error("eigensolver failed to converge after {0} iterations")]
    NoConvergence(usize),
}

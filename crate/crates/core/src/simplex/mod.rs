//! Integration over the probability simplex.
//!
//! All integrals are expectations under the normalized uniform measure on
//! the simplex (the flat Dirichlet). Three rules are provided:
//!
//! * [`SimplexGrid`]: a lattice of composition centroids with cell-volume
//!   weights; second order, exactly symmetric.
//! * [`GaussSimplexRule`]: a tensor Gauss–Jacobi rule on the stick-breaking
//!   coordinates of a (generalized) Dirichlet measure; exact for polynomials
//!   of degree `2·order − 1` against that measure.
//! * Monte-Carlo estimators over Dirichlet draws, see [`expect_mc`].

mod gauss;
mod grid;
mod mc;
mod point;
pub(crate) mod reduce;

use thiserror::Error;

pub use gauss::{gauss_jacobi_beta, GaussSimplexRule, StickBreaking};
pub use grid::{build_grid, build_grid_with_budget, expect_grid, SimplexGrid, DEFAULT_NODE_BUDGET};
pub use mc::{derive_seed, expect_mc, sample_stick_breaking, McEstimate};
pub use point::ThetaPoint;
pub use reduce::{log_sum_exp, pairwise_sum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("simplex dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("component {index} is negative or non-finite ({value})")]
    NegativeComponent { index: usize, value: f64 },
    #[error("components sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("grid resolution must be at least 1")]
    Resolution,
    #[error("rule needs {nodes} nodes, above the budget of {budget}; use the Monte-Carlo backend")]
    BudgetExceeded { nodes: u128, budget: usize },
    #[error("integrand is not finite at node {index} ({point:?})")]
    NonFiniteNode { index: usize, point: Vec<f64> },
    #[error("draw {index} is not finite")]
    NonFiniteDraw { index: usize },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("Dirichlet parameter {index} must be positive and finite, got {value}")]
    BadParameter { index: usize, value: f64 },
}

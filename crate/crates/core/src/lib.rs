//! Maximum relative entropy updating from data and a moment constraint at
//! once, and its use by networks of agents that each see part of the data.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the network layer and the command
//! line use.
//!
//! ```
//! use meinfer::{AgentView, ConstraintSpec, CountVector, Engine, Inference, PriorSpec};
//!
//! // A 3-sided die rolled 10 times; this agent was only told side 1's count.
//! let counts = CountVector::new(vec![4, 5, 1]).unwrap();
//! let view = AgentView::of_sides(&counts, [0]).unwrap();
//! // On average side 1 comes up twice as often as side 3: ⟨θ₁ − 2θ₃⟩ = 0.
//! let bias = ConstraintSpec::new(vec![1.0, 0.0, -2.0], 0.0).unwrap();
//! let problem = Inference::new(&PriorSpec::flat(3), &view, &bias, Engine::Auto).unwrap();
//! let solved = problem.solve().unwrap();
//! assert!(solved.residual <= 1e-9);
//! let model = problem.posterior(&solved).unwrap();
//! let mean_f: f64 = model.expect(|t| t[0] - 2.0 * t[2]);
//! assert!(mean_f.abs() < 1e-8);
//! ```

pub mod engine;
pub mod io;
pub mod multinomial;
pub mod network;
pub mod scalar;
pub mod simplex;

pub use engine::{
    expected_f, log_zeta, me_entropy, posterior, posterior_summary, sequential_update, solve_beta,
    ConstraintSpec, Engine, EngineError, EntropyReport, Inference, MarginalTable, PosteriorModel,
    PosteriorSummary, PriorSpec, SolveOptions, SolvedConstraint,
};
pub use multinomial::{
    log_multinomial, log_view_likelihood, simulate_rolls, AgentView, CountVector, LogFactorial,
    ModelError, LOG_IMPOSSIBLE,
};
pub use network::{
    belief_divergence, build_network, infer_all, infer_one, model_divergence, views_at_round,
    AgentBelief, AgentNetwork, Belief, BeliefTable, NetworkError, NetworkPreset, VisibilityRound,
};
pub use scalar::Scalar;
pub use simplex::{
    build_grid, expect_grid, expect_mc, GaussSimplexRule, McEstimate, SimplexError, SimplexGrid,
    StickBreaking, ThetaPoint,
};

pub type Theta = ThetaPoint<f64>;
pub type Grid = SimplexGrid<f64>;
pub type Prior = PriorSpec<f64>;
pub type Constraint = ConstraintSpec<f64>;
pub type Solved = SolvedConstraint<f64>;
pub type Posterior = PosteriorModel<f64>;
pub type Summary = PosteriorSummary<f64>;

pub type ThetaF32 = ThetaPoint<f32>;
pub type GridF32 = SimplexGrid<f32>;
pub type PosteriorF32 = PosteriorModel<f32>;

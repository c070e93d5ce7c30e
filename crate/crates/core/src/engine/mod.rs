//! Simultaneous updating on data and one moment constraint.
//!
//! The posterior over `θ` is `P_old(θ)·P(m′|θ)·e^{βf(θ)}/ζ`, with `β` fitted so
//! that the posterior itself satisfies `⟨f⟩ = F`. All densities are taken
//! relative to the normalized uniform measure on the simplex.

mod nodes;
mod posterior;
mod solve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multinomial::{AgentView, ModelError};
use crate::scalar::{lit, to_f64, Scalar};
use crate::simplex::{SimplexError, ThetaPoint};

pub use posterior::{
    me_entropy, posterior_summary, sequential_update, EntropyReport, MarginalTable, PosteriorModel,
    PosteriorSummary, MARGINAL_BINS,
};
pub use solve::{expected_f, log_zeta, posterior, solve_beta, Inference, SolveOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("target F = {target} is outside the attainable interval ({lo}, {hi})")]
    Infeasible { lo: f64, hi: f64, target: f64 },
    #[error(
        "multiplier solve did not converge: beta = {beta}, residual = {residual}, \
         bracket = [{lo}, {hi}], {iterations} iterations"
    )]
    NonConvergence {
        beta: f64,
        residual: f64,
        lo: f64,
        hi: f64,
        iterations: usize,
    },
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },
    #[error("the view likelihood vanishes on every quadrature node")]
    ZeroLikelihood,
    #[error("solved constraint was produced for a different prior, view, constraint or engine")]
    Provenance,
    #[error(transparent)]
    Quadrature(#[from] SimplexError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Dirichlet prior `P_old(θ)`; all ones is the flat prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "Vec<T>",
    into = "Vec<T>",
    bound(
        serialize = "T: Scalar + Serialize",
        deserialize = "T: Scalar + Deserialize<'de>"
    )
)]
pub struct PriorSpec<T> {
    dirichlet_params: Vec<T>,
    /// `ln Γ(A) − Σ ln Γ(αᵢ) − ln Γ(k)`.
    log_norm: f64,
}

impl<T: Scalar> PriorSpec<T> {
    pub fn new(dirichlet_params: Vec<T>) -> Result<Self, EngineError> {
        if dirichlet_params.len() < 2 {
            return Err(EngineError::Dimension {
                what: "prior",
                expected: 2,
                got: dirichlet_params.len(),
            });
        }
        if let Some(bad) = dirichlet_params
            .iter()
            .find(|a| !(a.is_finite() && **a > T::zero()))
        {
            return Err(EngineError::Invalid {
                what: "prior",
                detail: format!("Dirichlet parameters must be positive, got {bad}"),
            });
        }
        let params: Vec<f64> = dirichlet_params.iter().map(|&a| to_f64(a)).collect();
        let mut log_norm = ln_gamma(params.iter().sum()) - ln_gamma(params.len() as f64);
        for &a in &params {
            log_norm -= ln_gamma(a);
        }
        Ok(Self {
            dirichlet_params,
            log_norm,
        })
    }

    pub fn flat(k: usize) -> Self {
        Self {
            dirichlet_params: vec![T::one(); k],
            log_norm: 0.0,
        }
    }

    pub fn params(&self) -> &[T] {
        &self.dirichlet_params
    }

    pub fn dim(&self) -> usize {
        self.dirichlet_params.len()
    }

    pub(crate) fn params_f64(&self) -> Vec<f64> {
        self.dirichlet_params.iter().map(|&a| to_f64(a)).collect()
    }

    /// Log density relative to the normalized uniform measure:
    /// `ln Γ(A) − Σ ln Γ(αᵢ) − ln Γ(k) + Σ (αᵢ − 1) ln θᵢ`.
    pub fn log_density(&self, theta: &ThetaPoint<T>) -> T {
        let mut acc = lit::<T>(self.log_norm);
        for (&a, &t) in self.dirichlet_params.iter().zip(theta.as_slice()) {
            let e = a - T::one();
            if e != T::zero() {
                acc = acc + e * t.ln();
            }
        }
        acc
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for PriorSpec<T> {
    type Error = EngineError;

    fn try_from(params: Vec<T>) -> Result<Self, EngineError> {
        Self::new(params)
    }
}

impl<T> From<PriorSpec<T>> for Vec<T> {
    fn from(prior: PriorSpec<T>) -> Self {
        prior.dirichlet_params
    }
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Linear moment constraint `⟨Σ fᵢθᵢ⟩ = F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec<T> {
    pub f: Vec<T>,
    #[serde(rename = "F")]
    pub target: T,
}

impl<T: Scalar> ConstraintSpec<T> {
    pub fn new(f: Vec<T>, target: T) -> Result<Self, EngineError> {
        if f.iter().any(|x| !x.is_finite()) || !target.is_finite() {
            return Err(EngineError::Invalid {
                what: "constraint",
                detail: "coefficients and target must be finite".into(),
            });
        }
        Ok(Self { f, target })
    }

    /// No moment information: `f ≡ 0`, `F = 0`, which pins `β = 0`.
    pub fn none(k: usize) -> Self {
        Self {
            f: vec![T::zero(); k],
            target: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn value(&self, theta: &ThetaPoint<T>) -> T {
        self.f
            .iter()
            .zip(theta.as_slice())
            .fold(T::zero(), |acc, (&fi, &t)| acc + fi * t)
    }

    /// `(min fᵢ, max fᵢ)`; feasible targets lie strictly inside.
    pub fn attainable(&self) -> (T, T) {
        self.f
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }

    pub fn is_constant(&self) -> bool {
        let (lo, hi) = self.attainable();
        lo == hi
    }
}

/// A constraint together with its fitted multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct SolvedConstraint<T> {
    pub spec: ConstraintSpec<T>,
    pub beta: T,
    pub log_zeta: T,
    /// `|⟨f⟩ − F|` at the returned `beta`.
    pub residual: T,
    pub iterations: usize,
    pub(crate) provenance: u64,
}

pub const DEFAULT_MC_SAMPLES: usize = 200_000;

/// Numerical backend for the simplex integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Engine {
    /// Gauss–Jacobi for `k ≤ 4`, Monte-Carlo with seed 0 above.
    Auto,
    /// Composition lattice of the given resolution.
    Grid { resolution: usize },
    /// Gauss–Jacobi rule with `order` points per stick, on the β = 0 posterior.
    Gauss { order: usize },
    /// Importance sampling from the β = 0 posterior.
    #[serde(rename = "mc")]
    MonteCarlo { samples: usize, seed: u64 },
}

impl Engine {
    pub fn auto_for(k: usize, seed: u64) -> Self {
        match k {
            0..=2 => Engine::Gauss { order: 96 },
            3 => Engine::Gauss { order: 48 },
            4 => Engine::Gauss { order: 24 },
            _ => Engine::MonteCarlo {
                samples: DEFAULT_MC_SAMPLES,
                seed,
            },
        }
    }

    /// Replaces [`Engine::Auto`] by the concrete default for `k` sides.
    pub fn resolve(self, k: usize) -> Self {
        match self {
            Engine::Auto => Self::auto_for(k, 0),
            other => other,
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, Engine::MonteCarlo { .. })
    }
}

/// FNV-1a over the inputs a solve depends on.
pub(crate) fn fingerprint<T: Scalar>(
    prior: &PriorSpec<T>,
    view: &AgentView,
    constraint: &ConstraintSpec<T>,
    engine: &Engine,
) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for &a in &prior.dirichlet_params {
        eat(to_f64(a).to_bits());
    }
    eat(view.k() as u64);
    eat(view.n());
    for (&s, &c) in view.visible() {
        eat(s as u64);
        eat(c);
    }
    for &x in &constraint.f {
        eat(to_f64(x).to_bits());
    }
    eat(to_f64(constraint.target).to_bits());
    match *engine {
        Engine::Auto => eat(0),
        Engine::Grid { resolution } => {
            eat(1);
            eat(resolution as u64);
        }
        Engine::Gauss { order } => {
            eat(2);
            eat(order as u64);
        }
        Engine::MonteCarlo { samples, seed } => {
            eat(3);
            eat(samples as u64);
            eat(seed);
        }
    }
    h
}

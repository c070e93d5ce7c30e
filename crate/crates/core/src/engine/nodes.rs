use rayon::prelude::*;

use super::{ln_gamma, ConstraintSpec, Engine, EngineError, PriorSpec};
use crate::multinomial::{ln_factorial, AgentView, ViewKernel};
use crate::scalar::{lit, Scalar};
use crate::simplex::{
    build_grid, derive_seed, sample_stick_breaking, GaussSimplexRule, StickBreaking, ThetaPoint,
    DEFAULT_NODE_BUDGET,
};

/// Quadrature nodes with the β-independent part of the integrand cached.
///
/// For every backend `ζ(β) = Σⱼ exp(log_base[j] + β·f[j])`, and the weight of
/// node `j` under the uniform reference measure is
/// `exp(log_base[j] − log_prior_lik[j])`.
#[derive(Debug)]
pub(crate) struct NodeSet<T> {
    pub engine: Engine,
    pub nodes: Vec<ThetaPoint<T>>,
    pub log_base: Vec<T>,
    /// `ln P_old(θⱼ) + ln P(m′|θⱼ)` relative to the uniform measure.
    pub log_prior_lik: Vec<T>,
    pub f: Vec<T>,
}

/// `ln E_prior[P(m′|θ)]`: the Dirichlet-multinomial evidence of the view,
/// with the hidden sides aggregated.
pub(crate) fn log_evidence<T: Scalar>(prior: &PriorSpec<T>, view: &AgentView) -> f64 {
    let alpha = prior.params_f64();
    let total: f64 = alpha.iter().sum();
    let hidden = view.hidden_total();
    let mut acc = ln_factorial(view.n()) - ln_factorial(hidden) + ln_gamma(total)
        - ln_gamma(total + view.n() as f64);
    for (&side, &m) in view.visible() {
        acc += ln_gamma(alpha[side] + m as f64) - ln_gamma(alpha[side]) - ln_factorial(m);
    }
    let hidden_alpha: f64 = view.hidden_sides().map(|s| alpha[s]).sum();
    if hidden_alpha > 0.0 {
        acc += ln_gamma(hidden_alpha + hidden as f64) - ln_gamma(hidden_alpha);
    }
    acc
}

/// The β = 0 posterior as a stick-breaking measure: visible sides first with
/// concentrations `αᵢ + mᵢ`, then the hidden block with total concentration
/// `A_H + (n − M_V)` split internally by `α_H`.
pub(crate) fn bayes_measure<T: Scalar>(
    prior: &PriorSpec<T>,
    view: &AgentView,
) -> Result<StickBreaking, EngineError> {
    let alpha = prior.params_f64();
    let visible: Vec<(usize, f64)> = view
        .visible()
        .iter()
        .map(|(&s, &m)| (s, alpha[s] + m as f64))
        .collect();
    let hidden: Vec<(usize, f64)> = view.hidden_sides().map(|s| (s, alpha[s])).collect();
    let block = if hidden.is_empty() {
        0.0
    } else {
        hidden.iter().map(|h| h.1).sum::<f64>() + view.hidden_total() as f64
    };
    let mut order = Vec::with_capacity(view.k());
    let mut sticks = Vec::with_capacity(view.k() - 1);
    for (i, &(side, c)) in visible.iter().enumerate() {
        order.push(side);
        let later: f64 = visible[i + 1..].iter().map(|v| v.1).sum::<f64>() + block;
        if later > 0.0 {
            sticks.push((c, later));
        }
    }
    for (i, &(side, a)) in hidden.iter().enumerate() {
        order.push(side);
        if i + 1 < hidden.len() {
            sticks.push((a, hidden[i + 1..].iter().map(|h| h.1).sum()));
        }
    }
    Ok(StickBreaking::new(order, sticks)?)
}

/// MC sub-stream of a view, so equal views draw equal samples.
pub(crate) fn view_stream(view: &AgentView) -> u64 {
    let mut s = derive_seed(view.k() as u64, view.n());
    for (&side, &m) in view.visible() {
        s = derive_seed(s, side as u64);
        s = derive_seed(s, m);
    }
    s
}

impl<T: Scalar> NodeSet<T> {
    pub fn build(
        prior: &PriorSpec<T>,
        view: &AgentView,
        constraint: &ConstraintSpec<T>,
        engine: Engine,
    ) -> Result<Self, EngineError> {
        let engine = engine.resolve(view.k());
        let (nodes, log_weight, conjugate) = match engine {
            Engine::Grid { resolution } => {
                let grid = build_grid::<T>(view.k(), resolution)?;
                let log_w = grid.weights().iter().map(|w| w.ln()).collect::<Vec<_>>();
                (grid.nodes().to_vec(), log_w, false)
            }
            Engine::Gauss { order } => {
                let measure = bayes_measure(prior, view)?;
                let (nodes, w) =
                    GaussSimplexRule::<T>::new(&measure, order, DEFAULT_NODE_BUDGET)?.into_parts();
                (nodes, w.into_iter().map(|w| w.ln()).collect(), true)
            }
            Engine::MonteCarlo { samples, seed } => {
                if samples < 2 {
                    return Err(crate::simplex::SimplexError::TooFewSamples(samples).into());
                }
                let measure = bayes_measure(prior, view)?;
                let nodes = sample_stick_breaking::<T>(&measure, samples, seed, view_stream(view))?;
                let lw = -lit::<T>(samples as f64).ln();
                let len = nodes.len();
                (nodes, vec![lw; len], true)
            }
            Engine::Auto => unreachable!("resolved above"),
        };
        let kernel = ViewKernel::new(view);
        let log_prior_lik: Vec<T> = nodes
            .par_iter()
            .map(|t| prior.log_density(t) + kernel.eval(t))
            .collect();
        if let Some(index) = log_prior_lik.iter().position(|v| v.is_nan()) {
            return Err(crate::simplex::SimplexError::NonFiniteNode {
                index,
                point: nodes[index]
                    .as_slice()
                    .iter()
                    .map(|&x| crate::scalar::to_f64(x))
                    .collect(),
            }
            .into());
        }
        let log_base: Vec<T> = if conjugate {
            let evidence = lit::<T>(log_evidence(prior, view));
            log_weight.iter().map(|&w| w + evidence).collect()
        } else {
            log_weight
                .iter()
                .zip(&log_prior_lik)
                .map(|(&w, &h)| w + h)
                .collect()
        };
        if log_base.iter().all(|&v| v == T::neg_infinity()) {
            return Err(EngineError::ZeroLikelihood);
        }
        let f = nodes.iter().map(|t| constraint.value(t)).collect();
        Ok(Self {
            engine,
            nodes,
            log_base,
            log_prior_lik,
            f,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// `log_base[j] + β·f[j]`.
    pub fn tilted(&self, beta: T) -> Vec<T> {
        self.log_base
            .iter()
            .zip(&self.f)
            .map(|(&b, &f)| if f == T::zero() { b } else { b + beta * f })
            .collect()
    }

    /// Log weight of each node under the uniform reference measure.
    pub fn log_reference_weights(&self) -> Vec<T> {
        self.log_base
            .iter()
            .zip(&self.log_prior_lik)
            .map(|(&b, &h)| b - h)
            .collect()
    }
}

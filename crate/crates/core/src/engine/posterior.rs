use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::nodes::NodeSet;
use super::solve::{find_multiplier, tilted_mean, Inference, SolveOptions};
use super::{ConstraintSpec, Engine, EngineError, PriorSpec, SolvedConstraint};
use crate::multinomial::{AgentView, ViewKernel};
use crate::scalar::{lit, Scalar};
use crate::simplex::reduce::{pairwise_sum, softmax};
use crate::simplex::{GaussSimplexRule, StickBreaking, ThetaPoint, DEFAULT_NODE_BUDGET};

/// Number of abscissae in each marginal table (bin midpoints on `(0, 1)`).
pub const MARGINAL_BINS: usize = 50;

/// Normalized posterior `P_new(θ) = P_old(θ)·P(m′|θ)·e^{βf(θ)}/ζ`.
#[derive(Clone, Debug)]
pub struct PosteriorModel<T> {
    prior: PriorSpec<T>,
    view: AgentView,
    kernel: ViewKernel,
    solved: SolvedConstraint<T>,
    nodes: Arc<NodeSet<T>>,
    /// Posterior mass of each node.
    mass: Vec<T>,
}

impl<T: Scalar> PosteriorModel<T> {
    pub(crate) fn from_parts(
        prior: PriorSpec<T>,
        view: AgentView,
        solved: SolvedConstraint<T>,
        nodes: Arc<NodeSet<T>>,
    ) -> Self {
        let (mass, _) = softmax(&nodes.tilted(solved.beta));
        Self {
            prior,
            kernel: ViewKernel::new(&view),
            view,
            solved,
            nodes,
            mass,
        }
    }

    pub fn prior(&self) -> &PriorSpec<T> {
        &self.prior
    }

    pub fn view(&self) -> &AgentView {
        &self.view
    }

    pub fn solved(&self) -> &SolvedConstraint<T> {
        &self.solved
    }

    pub fn constraint(&self) -> &ConstraintSpec<T> {
        &self.solved.spec
    }

    pub fn beta(&self) -> T {
        self.solved.beta
    }

    pub fn log_zeta(&self) -> T {
        self.solved.log_zeta
    }

    pub fn engine(&self) -> Engine {
        self.nodes.engine
    }

    /// `ln P_old(θ) + ln P(m′|θ)`, the untilted reference the entropy is taken against.
    pub fn log_prior_likelihood(&self, theta: &ThetaPoint<T>) -> Result<T, EngineError> {
        if theta.dim() != self.view.k() {
            return Err(EngineError::Dimension {
                what: "theta",
                expected: self.view.k(),
                got: theta.dim(),
            });
        }
        Ok(self.prior.log_density(theta) + self.kernel.eval(theta))
    }

    /// Log posterior density relative to the uniform simplex measure.
    pub fn log_density(&self, theta: &ThetaPoint<T>) -> Result<T, EngineError> {
        let tilt = self.solved.spec.value(theta);
        let tilt = if self.solved.beta == T::zero() {
            T::zero()
        } else {
            self.solved.beta * tilt
        };
        Ok(self.log_prior_likelihood(theta)? + tilt - self.solved.log_zeta)
    }

    pub fn density(&self, theta: &ThetaPoint<T>) -> Result<T, EngineError> {
        Ok(self.log_density(theta)?.exp())
    }

    pub fn nodes(&self) -> &[ThetaPoint<T>] {
        &self.nodes.nodes
    }

    /// Posterior probability carried by each node.
    pub fn node_mass(&self) -> &[T] {
        &self.mass
    }

    /// Weight of each node under the uniform reference measure, so that
    /// `Σ weightⱼ·g(θⱼ) ≈ ∫ g dθ`.
    pub fn reference_weights(&self) -> Vec<T> {
        self.nodes
            .log_reference_weights()
            .into_iter()
            .map(|w| w.exp())
            .collect()
    }

    /// Posterior expectation of `g`.
    pub fn expect(&self, g: impl Fn(&ThetaPoint<T>) -> T) -> T {
        let terms: Vec<T> = self
            .nodes
            .nodes
            .iter()
            .zip(&self.mass)
            .map(|(t, &m)| if m == T::zero() { T::zero() } else { m * g(t) })
            .collect();
        pairwise_sum(&terms)
    }

    /// `−∫ P_new ln(P_new / (P_old·P(m′|θ)))`, evaluated node by node from
    /// the densities rather than from `ln ζ` and `β`.
    pub fn direct_relative_entropy(&self) -> Result<T, EngineError> {
        let log_w = self.nodes.log_reference_weights();
        let mut terms = Vec::with_capacity(log_w.len());
        for (t, &lw) in self.nodes.nodes.iter().zip(&log_w) {
            let lp = self.log_density(t)?;
            if lp == T::neg_infinity() {
                terms.push(T::zero());
                continue;
            }
            let reference = self.log_prior_likelihood(t)?;
            terms.push(-(lw + lp).exp() * (lp - reference));
        }
        Ok(pairwise_sum(&terms))
    }

    /// 1-D marginal density of side `side` at `t`, for `k ≤ 4`, by integrating
    /// the density over the slice `θ_side = t`.
    fn slice_marginal(&self, side: usize, t: T, inner: &Option<GaussSimplexRule<T>>) -> T {
        let k = self.view.k();
        let rest = T::one() - t;
        let eval = |others: &[T]| -> T {
            let mut theta = Vec::with_capacity(k);
            let mut it = others.iter();
            for s in 0..k {
                theta.push(if s == side {
                    t
                } else {
                    rest * *it.next().unwrap()
                });
            }
            self.density(&ThetaPoint::from_raw(theta))
                .unwrap_or(T::zero())
        };
        match inner {
            None => eval(&[T::one()]),
            Some(rule) => {
                let terms: Vec<T> = rule
                    .nodes()
                    .iter()
                    .zip(rule.weights())
                    .map(|(phi, &w)| w * eval(phi.as_slice()))
                    .collect();
                // Under the uniform measure θ_side ~ Beta(1, k−1) and the rest,
                // rescaled, is uniform on the smaller simplex.
                let jac = lit::<T>((k - 1) as f64) * rest.powi(k as i32 - 2);
                jac * pairwise_sum(&terms)
            }
        }
    }

    fn marginals(&self) -> MarginalTable<T> {
        let k = self.view.k();
        let abscissa: Vec<T> = (0..MARGINAL_BINS)
            .map(|b| lit((b as f64 + 0.5) / MARGINAL_BINS as f64))
            .collect();
        let density = if k <= 4 {
            let inner = if k == 2 {
                None
            } else {
                let order = if k == 3 { 64 } else { 24 };
                let measure = StickBreaking::dirichlet(&vec![1.0; k - 1]).expect("k - 1 >= 2");
                Some(
                    GaussSimplexRule::new(&measure, order, DEFAULT_NODE_BUDGET)
                        .expect("small rule"),
                )
            };
            (0..k)
                .map(|side| {
                    abscissa
                        .iter()
                        .map(|&t| self.slice_marginal(side, t, &inner))
                        .collect()
                })
                .collect()
        } else {
            // Weighted histogram of the node masses.
            let width = lit::<T>(1.0 / MARGINAL_BINS as f64);
            (0..k)
                .map(|side| {
                    let mut bins = vec![T::zero(); MARGINAL_BINS];
                    for (t, &m) in self.nodes.nodes.iter().zip(&self.mass) {
                        let x = crate::scalar::to_f64(t[side]);
                        let b = ((x * MARGINAL_BINS as f64) as usize).min(MARGINAL_BINS - 1);
                        bins[b] = bins[b] + m;
                    }
                    bins.into_iter().map(|m| m / width).collect()
                })
                .collect()
        };
        MarginalTable { abscissa, density }
    }
}

/// Marginal densities of each `θᵢ` on a fixed abscissa.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalTable<T> {
    pub abscissa: Vec<T>,
    /// `density[i][b]` is the density of `θᵢ` at `abscissa[b]`.
    pub density: Vec<Vec<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary<T> {
    pub means: Vec<T>,
    pub variances: Vec<T>,
    pub expected_f: T,
    /// `Σ weightⱼ·P_new(θⱼ)` with the density re-evaluated in closed form.
    pub normalization: T,
    /// Standard error of `normalization` for the Monte-Carlo engine.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub normalization_std_error: Option<T>,
    pub marginals: MarginalTable<T>,
}

pub fn posterior_summary<T: Scalar>(
    model: &PosteriorModel<T>,
) -> Result<PosteriorSummary<T>, EngineError> {
    let k = model.view.k();
    let means: Vec<T> = (0..k).map(|i| model.expect(|t| t[i])).collect();
    let variances = (0..k)
        .map(|i| {
            let mu = means[i];
            model.expect(|t| (t[i] - mu) * (t[i] - mu))
        })
        .collect();
    let expected_f = tilted_mean(&model.nodes.tilted(model.beta()), &model.nodes.f);
    let log_w = model.nodes.log_reference_weights();
    let mut terms = Vec::with_capacity(log_w.len());
    for (t, &lw) in model.nodes.nodes.iter().zip(&log_w) {
        terms.push((lw + model.log_density(t)?).exp());
    }
    let normalization = pairwise_sum(&terms);
    let normalization_std_error = if model.engine().is_monte_carlo() {
        let count = lit::<T>(terms.len() as f64);
        let scaled: Vec<T> = terms.iter().map(|&v| v * count).collect();
        let dev: Vec<T> = scaled
            .iter()
            .map(|&v| (v - normalization) * (v - normalization))
            .collect();
        Some((pairwise_sum(&dev) / (count - T::one()) / count).sqrt())
    } else {
        None
    };
    Ok(PosteriorSummary {
        means,
        variances,
        expected_f,
        normalization,
        normalization_std_error,
        marginals: model.marginals(),
    })
}

/// Maximized relative entropy of the posterior against prior × likelihood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport<T> {
    /// `ln ζ − βF`, in nats; never positive.
    pub s_me: T,
    pub log_zeta: T,
    pub beta: T,
    #[serde(rename = "F")]
    pub target: T,
}

/// `S_ME = ln ζ − βF`. The posterior carries `e^{+βf}`, so substituting it into
/// the entropy functional gives `−βF`; the thermodynamic-looking `+βF` is the
/// same quantity with the multiplier's sign flipped.
pub fn me_entropy<T: Scalar>(model: &PosteriorModel<T>) -> EntropyReport<T> {
    let beta = model.beta();
    let target = model.constraint().target;
    let tilt = if beta == T::zero() {
        T::zero()
    } else {
        beta * target
    };
    EntropyReport {
        s_me: model.log_zeta() - tilt,
        log_zeta: model.log_zeta(),
        beta,
        target,
    }
}

/// Bayes first, then a moment tilt fitted on the Bayes posterior.
///
/// Returns `(bayes, tilted)`. The tilted model belongs to the same
/// exponential family as the simultaneous solution.
pub fn sequential_update<T: Scalar>(
    prior: &PriorSpec<T>,
    view: &AgentView,
    constraint: &ConstraintSpec<T>,
    engine: Engine,
) -> Result<(PosteriorModel<T>, PosteriorModel<T>), EngineError> {
    let k = view.k();
    let bayes_problem = Inference::new(prior, view, &ConstraintSpec::none(k), engine)?;
    let bayes = bayes_problem.posterior(&bayes_problem.solve()?)?;

    let target = constraint.target;
    let (lo, hi) = constraint.attainable();
    if constraint.is_constant() || !(lo < target && target < hi) {
        // Delegate the feasibility verdict to the simultaneous solver.
        Inference::new(prior, view, constraint, engine)?.solve()?;
    }
    let f: Vec<T> = bayes.nodes().iter().map(|t| constraint.value(t)).collect();
    let log_mass: Vec<T> = bayes.node_mass().iter().map(|m| m.ln()).collect();
    let tilted_log = |beta: T| -> Vec<T> {
        log_mass
            .iter()
            .zip(&f)
            .map(|(&m, &fv)| m + beta * fv)
            .collect()
    };
    let (beta, residual, iterations) = if constraint.is_constant() {
        (T::zero(), T::zero(), 0)
    } else {
        find_multiplier(
            |b| tilted_mean(&tilted_log(b), &f),
            target,
            &SolveOptions::default(),
        )?
    };
    let problem = Inference::new(prior, view, constraint, engine)?;
    let log_zeta = bayes.log_zeta() + crate::simplex::log_sum_exp(&tilted_log(beta));
    let solved = SolvedConstraint {
        spec: constraint.clone(),
        beta,
        log_zeta,
        residual,
        iterations,
        provenance: problem.provenance,
    };
    let tilted = problem.posterior(&solved)?;
    Ok((bayes, tilted))
}

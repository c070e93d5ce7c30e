use std::sync::Arc;

use super::nodes::NodeSet;
use super::{
    fingerprint, ConstraintSpec, Engine, EngineError, PosteriorModel, PriorSpec, SolvedConstraint,
};
use crate::multinomial::AgentView;
use crate::scalar::{lit, to_f64, Scalar};
use crate::simplex::reduce::{log_sum_exp, pairwise_sum};

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions<T> {
    /// Required `|⟨f⟩ − F|`.
    pub tolerance: T,
    /// Bisection stops once the bracket is this narrow.
    pub min_width: T,
    pub max_iterations: usize,
    /// Bracket expansion gives up beyond `|β| = max_beta`.
    pub max_beta: T,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::solver_tolerance(),
            min_width: T::bracket_width(),
            max_iterations: 200,
            max_beta: lit(65536.0),
        }
    }
}

/// One (prior, view, constraint, engine) problem with its nodes evaluated once.
///
/// Every β-dependent quantity reuses the cached log-integrand; `⟨f⟩` is a
/// ratio of two sums over the same nodes.
#[derive(Clone, Debug)]
pub struct Inference<T> {
    pub(crate) prior: PriorSpec<T>,
    pub(crate) view: AgentView,
    pub(crate) constraint: ConstraintSpec<T>,
    pub(crate) nodes: Arc<NodeSet<T>>,
    pub(crate) provenance: u64,
}

impl<T: Scalar> Inference<T> {
    pub fn new(
        prior: &PriorSpec<T>,
        view: &AgentView,
        constraint: &ConstraintSpec<T>,
        engine: Engine,
    ) -> Result<Self, EngineError> {
        let k = view.k();
        for (what, got) in [("prior", prior.dim()), ("constraint", constraint.dim())] {
            if got != k {
                return Err(EngineError::Dimension {
                    what,
                    expected: k,
                    got,
                });
            }
        }
        let nodes = NodeSet::build(prior, view, constraint, engine)?;
        let provenance = fingerprint(prior, view, constraint, &nodes.engine);
        Ok(Self {
            prior: prior.clone(),
            view: view.clone(),
            constraint: constraint.clone(),
            nodes: Arc::new(nodes),
            provenance,
        })
    }

    pub fn engine(&self) -> Engine {
        self.nodes.engine
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn log_zeta(&self, beta: T) -> T {
        log_sum_exp(&self.nodes.tilted(beta))
    }

    pub fn expected_f(&self, beta: T) -> T {
        tilted_mean(&self.nodes.tilted(beta), &self.nodes.f)
    }

    /// Fits `β` so that the tilted posterior satisfies the constraint.
    pub fn solve(&self) -> Result<SolvedConstraint<T>, EngineError> {
        self.solve_with(&SolveOptions::default())
    }

    pub fn solve_with(
        &self,
        options: &SolveOptions<T>,
    ) -> Result<SolvedConstraint<T>, EngineError> {
        let target = self.constraint.target;
        let (lo, hi) = self.constraint.attainable();
        let (beta, residual, iterations) = if self.constraint.is_constant() {
            if target != lo {
                return Err(EngineError::Infeasible {
                    lo: to_f64(lo),
                    hi: to_f64(hi),
                    target: to_f64(target),
                });
            }
            (T::zero(), T::zero(), 0)
        } else {
            if !(lo < target && target < hi) {
                return Err(EngineError::Infeasible {
                    lo: to_f64(lo),
                    hi: to_f64(hi),
                    target: to_f64(target),
                });
            }
            find_multiplier(|b| self.expected_f(b), target, options)?
        };
        Ok(SolvedConstraint {
            spec: self.constraint.clone(),
            beta,
            log_zeta: self.log_zeta(beta),
            residual,
            iterations,
            provenance: self.provenance,
        })
    }

    pub fn posterior(
        &self,
        solved: &SolvedConstraint<T>,
    ) -> Result<PosteriorModel<T>, EngineError> {
        if solved.provenance != self.provenance {
            return Err(EngineError::Provenance);
        }
        Ok(PosteriorModel::from_parts(
            self.prior.clone(),
            self.view.clone(),
            solved.clone(),
            Arc::clone(&self.nodes),
        ))
    }
}

/// `Σ softmax(log_w)ⱼ·valuesⱼ`.
pub(crate) fn tilted_mean<T: Scalar>(log_w: &[T], values: &[T]) -> T {
    let max = log_w
        .iter()
        .fold(T::neg_infinity(), |acc, &x| if x > acc { x } else { acc });
    let w: Vec<T> = log_w.iter().map(|&x| (x - max).exp()).collect();
    let wf: Vec<T> = w.iter().zip(values).map(|(&w, &v)| w * v).collect();
    pairwise_sum(&wf) / pairwise_sum(&w)
}

/// Root of the increasing map `beta ↦ mean(beta)` at `target`: bracket by
/// doubling from `[−1, 1]`, then bisect. Returns `(β, |residual|, iterations)`.
pub(crate) fn find_multiplier<T: Scalar>(
    mean: impl Fn(T) -> T,
    target: T,
    options: &SolveOptions<T>,
) -> Result<(T, T, usize), EngineError> {
    let tol = options.tolerance;
    let at_zero = mean(T::zero()) - target;
    if at_zero.abs() <= tol {
        return Ok((T::zero(), at_zero.abs(), 0));
    }
    let two = lit::<T>(2.0);
    let fail =
        |beta: T, residual: T, lo: T, hi: T, iterations: usize| EngineError::NonConvergence {
            beta: to_f64(beta),
            residual: to_f64(residual),
            lo: to_f64(lo),
            hi: to_f64(hi),
            iterations,
        };
    let mut lo = -T::one();
    let mut hi = T::one();
    let mut iterations = 0;
    let (mut r_lo, mut r_hi) = (mean(lo) - target, mean(hi) - target);
    while r_lo > T::zero() {
        iterations += 1;
        lo = lo * two;
        if lo.abs() > options.max_beta {
            return Err(fail(lo, r_lo, lo, hi, iterations));
        }
        r_lo = mean(lo) - target;
    }
    while r_hi < T::zero() {
        iterations += 1;
        hi = hi * two;
        if hi.abs() > options.max_beta {
            return Err(fail(hi, r_hi, lo, hi, iterations));
        }
        r_hi = mean(hi) - target;
    }
    let mut best = if r_lo.abs() < r_hi.abs() {
        (lo, r_lo)
    } else {
        (hi, r_hi)
    };
    let mut steps = 0;
    while best.1.abs() > tol {
        if steps >= options.max_iterations || hi - lo <= options.min_width {
            return Err(fail(best.0, best.1.abs(), lo, hi, iterations + steps));
        }
        steps += 1;
        let mid = (lo + hi) / two;
        let r = mean(mid) - target;
        if r.abs() < best.1.abs() {
            best = (mid, r);
        }
        if r < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((best.0, best.1.abs(), iterations + steps))
}

pub fn log_zeta<T: Scalar>(
    prior: &PriorSpec<T>,
    view: &AgentView,
    constraint: &ConstraintSpec<T>,
    beta: T,
    engine: Engine,
) -> Result<T, EngineError> {
    Ok(Inference::new(prior, view, constraint, engine)?.log_zeta(beta))
}

pub fn expected_f<T: Scalar>(
    prior: &PriorSpec<T>,
    view: &AgentView,
    constraint: &ConstraintSpec<T>,
    beta: T,
    engine: Engine,
) -> Result<T, EngineError> {
    Ok(Inference::new(prior, view, constraint, engine)?.expected_f(beta))
}

pub fn solve_beta<T: Scalar>(
    prior: &PriorSpec<T>,
    view: &AgentView,
    constraint: &ConstraintSpec<T>,
    engine: Engine,
) -> Result<SolvedConstraint<T>, EngineError> {
    Inference::new(prior, view, constraint, engine)?.solve()
}

/// Rebuilds the problem `solved` came from and returns its posterior; fails
/// with [`EngineError::Provenance`] if `solved` belongs to a different problem.
pub fn posterior<T: Scalar>(
    prior: &PriorSpec<T>,
    view: &AgentView,
    solved: &SolvedConstraint<T>,
    engine: Engine,
) -> Result<PosteriorModel<T>, EngineError> {
    Inference::new(prior, view, &solved.spec, engine)?.posterior(solved)
}

use nalgebra::{DMatrix, SymmetricEigen};

use super::{SimplexError, ThetaPoint};
use crate::scalar::{lit, Scalar};

/// Gauss rule for the Beta(a, b) probability measure on `(0, 1)`.
///
/// Golub–Welsch on the Jacobi matrix of the shifted Jacobi polynomials.
/// Returns `(nodes, weights)` with nodes ascending and weights summing to 1.
pub fn gauss_jacobi_beta(order: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1 && a > 0.0 && b > 0.0);
    // Jacobi weight (1-x)^alpha (1+x)^beta on [-1, 1], x = 2u - 1.
    let alpha = b - 1.0;
    let beta = a - 1.0;
    let s = alpha + beta;
    let mut matrix = DMatrix::<f64>::zeros(order, order);
    for n in 0..order {
        let nf = n as f64;
        let diag = if n == 0 {
            (beta - alpha) / (s + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * nf + s) * (2.0 * nf + s + 2.0))
        };
        matrix[(n, n)] = 0.5 * (1.0 + diag);
        if n + 1 < order {
            let m = nf + 1.0;
            let sq = if n == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + s).powi(2) * (3.0 + s))
            } else {
                let t = 2.0 * m + s;
                4.0 * m * (m + alpha) * (m + beta) * (m + s) / (t * t * (t + 1.0) * (t - 1.0))
            };
            let off = 0.5 * sq.sqrt();
            matrix[(n, n + 1)] = off;
            matrix[(n + 1, n)] = off;
        }
    }
    let eigen = SymmetricEigen::new(matrix);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|j| (eigen.eigenvalues[j], eigen.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    pairs.into_iter().map(|(x, w)| (x, w / total)).unzip()
}

/// A generalized Dirichlet measure given by independent Beta stick fractions.
///
/// With remaining mass `ρ` (initially 1), step `j` sets
/// `θ[order[j]] = ρ·uⱼ` with `uⱼ ~ Beta(aⱼ, bⱼ)` and `ρ ← ρ(1 − uⱼ)`; the last
/// side in `order` takes what is left. `Dirichlet(α)` is the special case
/// `aⱼ = α_j`, `bⱼ = Σ_{l>j} α_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct StickBreaking {
    order: Vec<usize>,
    sticks: Vec<(f64, f64)>,
}

impl StickBreaking {
    pub fn new(order: Vec<usize>, sticks: Vec<(f64, f64)>) -> Result<Self, SimplexError> {
        let k = order.len();
        if k < 2 || sticks.len() + 1 != k {
            return Err(SimplexError::Dimension(k));
        }
        let mut seen = vec![false; k];
        for &side in &order {
            if side >= k || seen[side] {
                return Err(SimplexError::Dimension(k));
            }
            seen[side] = true;
        }
        for (index, &(a, b)) in sticks.iter().enumerate() {
            for value in [a, b] {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(SimplexError::BadParameter { index, value });
                }
            }
        }
        Ok(Self { order, sticks })
    }

    pub fn dirichlet(params: &[f64]) -> Result<Self, SimplexError> {
        if params.len() < 2 {
            return Err(SimplexError::Dimension(params.len()));
        }
        if let Some(index) = params.iter().position(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(SimplexError::BadParameter {
                index,
                value: params[index],
            });
        }
        let k = params.len();
        let sticks = (0..k - 1)
            .map(|j| (params[j], params[j + 1..].iter().sum()))
            .collect();
        Self::new((0..k).collect(), sticks)
    }

    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn sticks(&self) -> &[(f64, f64)] {
        &self.sticks
    }

    /// Maps stick fractions to a simplex point.
    pub fn assemble<T: Scalar>(&self, fractions: &[f64]) -> ThetaPoint<T> {
        let mut theta = vec![T::zero(); self.dim()];
        let mut remaining = 1.0f64;
        for (j, &u) in fractions.iter().enumerate() {
            theta[self.order[j]] = lit(remaining * u);
            remaining *= 1.0 - u;
        }
        theta[*self.order.last().unwrap()] = lit(remaining);
        ThetaPoint::from_raw(theta)
    }
}

/// Tensor-product Gauss–Jacobi rule for a [`StickBreaking`] measure.
#[derive(Clone, Debug)]
pub struct GaussSimplexRule<T> {
    order: usize,
    nodes: Vec<ThetaPoint<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussSimplexRule<T> {
    pub fn new(measure: &StickBreaking, order: usize, budget: usize) -> Result<Self, SimplexError> {
        if order < 1 {
            return Err(SimplexError::Resolution);
        }
        let steps = measure.sticks.len();
        let count = (order as u128)
            .checked_pow(steps as u32)
            .unwrap_or(u128::MAX);
        if count > budget as u128 {
            return Err(SimplexError::BudgetExceeded {
                nodes: count,
                budget,
            });
        }
        let rules: Vec<(Vec<f64>, Vec<f64>)> = measure
            .sticks
            .iter()
            .map(|&(a, b)| gauss_jacobi_beta(order, a, b))
            .collect();
        let count = count as usize;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        let mut digits = vec![0usize; steps];
        let mut fractions = vec![0.0; steps];
        for _ in 0..count {
            let mut w = 1.0;
            for (j, &d) in digits.iter().enumerate() {
                fractions[j] = rules[j].0[d];
                w *= rules[j].1[d];
            }
            nodes.push(measure.assemble(&fractions));
            weights.push(lit(w));
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < order {
                    break;
                }
                *d = 0;
            }
        }
        Ok(Self {
            order,
            nodes,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[ThetaPoint<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn into_parts(self) -> (Vec<ThetaPoint<T>>, Vec<T>) {
        (self.nodes, self.weights)
    }
}

use serde::{Deserialize, Serialize};

use super::SimplexError;
use crate::scalar::Scalar;

/// A point `θ` of the probability simplex: non-negative components summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThetaPoint<T> {
    components: Vec<T>,
}

impl<T: Scalar> ThetaPoint<T> {
    pub fn new(components: Vec<T>) -> Result<Self, SimplexError> {
        if components.len() < 2 {
            return Err(SimplexError::Dimension(components.len()));
        }
        for (index, &c) in components.iter().enumerate() {
            if !c.is_finite() || c < T::zero() {
                return Err(SimplexError::NegativeComponent {
                    index,
                    value: crate::scalar::to_f64(c),
                });
            }
        }
        let sum: T = components.iter().copied().sum();
        if (sum - T::one()).abs() > T::simplex_tolerance() {
            return Err(SimplexError::NotNormalized(crate::scalar::to_f64(sum)));
        }
        Ok(Self { components })
    }

    /// The barycenter `(1/k, …, 1/k)`.
    pub fn uniform(k: usize) -> Self {
        let c = T::one() / crate::scalar::lit(k as f64);
        Self {
            components: vec![c; k],
        }
    }

    /// Builds a point whose invariants were established by construction.
    pub(crate) fn from_raw(components: Vec<T>) -> Self {
        debug_assert!(components.iter().all(|&c| c >= T::zero()));
        Self { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.components
    }

    pub fn into_inner(self) -> Vec<T> {
        self.components
    }
}

impl<T> std::ops::Index<usize> for ThetaPoint<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.components[i]
    }
}

//! Order-stable reductions.
//!
//! Every sum over quadrature nodes goes through [`pairwise_sum`], whose tree
//! shape depends only on the slice length. Node values may be produced in
//! parallel, the reduction itself is always the same.

use crate::scalar::Scalar;

const LEAF: usize = 16;

/// Pairwise (cascade) summation with a fixed tree shape.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    if values.len() <= LEAF {
        let mut acc = T::zero();
        for &v in values {
            acc = acc + v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `log Σ exp(xᵢ)`; `-∞` for an empty slice or all `-∞` inputs.
pub fn log_sum_exp<T: Scalar>(log_values: &[T]) -> T {
    let max = log_values
        .iter()
        .fold(T::neg_infinity(), |acc, &x| if x > acc { x } else { acc });
    if max == T::neg_infinity() {
        return T::neg_infinity();
    }
    if max == T::infinity() {
        return T::infinity();
    }
    let shifted: Vec<T> = log_values.iter().map(|&x| (x - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

/// Normalized weights `exp(xᵢ − LSE(x))`, together with the LSE itself.
pub fn softmax<T: Scalar>(log_values: &[T]) -> (Vec<T>, T) {
    let lse = log_sum_exp(log_values);
    let weights = log_values.iter().map(|&x| (x - lse).exp()).collect();
    (weights, lse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn log_sum_exp_is_stable() {
        let v = [1000.0, 1000.0];
        assert!((log_sum_exp(&v) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        let small = [-1.0f64, -2.0, -3.0];
        let direct = small.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&small) - direct).abs() < 1e-15);
    }

    #[test]
    fn softmax_sums_to_one() {
        let (w, _) = softmax(&[0.3f64, -700.0, 12.0, 5.5]);
        assert!((pairwise_sum(&w) - 1.0).abs() < 1e-15);
    }
}

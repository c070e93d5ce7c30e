use rayon::prelude::*;

use super::reduce::pairwise_sum;
use super::{SimplexError, ThetaPoint};
use crate::scalar::{lit, to_f64, Scalar};

/// Default cap on the number of grid nodes.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Deterministic rule for the normalized uniform measure on the simplex.
///
/// Nodes are the compositions `m` of `r` into `k` parts mapped to
/// `θᵢ = (mᵢ + 1/k)/(r + 1)`: the centroids of the "upright" cells of the
/// `(r+1)`-fold subdivision, so no node touches the boundary. Each of the
/// remaining hypersimplex cells hands its volume in equal shares to the
/// upright cells it touches, whose centroids average to its own. The weight
/// of a node therefore depends only on how many of its `mᵢ` are positive,
/// and the rule integrates linear functions exactly.
#[derive(Clone, Debug)]
pub struct SimplexGrid<T> {
    k: usize,
    resolution: usize,
    nodes: Vec<ThetaPoint<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> SimplexGrid<T> {
    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn resolution(&self) -> usize {
        self.resolution
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

    pub fn iter(&self) -> impl Iterator<Item = (&ThetaPoint<T>, T)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of compositions of `r` into `k` non-negative parts.
pub(crate) fn composition_count(k: usize, r: usize) -> u128 {
    binomial((r + k - 1) as u128, (k - 1) as u128).unwrap_or(u128::MAX)
}

/// Eulerian numbers `A(n, m)` for `m = 0..n` (the volumes, in unit-simplex
/// units, of the hypersimplex slabs of a unit cube).
fn eulerian_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for len in 1..=n {
        let mut next = vec![0.0; len];
        for m in 0..len {
            let keep = if m < row.len() {
                (m + 1) as f64 * row[m]
            } else {
                0.0
            };
            let carry = if m >= 1 {
                (len - m) as f64 * row[m - 1]
            } else {
                0.0
            };
            next[m] = keep + carry;
        }
        row = next;
    }
    row
}

/// Unnormalized weight for a node with `positive` non-zero parts, indexed by `positive`.
fn weights_by_support(k: usize) -> Vec<f64> {
    let eulerian = eulerian_row(k - 1);
    (0..=k)
        .map(|positive| {
            (1..k)
                .map(|j| {
                    let shared = binomial(positive as u128, (j - 1) as u128).unwrap() as f64;
                    let total = binomial(k as u128, (j - 1) as u128).unwrap() as f64;
                    eulerian[j - 1] * shared / total
                })
                .sum()
        })
        .collect()
}

fn for_each_composition(k: usize, r: usize, mut visit: impl FnMut(&[usize])) {
    let mut parts = vec![0usize; k];
    parts[k - 1] = r;
    loop {
        visit(&parts);
        // Advance to the next composition in lexicographic order of the
        // leading k-1 parts; the last part absorbs the remainder.
        let mut i = k - 1;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            let used: usize = parts[..=i].iter().sum();
            if used < r {
                parts[i] += 1;
                for p in parts.iter_mut().take(k - 1).skip(i + 1) {
                    *p = 0;
                }
                let lead: usize = parts[..k - 1].iter().sum();
                parts[k - 1] = r - lead;
                break;
            }
        }
    }
}

pub fn build_grid<T: Scalar>(k: usize, r: usize) -> Result<SimplexGrid<T>, SimplexError> {
    build_grid_with_budget(k, r, DEFAULT_NODE_BUDGET)
}

pub fn build_grid_with_budget<T: Scalar>(
    k: usize,
    r: usize,
    budget: usize,
) -> Result<SimplexGrid<T>, SimplexError> {
    if k < 2 {
        return Err(SimplexError::Dimension(k));
    }
    if r < 1 {
        return Err(SimplexError::Resolution);
    }
    let count = composition_count(k, r);
    if count > budget as u128 {
        return Err(SimplexError::BudgetExceeded {
            nodes: count,
            budget,
        });
    }
    let by_support = weights_by_support(k);
    let shift = 1.0 / k as f64;
    let scale = (r + 1) as f64;
    let mut nodes = Vec::with_capacity(count as usize);
    let mut raw = Vec::with_capacity(count as usize);
    for_each_composition(k, r, |parts| {
        let theta = parts
            .iter()
            .map(|&m| lit::<T>((m as f64 + shift) / scale))
            .collect();
        nodes.push(ThetaPoint::from_raw(theta));
        let positive = parts.iter().filter(|&&m| m > 0).count();
        raw.push(by_support[positive]);
    });
    let total = pairwise_sum(&raw);
    let weights = raw.iter().map(|&w| lit::<T>(w / total)).collect();
    Ok(SimplexGrid {
        k,
        resolution: r,
        nodes,
        weights,
    })
}

/// `Σⱼ wⱼ·g(θⱼ)`, the expectation of `g` under the uniform simplex measure.
pub fn expect_grid<T, G>(g: G, grid: &SimplexGrid<T>) -> Result<T, SimplexError>
where
    T: Scalar,
    G: Fn(&ThetaPoint<T>) -> T + Sync,
{
    let terms: Vec<T> = grid
        .nodes
        .par_iter()
        .zip(grid.weights.par_iter())
        .map(|(node, &w)| w * g(node))
        .collect();
    if let Some(index) = terms.iter().position(|t| !t.is_finite()) {
        return Err(SimplexError::NonFiniteNode {
            index,
            point: grid.nodes[index]
                .as_slice()
                .iter()
                .map(|&x| to_f64(x))
                .collect(),
        });
    }
    Ok(pairwise_sum(&terms))
}

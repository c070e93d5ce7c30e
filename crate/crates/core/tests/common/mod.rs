//! Reference implementations for the integration tests. None of this calls
//! into the library's numerics; it is deliberately naive.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Every composition of `n` into `k` non-negative parts.
pub fn compositions(n: u64, k: usize) -> Vec<Vec<u64>> {
    if k == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `n!/Πmᵢ! Πθᵢ^{mᵢ}` by direct multiplication.
pub fn multinomial_pmf(m: &[u64], theta: &[f64]) -> f64 {
    let n: u64 = m.iter().sum();
    let mut p = 1.0;
    let mut used = 0u64;
    for (&c, &t) in m.iter().zip(theta) {
        for j in 1..=c {
            used += 1;
            p *= used as f64 / j as f64 * t;
        }
    }
    debug_assert_eq!(used, n);
    p
}

/// Probability of the visible counts, summing the pmf over every hidden completion.
pub fn brute_view_probability(k: usize, n: u64, visible: &[(usize, u64)], theta: &[f64]) -> f64 {
    let hidden: Vec<usize> = (0..k)
        .filter(|s| visible.iter().all(|&(v, _)| v != *s))
        .collect();
    let seen: u64 = visible.iter().map(|&(_, c)| c).sum();
    let mut m = vec![0u64; k];
    for &(s, c) in visible {
        m[s] = c;
    }
    if hidden.is_empty() {
        return if seen == n {
            multinomial_pmf(&m, theta)
        } else {
            0.0
        };
    }
    compositions(n - seen, hidden.len())
        .into_iter()
        .map(|h| {
            for (&s, &c) in hidden.iter().zip(&h) {
                m[s] = c;
            }
            multinomial_pmf(&m, theta)
        })
        .sum()
}

/// Dirichlet log density relative to the normalized uniform measure on the simplex.
pub fn log_dirichlet_rel_uniform(alpha: &[f64], theta: &[f64]) -> f64 {
    let k = alpha.len();
    let a: f64 = alpha.iter().sum();
    let mut v = ln_gamma(a) - ln_factorial(k as u64 - 1);
    for (&ai, &t) in alpha.iter().zip(theta) {
        v += (ai - 1.0) * t.ln() - ln_gamma(ai);
    }
    v
}

/// `E[Πθᵢ^{pᵢ}]` under Dirichlet(α).
pub fn dirichlet_moment(alpha: &[f64], powers: &[u32]) -> f64 {
    let a: f64 = alpha.iter().sum();
    let p: f64 = powers.iter().map(|&p| p as f64).sum();
    let mut v = ln_gamma(a) - ln_gamma(a + p);
    for (&ai, &pi) in alpha.iter().zip(powers) {
        v += ln_gamma(ai + pi as f64) - ln_gamma(ai);
    }
    v.exp()
}

/// Three-sided lattice quadratures on the `(r+1)`-fold subdivision of the
/// triangle.
///
/// `centroids` is the composite centroid rule: every small triangle, upright
/// (`(mᵢ + 1/3)/(r+1)`, `m` a composition of `r`) or inverted (`(mᵢ + 2/3)/(r+1)`,
/// `m` a composition of `r − 1`), gets one node and equal weight.
///
/// `cell_volume` keeps only the upright nodes: every inverted triangle shares
/// its area equally among its three upright neighbours, and an upright
/// triangle borders an inverted one across edge `i` exactly when `mᵢ > 0`.
pub struct Lattice3 {
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl Lattice3 {
    pub fn centroids(r: usize) -> Self {
        let h = 1.0 / (r as f64 + 1.0);
        let mut nodes = Vec::new();
        for (parts, shift) in [(r, 1.0 / 3.0), (r.wrapping_sub(1), 2.0 / 3.0)] {
            if parts == usize::MAX {
                continue;
            }
            for a in 0..=parts {
                for b in 0..=parts - a {
                    let m = [a, b, parts - a - b];
                    nodes.push(m.map(|c| (c as f64 + shift) * h));
                }
            }
        }
        let w = 1.0 / nodes.len() as f64;
        let weights = vec![w; nodes.len()];
        Self { nodes, weights }
    }

    pub fn cell_volume(r: usize) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let h = 1.0 / (r as f64 + 1.0);
        for a in 0..=r {
            for b in 0..=r - a {
                let m = [a, b, r - a - b];
                nodes.push(m.map(|c| (c as f64 + 1.0 / 3.0) * h));
                weights.push(1.0 + m.iter().filter(|&&c| c > 0).count() as f64 / 3.0);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { nodes, weights }
    }

    pub fn expect(&self, g: impl Fn(&[f64; 3]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * g(t))
            .sum()
    }

    /// `(ln Z, ⟨f⟩)` of `h(θ)·e^{β f·θ}` on this lattice.
    pub fn tilt(&self, h: impl Fn(&[f64; 3]) -> f64, f: [f64; 3], beta: f64) -> (f64, f64) {
        let dot = |t: &[f64; 3]| f[0] * t[0] + f[1] * t[1] + f[2] * t[2];
        let z = self.expect(|t| h(t) * (beta * dot(t)).exp());
        let zf = self.expect(|t| h(t) * (beta * dot(t)).exp() * dot(t));
        (z.ln(), zf / z)
    }
}

/// Richardson extrapolation of a second-order lattice value from `r` and `2r + 1`
/// (step sizes `h` and `h/2`).
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Root of an increasing function by plain bisection.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(g(lo) < 0.0 && g(hi) > 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact `⟨f⟩` under the uniform simplex measure tilted by `e^{β f·θ}`, k = 3,
/// from the divided-difference formula `E[e^{c·θ}] = 2 Σᵢ e^{cᵢ} / Π_{j≠i}(cᵢ − cⱼ)`.
/// Requires distinct `f` and `β ≠ 0`.
pub fn uniform_tilt_mean(f: [f64; 3], beta: f64) -> f64 {
    let a: Vec<f64> = (0..3)
        .map(|i| {
            1.0 / (0..3)
                .filter(|&j| j != i)
                .map(|j| f[i] - f[j])
                .product::<f64>()
        })
        .collect();
    let s: f64 = (0..3).map(|i| a[i] * (beta * f[i]).exp()).sum();
    let ds: f64 = (0..3).map(|i| a[i] * f[i] * (beta * f[i]).exp()).sum();
    -2.0 / beta + ds / s
}

pub fn random_simplex_point(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn random_counts(rng: &mut ChaCha8Rng, k: usize, n: u64) -> Vec<u64> {
    let mut counts = vec![0u64; k];
    for _ in 0..n {
        counts[rng.random_range(0..k)] += 1;
    }
    counts
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

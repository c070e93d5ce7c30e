use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reduce::pairwise_sum;
use super::{SimplexError, StickBreaking, ThetaPoint};
use crate::scalar::{lit, Scalar};

/// Draws per generator block. Block `b` of stream `s` under seed `S` uses
/// the generator seeded with `derive_seed(derive_seed(S, s), b)`, so the
/// sample sequence does not depend on how blocks are spread over threads.
const BLOCK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate<T> {
    pub value: T,
    pub std_error: T,
    pub samples: usize,
    pub seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `stream` under `master`: `splitmix64(master ⊕ splitmix64(stream))`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}

fn block_rng(seed: u64, stream: u64, block: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(seed, stream), block as u64))
}

fn gammas(shapes: &[f64]) -> Result<Vec<Gamma<f64>>, SimplexError> {
    shapes
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            Gamma::new(value, 1.0).map_err(|_| SimplexError::BadParameter { index, value })
        })
        .collect()
}

fn blocked<T, F>(samples: usize, seed: u64, stream: u64, draw: F) -> Vec<Option<ThetaPoint<T>>>
where
    T: Scalar,
    F: Fn(&mut ChaCha8Rng) -> Option<ThetaPoint<T>> + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = block_rng(seed, stream, b);
            let len = BLOCK.min(samples - b * BLOCK);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

fn first_failure<T>(draws: Vec<Option<ThetaPoint<T>>>) -> Result<Vec<ThetaPoint<T>>, SimplexError> {
    let mut out = Vec::with_capacity(draws.len());
    for (index, d) in draws.into_iter().enumerate() {
        match d {
            Some(p) => out.push(p),
            None => return Err(SimplexError::NonFiniteDraw { index }),
        }
    }
    Ok(out)
}

/// Dirichlet draws as normalized Gamma variates.
pub(crate) fn sample_dirichlet<T: Scalar>(
    params: &[f64],
    samples: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<ThetaPoint<T>>, SimplexError> {
    if params.len() < 2 {
        return Err(SimplexError::Dimension(params.len()));
    }
    let dists = gammas(params)?;
    let draws = blocked(samples, seed, stream, |rng| {
        let g: Vec<f64> = dists.iter().map(|d| d.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return None;
        }
        Some(ThetaPoint::from_raw(
            g.iter().map(|&x| lit(x / total)).collect(),
        ))
    });
    first_failure(draws)
}

/// Draws from a stick-breaking measure; each Beta fraction is `X/(X+Y)` with
/// `X ~ Γ(a)`, `Y ~ Γ(b)`.
pub fn sample_stick_breaking<T: Scalar>(
    measure: &StickBreaking,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<ThetaPoint<T>>, SimplexError> {
    let pairs: Vec<(Gamma<f64>, Gamma<f64>)> = measure
        .sticks()
        .iter()
        .enumerate()
        .map(|(index, &(a, b))| {
            let ga =
                Gamma::new(a, 1.0).map_err(|_| SimplexError::BadParameter { index, value: a })?;
            let gb =
                Gamma::new(b, 1.0).map_err(|_| SimplexError::BadParameter { index, value: b })?;
            Ok((ga, gb))
        })
        .collect::<Result<_, SimplexError>>()?;
    let draws = blocked(samples, seed, stream, |rng| {
        let mut fractions = Vec::with_capacity(pairs.len());
        for (ga, gb) in &pairs {
            let x = ga.sample(rng);
            let y = gb.sample(rng);
            let u = x / (x + y);
            if !u.is_finite() {
                return None;
            }
            fractions.push(u);
        }
        Some(measure.assemble(&fractions))
    });
    first_failure(draws)
}

/// Monte-Carlo estimate of `E[g(θ)]` for `θ ~ Dirichlet(dirichlet_params)`.
pub fn expect_mc<T, G>(
    g: G,
    dirichlet_params: &[f64],
    samples: usize,
    seed: u64,
) -> Result<McEstimate<T>, SimplexError>
where
    T: Scalar,
    G: Fn(&ThetaPoint<T>) -> T + Sync,
{
    if samples < 2 {
        return Err(SimplexError::TooFewSamples(samples));
    }
    if let Some(index) = dirichlet_params
        .iter()
        .position(|&a| !(a > 0.0 && a.is_finite()))
    {
        return Err(SimplexError::BadParameter {
            index,
            value: dirichlet_params[index],
        });
    }
    let draws = sample_dirichlet::<T>(dirichlet_params, samples, seed, 0)?;
    let values: Vec<T> = draws.par_iter().map(&g).collect();
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(SimplexError::NonFiniteDraw { index });
    }
    let count: T = lit(samples as f64);
    let mean = pairwise_sum(&values) / count;
    let squares: Vec<T> = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
    let variance = pairwise_sum(&squares) / (count - T::one());
    Ok(McEstimate {
        value: mean,
        std_error: (variance / count).sqrt(),
        samples,
        seed,
    })
}

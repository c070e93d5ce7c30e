//! Multinomial likelihood of die-roll counts, marginalized over the counts
//! an agent cannot see, and a seeded roll simulator.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::scalar::{lit, to_f64, Scalar};
use crate::simplex::{derive_seed, SimplexError, ThetaPoint};

/// Log-probability of an outcome the model rules out (`θᵢ = 0` with `mᵢ > 0`).
pub const LOG_IMPOSSIBLE: f64 = f64::NEG_INFINITY;

/// Size of the shared log-factorial table; larger arguments use `ln Γ(n+1)`.
pub const DEFAULT_LOG_FACTORIAL_TABLE: usize = 1_000_000;

/// Sub-stream used by [`simulate_rolls`].
const ROLL_STREAM: u64 = 0x524f_4c4c;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("a die needs at least 2 sides, got {0}")]
    TooFewSides(usize),
    #[error("dimension mismatch: expected {expected} sides, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("side {side} is outside 1..={k}")]
    SideOutOfRange { side: usize, k: usize },
    #[error("side {0} listed twice")]
    DuplicateSide(usize),
    #[error("visible counts sum to {visible}, more than the {n} rolls")]
    VisibleExceedsTotal { visible: u64, n: u64 },
    #[error("every side is visible but the counts sum to {visible}, not {n}")]
    IncompleteFullView { visible: u64, n: u64 },
    #[error(transparent)]
    Theta(#[from] SimplexError),
}

/// `ln n!` by table lookup, falling back to `ln Γ(n + 1)`.
#[derive(Debug)]
pub struct LogFactorial {
    table: Vec<f64>,
}

impl LogFactorial {
    pub fn with_capacity(n_max: usize) -> Self {
        let mut table = Vec::with_capacity(n_max + 1);
        table.push(0.0);
        // Compensated running sum of ln i.
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for i in 1..=n_max {
            let y = (i as f64).ln() - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        Self { table }
    }

    pub fn shared() -> &'static Self {
        static TABLE: OnceLock<LogFactorial> = OnceLock::new();
        TABLE.get_or_init(|| Self::with_capacity(DEFAULT_LOG_FACTORIAL_TABLE))
    }

    pub fn capacity(&self) -> usize {
        self.table.len() - 1
    }

    pub fn get(&self, n: u64) -> f64 {
        match self.table.get(n as usize) {
            Some(&v) => v,
            None => ln_gamma(n as f64 + 1.0),
        }
    }
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    LogFactorial::shared().get(n)
}

/// Observed side counts `m = (m₁, …, m_k)` with total `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
    n: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self, ModelError> {
        if counts.len() < 2 {
            return Err(ModelError::TooFewSides(counts.len()));
        }
        let n = counts.iter().sum();
        Ok(Self { counts, n })
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// The counts one agent can see, with the total number of rolls announced to everyone.
///
/// Sides are 0-based here; files and the command line use 1-based sides.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AgentView {
    k: usize,
    n: u64,
    visible: BTreeMap<usize, u64>,
}

impl AgentView {
    pub fn new(
        k: usize,
        n: u64,
        visible: impl IntoIterator<Item = (usize, u64)>,
    ) -> Result<Self, ModelError> {
        if k < 2 {
            return Err(ModelError::TooFewSides(k));
        }
        let mut map = BTreeMap::new();
        for (side, count) in visible {
            if side >= k {
                return Err(ModelError::SideOutOfRange { side: side + 1, k });
            }
            if map.insert(side, count).is_some() {
                return Err(ModelError::DuplicateSide(side + 1));
            }
        }
        let seen: u64 = map.values().sum();
        if seen > n {
            return Err(ModelError::VisibleExceedsTotal { visible: seen, n });
        }
        if map.len() == k && seen != n {
            return Err(ModelError::IncompleteFullView { visible: seen, n });
        }
        Ok(Self { k, n, visible: map })
    }

    /// An agent that knows only `n`.
    pub fn empty(k: usize, n: u64) -> Result<Self, ModelError> {
        Self::new(k, n, std::iter::empty())
    }

    pub fn full(counts: &CountVector) -> Self {
        Self::of_sides(counts, 0..counts.k()).expect("complete view of a valid count vector")
    }

    /// The view that reveals `sides` of `counts`.
    pub fn of_sides(
        counts: &CountVector,
        sides: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        let pairs: Vec<(usize, u64)> = sides
            .into_iter()
            .map(|s| {
                counts
                    .counts
                    .get(s)
                    .map(|&c| (s, c))
                    .ok_or(ModelError::SideOutOfRange {
                        side: s + 1,
                        k: counts.k(),
                    })
            })
            .collect::<Result<_, _>>()?;
        Self::new(counts.k(), counts.n, pairs)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn visible(&self) -> &BTreeMap<usize, u64> {
        &self.visible
    }

    pub fn visible_sides(&self) -> impl Iterator<Item = usize> + '_ {
        self.visible.keys().copied()
    }

    pub fn hidden_sides(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(|s| !self.visible.contains_key(s))
    }

    pub fn visible_total(&self) -> u64 {
        self.visible.values().sum()
    }

    /// Rolls that landed on sides this agent cannot see.
    pub fn hidden_total(&self) -> u64 {
        self.n - self.visible_total()
    }

    pub fn is_full(&self) -> bool {
        self.visible.len() == self.k
    }

    pub fn is_empty(&self) -> bool {
        self.visible.is_empty()
    }
}

fn check_dim<T: Scalar>(k: usize, theta: &ThetaPoint<T>) -> Result<(), ModelError> {
    if theta.dim() != k {
        return Err(ModelError::Dimension {
            expected: k,
            got: theta.dim(),
        });
    }
    Ok(())
}

/// `m·ln θ` with `0·ln 0 = 0`.
fn count_log<T: Scalar>(count: u64, p: T) -> T {
    if count == 0 {
        T::zero()
    } else if p <= T::zero() {
        lit(LOG_IMPOSSIBLE)
    } else {
        lit::<T>(count as f64) * p.ln()
    }
}

/// `ln[ n!/(Πmᵢ!) Πθᵢ^{mᵢ} ]`.
pub fn log_multinomial<T: Scalar>(m: &CountVector, theta: &ThetaPoint<T>) -> Result<T, ModelError> {
    check_dim(m.k(), theta)?;
    // Summing in a canonical order makes the result exactly invariant under
    // relabelling the sides.
    let mut terms: Vec<(u64, T)> = m
        .counts
        .iter()
        .copied()
        .zip(theta.as_slice().iter().copied())
        .collect();
    terms.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut coefficient = ln_factorial(m.n);
    for &(c, _) in &terms {
        coefficient -= ln_factorial(c);
    }
    let mut acc = lit::<T>(coefficient);
    for &(c, p) in &terms {
        acc = acc + count_log(c, p);
    }
    Ok(acc.min(T::zero()))
}

/// Log-likelihood of a partial view, summed in closed form over every
/// completion of the hidden counts: the hidden sides act as one aggregated
/// side with probability `θ_rest = Σ_{hidden} θᵢ` and count `n − M_V`.
pub fn log_view_likelihood<T: Scalar>(
    view: &AgentView,
    theta: &ThetaPoint<T>,
) -> Result<T, ModelError> {
    check_dim(view.k, theta)?;
    Ok(ViewKernel::new(view).eval(theta))
}

/// [`log_view_likelihood`] with everything that depends only on the view
/// computed once. Dimensions are not rechecked.
#[derive(Clone, Debug)]
pub(crate) struct ViewKernel {
    coefficient: f64,
    visible: Vec<(usize, u64)>,
    hidden: Vec<usize>,
    hidden_total: u64,
    full: Option<CountVector>,
}

impl ViewKernel {
    pub(crate) fn new(view: &AgentView) -> Self {
        let hidden_total = view.hidden_total();
        let mut coefficient = ln_factorial(view.n) - ln_factorial(hidden_total);
        for &c in view.visible.values() {
            coefficient -= ln_factorial(c);
        }
        let full = view.is_full().then(|| CountVector {
            counts: view.visible.values().copied().collect(),
            n: view.n,
        });
        Self {
            coefficient,
            visible: view.visible.iter().map(|(&s, &c)| (s, c)).collect(),
            hidden: view.hidden_sides().collect(),
            hidden_total,
            full,
        }
    }

    pub(crate) fn eval<T: Scalar>(&self, theta: &ThetaPoint<T>) -> T {
        if let Some(m) = &self.full {
            return log_multinomial(m, theta).expect("dimension fixed by the view");
        }
        let mut acc = lit::<T>(self.coefficient);
        for &(side, c) in &self.visible {
            acc = acc + count_log(c, theta[side]);
        }
        if self.hidden_total > 0 {
            let rest: T = self.hidden.iter().map(|&s| theta[s]).sum();
            acc = acc + count_log(self.hidden_total, rest);
        }
        acc.min(T::zero())
    }
}

/// Rolls a die with side probabilities `theta_true` `n` times.
///
/// Counts are drawn side by side as conditional binomials
/// `mᵢ ~ Bin(n − Σ_{j<i} mⱼ, θᵢ / Σ_{j≥i} θⱼ)`.
pub fn simulate_rolls<T: Scalar>(theta_true: &ThetaPoint<T>, n: u64, seed: u64) -> CountVector {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, ROLL_STREAM));
    let theta: Vec<f64> = theta_true.as_slice().iter().map(|&x| to_f64(x)).collect();
    let k = theta.len();
    let mut counts = vec![0u64; k];
    let mut left = n;
    let mut mass: f64 = theta.iter().sum();
    for i in 0..k {
        if left == 0 {
            break;
        }
        if i == k - 1 {
            counts[i] = left;
            break;
        }
        let p = if mass > 0.0 {
            (theta[i] / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = Binomial::new(left, p)
            .expect("probability in [0, 1]")
            .sample(&mut rng);
        counts[i] = draw;
        left -= draw;
        mass -= theta[i];
    }
    CountVector::new(counts).expect("k >= 2 for a valid simplex point")
}

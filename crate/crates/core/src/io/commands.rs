use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{
    parse_constraint, read_json, to_json, write_text, CountsFile, ExperimentConfig,
};
use super::record::{AgentRecord, ResultRecord, Timing};
use super::CliError;
use crate::engine::{Engine, Inference};
use crate::multinomial::{simulate_rolls, AgentView, CountVector};
use crate::network::{infer_all, infer_one, model_divergence, VisibilityRound};
use crate::simplex::ThetaPoint;

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub gauss: Option<usize>,
    pub mc_samples: Option<usize>,
    /// `f=..;F=..` shorthand, or `none` to drop the config's constraint.
    pub constraint: Option<String>,
    pub round: Option<usize>,
    pub timing: bool,
}

impl Overrides {
    pub fn apply(&self, mut config: ExperimentConfig) -> Result<ExperimentConfig, CliError> {
        if let Some(seed) = self.seed {
            config.seed = seed;
            if let Engine::MonteCarlo { samples, .. } = config.engine {
                config.engine = Engine::MonteCarlo { samples, seed };
            }
        }
        let engines = [
            self.grid.is_some(),
            self.gauss.is_some(),
            self.mc_samples.is_some(),
        ];
        if engines.iter().filter(|&&e| e).count() > 1 {
            return Err(CliError::input(
                "--grid, --gauss and --mc-samples are mutually exclusive",
            ));
        }
        if let Some(resolution) = self.grid {
            config.engine = Engine::Grid { resolution };
        }
        if let Some(order) = self.gauss {
            config.engine = Engine::Gauss { order };
        }
        if let Some(samples) = self.mc_samples {
            config.engine = Engine::MonteCarlo {
                samples,
                seed: config.seed,
            };
        }
        match self.constraint.as_deref().map(str::trim) {
            None => {}
            Some("none") => config.constraint = None,
            Some(spec) => config.constraint = Some(parse_constraint(spec)?),
        }
        if let Some(round) = self.round {
            config.round = round;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Which sides an `infer` agent sees.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ViewSpec {
    #[default]
    Full,
    Empty,
    /// 1-based side numbers.
    Sides(Vec<usize>),
}

impl std::str::FromStr for ViewSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "none" | "" => Ok(ViewSpec::Empty),
            "all" | "full" => Ok(ViewSpec::Full),
            list => list
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&v| v >= 1)
                        .ok_or_else(|| {
                            CliError::input(format!("'{p}' is not a 1-based side number"))
                        })
                })
                .collect::<Result<_, _>>()
                .map(ViewSpec::Sides),
        }
    }
}

impl ViewSpec {
    pub fn view_of(&self, counts: &CountVector) -> Result<AgentView, CliError> {
        let view = match self {
            ViewSpec::Full => Ok(AgentView::full(counts)),
            ViewSpec::Empty => AgentView::empty(counts.k(), counts.n()),
            ViewSpec::Sides(sides) => AgentView::of_sides(counts, sides.iter().map(|s| s - 1)),
        };
        view.map_err(|e| CliError::input(e.to_string()))
    }
}

/// Inclusive β sweep; rows are `min + i·step` for `i = 0..=⌊(max − min)/step⌋`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl BetaRange {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let BetaRange { min, max, step } = *self;
        if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || max < min {
            return Err(CliError::input(format!(
                "bad beta range: min {min}, max {max}, step {step}"
            )));
        }
        // Slack for ranges like 0..1 by 0.1 whose quotient lands just below an integer.
        let count = ((max - min) / step * (1.0 + 1e-12)).floor() as usize + 1;
        Ok((0..count).map(|i| min + i as f64 * step).collect())
    }
}

fn load_inputs(
    config: &Path,
    counts: &Path,
    overrides: &Overrides,
) -> Result<(ExperimentConfig, CountsFile, CountVector), CliError> {
    let config = overrides.apply(ExperimentConfig::load(config)?)?;
    let file = CountsFile::load(counts)?;
    let m = checked_counts(&config, &file)?;
    Ok((config, file, m))
}

fn checked_counts(config: &ExperimentConfig, file: &CountsFile) -> Result<CountVector, CliError> {
    let m = file.count_vector()?;
    if file.k != config.k {
        return Err(CliError::input(format!(
            "counts file has k = {}, config has k = {}",
            file.k, config.k
        )));
    }
    if let Some(n) = config.n {
        if n != file.n {
            return Err(CliError::input(format!(
                "counts file has n = {}, config has n = {n}",
                file.n
            )));
        }
    }
    Ok(m)
}

/// Draws `n` rolls of the configured true die.
pub fn run_simulate(config: &ExperimentConfig) -> Result<CountsFile, CliError> {
    let n = config
        .n
        .ok_or_else(|| CliError::input("simulate needs n in the config"))?;
    let theta = config
        .theta_true
        .clone()
        .ok_or_else(|| CliError::input("simulate needs theta_true in the config"))?;
    let point = ThetaPoint::new(theta.clone()).map_err(|e| CliError::input(e.to_string()))?;
    let m = simulate_rolls(&point, n, config.seed);
    Ok(CountsFile {
        k: config.k,
        n,
        counts: m.counts().to_vec(),
        seed: config.seed,
        theta_true: Some(theta),
    })
}

pub fn cmd_simulate(
    config: &Path,
    out: &Path,
    overrides: &Overrides,
) -> Result<CountsFile, CliError> {
    let config = overrides.apply(ExperimentConfig::load(config)?)?;
    let counts = run_simulate(&config)?;
    write_text(out, &to_json(&counts))?;
    Ok(counts)
}

/// Single-agent inference. Engine failures are recorded in the result, not returned.
pub fn run_infer(
    config: &ExperimentConfig,
    file: &CountsFile,
    view: &ViewSpec,
    timing: bool,
) -> Result<ResultRecord, CliError> {
    let start = Instant::now();
    let m = checked_counts(config, file)?;
    let view = view.view_of(&m)?;
    let engine = config.engine_spec();
    let outcome = infer_one(
        &view,
        &config.prior_spec(),
        &config.constraint_spec(),
        engine,
    );
    Ok(ResultRecord {
        command: "infer".into(),
        config: config.clone(),
        engine,
        counts: file.clone(),
        round: None,
        agents: vec![AgentRecord::new(None, &view, &outcome)],
        divergence: None,
        timing: timing.then(|| Timing {
            elapsed_seconds: start.elapsed().as_secs_f64(),
        }),
    })
}

pub fn cmd_infer(
    config: &Path,
    counts: &Path,
    view: &ViewSpec,
    out: &Path,
    overrides: &Overrides,
) -> Result<ResultRecord, CliError> {
    let (config, file, _) = load_inputs(config, counts, overrides)?;
    let record = run_infer(&config, &file, view, overrides.timing)?;
    write_text(out, &record.to_json())?;
    Ok(record)
}

/// Every agent's posterior at the configured round, plus their pairwise divergences.
pub fn run_network(
    config: &ExperimentConfig,
    file: &CountsFile,
    timing: bool,
) -> Result<ResultRecord, CliError> {
    let start = Instant::now();
    let m = checked_counts(config, file)?;
    let net = config.agent_network()?;
    let engine = config.engine_spec();
    let table = infer_all(
        &net,
        &m,
        VisibilityRound(config.round),
        &config.prior_spec(),
        &config.constraint_spec(),
        engine,
    )
    .map_err(|e| CliError::input(e.to_string()))?;
    let agents = table
        .entries
        .iter()
        .map(|e| AgentRecord::new(Some(e.agent + 1), &e.view, &e.outcome))
        .collect();
    let k = table.entries.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .collect();
    let values: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (pa, pb) = (table.get(a).ok()?, table.get(b).ok()?);
            model_divergence(&pa.model, &pb.model).ok()
        })
        .collect();
    let mut divergence: Vec<Vec<Option<f64>>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| table.get(b).ok().filter(|_| a == b).map(|_| 0.0))
                .collect()
        })
        .collect();
    for (&(a, b), &v) in pairs.iter().zip(&values) {
        divergence[a][b] = v;
        divergence[b][a] = v;
    }
    Ok(ResultRecord {
        command: "network".into(),
        config: config.clone(),
        engine,
        counts: file.clone(),
        round: Some(config.round),
        agents,
        divergence: Some(divergence),
        timing: timing.then(|| Timing {
            elapsed_seconds: start.elapsed().as_secs_f64(),
        }),
    })
}

pub fn cmd_network(
    config: &Path,
    counts: &Path,
    out: &Path,
    overrides: &Overrides,
) -> Result<ResultRecord, CliError> {
    let (config, file, _) = load_inputs(config, counts, overrides)?;
    let record = run_network(&config, &file, overrides.timing)?;
    write_text(out, &record.to_json())?;
    Ok(record)
}

pub const SWEEP_HEADER: &str = "beta,log_zeta,expected_f,s_me";

/// CSV of `ln ζ(β)`, `⟨f⟩_β` and `ln ζ − β⟨f⟩_β` over a β range.
pub fn run_sweep_beta(
    config: &ExperimentConfig,
    file: &CountsFile,
    view: &ViewSpec,
    range: &BetaRange,
) -> Result<String, CliError> {
    let m = checked_counts(config, file)?;
    if config.constraint.is_none() {
        return Err(CliError::input("sweep-beta needs a constraint"));
    }
    let betas = range.values()?;
    let view = view.view_of(&m)?;
    let problem = Inference::new(
        &config.prior_spec(),
        &view,
        &config.constraint_spec(),
        config.engine_spec(),
    )?;
    let rows: Vec<String> = betas
        .par_iter()
        .map(|&beta| {
            let lz = problem.log_zeta(beta);
            let ef = problem.expected_f(beta);
            format!("{beta:.16e},{lz:.16e},{ef:.16e},{:.16e}", lz - beta * ef)
        })
        .collect();
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    Ok(csv)
}

pub fn cmd_sweep_beta(
    config: &Path,
    counts: &Path,
    view: &ViewSpec,
    range: &BetaRange,
    out: &Path,
    overrides: &Overrides,
) -> Result<String, CliError> {
    let (config, file, _) = load_inputs(config, counts, overrides)?;
    let csv = run_sweep_beta(&config, &file, view, range)?;
    write_text(out, &csv)?;
    Ok(csv)
}

/// Reads a result record back.
pub fn load_record(path: &Path) -> Result<ResultRecord, CliError> {
    read_json(path)
}

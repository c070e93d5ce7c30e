use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::engine::{ConstraintSpec, Engine, PriorSpec};
use crate::multinomial::CountVector;
use crate::network::{build_network, AgentNetwork, NetworkPreset};
use crate::simplex::ThetaPoint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintConfig {
    pub f: Vec<f64>,
    #[serde(rename = "F")]
    pub target: f64,
}

/// Agent graph. Agents are 1-based; agent `a` holds side `assignment[a-1]`
/// (identity when omitted).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum NetworkConfig {
    Complete {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        assignment: Option<Vec<usize>>,
    },
    TriangleLattice {
        rows: usize,
        cols: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        assignment: Option<Vec<usize>>,
    },
    Explicit {
        edges: Vec<(usize, usize)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        assignment: Option<Vec<usize>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_true: Option<Vec<f64>>,
    /// Number of rolls; required by `simulate`, checked against the counts otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Dirichlet parameters; flat when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    /// Moment constraint; without one `β = 0` and inference is plain Bayes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkConfig>,
    #[serde(default)]
    pub round: usize,
    #[serde(default = "default_engine")]
    pub engine: Engine,
}

fn default_engine() -> Engine {
    Engine::Auto
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let config: Self = read_json(path)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.k < 2 {
            return Err(CliError::input(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if let Some(theta) = &self.theta_true {
            self.expect_len("theta_true", theta.len())?;
            ThetaPoint::new(theta.clone())
                .map_err(|e| CliError::input(format!("theta_true: {e}")))?;
        }
        if let Some(prior) = &self.prior {
            self.expect_len("prior", prior.len())?;
            PriorSpec::new(prior.clone()).map_err(|e| CliError::input(e.to_string()))?;
        }
        if let Some(c) = &self.constraint {
            self.expect_len("constraint f", c.f.len())?;
            ConstraintSpec::new(c.f.clone(), c.target)
                .map_err(|e| CliError::input(e.to_string()))?;
        }
        if let Some(net) = &self.network {
            self.network_from(net)?;
        }
        Ok(())
    }

    fn expect_len(&self, what: &str, len: usize) -> Result<(), CliError> {
        if len != self.k {
            return Err(CliError::input(format!(
                "{what} has {len} entries, expected k = {}",
                self.k
            )));
        }
        Ok(())
    }

    pub fn prior_spec(&self) -> PriorSpec<f64> {
        match &self.prior {
            Some(p) => PriorSpec::new(p.clone()).expect("validated"),
            None => PriorSpec::flat(self.k),
        }
    }

    pub fn constraint_spec(&self) -> ConstraintSpec<f64> {
        match &self.constraint {
            Some(c) => ConstraintSpec::new(c.f.clone(), c.target).expect("validated"),
            None => ConstraintSpec::none(self.k),
        }
    }

    /// The configured engine with `Auto` resolved; the Monte-Carlo default
    /// takes the experiment seed.
    pub fn engine_spec(&self) -> Engine {
        match self.engine {
            Engine::Auto => Engine::auto_for(self.k, self.seed),
            other => other,
        }
    }

    pub fn agent_network(&self) -> Result<AgentNetwork, CliError> {
        let net = self
            .network
            .as_ref()
            .ok_or_else(|| CliError::input("config has no network"))?;
        self.network_from(net)
    }

    fn network_from(&self, net: &NetworkConfig) -> Result<AgentNetwork, CliError> {
        let to_zero = |v: usize| {
            v.checked_sub(1)
                .ok_or_else(|| CliError::input("agent and side indices are 1-based"))
        };
        let (preset, assignment) = match net {
            NetworkConfig::Complete { assignment } => {
                (NetworkPreset::Complete { k: self.k }, assignment)
            }
            NetworkConfig::TriangleLattice {
                rows,
                cols,
                assignment,
            } => {
                if rows * cols != self.k {
                    return Err(CliError::input(format!(
                        "a {rows}x{cols} lattice has {} agents, but k = {}",
                        rows * cols,
                        self.k
                    )));
                }
                (
                    NetworkPreset::TriangleLattice {
                        rows: *rows,
                        cols: *cols,
                    },
                    assignment,
                )
            }
            NetworkConfig::Explicit { edges, assignment } => {
                let edges = edges
                    .iter()
                    .map(|&(a, b)| Ok((to_zero(a)?, to_zero(b)?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                (NetworkPreset::Explicit { k: self.k, edges }, assignment)
            }
        };
        let mut network = build_network(&preset).map_err(|e| CliError::input(e.to_string()))?;
        if let Some(assignment) = assignment {
            let zero = assignment
                .iter()
                .map(|&s| to_zero(s))
                .collect::<Result<Vec<_>, _>>()?;
            network = network
                .with_assignment(zero)
                .map_err(|e| CliError::input(e.to_string()))?;
        }
        Ok(network)
    }
}

/// Counts file: `{k, n, counts, seed, theta_true?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountsFile {
    pub k: usize,
    pub n: u64,
    pub counts: Vec<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_true: Option<Vec<f64>>,
}

impl CountsFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file: Self = read_json(path)?;
        file.count_vector()?;
        Ok(file)
    }

    pub fn count_vector(&self) -> Result<CountVector, CliError> {
        if self.counts.len() != self.k {
            return Err(CliError::input(format!(
                "counts has {} entries, expected k = {}",
                self.counts.len(),
                self.k
            )));
        }
        let m =
            CountVector::new(self.counts.clone()).map_err(|e| CliError::input(e.to_string()))?;
        if m.n() != self.n {
            return Err(CliError::input(format!(
                "counts sum to {}, but n = {}",
                m.n(),
                self.n
            )));
        }
        Ok(m)
    }
}

/// Parses the `f=1,0,-2;F=0` shorthand.
pub fn parse_constraint(spec: &str) -> Result<ConstraintConfig, CliError> {
    let mut f = None;
    let mut target = None;
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("malformed constraint part '{part}'")))?;
        let number = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| {
                CliError::input(format!("'{s}' is not a number in constraint '{spec}'"))
            })
        };
        match key.trim() {
            "f" => {
                f = Some(
                    value
                        .split(',')
                        .map(number)
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
            "F" => target = Some(number(value)?),
            other => return Err(CliError::input(format!("unknown constraint key '{other}'"))),
        }
    }
    match (f, target) {
        (Some(f), Some(target)) => Ok(ConstraintConfig { f, target }),
        _ => Err(CliError::input(format!(
            "constraint '{spec}' needs both f= and F="
        ))),
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_shorthand() {
        let c = parse_constraint("f=1,0,-2;F=0").unwrap();
        assert_eq!(c.f, vec![1.0, 0.0, -2.0]);
        assert_eq!(c.target, 0.0);
        let c = parse_constraint(" F = 0.5 ; f = 1 , 2 ").unwrap();
        assert_eq!(c.f, vec![1.0, 2.0]);
        assert!(parse_constraint("f=1,0").is_err());
        assert!(parse_constraint("f=1,x;F=0").is_err());
        assert!(parse_constraint("g=1;F=0").is_err());
    }

    #[test]
    fn config_defaults_and_validation() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"k": 3, "n": 10}"#).unwrap();
        assert_eq!(c.engine, Engine::Auto);
        assert_eq!(c.round, 0);
        c.validate().unwrap();
        assert_eq!(c.constraint_spec(), ConstraintSpec::none(3));
        let bad: ExperimentConfig =
            serde_json::from_str(r#"{"k": 3, "constraint": {"f": [1, 0], "F": 0}}"#).unwrap();
        assert!(bad.validate().is_err());
        let bad: ExperimentConfig =
            serde_json::from_str(r#"{"k": 3, "theta_true": [0.5, 0.6, 0.1]}"#).unwrap();
        assert!(bad.validate().is_err());
        let lattice: ExperimentConfig = serde_json::from_str(
            r#"{"k": 6, "network": {"preset": "triangle-lattice", "rows": 2, "cols": 2}}"#,
        )
        .unwrap();
        assert!(lattice.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"k": 3, "bogus": 1}"#).is_err());
    }

    #[test]
    fn explicit_network_is_one_based() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"k": 3, "network": {"preset": "explicit", "edges": [[1, 2]], "assignment": [3, 2, 1]}}"#,
        )
        .unwrap();
        let net = c.agent_network().unwrap();
        assert_eq!(net.edges(), vec![(0, 1)]);
        assert_eq!(net.side_of(0), 2);
        let zero: ExperimentConfig = serde_json::from_str(
            r#"{"k": 3, "network": {"preset": "explicit", "edges": [[0, 2]]}}"#,
        )
        .unwrap();
        assert!(zero.validate().is_err());
    }

    #[test]
    fn counts_file_checks_totals() {
        let ok = CountsFile {
            k: 3,
            n: 10,
            counts: vec![5, 3, 2],
            seed: 0,
            theta_true: None,
        };
        assert!(ok.count_vector().is_ok());
        let bad = CountsFile {
            n: 11,
            ..ok.clone()
        };
        assert!(bad.count_vector().is_err());
        let bad = CountsFile { k: 4, ..ok };
        assert!(bad.count_vector().is_err());
    }
}

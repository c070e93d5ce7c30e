use serde::{Deserialize, Serialize};

use super::config::{CountsFile, ExperimentConfig};
use super::{engine_error_kind, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_NON_CONVERGENCE, EXIT_OK};
use crate::engine::{Engine, EngineError, MarginalTable};
use crate::multinomial::AgentView;
use crate::network::Belief;

/// Everything `infer` or `network` produced, plus the inputs needed to redo it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    /// The config after command-line overrides.
    pub config: ExperimentConfig,
    /// Engine actually used, with `auto` resolved.
    pub engine: Engine,
    pub counts: CountsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<usize>,
    pub agents: Vec<AgentRecord>,
    /// Symmetrized KL between agents; `null` where either agent failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence: Option<Vec<Vec<Option<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<usize>,
    pub visible_sides: Vec<usize>,
    pub visible_counts: Vec<u64>,
    #[serde(flatten)]
    pub outcome: AgentOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum AgentOutcome {
    Ok(AgentResult),
    Error { kind: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentResult {
    pub beta: f64,
    pub log_zeta: f64,
    pub residual: f64,
    pub iterations: usize,
    pub s_me: f64,
    pub expected_f: f64,
    pub normalization: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization_std_error: Option<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub marginals: MarginalTable<f64>,
}

impl AgentRecord {
    pub(crate) fn new(
        agent: Option<usize>,
        view: &AgentView,
        outcome: &Result<Belief, EngineError>,
    ) -> Self {
        let (visible_sides, visible_counts) =
            view.visible().iter().map(|(&s, &c)| (s + 1, c)).unzip();
        let outcome = match outcome {
            Ok(b) => AgentOutcome::Ok(AgentResult {
                beta: b.model.beta(),
                log_zeta: b.model.log_zeta(),
                residual: b.model.solved().residual,
                iterations: b.model.solved().iterations,
                s_me: b.entropy.s_me,
                expected_f: b.summary.expected_f,
                normalization: b.summary.normalization,
                normalization_std_error: b.summary.normalization_std_error,
                means: b.summary.means.clone(),
                variances: b.summary.variances.clone(),
                marginals: b.summary.marginals.clone(),
            }),
            Err(e) => AgentOutcome::Error {
                kind: engine_error_kind(e).to_string(),
                message: e.to_string(),
            },
        };
        Self {
            agent,
            visible_sides,
            visible_counts,
            outcome,
        }
    }

    pub fn result(&self) -> Option<&AgentResult> {
        match &self.outcome {
            AgentOutcome::Ok(r) => Some(r),
            AgentOutcome::Error { .. } => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match &self.outcome {
            AgentOutcome::Ok(_) => EXIT_OK,
            AgentOutcome::Error { kind, .. } => match kind.as_str() {
                "infeasible" => EXIT_INFEASIBLE,
                "non-convergence" => EXIT_NON_CONVERGENCE,
                _ => EXIT_INPUT,
            },
        }
    }
}

impl ResultRecord {
    /// Zero when at least one agent succeeded; otherwise the first agent's failure code.
    pub fn exit_code(&self) -> i32 {
        if self.agents.iter().any(|a| a.result().is_some()) {
            return EXIT_OK;
        }
        self.agents
            .first()
            .map_or(EXIT_INPUT, AgentRecord::exit_code)
    }

    pub fn to_json(&self) -> String {
        super::config::to_json(self)
    }
}

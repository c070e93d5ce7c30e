//! Experiment files and the command implementations behind the CLI.
//!
//! Configs, counts files and result records are JSON; sweep tables are CSV.
//! Sides and agents are 1-based in every file and on the command line.

mod commands;
mod config;
mod record;

use thiserror::Error;

use crate::engine::EngineError;

pub use commands::{
    cmd_infer, cmd_network, cmd_simulate, cmd_sweep_beta, load_record, run_infer, run_network,
    run_simulate, run_sweep_beta, BetaRange, Overrides, ViewSpec, SWEEP_HEADER,
};
pub use config::{parse_constraint, ConstraintConfig, CountsFile, ExperimentConfig, NetworkConfig};
pub use record::{AgentOutcome, AgentRecord, AgentResult, ResultRecord, Timing};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(e) => engine_exit_code(e),
            _ => EXIT_INPUT,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

pub fn engine_exit_code(e: &EngineError) -> i32 {
    match e {
        EngineError::Infeasible { .. } => EXIT_INFEASIBLE,
        EngineError::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        _ => EXIT_INPUT,
    }
}

/// Short machine-readable name of an engine error, as written to result records.
pub fn engine_error_kind(e: &EngineError) -> &'static str {
    match e {
        EngineError::Infeasible { .. } => "infeasible",
        EngineError::NonConvergence { .. } => "non-convergence",
        EngineError::ZeroLikelihood => "zero-likelihood",
        EngineError::Quadrature(_) => "quadrature",
        _ => "input",
    }
}

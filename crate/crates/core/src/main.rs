use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use meinfer::io::{
    cmd_infer, cmd_network, cmd_simulate, cmd_sweep_beta, BetaRange, CliError, Overrides, ViewSpec,
};

#[derive(Parser)]
#[command(
    name = "meinfer",
    version,
    about = "Maximum-entropy inference for loaded dice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roll the configured true die and write a counts file.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Posterior for one agent.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        counts: PathBuf,
        /// Visible sides, 1-based and comma separated; `none` for an empty view.
        /// All sides when omitted.
        #[arg(long)]
        view: Option<String>,
    },
    /// Posteriors for every agent of the configured network.
    Network {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        counts: PathBuf,
    },
    /// Tabulate ln ζ(β) over a range of multipliers.
    SweepBeta {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        view: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta_max: f64,
        #[arg(long)]
        beta_step: f64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Composition-grid engine with resolution R.
    #[arg(long, value_name = "R")]
    grid: Option<usize>,
    /// Gauss–Jacobi engine with N points per stick.
    #[arg(long, value_name = "N")]
    gauss: Option<usize>,
    /// Monte-Carlo engine with N samples.
    #[arg(long, value_name = "N")]
    mc_samples: Option<usize>,
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// `f=1,0,-2;F=0`, or `none`.
    #[arg(long)]
    constraint: Option<String>,
    #[arg(long)]
    round: Option<usize>,
    /// Record wall-clock time in the output.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            grid: self.grid,
            gauss: self.gauss,
            mc_samples: self.mc_samples,
            constraint: self.constraint.clone(),
            round: self.round,
            timing: self.timing,
        }
    }
}

fn view(spec: &Option<String>) -> Result<ViewSpec, CliError> {
    spec.as_deref().map_or(Ok(ViewSpec::Full), str::parse)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { common } => {
            cmd_simulate(&common.config, &common.out, &common.overrides())?;
            Ok(0)
        }
        Command::Infer {
            common,
            counts,
            view: v,
        } => {
            let record = cmd_infer(
                &common.config,
                &counts,
                &view(&v)?,
                &common.out,
                &common.overrides(),
            )?;
            report(&record);
            Ok(record.exit_code())
        }
        Command::Network { common, counts } => {
            let record = cmd_network(&common.config, &counts, &common.out, &common.overrides())?;
            report(&record);
            Ok(record.exit_code())
        }
        Command::SweepBeta {
            common,
            counts,
            view: v,
            beta_min,
            beta_max,
            beta_step,
        } => {
            let range = BetaRange {
                min: beta_min,
                max: beta_max,
                step: beta_step,
            };
            cmd_sweep_beta(
                &common.config,
                &counts,
                &view(&v)?,
                &range,
                &common.out,
                &common.overrides(),
            )?;
            Ok(0)
        }
    }
}

fn report(record: &meinfer::io::ResultRecord) {
    for (i, agent) in record.agents.iter().enumerate() {
        if let meinfer::io::AgentOutcome::Error { message, .. } = &agent.outcome {
            eprintln!("agent {}: {message}", agent.agent.unwrap_or(i + 1));
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                meinfer::io::EXIT_INPUT as u8
            } else {
                0
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

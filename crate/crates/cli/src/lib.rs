//! Command-line driver: configuration, subcommands and CSV/JSON output.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use reman_core::analysis::Scenario;
use reman_core::{FractileRule, LeaderScope, Model};

pub mod commands;
pub mod config;
pub mod output;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Infeasible(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<reman_core::Error> for CliError {
    fn from(e: reman_core::Error) -> Self {
        CliError::Infeasible(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "reman", version, about = "Pricing and business-model selection for remanufactured products")]
pub struct Cli {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Price step of single optimizations and simulation checks.
    #[arg(long, global = true)]
    pub price_step: Option<f64>,
    /// Price step of perception-grid studies.
    #[arg(long, global = true)]
    pub analysis_price_step: Option<f64>,
    #[arg(long, global = true)]
    pub perception_step: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replications: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub fractile: Option<FractileArg>,
    #[arg(long, global = true, value_enum)]
    pub leader: Option<LeaderArg>,
    /// Do not print result summaries.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FractileArg {
    MinK,
    Floor,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LeaderArg {
    Authorized,
    Unrestricted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    N,
    O,
    T,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    ProductionDominant,
    ConsumptionDominant,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize one model at the configured perception point; writes JSON.
    Optimize {
        #[arg(value_enum)]
        model: ModelArg,
        /// Solve the constant-market benchmark instead.
        #[arg(long)]
        constant: bool,
    },
    /// Best model per perception cell.
    Map,
    /// Quantity changes against the new-only baseline.
    Dynamics,
    /// Environmental impact per cell for one scenario.
    Impact {
        #[arg(value_enum)]
        scenario: ScenarioArg,
    },
    /// Authorization contract sweep over fixed and unit fees.
    ContractSweep,
    /// Stochastic against constant-market decisions in the realistic zone.
    StochasticCompare,
    /// Monte Carlo checks of reference and optimized profits.
    Validate,
    /// Closed-form perception thresholds.
    Thresholds {
        /// Also compute the selection map and report the observed T-region edge.
        #[arg(long)]
        with_boundary: bool,
    },
    /// Print the effective configuration as TOML.
    Config,
}

impl Cli {
    pub fn load_config(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => {
                let text =
                    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                RunConfig::from_toml(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(dir) = &self.out {
            config.output.dir = dir.to_string_lossy().into_owned();
        }
        if let Some(x) = self.price_step {
            config.grid.price_step = x;
        }
        if let Some(x) = self.analysis_price_step {
            config.grid.analysis_price_step = x;
        }
        if let Some(x) = self.perception_step {
            config.grid.perception_step = x;
        }
        if let Some(x) = self.seed {
            config.simulation.seed = x;
        }
        if let Some(x) = self.replications {
            config.simulation.replications = x;
        }
        if let Some(f) = self.fractile {
            config.solver.fractile = match f {
                FractileArg::MinK => FractileRule::MinK,
                FractileArg::Floor => FractileRule::Floor,
            };
        }
        if let Some(l) = self.leader {
            config.solver.leader = match l {
                LeaderArg::Authorized => LeaderScope::Authorized,
                LeaderArg::Unrestricted => LeaderScope::Unrestricted,
            };
        }
        config.validate()?;
        Ok(config)
    }
}

fn model(m: ModelArg) -> Model {
    match m {
        ModelArg::N => Model::N,
        ModelArg::O => Model::O,
        ModelArg::T => Model::T,
    }
}

fn scenario(s: ScenarioArg) -> Scenario {
    match s {
        ScenarioArg::ProductionDominant => Scenario::ProductionDominant,
        ScenarioArg::ConsumptionDominant => Scenario::ConsumptionDominant,
    }
}

/// Execute a parsed command line, returning the paths written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let config = cli.load_config()?;
    let artifact = match &cli.command {
        Command::Config => {
            print!("{}", config.to_toml());
            return Ok(Vec::new());
        }
        Command::Optimize { model: m, constant: false } => {
            let a = commands::optimize_cmd(&config, model(*m))?;
            if !cli.quiet {
                print!("{}", String::from_utf8_lossy(&a.bytes));
            }
            a
        }
        Command::Optimize { model: m, constant: true } => commands::constant_cmd(&config, model(*m))?,
        Command::Map => commands::map_cmd(&config)?,
        Command::Dynamics => commands::dynamics_cmd(&config)?,
        Command::Impact { scenario: s } => commands::impact_cmd(&config, scenario(*s))?,
        Command::ContractSweep => commands::contract_sweep_cmd(&config)?,
        Command::StochasticCompare => commands::stochastic_cmd(&config)?,
        Command::Validate => commands::validate_cmd(&config)?,
        Command::Thresholds { with_boundary } => commands::thresholds_cmd(&config, *with_boundary)?,
    };
    let path = PathBuf::from(&config.output.dir).join(&artifact.name);
    output::write_atomic(&path, &artifact.bytes)?;
    if !cli.quiet {
        eprintln!("wrote {}", path.display());
    }
    Ok(vec![path])
}

//! Run configuration read from TOML; every field has a default.

use serde::{Deserialize, Serialize};

use reman_core::analysis::EnvParams;
use reman_core::{
    Contract, CostStructure, FractileRule, LeaderScope, MarketParams, Perception, Rounding, Solver,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptionConfig {
    pub wtp_discount: f64,
    /// Magnitude of the value shift; each model applies its own sign.
    pub shift: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        PerceptionConfig { wtp_discount: 0.6, shift: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Price step for single optimizations and Monte Carlo checks.
    pub price_step: f64,
    /// Price step for perception-grid studies.
    pub analysis_price_step: f64,
    pub perception_step: f64,
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    /// Perception window of the stochastic comparison.
    pub realistic_alpha: [f64; 2],
    pub realistic_beta: [f64; 2],
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            price_step: 0.01,
            analysis_price_step: 0.1,
            perception_step: 0.01,
            alpha_range: [0.0, 1.0],
            beta_range: [0.0, 1.0],
            realistic_alpha: [0.4, 0.9],
            realistic_beta: [0.0, 0.3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub fractile: FractileRule,
    /// Stocking rule of the constant-market benchmark.
    pub constant_rounding: Rounding,
    pub leader: LeaderScope,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { fractile: FractileRule::MinK, constant_rounding: Rounding::Floor, leader: LeaderScope::Authorized }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub fixed_fees: Vec<f64>,
    pub unit_fee_step: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { fixed_fees: vec![0.0, 10_000.0, 20_000.0], unit_fee_step: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub seed: u64,
    pub replications: u64,
    pub k_sigma: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { seed: 20_240_601, replications: 1_000_000, k_sigma: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketParams,
    pub costs: CostStructure,
    pub contract: Contract,
    pub env: EnvParams,
    pub perception: PerceptionConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub simulation: SimulationConfig,
    pub output: OutputConfig,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_range(name: &str, r: [f64; 2]) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&r[0]) && (0.0..=1.0).contains(&r[1]) && r[0] <= r[1] {
        Ok(())
    } else {
        Err(bad(format!("{name} must be an ordered pair inside [0, 1], got {r:?}")))
    }
}

fn check_step(name: &str, step: f64) -> Result<(), CliError> {
    if step.is_finite() && step > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive, got {step}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let core = |e: reman_core::Error| bad(e.to_string());
        self.market.validate().map_err(core)?;
        self.costs.validate().map_err(core)?;
        self.contract.validate(&self.costs).map_err(core)?;
        self.env.validate().map_err(core)?;
        self.perception().map_err(core)?;
        let g = &self.grid;
        check_step("price_step", g.price_step)?;
        check_step("analysis_price_step", g.analysis_price_step)?;
        check_step("perception_step", g.perception_step)?;
        check_range("alpha_range", g.alpha_range)?;
        check_range("beta_range", g.beta_range)?;
        check_range("realistic_alpha", g.realistic_alpha)?;
        check_range("realistic_beta", g.realistic_beta)?;
        check_step("unit_fee_step", self.sweep.unit_fee_step)?;
        if self.sweep.fixed_fees.is_empty() || self.sweep.fixed_fees.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(bad("fixed_fees must be a non-empty list of non-negative numbers"));
        }
        if self.simulation.replications == 0 {
            return Err(bad("replications must be at least 1"));
        }
        check_step("k_sigma", self.simulation.k_sigma)?;
        Ok(())
    }

    /// Perception with a non-negative shift; models flip the sign as needed.
    pub fn perception(&self) -> reman_core::Result<Perception> {
        Perception::new(self.perception.wtp_discount, self.perception.shift.abs())
    }

    pub fn solver(&self) -> Solver {
        self.solver_with_step(self.grid.price_step)
    }

    pub fn analysis_solver(&self) -> Solver {
        self.solver_with_step(self.grid.analysis_price_step)
    }

    fn solver_with_step(&self, step: f64) -> Solver {
        Solver { price_step: step, ..Solver::default() }
            .with_fractile(self.solver.fractile)
            .with_leader(self.solver.leader)
    }
}

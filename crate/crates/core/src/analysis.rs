//! Cross-model studies over perception grids: which model the OEM should
//! pick, what it does to quantities and environmental impact, how contract
//! terms move the decentralized system, and what ignoring market-size
//! uncertainty costs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Contract, CostStructure, MarketParams, Perception};
use crate::models::{
    coordination_case, evaluate, optimize_model_n, optimize_model_o, optimize_model_t, Model, Objective,
    Outcome, Rounding, Setting, Solver,
};

/// Per-unit life-cycle impacts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvParams {
    /// New production plus disposal, per unit stocked.
    pub gamma_new: f64,
    /// Remanufacturing plus disposal, per unit stocked.
    pub gamma_reman: f64,
    /// Use phase, per unit sold.
    pub consumption: f64,
}

impl EnvParams {
    pub fn new(gamma_new: f64, gamma_reman: f64, consumption: f64) -> Result<Self> {
        let env = EnvParams { gamma_new, gamma_reman, consumption };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.gamma_new, self.gamma_reman, self.consumption];
        if all.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidMarket("impacts must be finite and non-negative".into()));
        }
        if self.gamma_reman >= self.gamma_new {
            return Err(Error::InvalidMarket(format!(
                "remanufacturing impact {} must be below new-product impact {}",
                self.gamma_reman, self.gamma_new
            )));
        }
        Ok(())
    }

    /// Production and disposal dominate the life cycle.
    pub fn production_dominant() -> Self {
        EnvParams { gamma_new: 7.0, gamma_reman: 3.0, consumption: 1.0 }
    }

    /// The use phase dominates the life cycle.
    pub fn consumption_dominant() -> Self {
        EnvParams { gamma_new: 4.0, gamma_reman: 2.0, consumption: 7.0 }
    }
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams::production_dominant()
    }
}

/// Named impact scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ProductionDominant,
    ConsumptionDominant,
}

impl Scenario {
    pub fn params(self) -> EnvParams {
        match self {
            Scenario::ProductionDominant => EnvParams::production_dominant(),
            Scenario::ConsumptionDominant => EnvParams::consumption_dominant(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ProductionDominant => "production-dominant",
            Scenario::ConsumptionDominant => "consumption-dominant",
        }
    }
}

/// `0, step, 2 step, ...` up to `upper`, computed by multiplication to avoid drift.
pub fn grid(lower: f64, upper: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) || !(lower.is_finite() && upper.is_finite()) || upper < lower {
        return Err(Error::InvalidGrid(format!("bad grid [{lower}, {upper}] step {step}")));
    }
    let n = ((upper - lower) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| round_grid(lower + i as f64 * step)).collect())
}

/// Snap to 12 decimals so grid coordinates print and compare cleanly.
fn round_grid(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionCell {
    pub alpha: f64,
    pub beta_mag: f64,
    pub best_model: Model,
    /// OEM profits of models N, O, T.
    pub profits: [f64; 3],
    pub outcomes: [Outcome; 3],
}

impl SelectionCell {
    pub fn best(&self) -> &Outcome {
        &self.outcomes[model_index(self.best_model)]
    }

    pub fn outcome(&self, model: Model) -> &Outcome {
        &self.outcomes[model_index(model)]
    }
}

fn model_index(model: Model) -> usize {
    match model {
        Model::N => 0,
        Model::O => 1,
        Model::T => 2,
    }
}

/// Highest profit wins; ties go to the earlier of N, O, T.
fn pick(profits: [f64; 3]) -> Model {
    let mut best = Model::N;
    for (model, p) in [(Model::O, profits[1]), (Model::T, profits[2])] {
        if p > profits[model_index(best)] {
            best = model;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMap {
    /// Model N optimum; it does not depend on perception.
    pub baseline: Outcome,
    /// Row-major by discount, then `|shift|`.
    pub cells: Vec<SelectionCell>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl SelectionMap {
    pub fn cell(&self, i: usize, j: usize) -> &SelectionCell {
        &self.cells[i * self.betas.len() + j]
    }

    /// Whether a 4-neighbour of cell `(i, j)` has a different best model.
    pub fn near_boundary(&self, i: usize, j: usize) -> bool {
        let here = self.cell(i, j).best_model;
        let mut neighbours = Vec::with_capacity(4);
        if i > 0 {
            neighbours.push((i - 1, j));
        }
        if i + 1 < self.alphas.len() {
            neighbours.push((i + 1, j));
        }
        if j > 0 {
            neighbours.push((i, j - 1));
        }
        if j + 1 < self.betas.len() {
            neighbours.push((i, j + 1));
        }
        neighbours.into_iter().any(|(a, b)| self.cell(a, b).best_model != here)
    }
}

fn check_unit(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(Error::InvalidGrid(format!("{what} grid must lie in [0, 1]")))
    }
}

/// One cell of the selection map, given the shared Model N optimum.
pub fn select_cell(
    baseline: &Outcome,
    alpha: f64,
    beta_mag: f64,
    market: &MarketParams,
    costs: &CostStructure,
    contract: &Contract,
    solver: &Solver,
) -> Result<SelectionCell> {
    let perc = Perception::new(alpha, beta_mag.abs())?;
    let o = optimize_model_o(market, &perc.assimilation(), costs, solver)?;
    let t = optimize_model_t(market, &perc.contrast(), costs, contract, solver)?;
    let outcomes = [*baseline, o, t];
    let profits = [baseline.oem_profit, o.oem_profit, t.oem_profit];
    Ok(SelectionCell { alpha, beta_mag: beta_mag.abs(), best_model: pick(profits), profits, outcomes })
}

pub fn selection_map(
    market: &MarketParams,
    costs: &CostStructure,
    contract: &Contract,
    alphas: &[f64],
    betas: &[f64],
    solver: &Solver,
) -> Result<SelectionMap> {
    check_unit(alphas, "discount")?;
    check_unit(betas, "shift")?;
    contract.validate(costs)?;
    let baseline = optimize_model_n(market, costs, solver)?;
    let coords: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| betas.iter().map(move |&b| (a, b))).collect();
    let cells = coords
        .par_iter()
        .map(|&(a, b)| select_cell(&baseline, a, b, market, costs, contract, solver))
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionMap { baseline, cells, alphas: alphas.to_vec(), betas: betas.to_vec() })
}

/// Quantity effects of the chosen model against the Model N baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    pub total_q: u64,
    pub q_n: u64,
    pub q_r: u64,
    /// `q_r / (q_n + q_r)`.
    pub reman_share: f64,
    /// `(q_n + q_r) / q_base - 1`.
    pub total_delta: f64,
    /// `q_n / q_base - 1`.
    pub qn_delta: f64,
}

pub fn market_dynamics(cell: &SelectionCell, baseline: &Outcome) -> Dynamics {
    let (q_n, q_r) = cell.best().quantities();
    let total = q_n + q_r;
    let base = baseline.quantities().0 as f64;
    let rel = |x: u64| if base > 0.0 { x as f64 / base - 1.0 } else { 0.0 };
    Dynamics {
        total_q: total,
        q_n,
        q_r,
        reman_share: if total > 0 { q_r as f64 / total as f64 } else { 0.0 },
        total_delta: rel(total),
        qn_delta: rel(q_n),
    }
}

/// Stocked units times production impact plus expected sales times use impact.
pub fn environmental_impact(outcome: &Outcome, env: &EnvParams) -> f64 {
    let (q_n, q_r) = outcome.quantities();
    let (s_n, s_r) = outcome.expected_sales;
    env.gamma_new * q_n as f64 + env.consumption * s_n + env.gamma_reman * q_r as f64 + env.consumption * s_r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractRow {
    pub fixed_fee: f64,
    pub unit_fee: f64,
    pub oem_profit: f64,
    pub tpr_profit: f64,
    pub system_profit: f64,
    pub impact: f64,
    pub declined: bool,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractSweep {
    /// Ordered by fixed fee, then unit fee, as given.
    pub rows: Vec<ContractRow>,
    /// Centralized benchmark.
    pub coordination: Outcome,
    pub coordination_impact: f64,
}

impl ContractSweep {
    pub fn series(&self, fixed_fee: f64) -> impl Iterator<Item = &ContractRow> {
        self.rows.iter().filter(move |r| r.fixed_fee == fixed_fee)
    }
}

pub fn contract_sweep(
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    fixed_fees: &[f64],
    unit_fees: &[f64],
    env: &EnvParams,
    solver: &Solver,
) -> Result<ContractSweep> {
    env.validate()?;
    let perc = perc.contrast();
    let pairs: Vec<(f64, f64)> =
        fixed_fees.iter().flat_map(|&h0| unit_fees.iter().map(move |&h| (h0, h))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(fixed_fee, unit_fee)| {
            let contract = Contract::new(fixed_fee, unit_fee, costs)?;
            let outcome = optimize_model_t(market, &perc, costs, &contract, solver)?;
            let tpr = outcome.tpr_profit.unwrap_or(0.0);
            Ok(ContractRow {
                fixed_fee,
                unit_fee,
                oem_profit: outcome.oem_profit,
                tpr_profit: tpr,
                system_profit: outcome.oem_profit + tpr,
                impact: environmental_impact(&outcome, env),
                declined: outcome.authorization_declined,
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let coordination = coordination_case(market, &perc, costs, solver)?;
    Ok(ContractSweep { rows, coordination_impact: environmental_impact(&coordination, env), coordination })
}

/// Solver that treats demand as equal to its rate.
pub fn constant_market_solver(solver: &Solver, rounding: Rounding) -> Solver {
    solver.with_objective(Objective::Deterministic(rounding))
}

/// Optimal decision when the market size is exactly its mean.
pub fn optimize_constant_market(
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    contract: &Contract,
    model: Model,
    solver: &Solver,
    rounding: Rounding,
) -> Result<Outcome> {
    let det = constant_market_solver(solver, rounding);
    match model {
        Model::N => optimize_model_n(market, costs, &det),
        Model::O => optimize_model_o(market, &perc.assimilation(), costs, &det),
        Model::T => optimize_model_t(market, &perc.contrast(), costs, contract, &det),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticCell {
    pub alpha: f64,
    pub beta_mag: f64,
    pub model: Model,
    pub stochastic: Outcome,
    /// The constant-market decision re-evaluated under random market size.
    pub constant: Outcome,
    /// `(profit(d_stoc) - profit(d_cons)) / profit(d_cons)` under the solver's objective.
    pub profit_delta: f64,
    /// Same ratio under the exact expectation.
    pub expected_profit_delta: f64,
    pub stochastic_impact: f64,
    pub constant_impact: f64,
    /// `(EI(d_stoc) - EI(d_cons)) / EI(d_cons)`.
    pub ei_delta: f64,
    /// A 4-neighbour picks a different model.
    pub near_boundary: bool,
}

fn relative(new: f64, base: f64) -> f64 {
    if base != 0.0 {
        (new - base) / base.abs()
    } else if new == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(new)
    }
}

/// Compare stochastic and constant-market decisions for the best model on each cell.
#[allow(clippy::too_many_arguments)]
pub fn stochastic_vs_constant(
    market: &MarketParams,
    alphas: &[f64],
    betas: &[f64],
    costs: &CostStructure,
    contract: &Contract,
    env: &EnvParams,
    solver: &Solver,
    rounding: Rounding,
) -> Result<Vec<StochasticCell>> {
    env.validate()?;
    let map = selection_map(market, costs, contract, alphas, betas, solver)?;
    let indices: Vec<(usize, usize)> =
        (0..alphas.len()).flat_map(|i| (0..betas.len()).map(move |j| (i, j))).collect();
    indices
        .par_iter()
        .map(|&(i, j)| {
            let cell = map.cell(i, j);
            let model = cell.best_model;
            let perc = Perception::new(cell.alpha, cell.beta_mag)?;
            let used = match model {
                Model::O => perc.assimilation(),
                _ => perc.contrast(),
            };
            let det = optimize_constant_market(market, &perc, costs, contract, model, solver, rounding)?;
            let setting = Setting {
                market,
                perception: &used,
                costs,
                contract: (model == Model::T).then_some(contract),
            };
            let constant = evaluate(model, &det.decision, &setting, solver)?;
            let stochastic = *cell.best();
            let (ei_s, ei_c) = (environmental_impact(&stochastic, env), environmental_impact(&constant, env));
            Ok(StochasticCell {
                alpha: cell.alpha,
                beta_mag: cell.beta_mag,
                model,
                stochastic,
                constant,
                profit_delta: relative(stochastic.oem_profit, constant.oem_profit),
                expected_profit_delta: relative(stochastic.expected_oem_profit, constant.expected_oem_profit),
                stochastic_impact: ei_s,
                constant_impact: ei_c,
                ei_delta: relative(ei_s, ei_c),
                near_boundary: map.near_boundary(i, j),
            })
        })
        .collect()
}

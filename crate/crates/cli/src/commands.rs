//! One function per subcommand; each returns the files to write.

use serde::Serialize;

use reman_core::analysis::{
    contract_sweep, environmental_impact, grid, market_dynamics, optimize_constant_market, selection_map,
    stochastic_vs_constant, Scenario, SelectionMap,
};
use reman_core::closedform::{approx_model_n, approx_model_o, thresholds, TBoundary};
use reman_core::simulate::{simulate_market, validate};
use reman_core::{optimize, Contract, Decision, Model, Outcome, Perception, Solver};

use crate::config::RunConfig;
use crate::output::{exact, money, opt_exact, opt_money, render_csv, Table};
use crate::CliError;

/// A file produced by a command, relative to the output directory.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn csv(config: &RunConfig, command: &str, name: &str, table: &Table) -> Result<Artifact, CliError> {
    Ok(Artifact { name: name.into(), bytes: render_csv(config, command, table)? })
}

fn model_perception(model: Model, perc: &Perception) -> Perception {
    match model {
        Model::O => perc.assimilation(),
        _ => perc.contrast(),
    }
}

#[derive(Serialize)]
struct OptimizeRecord<'a> {
    version: &'static str,
    model: Model,
    perception: Perception,
    price_step: f64,
    outcome: &'a Outcome,
    approximation: Option<reman_core::ApproxOutcome>,
}

pub fn optimize_cmd(config: &RunConfig, model: Model) -> Result<Artifact, CliError> {
    let perc = model_perception(model, &config.perception()?);
    let solver = config.solver();
    let outcome = optimize(model, &config.market, &perc, &config.costs, &config.contract, &solver)?;
    let approximation = match model {
        Model::N => Some(approx_model_n(&config.market, &config.costs)),
        Model::O => Some(approx_model_o(&config.market, &perc, &config.costs)?),
        Model::T => None,
    };
    let record = OptimizeRecord {
        version: crate::output::VERSION,
        model,
        perception: perc,
        price_step: solver.price_step,
        outcome: &outcome,
        approximation,
    };
    let mut bytes = serde_json::to_vec_pretty(&record).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(Artifact { name: format!("optimize_{}.json", model.to_string().to_lowercase()), bytes })
}

fn full_map(config: &RunConfig) -> Result<SelectionMap, CliError> {
    let g = &config.grid;
    let alphas = grid(g.alpha_range[0], g.alpha_range[1], g.perception_step)?;
    let betas = grid(g.beta_range[0], g.beta_range[1], g.perception_step)?;
    Ok(selection_map(&config.market, &config.costs, &config.contract, &alphas, &betas, &config.analysis_solver())?)
}

pub const MAP_COLUMNS: &[&str] = &[
    "alpha",
    "beta_mag",
    "best_model",
    "profit_n",
    "profit_o",
    "profit_t",
    "region_o",
    "region_t",
    "t_authorization_declined",
];

pub fn map_table(map: &SelectionMap) -> Table {
    let mut t = Table::new(MAP_COLUMNS);
    for c in &map.cells {
        t.push(vec![
            exact(c.alpha),
            exact(c.beta_mag),
            c.best_model.to_string(),
            money(c.profits[0]),
            money(c.profits[1]),
            money(c.profits[2]),
            c.outcome(Model::O).region.label().into(),
            c.outcome(Model::T).region.label().into(),
            c.outcome(Model::T).authorization_declined.to_string(),
        ]);
    }
    t
}

pub fn map_cmd(config: &RunConfig) -> Result<Artifact, CliError> {
    let map = full_map(config)?;
    csv(config, "map", "selection_map.csv", &map_table(&map))
}

pub const DYNAMICS_COLUMNS: &[&str] =
    &["alpha", "beta_mag", "best_model", "q_n", "q_r", "total_q", "baseline_q_n", "reman_share", "total_delta", "qn_delta"];

pub fn dynamics_cmd(config: &RunConfig) -> Result<Artifact, CliError> {
    let map = full_map(config)?;
    let base = map.baseline.quantities().0;
    let mut t = Table::new(DYNAMICS_COLUMNS);
    for c in &map.cells {
        let d = market_dynamics(c, &map.baseline);
        t.push(vec![
            exact(c.alpha),
            exact(c.beta_mag),
            c.best_model.to_string(),
            d.q_n.to_string(),
            d.q_r.to_string(),
            d.total_q.to_string(),
            base.to_string(),
            exact(d.reman_share),
            exact(d.total_delta),
            exact(d.qn_delta),
        ]);
    }
    csv(config, "dynamics", "market_dynamics.csv", &t)
}

pub const IMPACT_COLUMNS: &[&str] = &[
    "alpha",
    "beta_mag",
    "best_model",
    "impact",
    "baseline_impact",
    "impact_delta",
    "impact_n",
    "impact_o",
    "impact_t",
];

pub fn impact_cmd(config: &RunConfig, scenario: Scenario) -> Result<Artifact, CliError> {
    let map = full_map(config)?;
    let env = scenario.params();
    let base = environmental_impact(&map.baseline, &env);
    let mut t = Table::new(IMPACT_COLUMNS);
    for c in &map.cells {
        let ei = environmental_impact(c.best(), &env);
        let per = |m| environmental_impact(c.outcome(m), &env);
        t.push(vec![
            exact(c.alpha),
            exact(c.beta_mag),
            c.best_model.to_string(),
            money(ei),
            money(base),
            exact(if base != 0.0 { ei / base - 1.0 } else { 0.0 }),
            money(per(Model::N)),
            money(per(Model::O)),
            money(per(Model::T)),
        ]);
    }
    csv(config, &format!("impact {}", scenario.name()), &format!("impact_{}.csv", scenario.name()), &t)
}

pub const SWEEP_COLUMNS: &[&str] = &[
    "case",
    "fixed_fee",
    "unit_fee",
    "oem_profit",
    "tpr_profit",
    "system_profit",
    "impact",
    "new_quantity",
    "reman_quantity",
    "authorization_declined",
];

/// Unit fees `step, 2 step, ...` strictly inside `(0, c)`.
pub fn unit_fee_grid(config: &RunConfig) -> Vec<f64> {
    let step = config.sweep.unit_fee_step;
    let c = config.costs.production;
    (1..).map(|i| i as f64 * step).take_while(|h| *h < c - 1e-9).collect()
}

pub fn contract_sweep_cmd(config: &RunConfig) -> Result<Artifact, CliError> {
    let perc = config.perception()?;
    let sweep = contract_sweep(
        &config.market,
        &perc,
        &config.costs,
        &config.sweep.fixed_fees,
        &unit_fee_grid(config),
        &config.env,
        &config.solver(),
    )?;
    let mut t = Table::new(SWEEP_COLUMNS);
    for r in &sweep.rows {
        let (q_n, q_r) = r.outcome.quantities();
        t.push(vec![
            if r.fixed_fee == 0.0 { "one-part" } else { "two-part" }.into(),
            money(r.fixed_fee),
            money(r.unit_fee),
            money(r.oem_profit),
            money(r.tpr_profit),
            money(r.system_profit),
            money(r.impact),
            q_n.to_string(),
            q_r.to_string(),
            r.declined.to_string(),
        ]);
    }
    let co = &sweep.coordination;
    let (q_n, q_r) = co.quantities();
    t.push(vec![
        "coordination".into(),
        String::new(),
        String::new(),
        money(co.oem_profit),
        String::new(),
        money(co.oem_profit),
        money(sweep.coordination_impact),
        q_n.to_string(),
        q_r.to_string(),
        "false".into(),
    ]);
    csv(config, "contract-sweep", "contract_sweep.csv", &t)
}

pub const STOCHASTIC_COLUMNS: &[&str] = &[
    "alpha",
    "beta_mag",
    "model",
    "profit_stochastic",
    "profit_constant",
    "profit_delta",
    "expected_profit_delta",
    "impact_stochastic",
    "impact_constant",
    "ei_delta",
    "near_boundary",
];

pub fn stochastic_cmd(config: &RunConfig) -> Result<Artifact, CliError> {
    let g = &config.grid;
    let alphas = grid(g.realistic_alpha[0], g.realistic_alpha[1], g.perception_step)?;
    let betas = grid(g.realistic_beta[0], g.realistic_beta[1], g.perception_step)?;
    let cells = stochastic_vs_constant(
        &config.market,
        &alphas,
        &betas,
        &config.costs,
        &config.contract,
        &config.env,
        &config.analysis_solver(),
        config.solver.constant_rounding,
    )?;
    let mut t = Table::new(STOCHASTIC_COLUMNS);
    for c in &cells {
        t.push(vec![
            exact(c.alpha),
            exact(c.beta_mag),
            c.model.to_string(),
            money(c.stochastic.oem_profit),
            money(c.constant.oem_profit),
            exact(c.profit_delta),
            exact(c.expected_profit_delta),
            money(c.stochastic_impact),
            money(c.constant_impact),
            exact(c.ei_delta),
            c.near_boundary.to_string(),
        ]);
    }
    csv(config, "stochastic-compare", "stochastic_compare.csv", &t)
}

pub const VALIDATION_COLUMNS: &[&str] = &[
    "case",
    "model",
    "alpha",
    "shift",
    "new_price",
    "new_quantity",
    "reman_price",
    "reman_quantity",
    "reduced_profit",
    "expected_profit",
    "mc_mean",
    "mc_std_error",
    "replications",
    "seed",
    "sigmas_reduced",
    "pass_reduced",
    "sigmas_expected",
    "pass_expected",
];

/// Perception points at which every optimizer is checked by simulation.
pub const SPOT_POINTS: [(f64, f64); 5] = [(0.5, 0.2), (0.6, 0.3), (0.7, 0.1), (0.8, 0.1), (0.9, 0.05)];

struct Case {
    name: String,
    model: Model,
    perception: Perception,
    outcome: Outcome,
}

fn validation_cases(config: &RunConfig) -> Result<Vec<Case>, CliError> {
    let solver = config.solver();
    let (m, c, k) = (&config.market, &config.costs, &config.contract);
    let mut cases = Vec::new();
    let neutral = Perception::new(0.0, 0.0)?;
    let reference_o = Perception::new(0.8, -0.1)?;
    let fixed = [
        ("reference-n", Model::N, neutral, Decision::new_only(497.74, 383)),
        ("reference-o", Model::O, reference_o, Decision::both(492.3, 224, 380.0, 193)),
    ];
    for (name, model, perception, decision) in fixed {
        let setting = reman_core::Setting { market: m, perception: &perception, costs: c, contract: None };
        let outcome = reman_core::evaluate(model, &decision, &setting, &solver)?;
        cases.push(Case { name: name.into(), model, perception, outcome });
    }
    for (a, b) in SPOT_POINTS {
        let base = Perception::new(a, b)?;
        for model in [Model::N, Model::O, Model::T] {
            let perception = model_perception(model, &base);
            let outcome = optimize(model, m, &perception, c, k, &solver)?;
            cases.push(Case { name: format!("spot-{a}-{b}"), model, perception, outcome });
        }
    }
    Ok(cases)
}

pub fn validate_cmd(config: &RunConfig) -> Result<Artifact, CliError> {
    let sim = &config.simulation;
    let mut t = Table::new(VALIDATION_COLUMNS);
    for (i, case) in validation_cases(config)?.into_iter().enumerate() {
        let seed = sim.seed.wrapping_add(i as u64);
        let contract: Option<&Contract> = (case.model == Model::T).then_some(&config.contract);
        let report = simulate_market(
            &case.outcome.decision,
            &config.market,
            &case.perception,
            &config.costs,
            contract,
            case.model,
            sim.replications,
            seed,
        )?;
        let reduced = validate(case.outcome.oem_profit, &report, sim.k_sigma);
        let expected = validate(case.outcome.expected_oem_profit, &report, sim.k_sigma);
        let d = case.outcome.decision;
        t.push(vec![
            case.name,
            case.model.to_string(),
            exact(case.perception.wtp_discount),
            exact(case.perception.value_shift),
            opt_money(d.new_price),
            d.new_quantity.map(|q| q.to_string()).unwrap_or_default(),
            opt_money(d.reman_price),
            d.reman_quantity.map(|q| q.to_string()).unwrap_or_default(),
            money(case.outcome.oem_profit),
            money(case.outcome.expected_oem_profit),
            money(report.mean_profit),
            money(report.std_error),
            report.replications.to_string(),
            seed.to_string(),
            exact(reduced.sigmas(sim.k_sigma)),
            reduced.pass.to_string(),
            exact(expected.sigmas(sim.k_sigma)),
            expected.pass.to_string(),
        ]);
    }
    csv(config, "validate", "validation.csv", &t)
}

pub const THRESHOLD_COLUMNS: &[&str] = &["name", "alpha", "value", "basis"];

pub fn thresholds_cmd(config: &RunConfig, with_boundary: bool) -> Result<Artifact, CliError> {
    let th = thresholds(&config.market, &config.costs)?;
    let mut t = Table::new(THRESHOLD_COLUMNS);
    t.push(vec!["alpha1".into(), String::new(), exact(th.alpha1), "analytic".into()]);
    t.push(vec!["alpha2".into(), String::new(), exact(th.alpha2), "analytic".into()]);
    t.push(vec!["beta1".into(), exact(th.alpha2), opt_exact(th.beta1(th.alpha2)), "analytic".into()]);
    for alpha in grid(0.0, 1.0, 0.01)?.into_iter().filter(|a| (th.alpha1..=th.alpha2).contains(a)) {
        t.push(vec!["beta1".into(), exact(alpha), opt_exact(th.beta1(alpha)), "analytic".into()]);
    }
    if with_boundary {
        let map = full_map(config)?;
        let boundary =
            TBoundary::from_cells(map.cells.iter().map(|c| (c.alpha, c.beta_mag, c.best_model)));
        t.push(vec![
            "t_region_lower_edge".into(),
            String::new(),
            opt_exact(boundary.lower_edge()),
            "numeric-observed".into(),
        ]);
        for (alpha, shift) in boundary.rows() {
            t.push(vec!["t_region_min_shift".into(), exact(*alpha), opt_exact(*shift), "numeric-observed".into()]);
        }
    }
    csv(config, "thresholds", "thresholds.csv", &t)
}

/// Constant-market decision under the configured perception; used by `optimize --constant`.
pub fn constant_cmd(config: &RunConfig, model: Model) -> Result<Artifact, CliError> {
    let perc = config.perception()?;
    let solver: Solver = config.solver();
    let outcome = optimize_constant_market(
        &config.market,
        &perc,
        &config.costs,
        &config.contract,
        model,
        &solver,
        config.solver.constant_rounding,
    )?;
    let record = OptimizeRecord {
        version: crate::output::VERSION,
        model,
        perception: model_perception(model, &perc),
        price_step: solver.price_step,
        outcome: &outcome,
        approximation: None,
    };
    let mut bytes = serde_json::to_vec_pretty(&record).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(Artifact { name: format!("constant_{}.json", model.to_string().to_lowercase()), bytes })
}

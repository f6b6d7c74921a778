//! Pricing and stocking optimization for remanufacturing business models.
//!
//! An OEM facing compound-Poisson demand can sell new products only (model
//! `N`), remanufacture in house (`O`), or authorize a third-party
//! remanufacturer under a two-part tariff (`T`). This crate evaluates and
//! optimizes all three on price grids, provides closed-form approximations,
//! cross-model analyses, and a Monte Carlo check of every expectation.

pub mod analysis;
pub mod closedform;
pub mod distributions;
pub mod error;
pub mod market;
pub mod models;
pub mod search;
pub mod simulate;

pub use distributions::{
    expected_min, poisson_cdf, poisson_inv_cdf, poisson_pmf, FractileRule, Quantile, Rate,
};
pub use error::{Error, Result};
pub use market::{
    classify_region, demand_rates, perceived_values, single_product_rate, Contract, CostStructure,
    MarketParams, Perception, PerceivedValues, Region,
};
pub use models::{
    coordination_case, critical_quantity, evaluate, optimize, optimize_model_n, optimize_model_o,
    optimize_model_t, profit_model_n, profit_model_o, tpr_best_response, Decision, LeaderScope, Model, Objective,
    Outcome, Response, Rounding, Setting, Solver,
};
pub use closedform::{
    approx_model_n, approx_model_o, roadmap_select, thresholds, ApproxOutcome, Branch, TBoundary,
    Thresholds,
};
pub use simulate::{simulate_market, validate, SimReport, Validation};
pub use analysis::{
    contract_sweep, environmental_impact, market_dynamics, optimize_constant_market, selection_map,
    stochastic_vs_constant, ContractSweep, Dynamics, EnvParams, Scenario, SelectionCell, SelectionMap,
    StochasticCell,
};

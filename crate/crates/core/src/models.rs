//! Profit evaluation and exact grid optimization for the three business models.
//!
//! * `N`: the OEM sells new products only.
//! * `O`: the OEM also remanufactures; buyers discount new products (shift <= 0).
//! * `T`: a third party remanufactures under an authorization tariff and
//!   best-responds to the OEM's new-product price (shift >= 0).
//!
//! Stocking quantities follow the critical fractile `1 - cost / price`. The
//! default objective is the reduced form `p * L * F(q* - 1, L)`, the
//! expression whose grid maxima are the reference optima. The exact
//! expectation `p * E[min(D, q)] - c * q` is available as
//! [`Objective::Expected`] and is always reported alongside.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{cdf_pair, fractile_unchecked, partial_expectation, FractileRule, Rate};
use crate::error::{Error, Result};
use crate::market::{
    perceived_values, single_rate, Contract, CostStructure, JointMarket, MarketParams, Perception,
    Region,
};
use crate::search::{maximize_grid, maximize_line, Lattice, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    N,
    O,
    T,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::N => "N",
            Model::O => "O",
            Model::T => "T",
        })
    }
}

/// Stocking rule when demand equals its rate exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rounding {
    /// Stock `floor(rate)`: every unit sells.
    #[default]
    Floor,
    /// Stock `ceil(rate)`: no sale is lost.
    Ceil,
}

/// What the optimizer maximizes for each product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// `p * L * F(q - 1, L)` at the fractile quantity.
    #[default]
    ReducedForm,
    /// `p * E[min(D, q)] - c * q` under Poisson demand.
    Expected,
    /// Demand equals its rate: `p * min(L, q) - c * q`.
    Deterministic(Rounding),
}

/// Which new prices the Model-T leader may choose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeaderScope {
    /// Only prices at which the third party participates; Model N when there are none.
    #[default]
    Authorized,
    /// Any price; where the third party declines the OEM earns the Model-N value.
    Unrestricted,
}

/// Grid and stocking settings shared by all optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solver {
    pub price_step: f64,
    pub fractile: FractileRule,
    pub objective: Objective,
    #[serde(default)]
    pub leader: LeaderScope,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            price_step: 0.01,
            fractile: FractileRule::MinK,
            objective: Objective::ReducedForm,
            leader: LeaderScope::Authorized,
        }
    }
}

/// Stocking decision for one product at one price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stock {
    pub quantity: u64,
    /// Objective value including the production cost.
    pub value: f64,
}

fn deterministic_quantity(rate: Rate, rounding: Rounding) -> u64 {
    let l = rate.value();
    let tol = 1e-9 * l.max(1.0);
    match rounding {
        Rounding::Floor => (l + tol).floor() as u64,
        Rounding::Ceil => (l - tol).ceil().max(0.0) as u64,
    }
}

impl Solver {
    pub fn new(price_step: f64) -> Result<Self> {
        let solver = Solver { price_step, ..Solver::default() };
        solver.validate()?;
        Ok(solver)
    }

    pub fn with_objective(self, objective: Objective) -> Self {
        Solver { objective, ..self }
    }

    pub fn with_fractile(self, fractile: FractileRule) -> Self {
        Solver { fractile, ..self }
    }

    pub fn with_leader(self, leader: LeaderScope) -> Self {
        Solver { leader, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.price_step.is_finite() && self.price_step > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidGrid(format!("price step must be positive, got {}", self.price_step)))
        }
    }

    /// Optimal stock at `price`; zero whenever the price does not cover the cost.
    pub fn critical_quantity(&self, price: f64, unit_cost: f64, rate: Rate) -> u64 {
        if price <= unit_cost || rate.value() == 0.0 {
            return 0;
        }
        match self.objective {
            Objective::Deterministic(r) => deterministic_quantity(rate, r),
            _ => fractile_unchecked(1.0 - unit_cost / price, rate, self.fractile).k,
        }
    }

    /// Objective value of stocking `q` units at `price`.
    pub fn value_at(&self, price: f64, unit_cost: f64, rate: Rate, q: u64) -> f64 {
        if q == 0 {
            return 0.0;
        }
        match self.objective {
            Objective::ReducedForm => price * rate.value() * cdf_pair(q, rate).0,
            Objective::Expected => expected_profit(price, unit_cost, rate, q),
            Objective::Deterministic(_) => {
                price * rate.value().min(q as f64) - unit_cost * q as f64
            }
        }
    }

    pub fn stock(&self, price: f64, unit_cost: f64, rate: Rate) -> Stock {
        if price <= unit_cost || rate.value() == 0.0 {
            return Stock { quantity: 0, value: 0.0 };
        }
        let l = rate.value();
        match self.objective {
            Objective::Deterministic(r) => {
                let q = deterministic_quantity(rate, r);
                Stock { quantity: q, value: price * l.min(q as f64) - unit_cost * q as f64 }
            }
            objective => {
                let point = fractile_unchecked(1.0 - unit_cost / price, rate, self.fractile);
                let q = point.k;
                let value = if q == 0 {
                    0.0
                } else if objective == Objective::ReducedForm {
                    price * l * point.below
                } else {
                    price * partial_expectation(rate, q, point.below, point.at) - unit_cost * q as f64
                };
                Stock { quantity: q, value }
            }
        }
    }

    /// A lower bound on `stock(price, cost, rate).value` that is nondecreasing in `rate`.
    fn minorant(&self, price: f64, unit_cost: f64, rate: Rate) -> f64 {
        if price <= unit_cost || rate.value() == 0.0 {
            return 0.0;
        }
        match (self.objective, self.fractile) {
            (Objective::Deterministic(Rounding::Floor), _) => self.stock(price, unit_cost, rate).value,
            (Objective::Deterministic(Rounding::Ceil), _) => {
                (price - unit_cost) * rate.value() - unit_cost
            }
            (_, FractileRule::MinK) => {
                // exact expectation at its own optimum, which the reduced form dominates
                let expected = Solver { objective: Objective::Expected, ..*self };
                expected.stock(price, unit_cost, rate).value
            }
            (_, FractileRule::Floor) => 0.0,
        }
    }
}

/// Upper bound on any stocking value: `(p - c)+ * L`.
fn margin_bound(price: f64, unit_cost: f64, rate: f64) -> f64 {
    (price - unit_cost).max(0.0) * rate
}

/// `p * E[min(D, q)] - c * q` for `D ~ Poisson(rate)`.
pub fn expected_profit(price: f64, unit_cost: f64, rate: Rate, q: u64) -> f64 {
    if q == 0 {
        return 0.0;
    }
    let (below, at) = cdf_pair(q, rate);
    price * partial_expectation(rate, q, below, at) - unit_cost * q as f64
}

fn expected_sales(rate: Rate, q: u64) -> f64 {
    crate::distributions::expected_min(rate, q)
}

/// Critical quantity `F^{-1}(1 - cost / price)` under the smallest-k rule.
pub fn critical_quantity(price: f64, unit_cost: f64, rate: Rate) -> u64 {
    Solver::default().critical_quantity(price, unit_cost, rate)
}

/// Expected Model-N profit of stocking `q_n` at `p_n`.
pub fn profit_model_n(p_n: f64, q_n: u64, market: &MarketParams, costs: &CostStructure) -> Result<f64> {
    let v = market.new_value();
    if !(p_n > 0.0 && p_n < v) {
        return Err(Error::PriceOutOfSupport(p_n));
    }
    let rate = single_rate(p_n, v, market.market_size);
    Ok(expected_profit(p_n, costs.production, rate, q_n))
}

/// Reduced-form Model-N profit at `p_n` with the fractile quantity.
pub fn reduced_profit_model_n(p_n: f64, market: &MarketParams, costs: &CostStructure) -> Result<f64> {
    let v = market.new_value();
    if !(p_n > 0.0 && p_n < v) {
        return Err(Error::PriceOutOfSupport(p_n));
    }
    let rate = single_rate(p_n, v, market.market_size);
    Ok(Solver::default().stock(p_n, costs.production, rate).value)
}

/// Expected Model-O profit of a joint price and stock decision.
pub fn profit_model_o(
    p_n: f64,
    q_n: u64,
    p_r: f64,
    q_r: u64,
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
) -> Result<f64> {
    if perc.value_shift > 0.0 {
        return Err(Error::InvalidPerception("in-house remanufacturing needs a shift <= 0".into()));
    }
    let (rn, rr) = crate::market::demand_rates(p_n, p_r, market, perc)?;
    Ok(expected_profit(p_n, costs.production, rn, q_n)
        + expected_profit(p_r, costs.reman_unit_cost(), rr, q_r))
}

/// Prices and stocks; a product is offered iff its price is present.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Decision {
    pub new_price: Option<f64>,
    pub new_quantity: Option<u64>,
    pub reman_price: Option<f64>,
    pub reman_quantity: Option<u64>,
}

impl Decision {
    pub fn nothing() -> Self {
        Decision::default()
    }

    pub fn new_only(price: f64, quantity: u64) -> Self {
        Decision { new_price: Some(price), new_quantity: Some(quantity), ..Decision::default() }
    }

    pub fn reman_only(price: f64, quantity: u64) -> Self {
        Decision { reman_price: Some(price), reman_quantity: Some(quantity), ..Decision::default() }
    }

    pub fn both(p_n: f64, q_n: u64, p_r: f64, q_r: u64) -> Self {
        Decision { new_price: Some(p_n), new_quantity: Some(q_n), reman_price: Some(p_r), reman_quantity: Some(q_r) }
    }

    pub fn validate(&self) -> Result<()> {
        for (p, q, which) in [
            (self.new_price, self.new_quantity, "new"),
            (self.reman_price, self.reman_quantity, "remanufactured"),
        ] {
            if p.is_some() != q.is_some() {
                return Err(Error::InvalidDecision(format!(
                    "{which} price and quantity must be given together"
                )));
            }
            if let Some(p) = p {
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::InvalidDecision(format!("{which} price must be positive")));
                }
            }
        }
        if let (Some(n), Some(r)) = (self.new_price, self.reman_price) {
            if r > n {
                return Err(Error::InadmissiblePrices { p_n: n, p_r: r });
            }
        }
        Ok(())
    }

    pub fn quantities(&self) -> (u64, u64) {
        (self.new_quantity.unwrap_or(0), self.reman_quantity.unwrap_or(0))
    }
}

/// A decision together with everything it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub model: Model,
    pub decision: Decision,
    /// OEM objective value (per the solver's objective).
    pub oem_profit: f64,
    /// Third-party objective value net of the fixed fee; present when it participates.
    pub tpr_profit: Option<f64>,
    /// OEM profit under the exact Poisson expectation.
    pub expected_oem_profit: f64,
    pub expected_tpr_profit: Option<f64>,
    /// `(new, reman)` demand rates.
    pub demand_rates: (Rate, Rate),
    /// `(new, reman)` expected sales under Poisson demand.
    pub expected_sales: (f64, f64),
    pub region: Region,
    /// Set when a third-party model ends without an authorized remanufacturer.
    pub authorization_declined: bool,
}

impl Outcome {
    pub fn quantities(&self) -> (u64, u64) {
        self.decision.quantities()
    }

    /// OEM plus third-party objective value; the fixed fee cancels.
    pub fn system_profit(&self) -> f64 {
        self.oem_profit + self.tpr_profit.unwrap_or(0.0)
    }

    pub fn expected_system_profit(&self) -> f64 {
        self.expected_oem_profit + self.expected_tpr_profit.unwrap_or(0.0)
    }
}

/// The inputs every model evaluation needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting<'a> {
    pub market: &'a MarketParams,
    pub perception: &'a Perception,
    pub costs: &'a CostStructure,
    pub contract: Option<&'a Contract>,
}

/// Demand rates of a decision: joint market only when both products are offered.
pub fn decision_rates(decision: &Decision, market: &MarketParams, perc: &Perception) -> (Rate, Rate) {
    let values = perceived_values(market, perc);
    let size = market.market_size;
    match (decision.new_price, decision.reman_price) {
        (Some(n), Some(r)) => JointMarket::new(market, perc).rates(n, r),
        (Some(n), None) => (single_rate(n, values.new, size), Rate::ZERO),
        (None, Some(r)) => (Rate::ZERO, single_rate(r, values.reman, size)),
        (None, None) => (Rate::ZERO, Rate::ZERO),
    }
}

/// Re-evaluate `decision` under `model`'s accounting.
pub fn evaluate(model: Model, decision: &Decision, setting: &Setting, solver: &Solver) -> Result<Outcome> {
    decision.validate()?;
    let costs = setting.costs;
    let rates = decision_rates(decision, setting.market, setting.perception);
    let (q_n, q_r) = decision.quantities();
    let p_n = decision.new_price.unwrap_or(0.0);
    let p_r = decision.reman_price.unwrap_or(0.0);
    let new_value = solver.value_at(p_n, costs.production, rates.0, q_n);
    let new_expected = expected_profit(p_n, costs.production, rates.0, q_n);
    let sales = (expected_sales(rates.0, q_n), expected_sales(rates.1, q_r));
    let region = match (decision.new_price, decision.reman_price) {
        (Some(n), Some(r)) => JointMarket::new(setting.market, setting.perception).region(n, r),
        _ => Region::from_rates(rates.0, rates.1),
    };
    let (oem, expected_oem, tpr, expected_tpr, declined) = match model {
        Model::N | Model::O => {
            if model == Model::N && decision.reman_price.is_some() {
                return Err(Error::InvalidDecision("model N offers no remanufactured product".into()));
            }
            let rc = costs.reman_unit_cost();
            let reman_value = solver.value_at(p_r, rc, rates.1, q_r);
            let reman_expected = expected_profit(p_r, rc, rates.1, q_r);
            (new_value + reman_value, new_expected + reman_expected, None, None, false)
        }
        Model::T => {
            let contract = setting
                .contract
                .ok_or_else(|| Error::InvalidContract("model T needs a contract".into()))?;
            if decision.reman_price.is_some() {
                let tc = costs.remanufacturing + contract.unit_fee;
                let fees = contract.fixed_fee + (contract.unit_fee - costs.collection) * q_r as f64;
                let tpr = solver.value_at(p_r, tc, rates.1, q_r) - contract.fixed_fee;
                let tpr_expected = expected_profit(p_r, tc, rates.1, q_r) - contract.fixed_fee;
                (new_value + fees, new_expected + fees, Some(tpr), Some(tpr_expected), false)
            } else {
                (new_value, new_expected, None, None, true)
            }
        }
    };
    Ok(Outcome {
        model,
        decision: *decision,
        oem_profit: oem,
        tpr_profit: tpr,
        expected_oem_profit: expected_oem,
        expected_tpr_profit: expected_tpr,
        demand_rates: rates,
        expected_sales: sales,
        region,
        authorization_declined: declined,
    })
}

/// Best single-product price on `(cost, value)`: `(price, stock)`.
fn best_single(value: f64, unit_cost: f64, size: f64, solver: &Solver) -> Option<(f64, Stock)> {
    let lattice = Lattice::open_unchecked(unit_cost, value, solver.price_step);
    let rate = |p: f64| single_rate(p, value, size);
    let bound = |lo: usize, hi: usize| {
        let r = rate(lattice.point(lo)).value();
        if r == 0.0 {
            f64::NEG_INFINITY
        } else {
            margin_bound(lattice.point(hi), unit_cost, r)
        }
    };
    let eval = |i: usize| {
        let p = lattice.point(i);
        solver.stock(p, unit_cost, rate(p)).value
    };
    let (i, _) = maximize_line(lattice.len(), f64::NEG_INFINITY, bound, eval)?;
    let p = lattice.point(i);
    Some((p, solver.stock(p, unit_cost, rate(p))))
}

fn check_solver(solver: &Solver) -> Result<()> {
    solver.validate()
}

/// Model N: scan `p_n` over `(c, dV)` with the fractile quantity.
pub fn optimize_model_n(market: &MarketParams, costs: &CostStructure, solver: &Solver) -> Result<Outcome> {
    market.validate()?;
    costs.validate()?;
    check_solver(solver)?;
    let neutral = Perception { wtp_discount: 0.0, value_shift: 0.0 };
    let setting = Setting { market, perception: &neutral, costs, contract: None };
    let decision = match best_single(market.new_value(), costs.production, market.market_size, solver) {
        Some((p, s)) => Decision::new_only(p, s.quantity),
        None => Decision::nothing(),
    };
    evaluate(Model::N, &decision, &setting, solver)
}

/// Best joint decision with both demand rates positive.
fn best_coexistence(joint: &JointMarket, costs: &CostStructure, solver: &Solver, floor: f64) -> Option<Decision> {
    let c = costs.production;
    let rc = costs.reman_unit_cost();
    let rows = Lattice::open_unchecked(c, joint.adjusted, solver.price_step);
    let cols = Lattice::open_unchecked(rc, joint.reman, solver.price_step);
    let bound = |r: Rect| {
        let (a, b) = (rows.point(r.rows.0), rows.point(r.rows.1));
        let e = cols.point(r.cols.0);
        if e > b {
            return f64::NEG_INFINITY;
        }
        let f = cols.point(r.cols.1).min(b);
        let new_up = joint.rates(a, f).0.value();
        let reman_up = joint.rates(b, e).1.value();
        if new_up == 0.0 || reman_up == 0.0 {
            return f64::NEG_INFINITY;
        }
        margin_bound(b, c, new_up) + margin_bound(f, rc, reman_up)
    };
    let eval = |i: usize, j: usize| {
        let (p_n, p_r) = (rows.point(i), cols.point(j));
        if p_r > p_n {
            return f64::NEG_INFINITY;
        }
        let (rn, rr) = joint.rates(p_n, p_r);
        if rn.value() == 0.0 || rr.value() == 0.0 {
            return f64::NEG_INFINITY;
        }
        solver.stock(p_n, c, rn).value + solver.stock(p_r, rc, rr).value
    };
    let ((i, j), _) = maximize_grid(rows.len(), cols.len(), floor, bound, eval)?;
    let (p_n, p_r) = (rows.point(i), cols.point(j));
    let (rn, rr) = joint.rates(p_n, p_r);
    Some(Decision::both(p_n, solver.stock(p_n, c, rn).quantity, p_r, solver.stock(p_r, rc, rr).quantity))
}

/// The OEM selling both products: best of new-only, coexistence and remanufactured-only.
///
/// Candidates are compared in that order and a later one must be strictly
/// better. Price pairs at which one product has no demand are covered by the
/// single-product candidates, since a product nobody buys is not on the market.
pub(crate) fn optimize_joint(
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    solver: &Solver,
) -> Result<Outcome> {
    market.validate()?;
    perc.validate()?;
    costs.validate()?;
    check_solver(solver)?;
    let setting = Setting { market, perception: perc, costs, contract: None };
    let mut best = optimize_model_n(market, costs, solver)?;
    best.model = Model::O;
    let joint = JointMarket::new(market, perc);
    if let Some(d) = best_coexistence(&joint, costs, solver, best.oem_profit) {
        let candidate = evaluate(Model::O, &d, &setting, solver)?;
        if candidate.oem_profit > best.oem_profit {
            best = candidate;
        }
    }
    let reman_value = perceived_values(market, perc).reman;
    if let Some((p, s)) = best_single(reman_value, costs.reman_unit_cost(), market.market_size, solver) {
        let candidate = evaluate(Model::O, &Decision::reman_only(p, s.quantity), &setting, solver)?;
        if candidate.oem_profit > best.oem_profit {
            best = candidate;
        }
    }
    Ok(best)
}

/// Model O: in-house remanufacturing under an assimilation effect (shift <= 0).
pub fn optimize_model_o(
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    solver: &Solver,
) -> Result<Outcome> {
    if perc.value_shift > 0.0 {
        return Err(Error::InvalidPerception(format!(
            "in-house remanufacturing needs a shift <= 0, got {}",
            perc.value_shift
        )));
    }
    optimize_joint(market, perc, costs, solver)
}

/// Centralized OEM plus remanufacturer under the contrast effect, with no transfer fees.
pub fn coordination_case(
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    solver: &Solver,
) -> Result<Outcome> {
    if perc.value_shift < 0.0 {
        return Err(Error::InvalidPerception(format!(
            "the centralized benchmark needs a shift >= 0, got {}",
            perc.value_shift
        )));
    }
    optimize_joint(market, perc, costs, solver)
}

/// The third party's accepted offer at a given new-product price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub price: f64,
    pub quantity: u64,
    /// Objective value net of the fixed fee; never negative.
    pub profit: f64,
}

/// The follower's problem for a fixed perception and contract.
struct Follower<'a> {
    joint: JointMarket,
    unit_cost: f64,
    fixed_fee: f64,
    step: f64,
    solver: &'a Solver,
}

impl<'a> Follower<'a> {
    fn new(market: &MarketParams, perc: &Perception, costs: &CostStructure, contract: &Contract, solver: &'a Solver) -> Self {
        Follower {
            joint: JointMarket::new(market, perc),
            unit_cost: costs.remanufacturing + contract.unit_fee,
            fixed_fee: contract.fixed_fee,
            step: solver.price_step,
            solver,
        }
    }

    fn lattice(&self, p_n: f64) -> Lattice {
        Lattice::open_unchecked(self.unit_cost, p_n.min(self.joint.reman), self.step)
    }

    /// Best price with positive demand, if its value covers the fixed fee.
    fn respond(&self, p_n: f64) -> Option<Response> {
        let lattice = self.lattice(p_n);
        let k = self.unit_cost;
        let bound = |lo: usize, hi: usize| {
            let r = self.joint.rates(p_n, lattice.point(lo)).1.value();
            if r == 0.0 {
                f64::NEG_INFINITY
            } else {
                margin_bound(lattice.point(hi), k, r)
            }
        };
        let eval = |j: usize| {
            let p_r = lattice.point(j);
            let r = self.joint.rates(p_n, p_r).1;
            if r.value() == 0.0 {
                f64::NEG_INFINITY
            } else {
                self.solver.stock(p_r, k, r).value
            }
        };
        let floor = self.fixed_fee - 1e-9 * (self.fixed_fee + 1.0);
        let (j, value) = maximize_line(lattice.len(), floor, bound, eval)?;
        if value - self.fixed_fee < 0.0 {
            return None;
        }
        let p_r = lattice.point(j);
        let stock = self.solver.stock(p_r, k, self.joint.rates(p_n, p_r).1);
        Some(Response { price: p_r, quantity: stock.quantity, profit: value - self.fixed_fee })
    }

    /// `(p - k) * reman rate` at new price `p_n`: an upper bound on the follower's value.
    fn envelope(&self, p_n: f64, p_r: f64) -> f64 {
        margin_bound(p_r, self.unit_cost, self.joint.rates(p_n, p_r).1.value())
    }

    /// Right end of the prices with positive remanufactured demand at `p_n`.
    fn demand_edge(&self, p_n: f64) -> f64 {
        let j = &self.joint;
        let cut = if j.gap > 0.0 { p_n * j.reman / (j.reman + j.gap) } else { p_n };
        cut.min(p_n).min(j.reman)
    }

    /// Maximizer of the envelope over `[k, edge]`, which is concave there.
    fn envelope_peak(&self, p_n: f64) -> Option<f64> {
        let k = self.unit_cost;
        let edge = self.demand_edge(p_n);
        if edge <= k {
            return None;
        }
        let j = &self.joint;
        let mut candidates = vec![k, edge, 0.5 * (k + j.reman), 0.5 * (k + edge)];
        if j.gap > 0.0 {
            candidates.push(p_n - j.gap);
        }
        candidates
            .into_iter()
            .map(|p| p.clamp(k, edge))
            .map(|p| (p, self.envelope(p_n, p)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(p, _)| p)
    }

    /// A value the follower attains at every new price in `[a, inf)`.
    fn guaranteed_value(&self, a: f64) -> f64 {
        let Some(peak) = self.envelope_peak(a) else {
            return f64::NEG_INFINITY;
        };
        let lattice = self.lattice(a);
        let Some(i) = lattice.last_at_or_below(peak) else {
            return f64::NEG_INFINITY;
        };
        let mut best = f64::NEG_INFINITY;
        for idx in [i, i + 1] {
            if idx >= lattice.len() {
                continue;
            }
            let p = lattice.point(idx);
            let r = self.joint.rates(a, p).1;
            if r.value() > 0.0 {
                best = best.max(self.solver.minorant(p, self.unit_cost, r));
            }
        }
        best
    }

    /// Interval containing every price the follower may choose when its value must reach `level`.
    fn choice_interval(&self, b: f64, level: f64) -> Option<(f64, f64)> {
        let k = self.unit_cost;
        let peak = self.envelope_peak(b)?;
        let edge = self.demand_edge(b);
        let h = |p: f64| self.envelope(b, p);
        let level = level - 1e-9 * (level.abs() + 1.0);
        if h(peak) < level {
            return None;
        }
        let lo = if h(k) >= level {
            k
        } else {
            let (mut lo, mut hi) = (k, peak);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if h(mid) >= level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            lo
        };
        let hi = if h(edge) >= level {
            edge
        } else {
            let (mut lo, mut hi) = (peak, edge);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if h(mid) >= level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        Some((lo, hi))
    }
}

/// The third party's best response to new-product price `p_n`; `None` means it declines.
pub fn tpr_best_response(
    p_n: f64,
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    contract: &Contract,
    solver: &Solver,
) -> Result<Option<Response>> {
    market.validate()?;
    perc.validate()?;
    costs.validate()?;
    contract.validate(costs)?;
    check_solver(solver)?;
    if perc.value_shift < 0.0 {
        return Err(Error::InvalidPerception("third-party remanufacturing needs a shift >= 0".into()));
    }
    Ok(Follower::new(market, perc, costs, contract, solver).respond(p_n))
}

/// Model T: the OEM leads with `p_n`, the third party follows.
///
/// Under [`LeaderScope::Authorized`] the leader only considers prices the
/// follower accepts and falls back to the Model N optimum when there are
/// none. Under [`LeaderScope::Unrestricted`] a declined price earns the
/// Model-N value at that price. Either way the outcome is flagged
/// `authorization_declined` when no third party is active.
pub fn optimize_model_t(
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    contract: &Contract,
    solver: &Solver,
) -> Result<Outcome> {
    market.validate()?;
    perc.validate()?;
    costs.validate()?;
    contract.validate(costs)?;
    check_solver(solver)?;
    if perc.value_shift < 0.0 {
        return Err(Error::InvalidPerception(format!(
            "third-party remanufacturing needs a shift >= 0, got {}",
            perc.value_shift
        )));
    }
    let setting = Setting { market, perception: perc, costs, contract: Some(contract) };
    let follower = Follower::new(market, perc, costs, contract, solver);
    let c = costs.production;
    let v_n = market.new_value();
    let size = market.market_size;
    let leader = Lattice::open_unchecked(c, follower.joint.adjusted.max(v_n), solver.price_step);
    let fee = contract.fixed_fee;
    let unit_margin = contract.unit_fee - costs.collection;

    let exclusion = solver.leader == LeaderScope::Unrestricted;
    let leader_value = |p_n: f64, response: Option<Response>| match response {
        None if !exclusion => f64::NEG_INFINITY,
        None => solver.stock(p_n, c, single_rate(p_n, v_n, size)).value,
        Some(r) => {
            let rn = follower.joint.rates(p_n, r.price).0;
            solver.stock(p_n, c, rn).value + fee + unit_margin * r.quantity as f64
        }
    };
    let eval = |i: usize| {
        let p_n = leader.point(i);
        leader_value(p_n, follower.respond(p_n))
    };
    let bound = |lo: usize, hi: usize| {
        let (a, b) = (leader.point(lo), leader.point(hi));
        let guaranteed = follower.guaranteed_value(a);
        let accept_certain = guaranteed >= fee + 1e-9 * (fee + 1.0);
        let decline = if accept_certain || !exclusion {
            f64::NEG_INFINITY
        } else {
            margin_bound(b, c, single_rate(a, v_n, size).value())
        };
        let accept = match follower.choice_interval(b, guaranteed.max(fee)) {
            None => f64::NEG_INFINITY,
            Some((s_lo, s_hi)) => {
                let new_up = follower.joint.rates(a, s_hi).0.value();
                let reman_up = follower.joint.rates(b, s_lo).1;
                let q_up = solver.critical_quantity(s_hi, follower.unit_cost, reman_up);
                margin_bound(b, c, new_up) + fee + unit_margin.max(0.0) * q_up as f64
            }
        };
        decline.max(accept)
    };
    let decision = match maximize_line(leader.len(), f64::NEG_INFINITY, bound, eval) {
        None if !exclusion => optimize_model_n(market, costs, solver)?.decision,
        None => Decision::nothing(),
        Some((i, _)) => {
            let p_n = leader.point(i);
            match follower.respond(p_n) {
                None => Decision::new_only(p_n, solver.stock(p_n, c, single_rate(p_n, v_n, size)).quantity),
                Some(r) => {
                    let rn = follower.joint.rates(p_n, r.price).0;
                    Decision::both(p_n, solver.stock(p_n, c, rn).quantity, r.price, r.quantity)
                }
            }
        }
    };
    let mut outcome = evaluate(Model::T, &decision, &setting, solver)?;
    if decision.new_price.is_none() {
        outcome.authorization_declined = true;
    }
    Ok(outcome)
}

/// Shared leader objective for brute-force checks: OEM value at `p_n` given the
/// follower's response, `-inf` where the leader scope rules `p_n` out.
pub fn model_t_leader_value(
    p_n: f64,
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    contract: &Contract,
    solver: &Solver,
) -> Result<f64> {
    let response = tpr_best_response(p_n, market, perc, costs, contract, solver)?;
    let decision = match response {
        None if solver.leader == LeaderScope::Authorized => return Ok(f64::NEG_INFINITY),
        None => {
            let r = single_rate(p_n, market.new_value(), market.market_size);
            Decision::new_only(p_n, solver.critical_quantity(p_n, costs.production, r))
        }
        Some(r) => {
            let rn = JointMarket::new(market, perc).rates(p_n, r.price).0;
            Decision::both(p_n, solver.critical_quantity(p_n, costs.production, rn), r.price, r.quantity)
        }
    };
    let setting = Setting { market, perception: perc, costs, contract: Some(contract) };
    Ok(evaluate(Model::T, &decision, &setting, solver)?.oem_profit)
}

/// Run one model's optimizer; `perception` is used as given.
pub fn optimize(
    model: Model,
    market: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    contract: &Contract,
    solver: &Solver,
) -> Result<Outcome> {
    match model {
        Model::N => optimize_model_n(market, costs, solver),
        Model::O => optimize_model_o(market, perc, costs, solver),
        Model::T => optimize_model_t(market, perc, costs, contract, solver),
    }
}

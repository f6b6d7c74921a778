//! Closed-form approximations, analytic thresholds and the decision roadmap.
//!
//! Replacing `F(q* - 1)` by the fractile itself turns each product's profit
//! into the riskless margin `(p - c) * L(p)`, whose maximizers are explicit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{CostStructure, MarketParams, Perception};
use crate::models::Model;

/// Which products an approximate equilibrium sells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    NewOnly,
    RemanOnly,
    Coexistence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxOutcome {
    pub branch: Branch,
    pub new_price: Option<f64>,
    pub reman_price: Option<f64>,
    pub profit: f64,
}

/// Monopoly margin of one product: price `(cost + value) / 2`, profit `size (value - cost)^2 / (4 value)`.
fn monopoly(value: f64, cost: f64, size: f64) -> (Option<f64>, f64) {
    if cost >= value || value <= 0.0 {
        (None, 0.0)
    } else {
        (Some(0.5 * (cost + value)), size * (value - cost).powi(2) / (4.0 * value))
    }
}

pub fn approx_model_n(market: &MarketParams, costs: &CostStructure) -> ApproxOutcome {
    let (p, profit) = monopoly(market.new_value(), costs.production, market.market_size);
    ApproxOutcome { branch: Branch::NewOnly, new_price: p, reman_price: None, profit }
}

/// Remanufactured-only approximate optimum: the product sold alone at value `a * dV`.
pub fn approx_reman_only(market: &MarketParams, perc: &Perception, costs: &CostStructure) -> ApproxOutcome {
    let value = perc.wtp_discount * market.new_value();
    let (p, profit) = monopoly(value, costs.reman_unit_cost(), market.market_size);
    ApproxOutcome { branch: Branch::RemanOnly, new_price: None, reman_price: p, profit }
}

/// Margin earned on top of the remanufactured-only market by also selling new
/// products: a monopoly on the value gap `(1 + b)(1 - a) dV` with unit cost
/// equal to the production cost saving `c - c_r - c_coll`.
pub fn approx_new_increment(market: &MarketParams, perc: &Perception, costs: &CostStructure) -> f64 {
    let gap = (1.0 + perc.value_shift) * (1.0 - perc.wtp_discount) * market.new_value();
    let saving = costs.production - costs.reman_unit_cost();
    monopoly(gap, saving, market.market_size).1
}

/// Whether the coexistence cost window holds.
pub fn coexistence_condition(market: &MarketParams, perc: &Perception, costs: &CostStructure) -> bool {
    let a = perc.wtp_discount;
    if a <= 0.0 {
        return false;
    }
    let spread = (1.0 + perc.value_shift) * (1.0 - a);
    let k = costs.reman_unit_cost();
    let saving = costs.production - k;
    spread / a * k < saving && saving < spread * market.new_value()
}

/// Interior two-product optimum of the approximate margin, when the cost window holds.
pub fn coexistence_profit(market: &MarketParams, perc: &Perception, costs: &CostStructure) -> Option<f64> {
    if !coexistence_condition(market, perc, costs) {
        return None;
    }
    let a = perc.wtp_discount;
    let dv = market.new_value();
    let k = costs.reman_unit_cost();
    let spread = (1.0 + perc.value_shift) * (1.0 - a);
    let saving = costs.production - k;
    Some(market.market_size / (4.0 * dv) * ((spread * dv - saving).powi(2) / spread + (a * dv - k).powi(2) / a))
}

/// Approximate Model-O optimum (shift <= 0).
pub fn approx_model_o(market: &MarketParams, perc: &Perception, costs: &CostStructure) -> Result<ApproxOutcome> {
    perc.validate()?;
    if perc.value_shift > 0.0 {
        return Err(Error::InvalidPerception("in-house remanufacturing needs a shift <= 0".into()));
    }
    let a = perc.wtp_discount;
    let dv = market.new_value();
    let k = costs.reman_unit_cost();
    let c = costs.production;
    let new_only = approx_model_n(market, costs);
    if a <= 0.0 {
        return Ok(new_only);
    }
    let reman_only = approx_reman_only(market, perc, costs);
    if a >= 1.0 || perc.value_shift <= -1.0 {
        // no value gap between the products: the cheaper one takes the market
        return Ok(reman_only);
    }
    let with_reman = if let Some(profit) = coexistence_profit(market, perc, costs) {
        let adjusted = (1.0 + perc.value_shift - a * perc.value_shift) * dv;
        ApproxOutcome {
            branch: Branch::Coexistence,
            new_price: Some(0.5 * (c + adjusted)),
            reman_price: Some(0.5 * (k + a * dv)),
            profit,
        }
    } else {
        // outside the window the interior optimum collapses onto the remanufactured-only edge
        reman_only
    };
    // the OEM can always decline to remanufacture
    Ok(if with_reman.profit > new_only.profit { with_reman } else { new_only })
}

/// Hessian of the approximate two-product margin inside the coexistence region.
///
/// The objective `(p_n - c) L_n + (p_r - k) L_r` is quadratic there, so the
/// matrix does not depend on prices or costs.
pub fn coexistence_hessian(market: &MarketParams, perc: &Perception) -> [[f64; 2]; 2] {
    let values = crate::market::perceived_values(market, perc);
    let gap = (1.0 + perc.value_shift) * (1.0 - perc.wtp_discount) * values.new;
    let l = market.market_size;
    let nn = -2.0 * l / gap;
    let nr = 2.0 * l / gap;
    let rr = -2.0 * l * (1.0 / gap + 1.0 / values.reman);
    [[nn, nr], [nr, rr]]
}

/// Analytic thresholds of the N-versus-O comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Below this discount in-house remanufacturing never pays (`(c_r + c_coll) / c`).
    pub alpha1: f64,
    /// Above this discount Model O beats Model N for every shift.
    pub alpha2: f64,
    new_value: f64,
    production: f64,
    reman_cost: f64,
}

impl Thresholds {
    /// Approximate N/O boundary in `|shift|`; `None` where the radicand is negative
    /// or the discount is outside `(0, 1)`.
    pub fn beta1(&self, alpha: f64) -> Option<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return None;
        }
        let (dv, c, k) = (self.new_value, self.production, self.reman_cost);
        let left = (alpha * dv + k).powi(2) - alpha * (dv + c).powi(2);
        let right = (alpha * dv - k).powi(2) - alpha * (dv - c).powi(2);
        let radicand = left * right;
        if radicand < 0.0 || !radicand.is_finite() {
            return None;
        }
        let num = alpha * c * c - k * k - alpha * (1.0 - alpha) * dv * dv + radicand.sqrt();
        let value = (num / (2.0 * alpha * (1.0 - alpha) * dv * dv)).abs();
        value.is_finite().then_some(value)
    }
}

pub fn thresholds(market: &MarketParams, costs: &CostStructure) -> Result<Thresholds> {
    let dv = market.new_value();
    let c = costs.production;
    let k = costs.reman_unit_cost();
    if !(k < c && c < dv) {
        return Err(Error::InvalidCosts(format!(
            "thresholds need c_r + c_coll < c < dV, got {k}, {c}, {dv}"
        )));
    }
    let m = dv - c;
    let alpha2 = (m * m + m * (m * m + 4.0 * dv * k).sqrt() + 2.0 * dv * k) / (2.0 * dv * dv);
    Ok(Thresholds { alpha1: k / c, alpha2, new_value: dv, production: c, reman_cost: k })
}

/// Numerically observed lower edge of the third-party region, per discount row.
///
/// Built from a selection map; there is no closed form for it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TBoundary {
    /// `(discount, smallest |shift| at which T is optimal)`, sorted by discount.
    rows: Vec<(f64, Option<f64>)>,
}

impl TBoundary {
    pub fn new(mut rows: Vec<(f64, Option<f64>)>) -> Self {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        TBoundary { rows }
    }

    /// From `(discount, |shift|, best model)` cells.
    pub fn from_cells<I: IntoIterator<Item = (f64, f64, Model)>>(cells: I) -> Self {
        let mut rows: Vec<(f64, Option<f64>)> = Vec::new();
        for (alpha, shift, model) in cells {
            let pos = rows.iter().position(|r| r.0 == alpha);
            let idx = pos.unwrap_or_else(|| {
                rows.push((alpha, None));
                rows.len() - 1
            });
            if model == Model::T {
                let entry = &mut rows[idx].1;
                *entry = Some(entry.map_or(shift, |s: f64| s.min(shift)));
            }
        }
        TBoundary::new(rows)
    }

    pub fn rows(&self) -> &[(f64, Option<f64>)] {
        &self.rows
    }

    /// Smallest discount with any T-optimal cell.
    pub fn lower_edge(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.1.is_some()).map(|r| r.0)
    }

    /// Whether `(alpha, |shift|)` falls in the T region of the nearest row.
    pub fn contains(&self, alpha: f64, shift: f64) -> bool {
        let nearest = self
            .rows
            .iter()
            .min_by(|a, b| (a.0 - alpha).abs().total_cmp(&(b.0 - alpha).abs()));
        matches!(nearest, Some((_, Some(s))) if shift >= *s)
    }
}

/// Two-level roadmap: the discount decides first, `|shift|` only in between.
pub fn roadmap_select(
    perc: &Perception,
    thresholds: &Thresholds,
    boundary: &TBoundary,
    market: &MarketParams,
    costs: &CostStructure,
) -> Model {
    let alpha = perc.wtp_discount;
    let shift = perc.value_shift.abs();
    let low = boundary.lower_edge().map_or(thresholds.alpha1, |e| e.min(thresholds.alpha1));
    if alpha < low {
        return Model::N;
    }
    if alpha > thresholds.alpha2 {
        return Model::O;
    }
    if boundary.contains(alpha, shift) {
        return Model::T;
    }
    match thresholds.beta1(alpha) {
        Some(b1) if alpha >= thresholds.alpha1 => {
            if shift <= b1 {
                Model::O
            } else {
                Model::N
            }
        }
        _ => {
            let assim = perc.assimilation();
            let o = approx_model_o(market, &assim, costs).map(|a| a.profit).unwrap_or(0.0);
            if o > approx_model_n(market, costs).profit {
                Model::O
            } else {
                Model::N
            }
        }
    }
}

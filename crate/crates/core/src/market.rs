//! Consumer valuations, demand rates and the price-plane regions.
//!
//! Consumers have a preference `t ~ U[0, 1]`. A new product at price `p_n`
//! yields `t * g - p_n`, a remanufactured one `t * a * dV - p_r`, where `dV`
//! is the depreciated base value, `a` the willingness-to-pay discount, and
//! `g` the new-product value shifted by the perception effect. Each consumer
//! buys the option with the highest nonnegative utility; ties go to new.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::Rate;
use crate::error::{Error, Result};

/// The exogenous market environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketParams {
    /// Expected number of potential consumers per period.
    pub market_size: f64,
    /// Base product value.
    pub base_value: f64,
    /// Depreciation factor in `[0, 1]`.
    pub depreciation: f64,
}

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams { market_size: 1000.0, base_value: 1000.0, depreciation: 0.8 }
    }
}

impl MarketParams {
    pub fn new(market_size: f64, base_value: f64, depreciation: f64) -> Result<Self> {
        let params = MarketParams { market_size, base_value, depreciation };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.market_size.is_finite() && self.market_size > 0.0) {
            return Err(Error::InvalidMarket(format!(
                "market size must be positive, got {}",
                self.market_size
            )));
        }
        if !(self.base_value.is_finite() && self.base_value > 0.0) {
            return Err(Error::InvalidMarket(format!(
                "base value must be positive, got {}",
                self.base_value
            )));
        }
        if !(0.0..=1.0).contains(&self.depreciation) {
            return Err(Error::InvalidMarket(format!(
                "depreciation must lie in [0, 1], got {}",
                self.depreciation
            )));
        }
        Ok(())
    }

    /// Value of a new product absent any perception shift.
    pub fn new_value(&self) -> f64 {
        self.depreciation * self.base_value
    }
}

/// Consumer perception of remanufactured products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perception {
    /// Willingness-to-pay discount in `[0, 1]`: remanufactured value over new value.
    pub wtp_discount: f64,
    /// Shift of the new product's value in `[-1, 1]`; negative when the OEM
    /// sells both (assimilation), positive when a third party does (contrast).
    pub value_shift: f64,
}

impl Perception {
    pub fn new(wtp_discount: f64, value_shift: f64) -> Result<Self> {
        let perc = Perception { wtp_discount, value_shift };
        perc.validate()?;
        Ok(perc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.wtp_discount) {
            return Err(Error::InvalidPerception(format!(
                "willingness-to-pay discount must lie in [0, 1], got {}",
                self.wtp_discount
            )));
        }
        if !(-1.0..=1.0).contains(&self.value_shift) {
            return Err(Error::InvalidPerception(format!(
                "value shift must lie in [-1, 1], got {}",
                self.value_shift
            )));
        }
        Ok(())
    }

    /// The same discount with the shift replaced by `-|shift|`.
    pub fn assimilation(&self) -> Perception {
        Perception { wtp_discount: self.wtp_discount, value_shift: -self.value_shift.abs() }
    }

    /// The same discount with the shift replaced by `+|shift|`.
    pub fn contrast(&self) -> Perception {
        Perception { wtp_discount: self.wtp_discount, value_shift: self.value_shift.abs() }
    }
}

/// Unit costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostStructure {
    pub production: f64,
    pub remanufacturing: f64,
    pub collection: f64,
}

impl Default for CostStructure {
    fn default() -> Self {
        CostStructure { production: 200.0, remanufacturing: 80.0, collection: 40.0 }
    }
}

impl CostStructure {
    pub fn new(production: f64, remanufacturing: f64, collection: f64) -> Result<Self> {
        let costs = CostStructure { production, remanufacturing, collection };
        costs.validate()?;
        Ok(costs)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.production, self.remanufacturing, self.collection]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidCosts("costs must be finite".into()));
        }
        if self.production <= 0.0 {
            return Err(Error::InvalidCosts(format!(
                "production cost must be positive, got {}",
                self.production
            )));
        }
        if self.remanufacturing < 0.0 || self.collection < 0.0 {
            return Err(Error::InvalidCosts(
                "remanufacturing and collection costs must be non-negative".into(),
            ));
        }
        if self.reman_unit_cost() >= self.production {
            return Err(Error::InvalidCosts(format!(
                "remanufacturing plus collection ({}) must be below production cost ({})",
                self.reman_unit_cost(),
                self.production
            )));
        }
        Ok(())
    }

    /// Cost of one remanufactured unit sold by the OEM itself.
    pub fn reman_unit_cost(&self) -> f64 {
        self.remanufacturing + self.collection
    }
}

/// Two-part authorization tariff paid by the third party to the OEM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Contract {
    /// One-time authorization fee.
    pub fixed_fee: f64,
    /// Fee per remanufactured unit.
    pub unit_fee: f64,
}

impl Default for Contract {
    fn default() -> Self {
        Contract { fixed_fee: 10_000.0, unit_fee: 100.0 }
    }
}

impl Contract {
    pub fn new(fixed_fee: f64, unit_fee: f64, costs: &CostStructure) -> Result<Self> {
        let contract = Contract { fixed_fee, unit_fee };
        contract.validate(costs)?;
        Ok(contract)
    }

    pub fn validate(&self, costs: &CostStructure) -> Result<()> {
        if !(self.fixed_fee.is_finite() && self.fixed_fee >= 0.0) {
            return Err(Error::InvalidContract(format!(
                "fixed fee must be non-negative, got {}",
                self.fixed_fee
            )));
        }
        if !(self.unit_fee > 0.0 && self.unit_fee < costs.production) {
            return Err(Error::InvalidContract(format!(
                "unit fee must lie in (0, {}), got {}",
                costs.production, self.unit_fee
            )));
        }
        Ok(())
    }
}

/// Part of the price plane by which products sell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Neither product sells.
    #[serde(rename = "I")]
    Infeasible,
    #[serde(rename = "II")]
    NewOnly,
    #[serde(rename = "III")]
    RemanOnly,
    #[serde(rename = "IV")]
    Coexistence,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Infeasible => "I",
            Region::NewOnly => "II",
            Region::RemanOnly => "III",
            Region::Coexistence => "IV",
        }
    }

    /// Region implied by which demand rates are positive.
    pub fn from_rates(new: Rate, reman: Rate) -> Region {
        match (new.value() > 0.0, reman.value() > 0.0) {
            (false, false) => Region::Infeasible,
            (true, false) => Region::NewOnly,
            (false, true) => Region::RemanOnly,
            (true, true) => Region::Coexistence,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Perceived values in a two-product market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceivedValues {
    /// Unshifted new-product value.
    pub new: f64,
    pub reman: f64,
    /// New-product value after the perception shift.
    pub adjusted: f64,
}

pub fn perceived_values(params: &MarketParams, perc: &Perception) -> PerceivedValues {
    let new = params.new_value();
    let a = perc.wtp_discount;
    let b = perc.value_shift;
    PerceivedValues { new, reman: a * new, adjusted: (1.0 + b - a * b) * new }
}

/// `num / den` with a zero denominator read as "never reached" for positive numerators.
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Preference cut points: indifference between the products, and the
/// zero-utility points of the new and the remanufactured product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPoints {
    pub indifference: f64,
    pub new_zero: f64,
    pub reman_zero: f64,
}

/// Precomputed denominators of the cut points for one perception.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMarket {
    /// Value gap `(1 + b)(1 - a) dV` between adjusted new and remanufactured.
    pub gap: f64,
    pub adjusted: f64,
    pub reman: f64,
    pub size: f64,
}

impl JointMarket {
    pub fn new(params: &MarketParams, perc: &Perception) -> Self {
        let values = perceived_values(params, perc);
        let gap = (1.0 + perc.value_shift) * (1.0 - perc.wtp_discount) * values.new;
        JointMarket { gap, adjusted: values.adjusted, reman: values.reman, size: params.market_size }
    }

    pub fn cut_points(&self, p_n: f64, p_r: f64) -> CutPoints {
        CutPoints {
            indifference: ratio(p_n - p_r, self.gap),
            new_zero: ratio(p_n, self.adjusted),
            reman_zero: ratio(p_r, self.reman),
        }
    }

    /// `(new, reman)` demand rates; no admissibility check.
    pub fn rates(&self, p_n: f64, p_r: f64) -> (Rate, Rate) {
        let t = self.cut_points(p_n, p_r);
        let new = (1.0 - t.indifference.max(t.new_zero).min(1.0)) * self.size;
        let reman = (t.indifference.min(1.0) - t.reman_zero.min(1.0)).max(0.0) * self.size;
        (Rate::clamped(new, self.size), Rate::clamped(reman, self.size))
    }

    pub fn region(&self, p_n: f64, p_r: f64) -> Region {
        let t = self.cut_points(p_n, p_r);
        if t.indifference <= t.reman_zero {
            // every buyer prefers new; remanufactured never sells
            if t.new_zero < 1.0 {
                Region::NewOnly
            } else {
                Region::Infeasible
            }
        } else if t.reman_zero >= 1.0 {
            Region::Infeasible
        } else if t.indifference >= 1.0 {
            Region::RemanOnly
        } else {
            Region::Coexistence
        }
    }
}

fn check_admissible(p_n: f64, p_r: f64) -> Result<()> {
    if !(p_n.is_finite() && p_n >= 0.0) {
        return Err(Error::PriceOutOfSupport(p_n));
    }
    if !(p_r.is_finite() && p_r >= 0.0) {
        return Err(Error::PriceOutOfSupport(p_r));
    }
    if p_r > p_n {
        return Err(Error::InadmissiblePrices { p_n, p_r });
    }
    Ok(())
}

/// Demand rates `(new, reman)` when both products are on the market.
pub fn demand_rates(
    p_n: f64,
    p_r: f64,
    params: &MarketParams,
    perc: &Perception,
) -> Result<(Rate, Rate)> {
    check_admissible(p_n, p_r)?;
    Ok(JointMarket::new(params, perc).rates(p_n, p_r))
}

pub fn classify_region(
    p_n: f64,
    p_r: f64,
    params: &MarketParams,
    perc: &Perception,
) -> Result<Region> {
    check_admissible(p_n, p_r)?;
    Ok(JointMarket::new(params, perc).region(p_n, p_r))
}

/// `(1 - p / v) * market size` for a product sold alone.
pub fn single_product_rate(p: f64, value: f64, params: &MarketParams) -> Result<Rate> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(Error::PriceOutOfSupport(p));
    }
    Ok(single_rate(p, value, params.market_size))
}

pub(crate) fn single_rate(p: f64, value: f64, size: f64) -> Rate {
    Rate::clamped((1.0 - ratio(p, value).min(1.0)) * size, size)
}

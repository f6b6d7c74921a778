//! Monte Carlo market simulation.
//!
//! Each replication draws the number of arriving consumers from a Poisson
//! law, gives each a uniform valuation type, lets everyone buy the product
//! with the highest nonnegative utility, and books realized profit from
//! sales capped at the stocked quantities. Replication `i` uses the ChaCha8
//! stream `i` of the seed, so reports do not depend on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{perceived_values, Contract, CostStructure, MarketParams, Perception};
use crate::models::{Decision, Model};

/// Replications per aggregation chunk; fixed so the summation order is too.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(n)`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Realized OEM profit.
    pub mean_profit: f64,
    pub std_error: f64,
    /// Realized sales `(new, remanufactured)`.
    pub mean_sales: (f64, f64),
    /// Uncapped purchase wishes per replication.
    pub demand: (Moments, Moments),
    /// Third-party profit under Model T.
    pub tpr_profit: Option<Moments>,
    pub replications: u64,
    pub seed: u64,
}

/// One replication's realized quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub consumers: u64,
    pub demand: (u64, u64),
    pub sales: (u64, u64),
    pub oem_profit: f64,
    pub tpr_profit: f64,
}

/// Everything a replication needs, checked once.
#[derive(Debug, Clone, Copy)]
struct Market {
    size: f64,
    new: Option<(f64, f64)>,
    reman: Option<(f64, f64)>,
    quantities: (u64, u64),
    model: Model,
    costs: CostStructure,
    contract: Option<Contract>,
}

impl Market {
    fn new(
        decision: &Decision,
        params: &MarketParams,
        perc: &Perception,
        costs: &CostStructure,
        contract: Option<&Contract>,
        model: Model,
    ) -> Result<Self> {
        params.validate()?;
        perc.validate()?;
        costs.validate()?;
        decision.validate()?;
        if model == Model::N && decision.reman_price.is_some() {
            return Err(Error::InvalidDecision("model N offers no remanufactured product".into()));
        }
        let contract = match model {
            Model::T => {
                let c = contract.ok_or_else(|| Error::InvalidContract("model T needs a contract".into()))?;
                c.validate(costs)?;
                Some(*c)
            }
            _ => None,
        };
        let values = perceived_values(params, perc);
        let both = decision.new_price.is_some() && decision.reman_price.is_some();
        let new_value = if both { values.adjusted } else { values.new };
        Ok(Market {
            size: params.market_size,
            new: decision.new_price.map(|p| (p, new_value)),
            reman: decision.reman_price.map(|p| (p, values.reman)),
            quantities: decision.quantities(),
            model,
            costs: *costs,
            contract,
        })
    }

    fn replicate(&self, seed: u64, index: u64) -> Draw {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let consumers = if self.size > 0.0 {
            Poisson::new(self.size).expect("validated market size").sample(&mut rng) as u64
        } else {
            0
        };
        let mut demand = (0u64, 0u64);
        for _ in 0..consumers {
            let theta: f64 = rng.random();
            let u_n = self.new.map(|(p, v)| theta * v - p);
            let u_r = self.reman.map(|(p, v)| theta * v - p);
            match (u_n, u_r) {
                (Some(n), Some(r)) if n >= 0.0 && n >= r => demand.0 += 1,
                (Some(n), None) if n >= 0.0 => demand.0 += 1,
                (_, Some(r)) if r >= 0.0 => demand.1 += 1,
                _ => {}
            }
        }
        self.account(consumers, demand)
    }

    fn account(&self, consumers: u64, demand: (u64, u64)) -> Draw {
        let (q_n, q_r) = self.quantities;
        let sales = (demand.0.min(q_n), demand.1.min(q_r));
        let p_n = self.new.map_or(0.0, |x| x.0);
        let p_r = self.reman.map_or(0.0, |x| x.0);
        let c = self.costs;
        let new_margin = p_n * sales.0 as f64 - c.production * q_n as f64;
        let (oem, tpr) = match (self.model, self.contract) {
            (Model::T, Some(k)) if self.reman.is_some() => {
                let fees = k.fixed_fee + (k.unit_fee - c.collection) * q_r as f64;
                let tpr = p_r * sales.1 as f64 - (c.remanufacturing + k.unit_fee) * q_r as f64 - k.fixed_fee;
                (new_margin + fees, tpr)
            }
            (Model::T, _) => (new_margin, 0.0),
            _ => (new_margin + p_r * sales.1 as f64 - c.reman_unit_cost() * q_r as f64, 0.0),
        };
        Draw { consumers, demand, sales, oem_profit: oem, tpr_profit: tpr }
    }
}

/// Realized quantities of replication `index`; exposed for accounting checks.
#[allow(clippy::too_many_arguments)]
pub fn simulate_replication(
    decision: &Decision,
    params: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    contract: Option<&Contract>,
    model: Model,
    seed: u64,
    index: u64,
) -> Result<Draw> {
    Ok(Market::new(decision, params, perc, costs, contract, model)?.replicate(seed, index))
}

/// Running count, mean and centered second moment; merged pairwise.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }

    fn moments(&self) -> Moments {
        let std_error = if self.n > 1.0 { (self.m2 / (self.n - 1.0) / self.n).sqrt() } else { 0.0 };
        Moments { mean: self.mean, std_error }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    oem: Welford,
    tpr: Welford,
    demand: (Welford, Welford),
    sales: (Welford, Welford),
}

impl Tally {
    fn push(&mut self, d: &Draw) {
        self.oem.push(d.oem_profit);
        self.tpr.push(d.tpr_profit);
        self.demand.0.push(d.demand.0 as f64);
        self.demand.1.push(d.demand.1 as f64);
        self.sales.0.push(d.sales.0 as f64);
        self.sales.1.push(d.sales.1 as f64);
    }

    fn merge(self, o: Tally) -> Tally {
        Tally {
            oem: self.oem.merge(o.oem),
            tpr: self.tpr.merge(o.tpr),
            demand: (self.demand.0.merge(o.demand.0), self.demand.1.merge(o.demand.1)),
            sales: (self.sales.0.merge(o.sales.0), self.sales.1.merge(o.sales.1)),
        }
    }
}

/// Simulate `replications` independent selling seasons of `decision`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_market(
    decision: &Decision,
    params: &MarketParams,
    perc: &Perception,
    costs: &CostStructure,
    contract: Option<&Contract>,
    model: Model,
    replications: u64,
    seed: u64,
) -> Result<SimReport> {
    if replications == 0 {
        return Err(Error::NoReplications);
    }
    let market = Market::new(decision, params, perc, costs, contract, model)?;
    let chunks = replications.div_ceil(CHUNK);
    let partials: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut tally = Tally::default();
            let end = ((chunk + 1) * CHUNK).min(replications);
            for i in chunk * CHUNK..end {
                tally.push(&market.replicate(seed, i));
            }
            tally
        })
        .collect();
    let total = partials.into_iter().fold(Tally::default(), Tally::merge);
    let oem = total.oem.moments();
    Ok(SimReport {
        mean_profit: oem.mean,
        std_error: oem.std_error,
        mean_sales: (total.sales.0.mean, total.sales.1.mean),
        demand: (total.demand.0.moments(), total.demand.1.moments()),
        tpr_profit: (model == Model::T).then(|| total.tpr.moments()),
        replications,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub pass: bool,
    /// `|analytic - mean|`.
    pub deviation: f64,
    /// Allowed deviation `k * std_error`.
    pub allowed: f64,
}

impl Validation {
    /// Deviation in standard errors; infinite when the error is zero and the deviation is not.
    pub fn sigmas(&self, k_sigma: f64) -> f64 {
        let se = self.allowed / k_sigma;
        if se > 0.0 {
            self.deviation / se
        } else if self.deviation == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Whether an analytic expectation agrees with a simulated mean within `k_sigma` standard errors.
pub fn validate(analytic: f64, report: &SimReport, k_sigma: f64) -> Validation {
    let deviation = (analytic - report.mean_profit).abs();
    let allowed = k_sigma * report.std_error;
    Validation { pass: deviation <= allowed, deviation, allowed }
}

//! Poisson probabilities, cumulative mass, quantiles and partial expectations.
//!
//! The pmf uses the saddle-point form (Stirling error plus deviance), which
//! stays accurate to a few ulps for rates in the thousands where `e^{-L}`
//! alone would underflow. Cumulative mass is accumulated with Kahan
//! summation along a single canonical scan, so that the CDF and the quantile
//! function agree on every mass point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Expected count per sales period.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Rate(value))
        } else {
            Err(Error::InvalidRate(value))
        }
    }

    /// Clamp a computed rate into `[0, cap]`; absorbs round-off like `-1e-16`.
    pub fn clamped(value: f64, cap: f64) -> Self {
        if value.is_nan() || value <= 0.0 {
            Rate(0.0)
        } else {
            Rate(value.min(cap))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Stirling-series error `ln k! - (k + 1/2) ln k + k - ln sqrt(2 pi)` for k = 0..=15.
const STIRLING_ERROR: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_26,
    0.041_340_695_955_409_29,
    0.027_677_925_684_998_34,
    0.020_790_672_103_765_09,
    0.016_644_691_189_821_19,
    0.013_876_128_823_070_75,
    0.011_896_709_945_891_77,
    0.010_411_265_261_972_10,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_530,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

fn stirling_error(k: u64) -> f64 {
    if k < 16 {
        return STIRLING_ERROR[k as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let n = k as f64;
    let nn = n * n;
    if k > 500 {
        (S0 - S1 / nn) / n
    } else if k > 80 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if k > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x / m) + m - x`, evaluated by series near `x = m`.
fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `e^{-L} L^k / k!`; exactly 1 at `k = 0, L = 0`.
pub fn poisson_pmf(k: u64, rate: Rate) -> f64 {
    let lambda = rate.0;
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k == 0 {
        return (-lambda).exp();
    }
    let x = k as f64;
    (-stirling_error(k) - deviance(x, lambda)).exp() / (std::f64::consts::TAU * x).sqrt()
}

#[derive(Debug, Clone, Copy)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn new(sum: f64) -> Self {
        Kahan { sum, carry: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// First index of the canonical scan and the mass strictly below it.
fn scan_start(lambda: f64) -> (u64, f64) {
    let start = (lambda - 10.0 * lambda.sqrt()).floor();
    if start <= 0.0 {
        return (0, 0.0);
    }
    let start = start as u64;
    (start, lower_tail(start - 1, lambda))
}

/// `F(k)` for `k` far below the mean: sum downward until the terms vanish.
fn lower_tail(k: u64, lambda: f64) -> f64 {
    let mut term = poisson_pmf(k, Rate(lambda));
    let mut acc = Kahan::new(0.0);
    let mut j = k;
    loop {
        acc.add(term);
        if j == 0 || term <= acc.sum * 1e-18 {
            break;
        }
        term *= j as f64 / lambda;
        j -= 1;
    }
    acc.sum.min(1.0)
}

/// Walk `(k, F(k-1), F(k))` upward from the scan start until `stop` returns true.
///
/// Ends early once the pmf has underflowed past the mean, where `F` is
/// numerically constant.
fn scan<S>(lambda: f64, mut stop: S) -> (u64, f64, f64)
where
    S: FnMut(u64, f64, f64) -> bool,
{
    let (mut k, below) = scan_start(lambda);
    let mut term = poisson_pmf(k, Rate(lambda));
    let mut acc = Kahan::new(below);
    loop {
        let before = acc.sum;
        acc.add(term);
        let at = acc.sum.min(1.0);
        if stop(k, before.min(1.0), at) || (term == 0.0 && k as f64 > lambda) {
            return (k, before.min(1.0), at);
        }
        term *= lambda / (k + 1) as f64;
        k += 1;
    }
}

/// `F(k) = sum_{i<=k} pmf(i)`, with `F(-1) = 0`.
pub fn poisson_cdf(k: i64, rate: Rate) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let lambda = rate.0;
    if lambda == 0.0 {
        return 1.0;
    }
    let k = k as u64;
    let (start, below) = scan_start(lambda);
    if k < start {
        return lower_tail(k, lambda);
    }
    if start > 0 && k == start - 1 {
        return below;
    }
    let (reached, _, at) = scan(lambda, |j, _, _| j >= k);
    if reached < k {
        // pmf underflowed: all remaining mass is below double precision.
        return at;
    }
    at
}

/// `(F(q-1), F(q))` from one scan.
pub fn cdf_pair(q: u64, rate: Rate) -> (f64, f64) {
    let lambda = rate.0;
    if lambda == 0.0 {
        return (if q == 0 { 0.0 } else { 1.0 }, 1.0);
    }
    let (start, _) = scan_start(lambda);
    if q < start {
        let at = lower_tail(q, lambda);
        let below = if q == 0 { 0.0 } else { lower_tail(q - 1, lambda) };
        return (below, at);
    }
    let (reached, below, at) = scan(lambda, |j, _, _| j >= q);
    if reached < q {
        return (at, at);
    }
    (below, at)
}

/// A stocking point of the quantile function together with its neighbouring mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantile {
    pub k: u64,
    /// `F(k - 1)`.
    pub below: f64,
    /// `F(k)`.
    pub at: f64,
}

/// Which integer a critical fractile maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FractileRule {
    /// Smallest k with `F(k) >= y`; the optimality condition of the newsvendor.
    #[default]
    MinK,
    /// Largest k with `F(k) <= y` (the "lower integer" of the fractile), at least 0.
    Floor,
}

fn check_probability(y: f64) -> Result<()> {
    if (0.0..1.0).contains(&y) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(y))
    }
}

/// `min{k : F(k) >= y}` joined with `F(k-1)` and `F(k)`.
pub fn quantile(y: f64, rate: Rate) -> Result<Quantile> {
    check_probability(y)?;
    Ok(quantile_unchecked(y, rate))
}

pub(crate) fn quantile_unchecked(y: f64, rate: Rate) -> Quantile {
    if rate.0 == 0.0 {
        return Quantile { k: 0, below: 0.0, at: 1.0 };
    }
    let (k, below, at) = scan(rate.0, |_, _, at| at >= y);
    if below < y || k == 0 {
        return Quantile { k, below, at };
    }
    // y sits below the mass skipped by the scan start: walk down
    let mut k = k - 1;
    let mut at = below;
    let mut below = lower_tail_signed(k as i64 - 1, rate.0);
    while k > 0 && below >= y {
        k -= 1;
        at = below;
        below = lower_tail_signed(k as i64 - 1, rate.0);
    }
    Quantile { k, below, at }
}

fn lower_tail_signed(k: i64, lambda: f64) -> f64 {
    if k < 0 {
        0.0
    } else {
        lower_tail(k as u64, lambda)
    }
}

/// Quantile under either rounding rule.
pub fn fractile(y: f64, rate: Rate, rule: FractileRule) -> Result<Quantile> {
    check_probability(y)?;
    Ok(fractile_unchecked(y, rate, rule))
}

pub(crate) fn fractile_unchecked(y: f64, rate: Rate, rule: FractileRule) -> Quantile {
    match rule {
        FractileRule::MinK => quantile_unchecked(y, rate),
        FractileRule::Floor => {
            let q = quantile_unchecked(y, rate);
            if q.at > y && q.k > 0 {
                let k = q.k - 1;
                Quantile { k, below: poisson_cdf(k as i64 - 1, rate), at: q.below }
            } else {
                q
            }
        }
    }
}

/// `min{k : F(k, L) >= y}` for `0 <= y < 1`.
pub fn poisson_inv_cdf(y: f64, rate: Rate) -> Result<u64> {
    quantile(y, rate).map(|q| q.k)
}

/// `E[min(D, q)] = L F(q-1) + q (1 - F(q))` for `D ~ Poisson(L)`.
pub fn expected_min(rate: Rate, q: u64) -> f64 {
    if q == 0 || rate.0 == 0.0 {
        return 0.0;
    }
    let (below, at) = cdf_pair(q, rate);
    partial_expectation(rate, q, below, at)
}

pub(crate) fn partial_expectation(rate: Rate, q: u64, below: f64, at: f64) -> f64 {
    let lambda = rate.0;
    let qf = q as f64;
    (lambda * below + qf * (1.0 - at)).clamp(0.0, lambda.min(qf))
}

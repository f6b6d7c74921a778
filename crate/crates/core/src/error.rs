use thiserror::Error;

/// Errors raised by invalid inputs to the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("probability must lie in [0, 1), got {0}")]
    InvalidProbability(f64),
    #[error("invalid market parameters: {0}")]
    InvalidMarket(String),
    #[error("invalid perception: {0}")]
    InvalidPerception(String),
    #[error("invalid cost structure: {0}")]
    InvalidCosts(String),
    #[error("invalid contract: {0}")]
    InvalidContract(String),
    #[error("remanufactured price {p_r} exceeds new price {p_n}")]
    InadmissiblePrices { p_n: f64, p_r: f64 },
    #[error("price {0} is outside the support")]
    PriceOutOfSupport(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid decision: {0}")]
    InvalidDecision(String),
    #[error("replications must be at least 1")]
    NoReplications,
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::instrumentation::VerificationError;

/// Invalid parameters, rejected before any round is played.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("price level {0} exceeds the maximum grid level 52")]
    PriceLevel(u8),
    #[error("price {numerator}/2^{level} lies outside [0, 1]")]
    PriceRange { numerator: u64, level: u8 },
    #[error("valuation {0} must be a finite value in [0, 1)")]
    Valuation(f64),
    #[error("horizon {0} must lie in [2, 2^52]")]
    Horizon(u64),
    #[error("delta {0} must lie in (0, 1)")]
    Delta(f64),
    #[error("corruption budget {budget} exceeds horizon {horizon}")]
    BudgetExceedsHorizon { budget: u64, horizon: u64 },
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("invalid adversary: {0}")]
    Adversary(String),
}

/// Posting a price after the last round of the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("horizon exhausted")]
pub struct HorizonExhausted;

/// Failure to produce an [`EpisodeResult`](crate::EpisodeResult).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("verification failed: {0}")]
    Verification(#[from] VerificationError),
}

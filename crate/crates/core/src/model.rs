//! Domain primitives shared by every other module: exact dyadic prices,
//! valuations, feedback bits, per-round records and episode configuration.

use std::cmp::Ordering;
use std::fmt;

use crate::adversary::AdversarySpec;
use crate::error::ConfigError;
use crate::instrumentation::{LedgerSnapshot, StepSnapshot};
use crate::tree::NodeRef;

/// Largest grid level. Every price at or below this level is exact in an `f64`.
pub const MAX_LEVEL: u8 = 52;

/// Default confidence parameter for the unknown-budget commitment.
pub const DEFAULT_DELTA: f64 = 0.05;

/// A price `numerator / 2^level` in `[0, 1]`, always stored in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicPrice {
    numerator: u64,
    level: u8,
}

impl DyadicPrice {
    pub const ZERO: DyadicPrice = DyadicPrice {
        numerator: 0,
        level: 0,
    };
    pub const ONE: DyadicPrice = DyadicPrice {
        numerator: 1,
        level: 0,
    };

    pub fn new(numerator: u64, level: u8) -> Result<Self, ConfigError> {
        if level > MAX_LEVEL {
            return Err(ConfigError::PriceLevel(level));
        }
        if numerator > 1u64 << level {
            return Err(ConfigError::PriceRange { numerator, level });
        }
        let mut p = DyadicPrice { numerator, level };
        while p.level > 0 && p.numerator.is_multiple_of(2) {
            p.numerator /= 2;
            p.level -= 1;
        }
        Ok(p)
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn level(self) -> u8 {
        self.level
    }

    /// The represented value. Exact because `level <= 52`.
    pub fn value(self) -> f64 {
        self.numerator as f64 / (1u64 << self.level) as f64
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn is_one(self) -> bool {
        self.numerator == 1 && self.level == 0
    }

    fn scaled(self) -> u64 {
        self.numerator << (MAX_LEVEL - self.level)
    }
}

impl Ord for DyadicPrice {
    fn cmp(&self, other: &Self) -> Ordering {
        self.scaled().cmp(&other.scaled())
    }
}

impl PartialOrd for DyadicPrice {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Convenience for [`DyadicPrice::value`].
pub fn price_value(p: DyadicPrice) -> f64 {
    p.value()
}

/// The buyers' common valuation, a finite real in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Valuation(f64);

impl Valuation {
    pub fn new(value: f64) -> Result<Self, ConfigError> {
        if value.is_finite() && (0.0..1.0).contains(&value) {
            Ok(Valuation(value))
        } else {
            Err(ConfigError::Valuation(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// One observed or truthful feedback bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Feedback {
    pub sale: bool,
}

impl Feedback {
    pub const SALE: Feedback = Feedback { sale: true };
    pub const NO_SALE: Feedback = Feedback { sale: false };

    pub fn flipped(self) -> Feedback {
        Feedback { sale: !self.sale }
    }
}

impl From<bool> for Feedback {
    fn from(sale: bool) -> Self {
        Feedback { sale }
    }
}

/// A sale happens iff the posted price does not exceed the valuation.
pub fn true_feedback(p: DyadicPrice, v: Valuation) -> Feedback {
    Feedback {
        sale: p.value() <= v.value(),
    }
}

/// Everything that happened in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: u64,
    pub price: DyadicPrice,
    pub true_feedback: Feedback,
    pub observed_feedback: Feedback,
    pub corrupted: bool,
    /// Revenue from the truthful comparison; corruption only touches feedback.
    pub revenue: f64,
}

impl RoundRecord {
    /// Per-round regret `v* - revenue`.
    pub fn regret(&self, v: Valuation) -> f64 {
        v.value() - self.revenue
    }
}

/// Seller-side algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmId {
    CommitKnown,
    CommitUnknown,
    MajorityVote,
    PlainBinarySearch,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 4] = [
        AlgorithmId::CommitKnown,
        AlgorithmId::CommitUnknown,
        AlgorithmId::MajorityVote,
        AlgorithmId::PlainBinarySearch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::CommitKnown => "commit-known",
            AlgorithmId::CommitUnknown => "commit-unknown",
            AlgorithmId::MajorityVote => "majority-vote",
            AlgorithmId::PlainBinarySearch => "plain-bsearch",
        }
    }

    /// Whether this is the backtracking meta-algorithm (as opposed to a baseline).
    pub fn is_meta(self) -> bool {
        matches!(self, AlgorithmId::CommitKnown | AlgorithmId::CommitUnknown)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AlgorithmId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| ConfigError::UnknownAlgorithm(s.to_string()))
    }
}

/// Full specification of one T-round interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig {
    pub horizon: u64,
    pub valuation: Valuation,
    pub corruption_budget: u64,
    pub delta: f64,
    pub algorithm: AlgorithmId,
    pub adversary: AdversarySpec,
    pub seed: u64,
}

impl EpisodeConfig {
    pub fn new(
        horizon: u64,
        valuation: Valuation,
        corruption_budget: u64,
        algorithm: AlgorithmId,
        adversary: AdversarySpec,
        seed: u64,
    ) -> Self {
        EpisodeConfig {
            horizon,
            valuation,
            corruption_budget,
            delta: DEFAULT_DELTA,
            algorithm,
            adversary,
            seed,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon < 2 || self.horizon > 1u64 << MAX_LEVEL {
            return Err(ConfigError::Horizon(self.horizon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ConfigError::Delta(self.delta));
        }
        if self.corruption_budget > self.horizon {
            return Err(ConfigError::BudgetExceedsHorizon {
                budget: self.corruption_budget,
                horizon: self.horizon,
            });
        }
        Valuation::new(self.valuation.value())?;
        Ok(())
    }
}

/// Full trace of one episode plus the instrumentation ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub rounds: Vec<RoundRecord>,
    pub total_regret: f64,
    pub corruptions_used: u64,
    pub ledger: LedgerSnapshot,
    pub step_trace: Vec<StepSnapshot>,
    /// Final per-leaf check counters, keyed by leaf index. Empty for baselines.
    pub leaf_counters: Vec<(u64, u64)>,
    /// Node the seller occupied when the horizon ran out.
    pub final_node: NodeRef,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64, l: u8) -> DyadicPrice {
        DyadicPrice::new(n, l).unwrap()
    }

    #[test]
    fn price_values_are_exact() {
        assert_eq!(price_value(p(1, 1)), 0.5);
        assert_eq!(price_value(p(0, 0)), 0.0);
        assert_eq!(price_value(p(3, 2)), 0.75);
        assert_eq!(price_value(p(1, 52)), 2f64.powi(-52));
    }

    #[test]
    fn prices_compare_by_reduced_fraction() {
        assert_eq!(p(2, 2), p(1, 1));
        assert_eq!(p(0, 7), DyadicPrice::ZERO);
        assert_eq!(p(8, 3), DyadicPrice::ONE);
        assert!(p(3, 2) > p(1, 1));
        assert!(p(1, 3) < p(1, 2));
    }

    #[test]
    fn price_construction_rejects_out_of_range() {
        assert!(DyadicPrice::new(5, 2).is_err());
        assert!(DyadicPrice::new(1, 53).is_err());
        assert!(DyadicPrice::new(4, 2).is_ok());
    }

    #[test]
    fn sale_iff_price_at_most_valuation() {
        let v = |x| Valuation::new(x).unwrap();
        assert!(true_feedback(p(1, 1), v(0.7)).sale);
        assert!(true_feedback(p(1, 1), v(0.5)).sale);
        assert!(!true_feedback(p(3, 2), v(0.5)).sale);
    }

    #[test]
    fn valuation_must_lie_in_half_open_unit_interval() {
        assert!(Valuation::new(1.0).is_err());
        assert!(Valuation::new(-0.1).is_err());
        assert!(Valuation::new(f64::NAN).is_err());
        assert!(Valuation::new(0.0).is_ok());
        assert!(Valuation::new(0.999).is_ok());
    }

    #[test]
    fn config_validation() {
        let base = EpisodeConfig::new(
            8,
            Valuation::new(0.7).unwrap(),
            0,
            AlgorithmId::CommitKnown,
            AdversarySpec::NoCorruption,
            1,
        );
        assert!(base.validate().is_ok());
        assert!(EpisodeConfig {
            horizon: 1,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(EpisodeConfig {
            corruption_budget: 9,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(base.clone().with_delta(1.0).validate().is_err());
        assert!(base.with_delta(0.0).validate().is_err());
    }

    #[test]
    fn algorithm_ids_round_trip_through_names() {
        for a in AlgorithmId::ALL {
            assert_eq!(a.name().parse::<AlgorithmId>().unwrap(), a);
        }
        assert!("bogus".parse::<AlgorithmId>().is_err());
    }
}

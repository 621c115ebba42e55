//! The round-by-round interaction protocol between seller, buyers and the
//! corrupting adversary.

use crate::adversary::Adversary;
use crate::error::HorizonExhausted;
use crate::model::{true_feedback, DyadicPrice, Feedback, RoundRecord, Valuation};

/// Whether the adversary is prepared to spend a corruption this round.
/// Decided from the history alone, before the round's price is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdversaryIntent {
    pub willing: bool,
}

impl AdversaryIntent {
    pub const WILLING: AdversaryIntent = AdversaryIntent { willing: true };
    pub const UNWILLING: AdversaryIntent = AdversaryIntent { willing: false };
}

/// The only view of the market a seller gets: post a price, observe a bit.
pub trait PriceChannel {
    fn post(&mut self, price: DyadicPrice) -> Result<Feedback, HorizonExhausted>;
}

/// Episode-confined environment state.
pub struct Env {
    horizon: u64,
    valuation: Valuation,
    budget: u64,
    budget_remaining: u64,
    history: Vec<RoundRecord>,
    adversary: Box<dyn Adversary>,
}

impl Env {
    pub fn new(
        horizon: u64,
        valuation: Valuation,
        budget: u64,
        adversary: Box<dyn Adversary>,
    ) -> Self {
        Env {
            horizon,
            valuation,
            budget,
            budget_remaining: budget,
            history: Vec::with_capacity(horizon.min(1 << 20) as usize),
            adversary,
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn valuation(&self) -> Valuation {
        self.valuation
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn budget_remaining(&self) -> u64 {
        self.budget_remaining
    }

    /// Index of the next round to be played; `T + 1` once exhausted.
    pub fn current_round(&self) -> u64 {
        self.history.len() as u64 + 1
    }

    pub fn rounds_played(&self) -> u64 {
        self.history.len() as u64
    }

    pub fn is_exhausted(&self) -> bool {
        self.rounds_played() >= self.horizon
    }

    pub fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    pub fn into_history(self) -> Vec<RoundRecord> {
        self.history
    }

    pub fn corruptions_used(&self) -> u64 {
        self.budget - self.budget_remaining
    }

    /// Plays one round. The adversary first commits to (un)willingness from
    /// the history, then, if willing and funded, picks the observed bit
    /// knowing the price and the truth.
    pub fn post_price(&mut self, price: DyadicPrice) -> Result<Feedback, HorizonExhausted> {
        if self.is_exhausted() {
            return Err(HorizonExhausted);
        }
        let intent = self.adversary.intent(&self.history);
        let truth = true_feedback(price, self.valuation);
        let observed = if intent.willing && self.budget_remaining > 0 {
            self.adversary.corrupt(&self.history, price, truth)
        } else {
            truth
        };
        let corrupted = observed != truth;
        if corrupted {
            self.budget_remaining -= 1;
        }
        self.history.push(RoundRecord {
            t: self.current_round(),
            price,
            true_feedback: truth,
            observed_feedback: observed,
            corrupted,
            revenue: if truth.sale { price.value() } else { 0.0 },
        });
        Ok(observed)
    }
}

impl PriceChannel for Env {
    fn post(&mut self, price: DyadicPrice) -> Result<Feedback, HorizonExhausted> {
        self.post_price(price)
    }
}

/// Error for [`episode_regret`] when the history does not cover the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("history has {actual} rounds, expected {expected}")]
pub struct LengthMismatch {
    pub expected: u64,
    pub actual: u64,
}

/// `T * v* - sum of revenues` over a complete history.
pub fn episode_regret(
    history: &[RoundRecord],
    v: Valuation,
    horizon: u64,
) -> Result<f64, LengthMismatch> {
    if history.len() as u64 != horizon {
        return Err(LengthMismatch {
            expected: horizon,
            actual: history.len() as u64,
        });
    }
    let revenue: f64 = history.iter().map(|r| r.revenue).sum();
    Ok(horizon as f64 * v.value() - revenue)
}

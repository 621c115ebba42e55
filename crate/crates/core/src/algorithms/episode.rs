//! Runs one seller against one adversary for the full horizon.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adversary::AdversaryContext;
use crate::env::Env;
use crate::error::EpisodeError;
use crate::instrumentation::{Ledger, StepObservation};
use crate::model::{AlgorithmId, EpisodeConfig, EpisodeResult};
use crate::tree::TreeParams;

use super::baselines::SearchThenCommit;
use super::meta::{CommitKnown, CommitUnknown, MetaSearcher, Seller};

/// RNG stream for the seller's exploration coins.
pub const SELLER_STREAM: u64 = 1;

/// Instantiates the configured seller. Only the unknown-budget commitment
/// consumes randomness.
pub fn build_seller(config: &EpisodeConfig) -> Box<dyn Seller> {
    let tree = TreeParams::for_horizon(config.horizon);
    match config.algorithm {
        AlgorithmId::CommitKnown => Box::new(MetaSearcher::new(
            tree,
            CommitKnown {
                budget: config.corruption_budget,
            },
        )),
        AlgorithmId::CommitUnknown => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(SELLER_STREAM);
            Box::new(MetaSearcher::new(
                tree,
                CommitUnknown::new(config.delta, config.horizon, rng),
            ))
        }
        AlgorithmId::MajorityVote => Box::new(SearchThenCommit::majority_vote(
            tree,
            config.corruption_budget,
        )),
        AlgorithmId::PlainBinarySearch => Box::new(SearchThenCommit::plain(tree)),
    }
}

/// [`run_episode_with`] with runtime verification on.
pub fn run_episode(config: &EpisodeConfig) -> Result<EpisodeResult, EpisodeError> {
    run_episode_with(config, true)
}

pub fn run_episode_with(
    config: &EpisodeConfig,
    verify: bool,
) -> Result<EpisodeResult, EpisodeError> {
    config.validate()?;
    let tree = TreeParams::for_horizon(config.horizon);
    let adversary = config.adversary.build(&AdversaryContext {
        valuation: config.valuation,
        tree,
        budget: config.corruption_budget,
        seed: config.seed,
    })?;
    let mut env = Env::new(
        config.horizon,
        config.valuation,
        config.corruption_budget,
        adversary,
    );
    let mut seller = build_seller(config);
    let mut ledger = Ledger::new(tree, config.valuation, config.algorithm.is_meta(), verify);
    ledger.initial_check()?;

    while !env.is_exhausted() {
        let before = seller.current();
        let counter_before = seller.leaf_counter(before);
        let start = env.history().len();
        let outcome = seller.step(&mut env);
        let after = seller.current();
        ledger.record_step(&StepObservation {
            before,
            after,
            outcome,
            counter_before,
            counter_after: seller.leaf_counter(before),
            rounds: &env.history()[start..],
        })?;
        if outcome.is_err() {
            break;
        }
    }

    let corruptions_used = env.corruptions_used();
    let (ledger, step_trace) = ledger.finish(corruptions_used)?;
    let final_node = seller.current();
    let leaf_counters = seller.leaf_counters();
    let rounds = env.into_history();
    let revenue: f64 = rounds.iter().map(|r| r.revenue).sum();
    Ok(EpisodeResult {
        total_regret: config.horizon as f64 * config.valuation.value() - revenue,
        rounds,
        corruptions_used,
        ledger,
        step_trace,
        leaf_counters,
        final_node,
    })
}

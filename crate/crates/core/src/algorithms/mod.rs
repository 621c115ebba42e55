//! Sellers: the backtracking meta-algorithm, its two commitment procedures,
//! the search-then-commit baselines, and the episode driver.

mod baselines;
mod budget;
mod episode;
mod meta;

pub use baselines::{majority_vote_search, plain_binary_search, SearchThenCommit};
pub use budget::{coarse_query_bound, rivest_query_budget};
pub use episode::{build_seller, run_episode, run_episode_with, SELLER_STREAM};
pub use meta::{
    commit_known_step, commit_unknown_step, left_check_passes, meta_step, right_check_passes,
    safety_check, CheckResult, CommitKnown, CommitStrategy, CommitUnknown, MetaSearcher,
    SearchState, Seller, StepKind, StepOutcome, StepResult, TruncatedStep,
};

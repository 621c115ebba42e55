//! Dynamic pricing against a single buyer whose binary feedback may be
//! corrupted by a budgeted adversary.
//!
//! The seller runs binary search over a dyadic interval tree, guarding each
//! step with a safety check on the node's endpoints and backtracking when a
//! check fails. At a leaf it commits through one of two procedures: one that
//! knows the corruption budget and one that does not.

pub mod adversary;
pub mod algorithms;
pub mod env;
pub mod error;
pub mod harness;
pub mod instrumentation;
pub mod model;
pub mod oracle;
pub mod tree;

pub use adversary::{Adversary, AdversaryContext, AdversarySpec};
pub use algorithms::{run_episode, run_episode_with, Seller};
pub use env::{Env, PriceChannel};
pub use error::{ConfigError, EpisodeError, HorizonExhausted};
pub use instrumentation::{final_report, BoundId, BoundKind, BoundReport, LedgerSnapshot};
pub use model::{
    AlgorithmId, DyadicPrice, EpisodeConfig, EpisodeResult, Feedback, RoundRecord, Valuation,
};
pub use tree::{leaf_of, tree_distance, NodeRef, TreeParams};

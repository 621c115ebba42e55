//! Backtracking binary search with safety checks and a pluggable
//! commitment procedure at the leaves.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::env::PriceChannel;
use crate::error::HorizonExhausted;
use crate::model::{DyadicPrice, Feedback};
use crate::tree::{NodeRef, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckResult {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    DescendLeft,
    DescendRight,
    Backtrack,
    CommitContinue,
    CommitFail,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::DescendLeft => "descend-left",
            StepKind::DescendRight => "descend-right",
            StepKind::Backtrack => "backtrack",
            StepKind::CommitContinue => "commit-continue",
            StepKind::CommitFail => "commit-fail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub kind: StepKind,
    pub rounds_consumed: u32,
}

/// A step cut short by the horizon after `rounds_consumed` posts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedStep {
    pub rounds_consumed: u32,
}

pub type StepResult = Result<StepOutcome, TruncatedStep>;

/// Wraps a channel and counts posts so a truncated step knows its length.
pub(crate) struct Counted<'a> {
    inner: &'a mut dyn PriceChannel,
    pub(crate) posts: u32,
}

impl<'a> Counted<'a> {
    pub(crate) fn new(inner: &'a mut dyn PriceChannel) -> Self {
        Counted { inner, posts: 0 }
    }

    pub(crate) fn truncated(&self) -> TruncatedStep {
        TruncatedStep {
            rounds_consumed: self.posts,
        }
    }
}

impl PriceChannel for Counted<'_> {
    fn post(&mut self, price: DyadicPrice) -> Result<Feedback, HorizonExhausted> {
        let fb = self.inner.post(price)?;
        self.posts += 1;
        Ok(fb)
    }
}

/// The check at `L` passes on a sale, and by default when `L = 0`.
pub fn left_check_passes(left: DyadicPrice, observed: Feedback) -> bool {
    left.is_zero() || observed.sale
}

/// The check at `R` passes on a no-sale, and by default when `R = 1`.
pub fn right_check_passes(right: DyadicPrice, observed: Feedback) -> bool {
    right.is_one() || !observed.sale
}

fn endpoint_checks(
    left: DyadicPrice,
    right: DyadicPrice,
    ch: &mut dyn PriceChannel,
) -> Result<CheckResult, HorizonExhausted> {
    // Both prices are posted even at default-pass endpoints.
    let sigma_l = ch.post(left)?;
    let sigma_r = ch.post(right)?;
    Ok(
        if left_check_passes(left, sigma_l) && right_check_passes(right, sigma_r) {
            CheckResult::Pass
        } else {
            CheckResult::Fail
        },
    )
}

/// Posts `L` then `R`; fails on a no-sale at `L` or a sale at `R`.
pub fn safety_check(
    node: NodeRef,
    ch: &mut dyn PriceChannel,
) -> Result<CheckResult, HorizonExhausted> {
    let (l, r) = node.endpoints();
    endpoint_checks(l, r, ch)
}

/// Current position of the search: the explicit root-to-current path plus
/// the per-leaf check counters, which are never reset.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    tree: TreeParams,
    path: Vec<NodeRef>,
    leaf_counters: BTreeMap<u64, u64>,
}

impl SearchState {
    pub fn new(tree: TreeParams) -> Self {
        let mut path = Vec::with_capacity(tree.depth as usize + 1);
        path.push(NodeRef::ROOT);
        SearchState {
            tree,
            path,
            leaf_counters: BTreeMap::new(),
        }
    }

    pub fn tree(&self) -> TreeParams {
        self.tree
    }

    pub fn current(&self) -> NodeRef {
        *self.path.last().expect("path always holds the root")
    }

    pub fn path(&self) -> &[NodeRef] {
        &self.path
    }

    pub fn counter(&self, leaf: NodeRef) -> u64 {
        self.leaf_counters.get(&leaf.index).copied().unwrap_or(0)
    }

    pub fn counters(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.leaf_counters.iter().map(|(&k, &v)| (k, v))
    }

    fn counter_mut(&mut self, leaf: NodeRef) -> &mut u64 {
        self.leaf_counters.entry(leaf.index).or_insert(0)
    }

    fn descend(&mut self, right: bool) {
        let cur = self.current();
        debug_assert!(!self.tree.is_leaf(cur));
        self.path.push(if right {
            cur.right_child()
        } else {
            cur.left_child()
        });
    }

    fn backtrack(&mut self) {
        assert!(self.path.len() > 1, "backtrack requested at the root");
        self.path.pop();
    }
}

/// What a commitment procedure does with one block of rounds at a leaf.
pub trait CommitStrategy {
    fn commit_block(
        &mut self,
        leaf: NodeRef,
        counter: &mut u64,
        ch: &mut dyn PriceChannel,
    ) -> Result<CheckResult, HorizonExhausted>;
}

/// Known budget `C`: check both endpoints until the leaf has passed `C + 1`
/// checks, then post `L` forever.
#[derive(Debug, Clone, Copy)]
pub struct CommitKnown {
    pub budget: u64,
}

impl CommitStrategy for CommitKnown {
    fn commit_block(
        &mut self,
        leaf: NodeRef,
        counter: &mut u64,
        ch: &mut dyn PriceChannel,
    ) -> Result<CheckResult, HorizonExhausted> {
        let (l, r) = leaf.endpoints();
        if *counter <= self.budget {
            let res = endpoint_checks(l, r, ch)?;
            if res == CheckResult::Pass {
                *counter += 1;
            }
            Ok(res)
        } else {
            ch.post(l)?;
            Ok(CheckResult::Pass)
        }
    }
}

/// Unknown budget: two-round blocks posting `L`, then `R` with probability
/// `min(4 ln(T/δ) / s, 1)` and `L` otherwise.
#[derive(Debug, Clone)]
pub struct CommitUnknown {
    log_term: f64,
    rng: ChaCha8Rng,
}

impl CommitUnknown {
    pub fn new(delta: f64, horizon: u64, rng: ChaCha8Rng) -> Self {
        CommitUnknown {
            log_term: 4.0 * (horizon as f64 / delta).ln(),
            rng,
        }
    }

    /// Exploration probability after the counter reached `s >= 1`.
    pub fn exploration_probability(&self, s: u64) -> f64 {
        (self.log_term / s as f64).min(1.0)
    }
}

impl CommitStrategy for CommitUnknown {
    fn commit_block(
        &mut self,
        leaf: NodeRef,
        counter: &mut u64,
        ch: &mut dyn PriceChannel,
    ) -> Result<CheckResult, HorizonExhausted> {
        let (l, r) = leaf.endpoints();
        if !left_check_passes(l, ch.post(l)?) {
            return Ok(CheckResult::Fail);
        }
        *counter += 1;
        let explore = self.rng.random_bool(self.exploration_probability(*counter));
        let passed = if explore {
            right_check_passes(r, ch.post(r)?)
        } else {
            left_check_passes(l, ch.post(l)?)
        };
        Ok(if passed {
            CheckResult::Pass
        } else {
            CheckResult::Fail
        })
    }
}

/// Anything that can be driven step by step against a price channel.
pub trait Seller {
    fn current(&self) -> NodeRef;

    fn step(&mut self, ch: &mut dyn PriceChannel) -> StepResult;

    /// Check counter of `leaf` (zero for sellers without counters).
    fn leaf_counter(&self, _leaf: NodeRef) -> u64 {
        0
    }

    fn leaf_counters(&self) -> Vec<(u64, u64)> {
        Vec::new()
    }
}

/// The meta-algorithm with commitment procedure `S`.
#[derive(Debug, Clone)]
pub struct MetaSearcher<S> {
    state: SearchState,
    commit: S,
}

impl<S: CommitStrategy> MetaSearcher<S> {
    pub fn new(tree: TreeParams, commit: S) -> Self {
        MetaSearcher {
            state: SearchState::new(tree),
            commit,
        }
    }

    pub fn state(&self) -> &SearchState {
        &self.state
    }
}

/// One search step: a safety check plus midpoint query at an internal node,
/// or one commitment block at a leaf. Failures pop back to the parent.
pub fn meta_step<S: CommitStrategy>(
    state: &mut SearchState,
    ch: &mut dyn PriceChannel,
    commit: &mut S,
) -> StepResult {
    let mut ch = Counted::new(ch);
    let node = state.current();
    let kind = if !state.tree.is_leaf(node) {
        match safety_check(node, &mut ch) {
            Err(HorizonExhausted) => return Err(ch.truncated()),
            Ok(CheckResult::Fail) => {
                state.backtrack();
                StepKind::Backtrack
            }
            Ok(CheckResult::Pass) => {
                let sigma_m = ch.post(node.midpoint()).map_err(|_| ch.truncated())?;
                state.descend(sigma_m.sale);
                if sigma_m.sale {
                    StepKind::DescendRight
                } else {
                    StepKind::DescendLeft
                }
            }
        }
    } else {
        let counter = state.counter_mut(node);
        match commit.commit_block(node, counter, &mut ch) {
            Err(HorizonExhausted) => return Err(ch.truncated()),
            Ok(CheckResult::Fail) => {
                state.backtrack();
                StepKind::CommitFail
            }
            Ok(CheckResult::Pass) => StepKind::CommitContinue,
        }
    };
    Ok(StepOutcome {
        kind,
        rounds_consumed: ch.posts,
    })
}

/// [`meta_step`] at a leaf with [`CommitKnown`].
pub fn commit_known_step(
    state: &mut SearchState,
    ch: &mut dyn PriceChannel,
    budget: u64,
) -> StepResult {
    assert!(state.tree.is_leaf(state.current()), "commit outside a leaf");
    meta_step(state, ch, &mut CommitKnown { budget })
}

/// [`meta_step`] at a leaf with [`CommitUnknown`].
pub fn commit_unknown_step(
    state: &mut SearchState,
    ch: &mut dyn PriceChannel,
    delta: f64,
    horizon: u64,
    rng: &mut ChaCha8Rng,
) -> StepResult {
    assert!(state.tree.is_leaf(state.current()), "commit outside a leaf");
    let mut commit = CommitUnknown::new(delta, horizon, rng.clone());
    let res = meta_step(state, ch, &mut commit);
    *rng = commit.rng;
    res
}

impl<S: CommitStrategy> Seller for MetaSearcher<S> {
    fn current(&self) -> NodeRef {
        self.state.current()
    }

    fn step(&mut self, ch: &mut dyn PriceChannel) -> StepResult {
        meta_step(&mut self.state, ch, &mut self.commit)
    }

    fn leaf_counter(&self, leaf: NodeRef) -> u64 {
        self.state.counter(leaf)
    }

    fn leaf_counters(&self) -> Vec<(u64, u64)> {
        self.state.counters().collect()
    }
}

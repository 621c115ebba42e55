//! Search-then-commit baselines without safety checks or backtracking.

use crate::env::PriceChannel;
use crate::error::HorizonExhausted;
use crate::tree::{NodeRef, TreeParams};

use super::meta::{Counted, Seller, StepKind, StepOutcome, StepResult};

fn majority_descent(
    node: NodeRef,
    repetitions: u64,
    ch: &mut dyn PriceChannel,
) -> Result<bool, HorizonExhausted> {
    let m = node.midpoint();
    let mut sales = 0;
    for _ in 0..repetitions {
        if ch.post(m)?.sale {
            sales += 1;
        }
    }
    Ok(2 * sales > repetitions)
}

/// Binary search where every midpoint is asked `2C + 1` times and the
/// majority decides. Returns the leaf it lands on.
pub fn majority_vote_search(
    tree: TreeParams,
    budget: u64,
    ch: &mut dyn PriceChannel,
) -> Result<NodeRef, HorizonExhausted> {
    let mut node = NodeRef::ROOT;
    while !tree.is_leaf(node) {
        node = if majority_descent(node, 2 * budget + 1, ch)? {
            node.right_child()
        } else {
            node.left_child()
        };
    }
    Ok(node)
}

/// One query per level, no checks.
pub fn plain_binary_search(
    tree: TreeParams,
    ch: &mut dyn PriceChannel,
) -> Result<NodeRef, HorizonExhausted> {
    majority_vote_search(tree, 0, ch)
}

/// Seller wrapper: search with `repetitions` votes per level, then post the
/// left endpoint of the reached leaf for every remaining round.
#[derive(Debug, Clone)]
pub struct SearchThenCommit {
    tree: TreeParams,
    repetitions: u64,
    node: NodeRef,
}

impl SearchThenCommit {
    pub fn majority_vote(tree: TreeParams, budget: u64) -> Self {
        SearchThenCommit {
            tree,
            repetitions: 2 * budget + 1,
            node: NodeRef::ROOT,
        }
    }

    pub fn plain(tree: TreeParams) -> Self {
        Self::majority_vote(tree, 0)
    }

    /// The committed leaf once the search phase is over.
    pub fn committed_leaf(&self) -> Option<NodeRef> {
        self.tree.is_leaf(self.node).then_some(self.node)
    }
}

impl Seller for SearchThenCommit {
    fn current(&self) -> NodeRef {
        self.node
    }

    fn step(&mut self, ch: &mut dyn PriceChannel) -> StepResult {
        let mut ch = Counted::new(ch);
        let kind = if self.tree.is_leaf(self.node) {
            ch.post(self.node.left()).map_err(|_| ch.truncated())?;
            StepKind::CommitContinue
        } else {
            let right = majority_descent(self.node, self.repetitions, &mut ch)
                .map_err(|_| ch.truncated())?;
            if right {
                self.node = self.node.right_child();
                StepKind::DescendRight
            } else {
                self.node = self.node.left_child();
                StepKind::DescendLeft
            }
        };
        Ok(StepOutcome {
            kind,
            rounds_consumed: ch.posts,
        })
    }
}

//! Ground-truth observer for episodes.
//!
//! The ledger sees the valuation and the corruption flags, which the seller
//! never does. It tracks the potential (tree distance from the current node
//! to the correct leaf), classifies every search step as honest or
//! corrupted, tallies commitment blocks per leaf, and, when verification is
//! on, asserts the per-step potential rules after each complete step:
//!
//! * an honest step at an internal node moves exactly one node closer;
//! * a corrupted step at an internal node moves at most one node away;
//! * a failed commitment moves one node closer from a wrong leaf and one node
//!   away from the correct leaf.
//!
//! Steps cut short by the horizon are tallied but never asserted on.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algorithms::{StepKind, StepResult};
use crate::model::{AlgorithmId, EpisodeConfig, EpisodeResult, RoundRecord, Valuation};
use crate::tree::{leaf_of, tree_distance, NodeRef, TreeParams};

/// Position of a leaf relative to the valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeafClass {
    /// Contains the valuation.
    Star,
    /// Entirely above: `L > v*`.
    Plus,
    /// Entirely below: `R <= v*`.
    Minus,
}

impl LeafClass {
    pub fn of(leaf: NodeRef, v: Valuation) -> LeafClass {
        let (l, r) = leaf.endpoints();
        if l.value() > v.value() {
            LeafClass::Plus
        } else if r.value() <= v.value() {
            LeafClass::Minus
        } else {
            LeafClass::Star
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafTally {
    pub class: LeafClass,
    /// Separate stays on the leaf; re-entry needs a detour through the tree.
    pub visits: u64,
    /// Commitment blocks spent on the leaf (a truncated block counts).
    pub blocks: u64,
    /// Blocks with at least one corrupted round.
    pub corrupted_blocks: u64,
    /// Regret accumulated over the leaf's commitment rounds.
    pub regret: f64,
}

/// Cumulative counters after some number of steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerSnapshot {
    pub step_index: u64,
    pub potential: u32,
    pub honest_nonleaf_steps: u64,
    pub corrupted_nonleaf_steps: u64,
    pub correct_leaf_fails: u64,
    pub wrong_leaf_fails: u64,
    /// Keyed by leaf index.
    pub per_leaf: BTreeMap<u64, LeafTally>,
    pub search_regret: f64,
    pub commit_regret: f64,
    /// Rounds belonging to a step cut off by the horizon.
    pub truncated_rounds: u64,
}

impl LedgerSnapshot {
    pub fn leaf_regret(&self) -> f64 {
        self.per_leaf.values().map(|t| t.regret).sum()
    }

    pub fn class_regret(&self, class: LeafClass) -> f64 {
        self.per_leaf
            .values()
            .filter(|t| t.class == class)
            .map(|t| t.regret)
            .sum()
    }
}

/// One entry of the per-step trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSnapshot {
    pub step_index: u64,
    pub node: NodeRef,
    pub next: NodeRef,
    /// `None` for a step cut off by the horizon.
    pub kind: Option<StepKind>,
    pub rounds: u32,
    pub honest: bool,
    pub potential_before: u32,
    pub potential_after: u32,
    pub honest_nonleaf_steps: u64,
    pub corrupted_nonleaf_steps: u64,
    pub correct_leaf_fails: u64,
    pub wrong_leaf_fails: u64,
}

/// Which runtime check tripped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    InitialPotential,
    HonestSearchStepProgress,
    CorruptedSearchStepDrift,
    CommitFailureMove,
    CommitContinueStays,
    SearchStepLength,
    CounterMonotone,
    CorruptedStepsWithinCorruptions,
    LeafRegretIdentity,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::InitialPotential => "initial potential equals tree depth",
            Invariant::HonestSearchStepProgress => {
                "honest internal step moves exactly one node closer to the correct leaf"
            }
            Invariant::CorruptedSearchStepDrift => {
                "corrupted internal step moves at most one node away from the correct leaf"
            }
            Invariant::CommitFailureMove => {
                "failed commitment moves closer from a wrong leaf and away from the correct one"
            }
            Invariant::CommitContinueStays => "continuing commitment keeps the node",
            Invariant::SearchStepLength => "internal step uses at most three rounds",
            Invariant::CounterMonotone => "leaf counters never decrease",
            Invariant::CorruptedStepsWithinCorruptions => {
                "corrupted internal steps do not outnumber corrupted rounds"
            }
            Invariant::LeafRegretIdentity => "per-leaf regret sums to commitment regret",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("step {step}: {invariant} violated ({detail})")]
pub struct VerificationError {
    pub step: u64,
    pub invariant: Invariant,
    pub detail: String,
}

/// What the driver saw during one step.
#[derive(Debug, Clone, Copy)]
pub struct StepObservation<'a> {
    pub before: NodeRef,
    pub after: NodeRef,
    pub outcome: StepResult,
    pub counter_before: u64,
    pub counter_after: u64,
    pub rounds: &'a [RoundRecord],
}

pub struct Ledger {
    tree: TreeParams,
    star: NodeRef,
    valuation: Valuation,
    /// Potential rules only hold for the backtracking meta-algorithm.
    meta: bool,
    verify: bool,
    snap: LedgerSnapshot,
    trace: Vec<StepSnapshot>,
}

impl Ledger {
    pub fn new(tree: TreeParams, valuation: Valuation, meta: bool, verify: bool) -> Self {
        let star = leaf_of(valuation, tree);
        Ledger {
            tree,
            star,
            valuation,
            meta,
            verify,
            snap: LedgerSnapshot {
                step_index: 0,
                potential: tree_distance(NodeRef::ROOT, star),
                honest_nonleaf_steps: 0,
                corrupted_nonleaf_steps: 0,
                correct_leaf_fails: 0,
                wrong_leaf_fails: 0,
                per_leaf: BTreeMap::new(),
                search_regret: 0.0,
                commit_regret: 0.0,
                truncated_rounds: 0,
            },
            trace: Vec::new(),
        }
    }

    pub fn star(&self) -> NodeRef {
        self.star
    }

    pub fn snapshot(&self) -> &LedgerSnapshot {
        &self.snap
    }

    pub fn initial_check(&self) -> Result<(), VerificationError> {
        self.expect(
            self.snap.potential == self.tree.depth as u32,
            Invariant::InitialPotential,
            || {
                format!(
                    "potential {} at depth {}",
                    self.snap.potential, self.tree.depth
                )
            },
        )
    }

    fn expect(
        &self,
        ok: bool,
        invariant: Invariant,
        detail: impl FnOnce() -> String,
    ) -> Result<(), VerificationError> {
        if ok || !self.verify {
            Ok(())
        } else {
            Err(VerificationError {
                step: self.snap.step_index,
                invariant,
                detail: detail(),
            })
        }
    }

    pub fn record_step(
        &mut self,
        obs: &StepObservation<'_>,
    ) -> Result<&LedgerSnapshot, VerificationError> {
        let phi_before = tree_distance(obs.before, self.star);
        let phi_after = tree_distance(obs.after, self.star);
        debug_assert_eq!(phi_before, self.snap.potential);
        let honest = obs.rounds.iter().all(|r| !r.corrupted);
        let regret: f64 = obs.rounds.iter().map(|r| r.regret(self.valuation)).sum();
        let moved = || {
            format!(
                "{} -> {}, potential {phi_before} -> {phi_after}",
                obs.before, obs.after
            )
        };

        if self.tree.is_leaf(obs.before) {
            let class = LeafClass::of(obs.before, self.valuation);
            let fresh = self.trace.last().is_none_or(|prev| prev.node != obs.before);
            let tally = self
                .snap
                .per_leaf
                .entry(obs.before.index)
                .or_insert(LeafTally {
                    class,
                    visits: 0,
                    blocks: 0,
                    corrupted_blocks: 0,
                    regret: 0.0,
                });
            tally.visits += u64::from(fresh);
            tally.blocks += 1;
            tally.corrupted_blocks += u64::from(!honest);
            tally.regret += regret;
            self.snap.commit_regret += regret;
            if self.meta {
                self.expect(
                    obs.counter_after >= obs.counter_before,
                    Invariant::CounterMonotone,
                    || format!("{} -> {}", obs.counter_before, obs.counter_after),
                )?;
            }
            match obs.outcome {
                Ok(out) if out.kind == StepKind::CommitFail => {
                    let expected = if obs.before == self.star {
                        self.snap.correct_leaf_fails += 1;
                        phi_before + 1
                    } else {
                        self.snap.wrong_leaf_fails += 1;
                        phi_before.wrapping_sub(1)
                    };
                    if self.meta {
                        self.expect(phi_after == expected, Invariant::CommitFailureMove, moved)?;
                    }
                }
                Ok(_) => self.expect(
                    phi_after == phi_before,
                    Invariant::CommitContinueStays,
                    moved,
                )?,
                Err(t) => self.snap.truncated_rounds += t.rounds_consumed as u64,
            }
        } else {
            self.snap.search_regret += regret;
            match obs.outcome {
                Ok(out) => {
                    if honest {
                        self.snap.honest_nonleaf_steps += 1;
                    } else {
                        self.snap.corrupted_nonleaf_steps += 1;
                    }
                    if self.meta {
                        self.expect(
                            out.rounds_consumed <= 3,
                            Invariant::SearchStepLength,
                            || format!("{} rounds", out.rounds_consumed),
                        )?;
                        if honest {
                            self.expect(
                                phi_after + 1 == phi_before,
                                Invariant::HonestSearchStepProgress,
                                moved,
                            )?;
                        } else {
                            self.expect(
                                phi_after <= phi_before + 1,
                                Invariant::CorruptedSearchStepDrift,
                                moved,
                            )?;
                        }
                    }
                }
                Err(t) => self.snap.truncated_rounds += t.rounds_consumed as u64,
            }
        }

        self.trace.push(StepSnapshot {
            step_index: self.snap.step_index,
            node: obs.before,
            next: obs.after,
            kind: obs.outcome.ok().map(|o| o.kind),
            rounds: obs.rounds.len() as u32,
            honest,
            potential_before: phi_before,
            potential_after: phi_after,
            honest_nonleaf_steps: self.snap.honest_nonleaf_steps,
            corrupted_nonleaf_steps: self.snap.corrupted_nonleaf_steps,
            correct_leaf_fails: self.snap.correct_leaf_fails,
            wrong_leaf_fails: self.snap.wrong_leaf_fails,
        });
        self.snap.potential = phi_after;
        self.snap.step_index += 1;
        Ok(&self.snap)
    }

    /// Episode-level identities, checked once the horizon is spent.
    pub fn finish(
        self,
        corruptions_used: u64,
    ) -> Result<(LedgerSnapshot, Vec<StepSnapshot>), VerificationError> {
        self.expect(
            self.snap.corrupted_nonleaf_steps <= corruptions_used,
            Invariant::CorruptedStepsWithinCorruptions,
            || {
                format!(
                    "{} steps, {corruptions_used} rounds",
                    self.snap.corrupted_nonleaf_steps
                )
            },
        )?;
        let leaf_sum = self.snap.leaf_regret();
        let tol = 1e-9 * (1.0 + self.snap.commit_regret.abs());
        self.expect(
            (leaf_sum - self.snap.commit_regret).abs() <= tol,
            Invariant::LeafRegretIdentity,
            || format!("{leaf_sum} vs {}", self.snap.commit_regret),
        )?;
        Ok((self.snap, self.trace))
    }
}

/// Named regret and counter bounds evaluated on a finished episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundId {
    /// `N_F + H <= D + K + N_T`: the final potential is non-negative.
    PotentialBalance,
    /// `N_F <= D + C + N_T`.
    WrongLeafFails,
    /// `R_T <= sum R(l) + 3D + 6C + 3 N_T`.
    SearchOverhead,
    /// `N_T <= corruptions used`.
    CorrectLeafFails,
    /// Known budget: `sum R(l) <= 2 N_F + 6C + 3`.
    KnownCommitRegret,
    /// Known budget: `R_T <= 5D + 19C + 3`.
    KnownTotalRegret,
    /// Unknown budget: regret on leaves above `v*` is `<= 2 N_F + 2C`.
    UpperLeafRegret,
    /// Unknown budget: `R(l*) <= 1 + 20 ln T ln(T/δ)` with probability `1 - δ/3`.
    CorrectLeafRegret,
    /// Unknown budget: regret on leaves below `v*` is `<= 12C + 12 N_F` w.p. `1 - δ/3`.
    LowerLeafRegret,
    /// Unknown budget: every visited lower leaf has `N_l <= ceil(e (C_l + 1))` w.p. `1 - δ/3`.
    LowerLeafBlocks,
    /// Unknown budget: `N_l <= ceil(e (C_l + V_l))` with `V_l` the number of
    /// separate visits, w.p. `1 - δ/3`. Each earlier visit ended in a failed
    /// block, which the survival argument treats like a corrupted one.
    LowerLeafBlocksPerVisit,
    /// Unknown budget: `R_T <= 1 + 20 ln T ln(T/δ) + 17D + 51C` w.p. `1 - δ`.
    UnknownTotalRegret,
}

impl BoundId {
    pub const ALL: [BoundId; 12] = [
        BoundId::PotentialBalance,
        BoundId::WrongLeafFails,
        BoundId::SearchOverhead,
        BoundId::CorrectLeafFails,
        BoundId::KnownCommitRegret,
        BoundId::KnownTotalRegret,
        BoundId::UpperLeafRegret,
        BoundId::CorrectLeafRegret,
        BoundId::LowerLeafRegret,
        BoundId::LowerLeafBlocks,
        BoundId::LowerLeafBlocksPerVisit,
        BoundId::UnknownTotalRegret,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::PotentialBalance => "potential_balance",
            BoundId::WrongLeafFails => "wrong_leaf_fails",
            BoundId::SearchOverhead => "search_overhead",
            BoundId::CorrectLeafFails => "correct_leaf_fails",
            BoundId::KnownCommitRegret => "known_commit_regret",
            BoundId::KnownTotalRegret => "known_total_regret",
            BoundId::UpperLeafRegret => "upper_leaf_regret",
            BoundId::CorrectLeafRegret => "correct_leaf_regret",
            BoundId::LowerLeafRegret => "lower_leaf_regret",
            BoundId::LowerLeafBlocks => "lower_leaf_blocks",
            BoundId::LowerLeafBlocksPerVisit => "lower_leaf_blocks_per_visit",
            BoundId::UnknownTotalRegret => "unknown_total_regret",
        }
    }

    pub fn kind(self) -> BoundKind {
        match self {
            BoundId::CorrectLeafRegret
            | BoundId::LowerLeafRegret
            | BoundId::LowerLeafBlocks
            | BoundId::LowerLeafBlocksPerVisit
            | BoundId::UnknownTotalRegret => BoundKind::Probabilistic,
            _ => BoundKind::Deterministic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Must hold on every episode.
    Deterministic,
    /// Holds with high probability; frequencies are checked across trials.
    Probabilistic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub bound: BoundId,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl BoundCheck {
    fn new(bound: BoundId, lhs: f64, rhs: f64) -> Self {
        // absorbs float error of summing per-round regrets
        let tol = 1e-9 * (1.0 + rhs.abs());
        BoundCheck {
            bound,
            lhs,
            rhs,
            satisfied: lhs <= rhs + tol,
        }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn get(&self, id: BoundId) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.bound == id)
    }

    pub fn deterministic_violations(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.bound.kind() == BoundKind::Deterministic && !c.satisfied)
            .count()
    }

    pub fn probabilistic_failures(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.bound.kind() == BoundKind::Probabilistic && !c.satisfied)
            .count()
    }
}

/// `1 + 20 ln T ln(T/δ)`.
pub fn correct_leaf_regret_bound(horizon: u64, delta: f64) -> f64 {
    let t = horizon as f64;
    1.0 + 20.0 * t.ln() * (t / delta).ln()
}

/// `5D + 19C + 3`.
pub fn known_total_regret_bound(depth: u8, budget: u64) -> f64 {
    5.0 * depth as f64 + 19.0 * budget as f64 + 3.0
}

/// `1 + 20 ln T ln(T/δ) + 17D + 51C`.
pub fn unknown_total_regret_bound(horizon: u64, depth: u8, budget: u64, delta: f64) -> f64 {
    correct_leaf_regret_bound(horizon, delta) + 17.0 * depth as f64 + 51.0 * budget as f64
}

/// `ceil(e (h + 1))`.
pub fn lower_leaf_block_cap(corrupted_blocks: u64) -> u64 {
    (std::f64::consts::E * (corrupted_blocks + 1) as f64).ceil() as u64
}

/// Evaluates every bound that applies to the episode's algorithm. `log T`
/// is taken as the tree depth `D = ceil(log2 T)`; `C` is the configured
/// budget.
pub fn final_report(result: &EpisodeResult, config: &EpisodeConfig) -> BoundReport {
    let mut checks = Vec::new();
    if !config.algorithm.is_meta() {
        return BoundReport { checks };
    }
    let l = &result.ledger;
    let d = crate::tree::TreeParams::for_horizon(config.horizon).depth;
    let df = d as f64;
    let c = config.corruption_budget as f64;
    let nt = l.correct_leaf_fails as f64;
    let nf = l.wrong_leaf_fails as f64;
    let leaf_regret = l.leaf_regret();

    checks.push(BoundCheck::new(
        BoundId::PotentialBalance,
        nf + l.honest_nonleaf_steps as f64,
        df + l.corrupted_nonleaf_steps as f64 + nt,
    ));
    checks.push(BoundCheck::new(BoundId::WrongLeafFails, nf, df + c + nt));
    checks.push(BoundCheck::new(
        BoundId::SearchOverhead,
        result.total_regret,
        leaf_regret + 3.0 * df + 6.0 * c + 3.0 * nt,
    ));
    checks.push(BoundCheck::new(
        BoundId::CorrectLeafFails,
        nt,
        result.corruptions_used as f64,
    ));

    match config.algorithm {
        AlgorithmId::CommitKnown => {
            checks.push(BoundCheck::new(
                BoundId::KnownCommitRegret,
                leaf_regret,
                2.0 * nf + 6.0 * c + 3.0,
            ));
            checks.push(BoundCheck::new(
                BoundId::KnownTotalRegret,
                result.total_regret,
                known_total_regret_bound(d, config.corruption_budget),
            ));
        }
        AlgorithmId::CommitUnknown => {
            checks.push(BoundCheck::new(
                BoundId::UpperLeafRegret,
                l.class_regret(LeafClass::Plus),
                2.0 * nf + 2.0 * c,
            ));
            checks.push(BoundCheck::new(
                BoundId::CorrectLeafRegret,
                l.class_regret(LeafClass::Star),
                correct_leaf_regret_bound(config.horizon, config.delta),
            ));
            checks.push(BoundCheck::new(
                BoundId::LowerLeafRegret,
                l.class_regret(LeafClass::Minus),
                12.0 * c + 12.0 * nf,
            ));
            // Worst lower leaf by slack; vacuous when none was visited.
            let worst = |extra: fn(&LeafTally) -> u64| {
                l.per_leaf
                    .values()
                    .filter(|t| t.class == LeafClass::Minus)
                    .map(|t| {
                        (
                            t.blocks as f64,
                            lower_leaf_block_cap(t.corrupted_blocks + extra(t)) as f64,
                        )
                    })
                    .min_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
                    .unwrap_or((0.0, 0.0))
            };
            let (n, cap) = worst(|_| 0);
            checks.push(BoundCheck::new(BoundId::LowerLeafBlocks, n, cap));
            let (n, cap) = worst(|t| t.visits - 1);
            checks.push(BoundCheck::new(BoundId::LowerLeafBlocksPerVisit, n, cap));
            checks.push(BoundCheck::new(
                BoundId::UnknownTotalRegret,
                result.total_regret,
                unknown_total_regret_bound(
                    config.horizon,
                    d,
                    config.corruption_budget,
                    config.delta,
                ),
            ));
        }
        _ => unreachable!("baselines return early"),
    }
    BoundReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{StepOutcome, TruncatedStep};
    use crate::model::{DyadicPrice, Feedback};

    fn v(x: f64) -> Valuation {
        Valuation::new(x).unwrap()
    }

    fn round(price: DyadicPrice, corrupted: bool, vstar: f64) -> RoundRecord {
        let sale = price.value() <= vstar;
        RoundRecord {
            t: 1,
            price,
            true_feedback: Feedback::from(sale),
            observed_feedback: Feedback::from(sale ^ corrupted),
            corrupted,
            revenue: if sale { price.value() } else { 0.0 },
        }
    }

    fn ok(kind: StepKind, rounds: u32) -> StepResult {
        Ok(StepOutcome {
            kind,
            rounds_consumed: rounds,
        })
    }

    #[test]
    fn leaf_classes() {
        let leaf = |i| NodeRef::new(2, i);
        assert_eq!(LeafClass::of(leaf(2), v(0.7)), LeafClass::Star);
        assert_eq!(LeafClass::of(leaf(3), v(0.7)), LeafClass::Plus);
        assert_eq!(LeafClass::of(leaf(1), v(0.7)), LeafClass::Minus);
        assert_eq!(LeafClass::of(leaf(1), v(0.5)), LeafClass::Minus);
        assert_eq!(LeafClass::of(leaf(2), v(0.5)), LeafClass::Star);
    }

    #[test]
    fn initial_potential_is_depth() {
        let ledger = Ledger::new(TreeParams::new(5), v(0.3), true, true);
        assert_eq!(ledger.snapshot().potential, 5);
        ledger.initial_check().unwrap();
    }

    #[test]
    fn honest_step_that_does_not_progress_is_flagged() {
        let tree = TreeParams::new(3);
        let mut ledger = Ledger::new(tree, v(0.7), true, true);
        let p = |n, l| DyadicPrice::new(n, l).unwrap();
        let rounds = [
            round(p(0, 0), false, 0.7),
            round(p(1, 0), false, 0.7),
            round(p(1, 1), false, 0.7),
        ];
        // Pretend an honest step descended left at the root.
        let err = ledger
            .record_step(&StepObservation {
                before: NodeRef::ROOT,
                after: NodeRef::new(1, 0),
                outcome: ok(StepKind::DescendLeft, 3),
                counter_before: 0,
                counter_after: 0,
                rounds: &rounds,
            })
            .unwrap_err();
        assert_eq!(err.invariant, Invariant::HonestSearchStepProgress);
        assert!(err.to_string().contains("one node closer"));
    }

    #[test]
    fn corrupted_step_may_move_away() {
        let tree = TreeParams::new(3);
        let mut ledger = Ledger::new(tree, v(0.7), true, true);
        let p = |n, l| DyadicPrice::new(n, l).unwrap();
        let rounds = [
            round(p(0, 0), false, 0.7),
            round(p(1, 0), false, 0.7),
            round(p(1, 1), true, 0.7),
        ];
        let snap = ledger
            .record_step(&StepObservation {
                before: NodeRef::ROOT,
                after: NodeRef::new(1, 0),
                outcome: ok(StepKind::DescendLeft, 3),
                counter_before: 0,
                counter_after: 0,
                rounds: &rounds,
            })
            .unwrap();
        assert_eq!(snap.potential, 4);
        assert_eq!(snap.corrupted_nonleaf_steps, 1);
    }

    #[test]
    fn commit_failure_at_correct_leaf_raises_potential() {
        let tree = TreeParams::new(2);
        let star = NodeRef::new(2, 2);
        let mut ledger = Ledger::new(tree, v(0.7), true, true);
        // jump the ledger's view to the leaf; potential bookkeeping follows obs.before
        ledger.snap.potential = 0;
        let rounds = [
            round(star.left(), true, 0.7),
            round(star.right(), false, 0.7),
        ];
        let snap = ledger
            .record_step(&StepObservation {
                before: star,
                after: star.parent(),
                outcome: ok(StepKind::CommitFail, 2),
                counter_before: 0,
                counter_after: 0,
                rounds: &rounds,
            })
            .unwrap();
        assert_eq!(snap.correct_leaf_fails, 1);
        assert_eq!(snap.potential, 1);
        let tally = snap.per_leaf[&2];
        assert_eq!((tally.blocks, tally.corrupted_blocks), (1, 1));
        assert!((tally.regret - 0.9).abs() < 1e-12);
    }

    #[test]
    fn truncated_steps_are_exempt() {
        let tree = TreeParams::new(3);
        let mut ledger = Ledger::new(tree, v(0.7), true, true);
        let rounds = [round(DyadicPrice::ZERO, false, 0.7)];
        let snap = ledger
            .record_step(&StepObservation {
                before: NodeRef::ROOT,
                after: NodeRef::ROOT,
                outcome: Err(TruncatedStep { rounds_consumed: 1 }),
                counter_before: 0,
                counter_after: 0,
                rounds: &rounds,
            })
            .unwrap();
        assert_eq!(snap.truncated_rounds, 1);
        assert_eq!(snap.honest_nonleaf_steps, 0);
    }

    #[test]
    fn unverified_ledger_records_without_failing() {
        let tree = TreeParams::new(3);
        let mut ledger = Ledger::new(tree, v(0.7), true, false);
        let rounds = [round(DyadicPrice::ZERO, false, 0.7)];
        ledger
            .record_step(&StepObservation {
                before: NodeRef::ROOT,
                after: NodeRef::new(1, 0),
                outcome: ok(StepKind::DescendLeft, 1),
                counter_before: 0,
                counter_after: 0,
                rounds: &rounds,
            })
            .unwrap();
    }

    #[test]
    fn bound_constants() {
        assert_eq!(known_total_regret_bound(3, 0), 18.0);
        assert_eq!(known_total_regret_bound(10, 2), 91.0);
        let t = 1024.0f64;
        assert!(
            (correct_leaf_regret_bound(1024, 0.05) - (1.0 + 20.0 * t.ln() * (t / 0.05).ln())).abs()
                < 1e-9
        );
        assert_eq!(lower_leaf_block_cap(0), 3);
        assert_eq!(lower_leaf_block_cap(1), 6);
        assert_eq!(lower_leaf_block_cap(2), 9);
    }
}

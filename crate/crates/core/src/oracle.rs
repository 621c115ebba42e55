//! Brute-force reference implementations, written independently of the
//! code they cross-check.
//!
//! * [`bfs_distance`] materializes the interval tree as an explicit graph.
//! * [`budget_scan`] scans query counts one by one with Pascal's rule.
//! * [`exhaustive_adversary_check`] enumerates every flip placement within
//!   the budget on small horizons and replays the deterministic sellers
//!   against each, with its own price channel and its own bookkeeping.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::algorithms::{majority_vote_search, CommitKnown, MetaSearcher, Seller, StepKind};
use crate::env::PriceChannel;
use crate::error::HorizonExhausted;
use crate::model::{DyadicPrice, Feedback, RoundRecord};
use crate::tree::{NodeRef, TreeParams};

/// Largest depth [`bfs_distance`] accepts.
pub const BFS_MAX_DEPTH: u8 = 6;

/// Heap numbering: root 1, children of `i` are `2i` and `2i + 1`.
fn heap_id(node: NodeRef) -> usize {
    (1usize << node.depth) + node.index as usize
}

/// Shortest-path length between two nodes of the depth-`depth` tree, found
/// by breadth-first search over an explicit adjacency list.
pub fn bfs_distance(a: NodeRef, b: NodeRef, depth: u8) -> u32 {
    assert!(depth <= BFS_MAX_DEPTH, "bfs oracle is for small trees");
    assert!(a.depth <= depth && b.depth <= depth);
    let size = 1usize << (depth + 1);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    for id in 2..size {
        adj[id].push(id / 2);
        adj[id / 2].push(id);
    }
    let (src, dst) = (heap_id(a), heap_id(b));
    let mut dist = vec![u32::MAX; size];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        if u == dst {
            return dist[u];
        }
        for &w in &adj[u] {
            if dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    unreachable!("the tree is connected")
}

/// Linear scan for the least `Q'` with
/// `2^(Q' - C) > n * sum_{i <= C} binom(Q' - C, i)`.
///
/// Keeps row `m` of Pascal's triangle truncated to `C + 1` entries and
/// advances `m` one at a time. Answers are non-decreasing in `n`, so
/// queries in increasing `n` reuse the position reached by the last one.
#[derive(Debug, Clone)]
pub struct BudgetScanner {
    c: usize,
    m: u64,
    row: Vec<BigUint>,
    power: BigUint,
    last_n: u64,
}

impl BudgetScanner {
    pub fn new(c: u64) -> Self {
        let c = c as usize;
        let mut row = vec![BigUint::zero(); c + 1];
        row[0] = BigUint::one();
        BudgetScanner {
            c,
            m: 0,
            row,
            power: BigUint::one(),
            last_n: 0,
        }
    }

    fn advance(&mut self) {
        for i in (1..=self.c).rev() {
            let prev = self.row[i - 1].clone();
            self.row[i] += prev;
        }
        self.power <<= 1;
        self.m += 1;
    }

    fn holds(&self, n: u64) -> bool {
        let sum: BigUint = self.row.iter().sum();
        self.power > sum * n
    }

    pub fn query(&mut self, n: u64) -> u64 {
        if n < self.last_n {
            *self = BudgetScanner::new(self.c as u64);
        }
        self.last_n = n;
        while !self.holds(n) {
            self.advance();
        }
        self.m + self.c as u64
    }
}

pub fn budget_scan(n: u64, c: u64) -> u64 {
    BudgetScanner::new(c).query(n)
}

/// Deterministic sellers covered by the exhaustive check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleTarget {
    CommitKnown,
    MajorityVote,
}

impl fmt::Display for OracleTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleTarget::CommitKnown => "commit-known",
            OracleTarget::MajorityVote => "majority-vote",
        })
    }
}

/// Channel that answers honestly except on a fixed set of round indices,
/// where it flips the truthful bit.
struct FlipChannel<'a> {
    horizon: u64,
    valuation: f64,
    flips: &'a BTreeSet<u64>,
    rounds: Vec<RoundRecord>,
}

impl PriceChannel for FlipChannel<'_> {
    fn post(&mut self, price: DyadicPrice) -> Result<Feedback, HorizonExhausted> {
        let t = self.rounds.len() as u64;
        if t >= self.horizon {
            return Err(HorizonExhausted);
        }
        let sale = price.value() <= self.valuation;
        let corrupted = self.flips.contains(&t);
        self.rounds.push(RoundRecord {
            t: t + 1,
            price,
            true_feedback: Feedback { sale },
            observed_feedback: Feedback {
                sale: sale ^ corrupted,
            },
            corrupted,
            revenue: if sale { price.value() } else { 0.0 },
        });
        Ok(Feedback {
            sale: sale ^ corrupted,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub target: OracleTarget,
    pub horizon: u64,
    pub budget: u64,
    pub valuation: f64,
    /// Zero-based rounds whose feedback was flipped.
    pub flips: Vec<u64>,
    pub violation: String,
    pub trace: Vec<RoundRecord>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} T={} C={} v*={} flips={:?}: {}",
            self.target, self.horizon, self.budget, self.valuation, self.flips, self.violation
        )?;
        for r in &self.trace {
            writeln!(
                f,
                "  t={:<3} p={:<8} true={} seen={}{}",
                r.t,
                r.price,
                u8::from(r.true_feedback.sale),
                u8::from(r.observed_feedback.sale),
                if r.corrupted { " *" } else { "" }
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Verdict {
    /// (horizon, budget, valuation) triples examined.
    pub instances: u64,
    /// Flip patterns replayed across all instances.
    pub patterns: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    fn merge(&mut self, other: Verdict) {
        self.instances += other.instances;
        self.patterns += other.patterns;
        self.counterexamples.extend(other.counterexamples);
    }
}

/// Valuations `k / 2^D` and `(k + 1/2) / 2^D` for every leaf `k`.
pub fn grid_valuations(depth: u8) -> Vec<f64> {
    let n = 1u64 << depth;
    (0..n)
        .flat_map(|k| [k as f64 / n as f64, (k as f64 + 0.5) / n as f64])
        .collect()
}

/// Every subset of `0..horizon` with at most `budget` elements.
fn flip_sets(horizon: u64, budget: u64) -> Vec<BTreeSet<u64>> {
    let mut out = vec![BTreeSet::new()];
    let mut frontier = vec![BTreeSet::new()];
    for _ in 0..budget {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.iter().next_back().map_or(0, |&x| x + 1);
            for t in start..horizon {
                let mut s: BTreeSet<u64> = set.clone();
                s.insert(t);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn ceil_log2(t: u64) -> u8 {
    let mut d = 0;
    while (1u64 << d) < t {
        d += 1;
    }
    d
}

/// Replays one flip pattern; returns a description of the first violated
/// property, if any.
fn replay(
    target: OracleTarget,
    horizon: u64,
    budget: u64,
    valuation: f64,
    flips: &BTreeSet<u64>,
) -> (Option<String>, Vec<RoundRecord>) {
    let depth = ceil_log2(horizon);
    let star_index = ((valuation * (1u64 << depth) as f64).floor() as u64).min((1u64 << depth) - 1);
    let tree = TreeParams::new(depth);
    match target {
        OracleTarget::MajorityVote => {
            // The vote needs (2C+1) D rounds, which may exceed T at these sizes.
            let rounds = (2 * budget + 1) * depth as u64;
            let mut ch = FlipChannel {
                horizon: rounds,
                valuation,
                flips,
                rounds: Vec::new(),
            };
            let found =
                majority_vote_search(tree, budget, &mut ch).expect("enough rounds for the vote");
            let flipped = ch.rounds.iter().filter(|r| r.corrupted).count() as u64;
            let violation = if flipped > budget {
                Some(format!("{flipped} flips exceed budget"))
            } else if found.depth != depth || found.index != star_index {
                Some(format!(
                    "returned leaf {found}, correct leaf index {star_index}"
                ))
            } else {
                None
            };
            (violation, ch.rounds)
        }
        OracleTarget::CommitKnown => {
            let mut seller = MetaSearcher::new(tree, CommitKnown { budget });
            let mut ch = FlipChannel {
                horizon,
                valuation,
                flips,
                rounds: Vec::new(),
            };
            let (mut wrong_fails, mut correct_fails) = (0u64, 0u64);
            let mut violation = None;
            while (ch.rounds.len() as u64) < horizon && violation.is_none() {
                let before = seller.current();
                let outcome = seller.step(&mut ch);
                if let Ok(out) = outcome {
                    if out.kind == StepKind::CommitFail {
                        if before.index == star_index {
                            correct_fails += 1;
                        } else {
                            wrong_fails += 1;
                        }
                    }
                }
                for (leaf, s) in seller.leaf_counters() {
                    if leaf != star_index && s > budget {
                        violation = Some(format!(
                            "wrong leaf {leaf} reached {s} passed checks, entering true commitment"
                        ));
                    }
                }
                if outcome.is_err() {
                    break;
                }
            }
            let flipped = ch.rounds.iter().filter(|r| r.corrupted).count() as u64;
            if violation.is_none() && flipped > budget {
                violation = Some(format!("{flipped} flips exceed budget"));
            }
            if violation.is_none() && wrong_fails > depth as u64 + budget + correct_fails {
                violation = Some(format!(
                    "{wrong_fails} wrong-leaf failures exceed D + C + {correct_fails}"
                ));
            }
            (violation, ch.rounds)
        }
    }
}

/// Runs every flip pattern with at most `budget` flips against `target` at
/// one horizon and every grid valuation.
pub fn exhaustive_instance(target: OracleTarget, horizon: u64, budget: u64) -> Verdict {
    assert!(
        (2..=16).contains(&horizon) && budget <= 2,
        "exhaustive regime only"
    );
    let depth = ceil_log2(horizon);
    let span = match target {
        OracleTarget::CommitKnown => horizon,
        OracleTarget::MajorityVote => (2 * budget + 1) * depth as u64,
    };
    let patterns = flip_sets(span, budget);
    let mut verdict = Verdict::default();
    for valuation in grid_valuations(depth) {
        verdict.instances += 1;
        for flips in &patterns {
            verdict.patterns += 1;
            let (violation, trace) = replay(target, horizon, budget, valuation, flips);
            if let Some(violation) = violation {
                verdict.counterexamples.push(Counterexample {
                    target,
                    horizon,
                    budget,
                    valuation,
                    flips: flips.iter().copied().collect(),
                    violation,
                    trace,
                });
            }
        }
    }
    verdict
}

/// Both deterministic sellers, every `T` in `2..=max_horizon`, every
/// `C <= max_budget`.
pub fn exhaustive_adversary_check(max_horizon: u64, max_budget: u64) -> Verdict {
    let mut verdict = Verdict::default();
    for target in [OracleTarget::CommitKnown, OracleTarget::MajorityVote] {
        for horizon in 2..=max_horizon {
            for budget in 0..=max_budget {
                verdict.merge(exhaustive_instance(target, horizon, budget));
            }
        }
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfs_small_cases() {
        assert_eq!(bfs_distance(NodeRef::ROOT, NodeRef::new(3, 5), 3), 3);
        assert_eq!(bfs_distance(NodeRef::new(2, 1), NodeRef::new(2, 1), 3), 0);
        assert_eq!(bfs_distance(NodeRef::new(2, 1), NodeRef::new(2, 2), 2), 4);
        assert_eq!(bfs_distance(NodeRef::new(2, 0), NodeRef::new(2, 1), 2), 2);
    }

    #[test]
    fn scan_values() {
        assert_eq!(budget_scan(2, 0), 2);
        assert_eq!(budget_scan(16, 0), 5);
        // m = 3: 8 > 2 * 4 fails; m = 4: 16 > 2 * 5 holds; Q' = m + C.
        assert_eq!(budget_scan(2, 1), 5);
    }

    #[test]
    fn scanner_restarts_on_smaller_n() {
        let mut s = BudgetScanner::new(2);
        let big = s.query(1000);
        assert_eq!(s.query(2), budget_scan(2, 2));
        assert_eq!(s.query(1000), big);
    }

    #[test]
    fn flip_set_counts() {
        assert_eq!(flip_sets(8, 0).len(), 1);
        assert_eq!(flip_sets(8, 1).len(), 9);
        assert_eq!(flip_sets(16, 2).len(), 1 + 16 + 120);
    }

    #[test]
    fn grid_has_two_points_per_leaf() {
        assert_eq!(
            grid_valuations(2),
            vec![0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875]
        );
    }

    #[test]
    fn no_budget_means_one_pattern_per_valuation() {
        let v = exhaustive_instance(OracleTarget::CommitKnown, 8, 0);
        assert_eq!(v.instances, 16);
        assert_eq!(v.patterns, 16);
        assert!(v.passed());
    }

    #[test]
    fn one_flip_at_horizon_eight() {
        let v = exhaustive_instance(OracleTarget::CommitKnown, 8, 1);
        assert_eq!(v.patterns, 16 * 9);
        assert!(v.passed(), "{}", v.counterexamples[0]);
    }
}

use std::sync::{Arc, Mutex};

use proptest::prelude::*;

use robust_pricing::adversary::{Adversary, AdversaryContext, AdversarySpec};
use robust_pricing::algorithms::{rivest_query_budget, CommitKnown, MetaSearcher, Seller};
use robust_pricing::env::{AdversaryIntent, Env};
use robust_pricing::oracle::{bfs_distance, budget_scan};
use robust_pricing::{
    final_report, leaf_of, run_episode, tree_distance, AlgorithmId, DyadicPrice, EpisodeConfig,
    Feedback, NodeRef, RoundRecord, TreeParams, Valuation,
};

fn adversary_strategy() -> impl Strategy<Value = AdversarySpec> {
    prop_oneof![
        Just(AdversarySpec::NoCorruption),
        (0.0f64..0.99).prop_map(|x| AdversarySpec::MimicLowInstance {
            v_low: Valuation::new(x).unwrap(),
            burn: None,
        }),
        prop_oneof![-3i64..0, 1i64..4].prop_map(|offset| AdversarySpec::LeafTrap { offset }),
        Just(AdversarySpec::CommitStall),
        (0.0f64..=1.0).prop_map(|p| AdversarySpec::RandomBudget {
            flip_probability: p
        }),
    ]
}

fn algorithm_strategy() -> impl Strategy<Value = AlgorithmId> {
    prop::sample::select(AlgorithmId::ALL.to_vec())
}

#[test]
fn tree_distance_matches_bfs_for_all_pairs_up_to_depth_six() {
    for depth in 0..=6u8 {
        let nodes: Vec<NodeRef> = (0..=depth)
            .flat_map(|d| (0..1u64 << d).map(move |k| NodeRef::new(d, k)))
            .collect();
        for &a in &nodes {
            for &b in &nodes {
                assert_eq!(tree_distance(a, b), bfs_distance(a, b, depth), "{a} {b}");
            }
        }
    }
}

/// Wraps an adversary and checks the protocol it is driven with: one
/// `intent` per round on the full history, and `corrupt` only on the
/// history its `intent` saw.
struct Recording {
    inner: Box<dyn Adversary>,
    intents: Arc<Mutex<Vec<bool>>>,
}

impl Adversary for Recording {
    fn intent(&mut self, history: &[RoundRecord]) -> AdversaryIntent {
        let intent = self.inner.intent(history);
        let mut log = self.intents.lock().unwrap();
        assert_eq!(history.len(), log.len(), "one intent per round");
        log.push(intent.willing);
        intent
    }

    fn corrupt(
        &mut self,
        history: &[RoundRecord],
        price: DyadicPrice,
        truth: Feedback,
    ) -> Feedback {
        let log = self.intents.lock().unwrap();
        assert_eq!(history.len() + 1, log.len(), "corrupt follows its intent");
        assert!(log[history.len()], "corrupt only after a willing intent");
        drop(log);
        self.inner.corrupt(history, price, truth)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn node_endpoints_round_trip(depth in 0u8..52, raw in any::<u64>()) {
        let index = if depth == 0 { 0 } else { raw % (1u64 << depth) };
        let node = NodeRef::new(depth, index);
        let (l, r) = node.endpoints();
        prop_assert!(l < r);
        prop_assert!(l < node.midpoint() && node.midpoint() < r);
        prop_assert_eq!(node.left_child().parent(), node);
        prop_assert_eq!(node.right_child().parent(), node);
        prop_assert_eq!(node.left_child().left(), l);
        prop_assert_eq!(node.right_child().right(), r);
        prop_assert_eq!(node.left_child().right(), node.midpoint());
        prop_assert_eq!(tree_distance(node, node), 0);
        prop_assert_eq!(tree_distance(NodeRef::ROOT, node), depth as u32);
    }

    #[test]
    fn leaf_of_contains_the_valuation(x in 0.0f64..1.0, depth in 1u8..=20) {
        let val = Valuation::new(x).unwrap();
        let leaf = leaf_of(val, TreeParams::new(depth));
        prop_assert_eq!(leaf.depth, depth);
        prop_assert!(leaf.contains(val));
    }

    #[test]
    fn budget_formula_matches_scan(n in 2u64..100_000, c in 0u64..24) {
        prop_assert_eq!(rivest_query_budget(n, c), budget_scan(n, c));
    }

    #[test]
    fn budget_is_never_exceeded_and_bounds_hold(
        horizon in 2u64..3000,
        budget_frac in 0.0f64..0.1,
        x in 0.0f64..1.0,
        alg in algorithm_strategy(),
        adv in adversary_strategy(),
        seed in any::<u64>(),
    ) {
        let budget = (budget_frac * horizon as f64) as u64;
        let cfg = EpisodeConfig::new(horizon, Valuation::new(x).unwrap(), budget, alg, adv, seed);
        match run_episode(&cfg) {
            Ok(res) => {
                prop_assert_eq!(res.rounds.len() as u64, horizon);
                let flips = res.rounds.iter().filter(|r| r.corrupted).count() as u64;
                prop_assert_eq!(flips, res.corruptions_used);
                prop_assert!(flips <= budget);
                for r in &res.rounds {
                    prop_assert_eq!(r.corrupted, r.true_feedback != r.observed_feedback);
                }
                prop_assert_eq!(final_report(&res, &cfg).deterministic_violations(), 0);
                let replay = run_episode(&cfg).unwrap();
                prop_assert_eq!(res, replay);
            }
            // a leaf trap may have no wrong leaf on very small trees
            Err(e) => prop_assert!(e.to_string().contains("leaf-trap"), "{}", e),
        }
    }

    #[test]
    fn adversaries_are_driven_intent_first(
        x in 0.0f64..1.0,
        adv in adversary_strategy(),
        seed in any::<u64>(),
    ) {
        let horizon = 512;
        let budget = 8;
        let val = Valuation::new(x).unwrap();
        let tree = TreeParams::for_horizon(horizon);
        let Ok(inner) = adv.build(&AdversaryContext { valuation: val, tree, budget, seed }) else {
            return Ok(());
        };
        let intents = Arc::new(Mutex::new(Vec::new()));
        let rec = Recording { inner, intents: intents.clone() };
        let mut env = Env::new(horizon, val, budget, Box::new(rec));
        let mut seller = MetaSearcher::new(tree, CommitKnown { budget });
        while seller.step(&mut env).is_ok() {}
        let intents = intents.lock().unwrap();
        prop_assert_eq!(intents.len() as u64, horizon);
        // an unwilling round is never corrupted
        for (r, &willing) in env.history().iter().zip(intents.iter()) {
            prop_assert!(willing || !r.corrupted);
        }
    }
}

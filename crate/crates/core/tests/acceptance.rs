//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails.

use std::fs;
use std::time::Instant;

use robust_pricing::adversary::AdversarySpec;
use robust_pricing::algorithms::{coarse_query_bound, rivest_query_budget};
use robust_pricing::harness::{
    self, run_sweep, ResultRow, SweepOutput, SweepSpec, ValuationChoice,
};
use robust_pricing::instrumentation::known_total_regret_bound;
use robust_pricing::oracle::{exhaustive_adversary_check, BudgetScanner};
use robust_pricing::{
    final_report, run_episode, AlgorithmId, BoundId, EpisodeConfig, TreeParams, Valuation,
};

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    passed: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }
}

fn v(x: f64) -> Valuation {
    Valuation::new(x).unwrap()
}

fn violations(rows: &[ResultRow], alg: AlgorithmId, id: BoundId) -> (usize, usize) {
    let applicable: Vec<_> = rows
        .iter()
        .filter(|r| r.config.algorithm == alg)
        .filter_map(|r| r.bound(id))
        .collect();
    (
        applicable.iter().filter(|c| !c.satisfied).count(),
        applicable.len(),
    )
}

fn default_meta_suite() -> SweepOutput {
    let spec = SweepSpec {
        algorithms: vec![AlgorithmId::CommitKnown, AlgorithmId::CommitUnknown],
        verify: true,
        parallel: true,
        ..SweepSpec::default()
    };
    run_sweep(&spec).expect("default suite runs")
}

fn known_regret_bound(suite: &SweepOutput) -> Outcome {
    let (bad, n) = violations(
        &suite.rows,
        AlgorithmId::CommitKnown,
        BoundId::KnownTotalRegret,
    );
    let worst = suite
        .rows
        .iter()
        .filter_map(|r| r.bound(BoundId::KnownTotalRegret))
        .map(|c| c.lhs / c.rhs)
        .fold(0.0, f64::max);
    Outcome::new(
        bad == 0 && n == 50_000,
        format!(
            "{bad} of {n} known-budget episodes exceed 5 log2 T + 19C + 3 (worst ratio {worst:.3})"
        ),
    )
}

fn potential_assertions(suite: &SweepOutput) -> Outcome {
    let steps = suite.step_violations();
    let first = suite.rows.iter().find(|r| !r.step_violation.is_empty());
    let mut out = Outcome::new(
        steps == 0 && suite.rows.len() == 100_000,
        format!(
            "{steps} step-check failures over {} verified episodes",
            suite.rows.len()
        ),
    );
    if let Some(r) = first {
        out.notes.push(r.step_violation.clone());
    }
    out
}

fn counter_bounds(suite: &SweepOutput) -> Outcome {
    let checks = [
        (AlgorithmId::CommitKnown, BoundId::WrongLeafFails),
        (AlgorithmId::CommitUnknown, BoundId::WrongLeafFails),
        (AlgorithmId::CommitKnown, BoundId::CorrectLeafFails),
        (AlgorithmId::CommitUnknown, BoundId::CorrectLeafFails),
        (AlgorithmId::CommitKnown, BoundId::KnownCommitRegret),
        (AlgorithmId::CommitUnknown, BoundId::UpperLeafRegret),
        (AlgorithmId::CommitKnown, BoundId::SearchOverhead),
        (AlgorithmId::CommitUnknown, BoundId::SearchOverhead),
        (AlgorithmId::CommitKnown, BoundId::PotentialBalance),
        (AlgorithmId::CommitUnknown, BoundId::PotentialBalance),
    ];
    let mut total = 0;
    let mut notes = Vec::new();
    for (alg, id) in checks {
        let (bad, n) = violations(&suite.rows, alg, id);
        total += bad;
        notes.push(format!("{alg} {}: {bad}/{n}", id.name()));
    }
    Outcome {
        passed: total == 0,
        detail: format!("{total} counter-bound violations"),
        notes,
    }
}

fn unknown_budget_frequencies() -> Outcome {
    let spec = SweepSpec {
        horizons: vec![1 << 10, 1 << 12],
        budgets: vec![0, 16, 64],
        valuations: vec![
            ValuationChoice::Fixed(v(1.0 / 3.0)),
            ValuationChoice::Fixed(v(0.7)),
        ],
        algorithms: vec![AlgorithmId::CommitUnknown],
        adversaries: AdversarySpec::catalogue(),
        trials_per_cell: 1000,
        delta: 0.05,
        verify: true,
        parallel: true,
        ..SweepSpec::default()
    };
    let out = run_sweep(&spec).expect("statistical sweep runs");
    let freq = |s: &harness::CellSummary, id: BoundId| {
        s.bound_failure_frequency
            .iter()
            .find(|(b, _)| *b == id)
            .map(|&(_, f)| f)
            .expect("probabilistic bound")
    };
    let max_of = |id: BoundId| {
        out.summaries
            .iter()
            .map(|s| freq(s, id))
            .fold(0.0f64, f64::max)
    };
    let total = max_of(BoundId::UnknownTotalRegret);
    let star = max_of(BoundId::CorrectLeafRegret);
    let lower = max_of(BoundId::LowerLeafRegret);
    let blocks = max_of(BoundId::LowerLeafBlocks);
    let per_visit = max_of(BoundId::LowerLeafBlocksPerVisit);
    let passed = out.summaries.len() == 60
        && out.summaries.iter().all(|s| s.episodes == 1000)
        && total <= 0.05 + 0.02
        && star <= 0.05 / 3.0 + 0.02
        && out.deterministic_violations() == 0
        && out.step_violations() == 0;
    let mut o = Outcome::new(
        passed,
        format!(
            "worst cell over {} cells x 1000 seeds: total-bound failure freq {total:.3} (limit 0.070), \
             correct-leaf failure freq {star:.3} (limit 0.037)",
            out.summaries.len()
        ),
    );
    o.notes.push(format!(
        "lower-leaf regret failure freq {lower:.3}; per-visit block cap failure freq {per_visit:.3}; \
         single-run block cap ceil(e(C_l+1)) failure freq {blocks:.3} (leaves revisited after a detour)"
    ));
    o
}

fn lower_bound_construction() -> Outcome {
    let horizon = 1 << 12;
    let mut ok = true;
    let mut parts = Vec::new();
    for c in [4u64, 16, 64] {
        let adv = AdversarySpec::MimicLowInstance {
            v_low: v(1.0 / 3.0),
            burn: Some(c),
        };
        let regret = |x: f64| {
            let cfg =
                EpisodeConfig::new(horizon, v(x), c, AlgorithmId::CommitKnown, adv.clone(), 0);
            run_episode(&cfg).expect("episode runs").total_regret
        };
        let (low, high) = (regret(1.0 / 3.0), regret(2.0 / 3.0));
        let worst = low.max(high);
        ok &= worst >= c as f64 / 6.0;
        parts.push(format!(
            "C={c}: max({low:.2}, {high:.2}) >= {:.2}",
            c as f64 / 6.0
        ));
    }
    Outcome::new(ok, parts.join("; "))
}

fn exhaustive_oracle() -> Outcome {
    let verdict = exhaustive_adversary_check(16, 2);
    let mut o = Outcome::new(
        verdict.passed(),
        format!(
            "{} instances, {} flip patterns, {} counterexamples",
            verdict.instances,
            verdict.patterns,
            verdict.counterexamples.len()
        ),
    );
    o.notes.extend(
        verdict
            .counterexamples
            .iter()
            .take(3)
            .map(|c| c.to_string()),
    );
    o
}

fn budget_formula() -> Outcome {
    let mut mismatches = 0;
    let mut over_cap = 0;
    let mut pairs = 0;
    for c in 0..=16 {
        let mut scan = BudgetScanner::new(c);
        for n in 2..=4096 {
            pairs += 1;
            let q = rivest_query_budget(n, c);
            mismatches += usize::from(q != scan.query(n));
            over_cap += usize::from(q > coarse_query_bound(n, c));
        }
    }
    Outcome::new(
        mismatches == 0 && over_cap == 0,
        format!("{pairs} (n, C) pairs: {mismatches} formula/scan mismatches, {over_cap} above the coarse cap"),
    )
}

fn baseline_fragility() -> Outcome {
    let horizon = 1 << 12;
    // Flips the very first answer: the root midpoint.
    let adv = AdversarySpec::RandomBudget {
        flip_probability: 1.0,
    };
    let cfg = |alg| EpisodeConfig::new(horizon, v(0.7), 1, alg, adv.clone(), 0);
    let plain = run_episode(&cfg(AlgorithmId::PlainBinarySearch)).expect("episode runs");
    let known_cfg = cfg(AlgorithmId::CommitKnown);
    let known = run_episode(&known_cfg).expect("episode runs");
    let report = final_report(&known, &known_cfg);
    let bound = known_total_regret_bound(TreeParams::for_horizon(horizon).depth, 1);
    let floor = 0.05 * horizon as f64;
    Outcome::new(
        plain.total_regret >= floor
            && report.deterministic_violations() == 0
            && known.total_regret <= bound,
        format!(
            "plain search regret {:.1} (need >= {floor:.1}); known-budget regret {:.1} (bound {bound})",
            plain.total_regret, known.total_regret
        ),
    )
}

fn determinism() -> Outcome {
    let mut replays = 0;
    let mut mismatched = 0;
    for alg in AlgorithmId::ALL {
        for adv in AdversarySpec::catalogue() {
            for seed in [0, 11, u64::MAX] {
                let cfg = EpisodeConfig::new(2048, v(0.61), 8, alg, adv.clone(), seed);
                let a = run_episode(&cfg).expect("episode runs");
                let b = run_episode(&cfg).expect("episode runs");
                let same_bits = a.total_regret.to_bits() == b.total_regret.to_bits()
                    && a.rounds
                        .iter()
                        .zip(&b.rounds)
                        .all(|(x, y)| x.revenue.to_bits() == y.revenue.to_bits());
                replays += 1;
                mismatched += usize::from(a != b || !same_bits);
            }
        }
    }
    let spec = |dir: &std::path::Path, parallel| SweepSpec {
        horizons: vec![256, 1024],
        budgets: vec![0, 4],
        trials_per_cell: 3,
        base_seed: 5,
        parallel,
        out_dir: dir.to_path_buf(),
        ..SweepSpec::default()
    };
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (i, d) in dirs.iter().enumerate() {
        harness::run(&spec(d.path(), i == 2)).expect("sweep runs");
    }
    let read = |d: &tempfile::TempDir, f: &str| fs::read(d.path().join(f)).unwrap();
    let identical = [harness::RESULTS_FILE, harness::SUMMARY_FILE]
        .iter()
        .all(|f| read(&dirs[0], f) == read(&dirs[1], f) && read(&dirs[0], f) == read(&dirs[2], f));
    Outcome::new(
        mismatched == 0 && identical,
        format!(
            "{mismatched} of {replays} replays differ; sweep CSVs {} across serial, serial and parallel runs",
            if identical { "byte-identical" } else { "DIFFER" }
        ),
    )
}

fn main() {
    let started = Instant::now();
    let suite = default_meta_suite();
    println!(
        "default suite: {} episodes in {:.1?}",
        suite.rows.len(),
        started.elapsed()
    );

    let criteria: Vec<(&str, Criterion)> = vec![
        (
            "known-budget regret bound on the default suite",
            Box::new(|| known_regret_bound(&suite)),
        ),
        (
            "per-step potential assertions",
            Box::new(|| potential_assertions(&suite)),
        ),
        (
            "failure-counter and leaf-regret bounds",
            Box::new(|| counter_bounds(&suite)),
        ),
        (
            "unknown-budget high-probability bounds",
            Box::new(unknown_budget_frequencies),
        ),
        (
            "paired-instance lower bound",
            Box::new(lower_bound_construction),
        ),
        (
            "exhaustive small-instance oracle",
            Box::new(exhaustive_oracle),
        ),
        ("query budget formula", Box::new(budget_formula)),
        ("baseline fragility", Box::new(baseline_fragility)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        failed += usize::from(!o.passed);
        println!(
            "[{}] criterion {}: {name}: {} ({:.1?})",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed()
        );
        for note in &o.notes {
            println!("       {note}");
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Cell expansion, episode execution and CSV output.
//!
//! `results.csv` has one row per episode, `summary.csv` one row per cell.
//! Both are sorted by (cell, trial) and floats are written in shortest
//! round-trip form, so identical specs give byte-identical files whether or
//! not episodes ran in parallel.

use std::fs;
use std::io::Write;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;

use crate::adversary::{AdversaryContext, AdversarySpec};
use crate::algorithms::run_episode_with;
use crate::error::EpisodeError;
use crate::instrumentation::{final_report, BoundCheck, BoundId, BoundKind};
use crate::model::{AlgorithmId, EpisodeConfig, Valuation};
use crate::tree::TreeParams;

use super::{HarnessError, SweepSpec};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// One point of the parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub horizon: u64,
    pub budget: u64,
    pub valuation: Valuation,
    pub algorithm: AlgorithmId,
    pub adversary: AdversarySpec,
    pub delta: f64,
}

impl Cell {
    pub fn config(&self, seed: u64) -> EpisodeConfig {
        EpisodeConfig::new(
            self.horizon,
            self.valuation,
            self.budget,
            self.algorithm,
            self.adversary.clone(),
            seed,
        )
        .with_delta(self.delta)
    }

    /// Rejects cells no episode could run in, such as `C > T`.
    fn check(&self) -> Result<(), crate::error::ConfigError> {
        let cfg = self.config(0);
        cfg.validate()?;
        self.adversary
            .build(&AdversaryContext {
                valuation: self.valuation,
                tree: TreeParams::for_horizon(self.horizon),
                budget: self.budget,
                seed: 0,
            })
            .map(drop)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub cell: usize,
    pub trial: u64,
    pub config: EpisodeConfig,
    pub total_regret: f64,
    pub corruptions_used: u64,
    pub correct_leaf_fails: u64,
    pub wrong_leaf_fails: u64,
    pub honest_nonleaf_steps: u64,
    pub corrupted_nonleaf_steps: u64,
    pub final_potential: u32,
    /// Empty unless a per-step check failed under verification.
    pub step_violation: String,
    /// Indexed like [`BoundId::ALL`]; `None` where the bound does not apply.
    pub bounds: Vec<Option<BoundCheck>>,
}

impl ResultRow {
    pub fn bound(&self, id: BoundId) -> Option<&BoundCheck> {
        self.bounds[BoundId::ALL.iter().position(|&b| b == id).expect("listed")].as_ref()
    }

    pub fn deterministic_violations(&self) -> usize {
        self.bounds
            .iter()
            .flatten()
            .filter(|c| c.bound.kind() == BoundKind::Deterministic && !c.satisfied)
            .count()
    }

    pub fn probabilistic_failure(&self) -> bool {
        self.bounds
            .iter()
            .flatten()
            .any(|c| c.bound.kind() == BoundKind::Probabilistic && !c.satisfied)
    }
}

/// Per-cell aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub episodes: u64,
    pub mean_regret: f64,
    pub max_regret: f64,
    pub mean_corruptions: f64,
    pub deterministic_violations: u64,
    pub step_violations: u64,
    /// Share of episodes failing at least one probabilistic bound.
    pub probabilistic_failure_frequency: f64,
    /// Per probabilistic bound, in [`BoundId::ALL`] order.
    pub bound_failure_frequency: Vec<(BoundId, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub summaries: Vec<CellSummary>,
    /// Human-readable reasons for skipped cells.
    pub skipped: Vec<String>,
}

impl SweepOutput {
    pub fn deterministic_violations(&self) -> u64 {
        self.summaries
            .iter()
            .map(|s| s.deterministic_violations)
            .sum()
    }

    pub fn step_violations(&self) -> u64 {
        self.summaries.iter().map(|s| s.step_violations).sum()
    }
}

fn expand(spec: &SweepSpec) -> (Vec<Cell>, Vec<String>) {
    let valuations = spec.resolved_valuations();
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    let mut index = 0;
    for &horizon in &spec.horizons {
        for &budget in &spec.budgets {
            for &valuation in &valuations {
                for &algorithm in &spec.algorithms {
                    for adversary in &spec.adversaries {
                        let cell = Cell {
                            index,
                            horizon,
                            budget,
                            valuation,
                            algorithm,
                            adversary: adversary.clone(),
                            delta: spec.delta,
                        };
                        match cell.check() {
                            Ok(()) => {
                                cells.push(cell);
                                index += 1;
                            }
                            Err(e) => {
                                let msg = format!(
                                    "skipping T={horizon} C={budget} v*={} {algorithm} {adversary}: {e}",
                                    valuation.value()
                                );
                                warn!("{msg}");
                                skipped.push(msg);
                            }
                        }
                    }
                }
            }
        }
    }
    (cells, skipped)
}

fn run_one(cell: &Cell, trial: u64, base_seed: u64, verify: bool) -> ResultRow {
    let config = cell.config(base_seed.wrapping_add(trial));
    let (result, step_violation) = match run_episode_with(&config, verify) {
        Ok(r) => (r, String::new()),
        Err(EpisodeError::Verification(e)) => {
            // keep the episode's numbers; the row records what tripped
            let r = run_episode_with(&config, false).expect("cell was validated");
            (r, e.to_string())
        }
        Err(EpisodeError::Config(e)) => panic!("cell was validated: {e}"),
    };
    let report = final_report(&result, &config);
    let l = &result.ledger;
    ResultRow {
        cell: cell.index,
        trial,
        total_regret: result.total_regret,
        corruptions_used: result.corruptions_used,
        correct_leaf_fails: l.correct_leaf_fails,
        wrong_leaf_fails: l.wrong_leaf_fails,
        honest_nonleaf_steps: l.honest_nonleaf_steps,
        corrupted_nonleaf_steps: l.corrupted_nonleaf_steps,
        final_potential: l.potential,
        step_violation,
        bounds: BoundId::ALL
            .iter()
            .map(|&id| report.get(id).copied())
            .collect(),
        config,
    }
}

fn summarize(cell: &Cell, rows: &[ResultRow]) -> CellSummary {
    let n = rows.len() as f64;
    let freq =
        |pred: &dyn Fn(&ResultRow) -> bool| rows.iter().filter(|r| pred(r)).count() as f64 / n;
    CellSummary {
        cell: cell.clone(),
        episodes: rows.len() as u64,
        mean_regret: rows.iter().map(|r| r.total_regret).sum::<f64>() / n,
        max_regret: rows
            .iter()
            .map(|r| r.total_regret)
            .fold(f64::NEG_INFINITY, f64::max),
        mean_corruptions: rows.iter().map(|r| r.corruptions_used as f64).sum::<f64>() / n,
        deterministic_violations: rows
            .iter()
            .map(|r| r.deterministic_violations() as u64)
            .sum(),
        step_violations: rows
            .iter()
            .filter(|r| !r.step_violation.is_empty())
            .count() as u64,
        probabilistic_failure_frequency: freq(&|r| r.probabilistic_failure()),
        bound_failure_frequency: BoundId::ALL
            .iter()
            .filter(|b| b.kind() == BoundKind::Probabilistic)
            .map(|&b| (b, freq(&|r| r.bound(b).is_some_and(|c| !c.satisfied))))
            .collect(),
    }
}

/// Runs every trial of every valid cell in memory.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput, HarnessError> {
    spec.validate()?;
    let (cells, skipped) = expand(spec);
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials_per_cell).map(move |t| (c, t)))
        .collect();
    info!("{} cells, {} episodes", cells.len(), jobs.len());
    let job = |&(c, t): &(usize, u64)| run_one(&cells[c], t, spec.base_seed, spec.verify);
    let mut rows: Vec<ResultRow> = if spec.parallel {
        jobs.par_iter().map(job).collect()
    } else {
        jobs.iter().map(job).collect()
    };
    rows.sort_by_key(|r| (r.cell, r.trial));
    let summaries = cells
        .iter()
        .map(|cell| {
            let start = rows.partition_point(|r| r.cell < cell.index);
            let end = rows.partition_point(|r| r.cell <= cell.index);
            summarize(cell, &rows[start..end])
        })
        .collect();
    Ok(SweepOutput {
        rows,
        summaries,
        skipped,
    })
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn results_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "cell",
        "trial",
        "horizon",
        "budget",
        "valuation",
        "delta",
        "algorithm",
        "adversary",
        "seed",
        "total_regret",
        "corruptions_used",
        "correct_leaf_fails",
        "wrong_leaf_fails",
        "honest_steps",
        "corrupted_steps",
        "final_potential",
        "step_violation",
    ]
    .map(String::from)
    .to_vec();
    for b in BoundId::ALL {
        h.push(format!("{}_ok", b.name()));
        h.push(format!("{}_slack", b.name()));
    }
    h
}

fn result_record(r: &ResultRow) -> Vec<String> {
    let c = &r.config;
    let mut rec = vec![
        r.cell.to_string(),
        r.trial.to_string(),
        c.horizon.to_string(),
        c.corruption_budget.to_string(),
        num(c.valuation.value()),
        num(c.delta),
        c.algorithm.to_string(),
        c.adversary.to_string(),
        c.seed.to_string(),
        num(r.total_regret),
        r.corruptions_used.to_string(),
        r.correct_leaf_fails.to_string(),
        r.wrong_leaf_fails.to_string(),
        r.honest_nonleaf_steps.to_string(),
        r.corrupted_nonleaf_steps.to_string(),
        r.final_potential.to_string(),
        r.step_violation.clone(),
    ];
    for b in &r.bounds {
        match b {
            Some(b) => {
                rec.push(b.satisfied.to_string());
                rec.push(num(b.slack()));
            }
            None => rec.extend([String::new(), String::new()]),
        }
    }
    rec
}

pub fn summary_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "cell",
        "horizon",
        "budget",
        "valuation",
        "delta",
        "algorithm",
        "adversary",
        "episodes",
        "mean_regret",
        "max_regret",
        "mean_corruptions",
        "deterministic_violations",
        "step_violations",
        "probabilistic_failure_freq",
    ]
    .map(String::from)
    .to_vec();
    for b in BoundId::ALL
        .iter()
        .filter(|b| b.kind() == BoundKind::Probabilistic)
    {
        h.push(format!("{}_fail_freq", b.name()));
    }
    h
}

fn summary_record(s: &CellSummary) -> Vec<String> {
    let c = &s.cell;
    let mut rec = vec![
        c.index.to_string(),
        c.horizon.to_string(),
        c.budget.to_string(),
        num(c.valuation.value()),
        num(c.delta),
        c.algorithm.to_string(),
        c.adversary.to_string(),
        s.episodes.to_string(),
        num(s.mean_regret),
        num(s.max_regret),
        num(s.mean_corruptions),
        s.deterministic_violations.to_string(),
        s.step_violations.to_string(),
        num(s.probabilistic_failure_frequency),
    ];
    rec.extend(s.bound_failure_frequency.iter().map(|&(_, f)| num(f)));
    rec
}

fn write_csv<W: Write>(
    out: W,
    header: Vec<String>,
    records: impl Iterator<Item = Vec<String>>,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for rec in records {
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), HarnessError> {
    write_csv(out, results_header(), rows.iter().map(result_record))
}

pub fn write_summary<W: Write>(out: W, summaries: &[CellSummary]) -> Result<(), HarnessError> {
    write_csv(out, summary_header(), summaries.iter().map(summary_record))
}

/// [`run_sweep`], then writes `results.csv` and `summary.csv` into the
/// spec's output directory.
pub fn run(spec: &SweepSpec) -> Result<SweepOutput, HarnessError> {
    let output = run_sweep(spec)?;
    let dir: &Path = &spec.out_dir;
    fs::create_dir_all(dir)?;
    write_results(fs::File::create(dir.join(RESULTS_FILE))?, &output.rows)?;
    write_summary(fs::File::create(dir.join(SUMMARY_FILE))?, &output.summaries)?;
    Ok(output)
}

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Parser};
use log::info;

use robust_pricing::algorithms::{rivest_query_budget, run_episode_with};
use robust_pricing::harness::{self, curve_export, write_curve, SweepSpec, XAxis};
use robust_pricing::oracle::{budget_scan, exhaustive_adversary_check};

/// Sweeps sellers against corrupting adversaries and writes CSV results.
///
/// List-valued flags take comma-separated values and override the matching
/// keys of `--config`; anything left unset falls back to the default suite.
#[derive(Debug, Parser)]
#[command(name = "robust-pricing", version)]
struct Args {
    /// Horizons T.
    #[arg(long)]
    horizon: Option<String>,
    /// Corruption budgets C.
    #[arg(long)]
    budget: Option<String>,
    /// Valuations: decimals, fractions like 1/3, grid:N or random:N.
    #[arg(long)]
    valuation: Option<String>,
    /// commit-known, commit-unknown, majority-vote, plain-bsearch or all.
    #[arg(long)]
    algorithm: Option<String>,
    /// none, mimic[:v_low[:burn]], leaf-trap[:offset], commit-stall, random[:p] or all.
    #[arg(long)]
    adversary: Option<String>,
    /// Failure probability for the unknown-budget commitment.
    #[arg(long)]
    delta: Option<String>,
    /// Trials per cell.
    #[arg(long)]
    trials: Option<String>,
    /// Base seed; trial i uses seed + i.
    #[arg(long)]
    seed: Option<String>,
    /// Directory for results.csv and summary.csv.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run episodes on all cores.
    #[arg(long, action = ArgAction::SetTrue)]
    parallel: bool,
    /// Per-step potential assertions.
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    verify: Option<bool>,
    /// Also write curve_<axis>.csv with regret against C or T.
    #[arg(long, value_parser = parse_axis)]
    curve: Option<XAxis>,
    /// Write the per-round trace of a single episode to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run the exhaustive small-instance oracle instead of a sweep.
    #[arg(long, action = ArgAction::SetTrue)]
    oracle: bool,
}

fn parse_axis(s: &str) -> Result<XAxis, String> {
    s.parse()
}

fn build_spec(args: &Args) -> Result<SweepSpec> {
    let mut spec = SweepSpec::default();
    if let Some(path) = &args.config {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        spec.apply_config(&text)?;
    }
    let pairs = [
        ("horizon", &args.horizon),
        ("budget", &args.budget),
        ("valuation", &args.valuation),
        ("algorithm", &args.algorithm),
        ("adversary", &args.adversary),
        ("delta", &args.delta),
        ("trials", &args.trials),
        ("seed", &args.seed),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            spec.set(key, v).with_context(|| format!("--{key}"))?;
        }
    }
    if let Some(dir) = &args.out_dir {
        spec.out_dir = dir.clone();
    }
    if args.parallel {
        spec.parallel = true;
    }
    if let Some(v) = args.verify {
        spec.verify = v;
    }
    spec.validate()?;
    Ok(spec)
}

fn run_oracle() -> Result<bool> {
    let verdict = exhaustive_adversary_check(16, 2);
    println!(
        "exhaustive check: {} instances, {} flip patterns, {} counterexamples",
        verdict.instances,
        verdict.patterns,
        verdict.counterexamples.len()
    );
    for cx in verdict.counterexamples.iter().take(5) {
        println!("{cx}");
    }
    let mut mismatches = 0;
    for c in 0..=4 {
        for n in 2..=256 {
            if rivest_query_budget(n, c) != budget_scan(n, c) {
                mismatches += 1;
            }
        }
    }
    println!("query budget formula vs scan (n <= 256, C <= 4): {mismatches} mismatches");
    Ok(verdict.passed() && mismatches == 0)
}

fn write_trace(spec: &SweepSpec, path: &PathBuf) -> Result<()> {
    let valuations = spec.resolved_valuations();
    let single = spec.horizons.len() == 1
        && spec.budgets.len() == 1
        && valuations.len() == 1
        && spec.algorithms.len() == 1
        && spec.adversaries.len() == 1;
    if !single {
        bail!("--trace needs exactly one horizon, budget, valuation, algorithm and adversary");
    }
    let config = robust_pricing::EpisodeConfig::new(
        spec.horizons[0],
        valuations[0],
        spec.budgets[0],
        spec.algorithms[0],
        spec.adversaries[0].clone(),
        spec.base_seed,
    )
    .with_delta(spec.delta);
    let result = run_episode_with(&config, false)?;
    let mut out = String::from("t,price,true_sale,observed_sale,corrupted,revenue\n");
    for r in &result.rounds {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t,
            r.price.value(),
            u8::from(r.true_feedback.sale),
            u8::from(r.observed_feedback.sale),
            u8::from(r.corrupted),
            r.revenue
        ));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn real_main() -> Result<bool> {
    let args = Args::parse();
    if args.oracle {
        return run_oracle();
    }
    let spec = build_spec(&args)?;
    if let Some(path) = &args.trace {
        write_trace(&spec, path)?;
    }
    let output = harness::run(&spec)?;
    info!("wrote {}", spec.out_dir.display());
    if let Some(axis) = args.curve {
        let name = match axis {
            XAxis::Budget => "curve_C.csv",
            XAxis::Horizon => "curve_T.csv",
        };
        let file = fs::File::create(spec.out_dir.join(name))?;
        write_curve(file, &curve_export(&output.rows, axis))?;
    }
    let det = output.deterministic_violations();
    let steps = output.step_violations();
    println!(
        "{} cells ({} skipped), {} episodes, {det} deterministic bound violations, {steps} step-check failures",
        output.summaries.len(),
        output.skipped.len(),
        output.rows.len()
    );
    Ok(!(spec.verify && (det > 0 || steps > 0)))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

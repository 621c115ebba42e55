//! Sweep definition and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! horizon   = 256, 1024
//! budget    = 0, 4
//! valuation = 0.2, 1/3, grid:4
//! algorithm = commit-known
//! adversary = all
//! trials    = 10
//! seed      = 7
//! ```
//!
//! List values are comma separated. `all` expands to every algorithm or every
//! catalogue adversary. Valuation items are a decimal, a `num/den` fraction,
//! `grid:N` (the midpoints `(i + 1/2) / N`) or `random:N` (`N` uniform draws
//! seeded from the base seed).

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{parse_real, AdversarySpec};
use crate::model::{AlgorithmId, Valuation, DEFAULT_DELTA};

use super::HarnessError;

/// RNG stream for `random:N` valuation draws.
const VALUATION_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValuationChoice {
    Fixed(Valuation),
    Grid(u32),
    Random(u32),
}

impl ValuationChoice {
    pub fn parse(item: &str) -> Result<Self, HarnessError> {
        let item = item.trim();
        let count = |n: &str| {
            n.trim()
                .parse::<u32>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| HarnessError::invalid(format!("bad valuation count in `{item}`")))
        };
        if let Some(n) = item.strip_prefix("grid:") {
            Ok(ValuationChoice::Grid(count(n)?))
        } else if let Some(n) = item.strip_prefix("random:") {
            Ok(ValuationChoice::Random(count(n)?))
        } else {
            let x = parse_real(item).map_err(HarnessError::invalid)?;
            Ok(ValuationChoice::Fixed(Valuation::new(x)?))
        }
    }
}

/// Everything a sweep needs. Lists are expanded as a Cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub horizons: Vec<u64>,
    pub budgets: Vec<u64>,
    pub valuations: Vec<ValuationChoice>,
    pub algorithms: Vec<AlgorithmId>,
    pub adversaries: Vec<AdversarySpec>,
    pub trials_per_cell: u64,
    pub base_seed: u64,
    pub delta: f64,
    pub verify: bool,
    pub parallel: bool,
    pub out_dir: PathBuf,
}

impl Default for SweepSpec {
    /// The default suite: four horizons, five budgets, five valuations,
    /// all algorithms and adversaries, 100 trials per cell.
    fn default() -> Self {
        let fixed = |x: f64| ValuationChoice::Fixed(Valuation::new(x).expect("valid default"));
        SweepSpec {
            horizons: vec![1 << 8, 1 << 10, 1 << 12, 1 << 14],
            budgets: vec![0, 1, 4, 16, 64],
            valuations: vec![
                fixed(0.2),
                fixed(1.0 / 3.0),
                fixed(0.5),
                fixed(0.7),
                fixed(0.999),
            ],
            algorithms: AlgorithmId::ALL.to_vec(),
            adversaries: AdversarySpec::catalogue(),
            trials_per_cell: 100,
            base_seed: 0,
            delta: DEFAULT_DELTA,
            verify: true,
            parallel: false,
            out_dir: PathBuf::from("results"),
        }
    }
}

impl SweepSpec {
    /// A sweep over a single cell.
    pub fn single(
        horizon: u64,
        budget: u64,
        valuation: Valuation,
        algorithm: AlgorithmId,
        adversary: AdversarySpec,
    ) -> Self {
        SweepSpec {
            horizons: vec![horizon],
            budgets: vec![budget],
            valuations: vec![ValuationChoice::Fixed(valuation)],
            algorithms: vec![algorithm],
            adversaries: vec![adversary],
            trials_per_cell: 1,
            ..SweepSpec::default()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let empty = [
            ("horizon", self.horizons.is_empty()),
            ("budget", self.budgets.is_empty()),
            ("valuation", self.valuations.is_empty()),
            ("algorithm", self.algorithms.is_empty()),
            ("adversary", self.adversaries.is_empty()),
        ];
        if let Some((key, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(HarnessError::invalid(format!("`{key}` list is empty")));
        }
        if self.trials_per_cell == 0 {
            return Err(HarnessError::invalid("trials must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(crate::error::ConfigError::Delta(self.delta).into());
        }
        Ok(())
    }

    /// Concrete valuations in list order, duplicates kept.
    pub fn resolved_valuations(&self) -> Vec<Valuation> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(VALUATION_STREAM);
        let mut out = Vec::new();
        for choice in &self.valuations {
            match *choice {
                ValuationChoice::Fixed(v) => out.push(v),
                ValuationChoice::Grid(n) => out.extend(
                    (0..n).map(|i| Valuation::new((i as f64 + 0.5) / n as f64).expect("in [0, 1)")),
                ),
                ValuationChoice::Random(n) => out.extend(
                    (0..n).map(|_| Valuation::new(rng.random::<f64>()).expect("in [0, 1)")),
                ),
            }
        }
        out
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let items = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| HarnessError::invalid(format!("`{key}`: not an integer: `{s}`")))
        };
        let flag = |s: &str| match s.trim() {
            "true" | "on" | "yes" | "1" => Ok(true),
            "false" | "off" | "no" | "0" => Ok(false),
            other => Err(HarnessError::invalid(format!(
                "`{key}`: not a boolean: `{other}`"
            ))),
        };
        match key {
            "horizon" | "horizons" => self.horizons = items().map(int).collect::<Result<_, _>>()?,
            "budget" | "budgets" => self.budgets = items().map(int).collect::<Result<_, _>>()?,
            "valuation" | "valuations" => {
                self.valuations = items()
                    .map(ValuationChoice::parse)
                    .collect::<Result<_, _>>()?
            }
            "algorithm" | "algorithms" => {
                let mut algs = Vec::new();
                for item in items() {
                    if item == "all" {
                        algs.extend(AlgorithmId::ALL);
                    } else {
                        algs.push(item.parse()?);
                    }
                }
                self.algorithms = algs;
            }
            "adversary" | "adversaries" => {
                let mut advs = Vec::new();
                for item in items() {
                    if item == "all" {
                        advs.extend(AdversarySpec::catalogue());
                    } else {
                        advs.push(item.parse()?);
                    }
                }
                self.adversaries = advs;
            }
            "delta" => {
                self.delta = parse_real(value).map_err(HarnessError::invalid)?;
            }
            "trials" => self.trials_per_cell = int(value.trim())?,
            "seed" => self.base_seed = int(value.trim())?,
            "out-dir" | "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "parallel" => self.parallel = flag(value)?,
            "verify" => self.verify = flag(value)?,
            other => return Err(HarnessError::invalid(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a config file's assignments on top of `self`.
    pub fn apply_config(&mut self, text: &str) -> Result<(), HarnessError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Parse {
                line: n + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value)
                .map_err(|e| HarnessError::Parse {
                    line: n + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(())
    }

    pub fn from_config(text: &str) -> Result<Self, HarnessError> {
        let mut spec = SweepSpec::default();
        spec.apply_config(text)?;
        Ok(spec)
    }
}

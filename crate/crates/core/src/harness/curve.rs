//! Regret curves against the corruption budget or the horizon.

use std::collections::BTreeMap;
use std::io::Write;

use crate::instrumentation::{known_total_regret_bound, unknown_total_regret_bound};
use crate::model::AlgorithmId;
use crate::tree::TreeParams;

use super::{HarnessError, ResultRow};

pub const CURVE_HEADER: [&str; 7] = [
    "algorithm",
    "series",
    "x",
    "mean_regret",
    "max_regret",
    "bound",
    "episodes",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    /// Budget on the x axis, one series per horizon.
    Budget,
    /// Horizon on the x axis, one series per budget.
    Horizon,
}

impl std::str::FromStr for XAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "C" | "c" | "budget" => Ok(XAxis::Budget),
            "T" | "t" | "horizon" => Ok(XAxis::Horizon),
            other => Err(format!("unknown curve axis `{other}` (use C or T)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub algorithm: AlgorithmId,
    /// `T=<horizon>` or `C=<budget>`.
    pub series: String,
    pub x: u64,
    pub mean_regret: f64,
    pub max_regret: f64,
    /// Worst-case line for the meta algorithms, `None` for baselines.
    pub bound: Option<f64>,
    pub episodes: u64,
}

/// Aggregates rows over valuations, adversaries and trials into one point
/// per (algorithm, series, x).
pub fn curve_export(rows: &[ResultRow], axis: XAxis) -> Vec<CurvePoint> {
    // key: algorithm order, series value, x
    let mut groups: BTreeMap<(usize, u64, u64), (Vec<f64>, f64)> = BTreeMap::new();
    for r in rows {
        let c = &r.config;
        let alg = AlgorithmId::ALL
            .iter()
            .position(|&a| a == c.algorithm)
            .expect("listed");
        let (series, x) = match axis {
            XAxis::Budget => (c.horizon, c.corruption_budget),
            XAxis::Horizon => (c.corruption_budget, c.horizon),
        };
        groups
            .entry((alg, series, x))
            .or_insert_with(|| (Vec::new(), c.delta))
            .0
            .push(r.total_regret);
    }
    groups
        .into_iter()
        .map(|((alg, series, x), (regrets, delta))| {
            let algorithm = AlgorithmId::ALL[alg];
            let (horizon, budget) = match axis {
                XAxis::Budget => (series, x),
                XAxis::Horizon => (x, series),
            };
            let depth = TreeParams::for_horizon(horizon).depth;
            let bound = match algorithm {
                AlgorithmId::CommitKnown => Some(known_total_regret_bound(depth, budget)),
                AlgorithmId::CommitUnknown => {
                    Some(unknown_total_regret_bound(horizon, depth, budget, delta))
                }
                _ => None,
            };
            CurvePoint {
                algorithm,
                series: match axis {
                    XAxis::Budget => format!("T={series}"),
                    XAxis::Horizon => format!("C={series}"),
                },
                x,
                mean_regret: regrets.iter().sum::<f64>() / regrets.len() as f64,
                max_regret: regrets.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                bound,
                episodes: regrets.len() as u64,
            }
        })
        .collect()
}

pub fn write_curve<W: Write>(out: W, points: &[CurvePoint]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for p in points {
        w.write_record([
            p.algorithm.to_string(),
            p.series.clone(),
            p.x.to_string(),
            format!("{}", p.mean_regret),
            format!("{}", p.max_regret),
            p.bound.map(|b| format!("{b}")).unwrap_or_default(),
            p.episodes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares slope of mean regret against `log2 x`.
pub fn fit_log_slope(points: &[&CurvePoint]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.x as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_regret).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

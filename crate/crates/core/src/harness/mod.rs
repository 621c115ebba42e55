//! Monte Carlo sweeps over (horizon, budget, valuation, algorithm,
//! adversary) cells, CSV emission, and plot-ready curve export.

mod config;
mod curve;
mod sweep;

use thiserror::Error;

use crate::error::ConfigError;

pub use config::{SweepSpec, ValuationChoice};
pub use curve::{curve_export, fit_log_slope, write_curve, CurvePoint, XAxis, CURVE_HEADER};
pub use sweep::{
    results_header, run, run_sweep, summary_header, write_results, write_summary, Cell,
    CellSummary, ResultRow, SweepOutput, RESULTS_FILE, SUMMARY_FILE,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        HarnessError::Invalid(message.into())
    }
}

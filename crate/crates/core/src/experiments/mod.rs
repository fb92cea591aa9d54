//! Reproducible experiment drivers: width sweeps of the empirical kernel
//! against the analytic limit, and the equivariance / oracle test battery.

mod suite;
mod sweep;

pub use suite::{equivariance_suite, ChecksSpec, ConstraintSpec, SuiteConfig, SuiteItem, SuiteReport};
pub use sweep::{converge_sweep, write_rows_csv, CellCheck, ResultRow, SweepOutcome, SweepSpec, WidthMedian};

use serde::Serialize;

/// Machine-readable run summary. `runtime_seconds` stays `null` unless
/// explicitly requested, so that summaries are byte-reproducible.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub suite: String,
    pub pass: bool,
    pub max_dev: f64,
    pub runtime_seconds: Option<f64>,
}

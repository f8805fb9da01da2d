//! Sweeps, figure reproduction, result files and engine comparison.

pub mod compare;
pub mod figures;
pub mod svg;
pub mod sweep;
pub mod table;

pub use compare::{compare_engines, Discrepancy, DiscrepancyReport};
pub use figures::{reproduce_figure, FigureId, FigureOutput};
pub use sweep::{params_at, run_sweep, MetricGroups, SweepSpec};
pub use table::{Engine, ResultRow, ResultTable, SweepVariable, TableMetadata, CSV_HEADER};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("result table: {0}")]
    Table(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

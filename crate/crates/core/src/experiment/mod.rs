//! Batch experiments: per-trial method comparisons, exceedance curves,
//! relative-improvement summaries and file exports.

mod batch;
mod compare;
mod curves;
mod output;

pub use batch::{run_batch, BatchConfig, BatchReport, BatchSummary, MethodSummary, RowStatus, TrialRow};
pub use compare::{run_smartpark_compare, CompareConfig, CompareReport, CompareRow, CompareSummary};
pub use curves::{
    exceedance_curve, relative_gain, relative_improvement, summarize_improvement, Curves, Grid, ImprovementBase,
    ImprovementSummary,
};
pub use output::{traces_csv, trials_csv, write_batch, write_compare, BATCH_FILES, COMPARE_FILES};

use thiserror::Error;

use crate::data::DataError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("exceedance curve of an empty sample")]
    Empty,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

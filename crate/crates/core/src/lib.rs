//! Weight-free anomaly detection for univariate time series.
//!
//! The pipeline finds significant seasonal periods from a Welch periodogram,
//! strips trend and seasonality with robust decompositions, and runs a
//! generalized ESD test whose mean/std are replaced by median and the `Sn`
//! scale estimator. Synthetic benchmark generators, evaluation metrics and a
//! CSV/JSON command-line front end round out the crate.

pub mod cli;
pub mod decomposition;
pub mod error;
pub mod esd;
pub mod metrics;
pub mod periodicity;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use pipeline::{detect, score_trace, ScoreTrace};
pub use types::{
    validate, AnomalyReport, Decomposition, DetectorConfig, SolverDiagnostics, TimeSeries,
    Timestamps, Tuning,
};

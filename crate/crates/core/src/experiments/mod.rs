//! Seeded, reproducible experiment runs.
//!
//! Each run takes a resolved [`ExperimentConfig`] and produces a [`Report`]
//! of checked statistics plus optional CSV artifacts. Outputs depend only on
//! the config: every sample draws from its own seeded generator and results
//! are collected in sample order, whatever the thread count.

mod config;
mod runs;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Engine, ExperimentConfig, ExperimentKind, Model, PartialConfig, DEFAULT_SEED};

use crate::cf::CfError;
use crate::exactreal::DigitError;
use crate::limits::LimitError;
use crate::maps::MapError;
use crate::processes::ProcessError;
use crate::stats::StatsError;

/// KS band for `Y_n/n` and `V_n/n` against their limit laws.
pub const BAND_PROCESS: f64 = 0.02;
/// KS band for the distorted processes.
pub const BAND_DISTORTED: f64 = 0.03;
/// KS band for the critical uniform limits.
pub const BAND_CRITICAL: f64 = 0.12;
/// Pointwise band for the Thaler CDF estimates.
pub const BAND_THALER: f64 = 0.1;
/// Band on `|ratio - 1|` for large-deviation and tail estimates.
pub const BAND_RATIO: f64 = 0.2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{degraded} of {samples} orbits lost certification, above the allowed fraction {max}")]
    Degraded { degraded: usize, samples: usize, max: f64 },
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Digit(#[from] DigitError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// One reported statistic.
///
/// With a `band`, the row passes when `|value - reference| <= band`, or
/// `value <= band` if there is no reference. Rows without a band are
/// informational unless `pass` is set directly (monotonicity checks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub n: u64,
    #[serde(rename = "N")]
    pub samples: u64,
    pub statistic: String,
    pub value: f64,
    pub band: Option<f64>,
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl ReportRow {
    pub fn new(experiment: ExperimentKind, n: u64, samples: usize, statistic: impl Into<String>, value: f64) -> Self {
        Self {
            experiment: experiment.name().to_string(),
            n,
            samples: samples as u64,
            statistic: statistic.into(),
            value,
            band: None,
            pass: None,
            reference: None,
            alpha: None,
            x: None,
            y: None,
            note: None,
        }
    }

    /// Attach a band and evaluate the check.
    pub fn banded(mut self, band: f64) -> Self {
        let gap = match self.reference {
            Some(r) => (self.value - r).abs(),
            None => self.value,
        };
        self.band = Some(band);
        self.pass = Some(gap <= band);
        self
    }

    pub fn reference(mut self, r: f64) -> Self {
        self.reference = Some(r);
        self
    }

    pub fn alpha(mut self, a: f64) -> Self {
        self.alpha = Some(a);
        self
    }

    pub fn x(mut self, x: f64) -> Self {
        self.x = Some(x);
        self
    }

    pub fn y(mut self, y: f64) -> Self {
        self.y = Some(y);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    /// All checked rows passed.
    pub pass: bool,
}

impl Report {
    pub fn new(experiment: ExperimentKind, rows: Vec<ReportRow>) -> Self {
        let pass = rows.iter().all(|r| r.pass != Some(false));
        Self {
            experiment: experiment.name().to_string(),
            rows,
            pass,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.pass == Some(false))
    }
}

/// A named text file produced by a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

/// Run an experiment on `threads` worker threads (all cores when `None`).
pub fn run(config: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome, ExperimentError> {
    let pool = crate::sampling::pool(threads).map_err(|e| ExperimentError::Pool(e.to_string()))?;
    runs::run(config, &pool)
}

pub use runs::{farey_summaries, renewal_records, thaler_waitings};

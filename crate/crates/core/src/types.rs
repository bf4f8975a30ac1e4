//! Domain types shared by every stage of the detector.

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::decomposition::{RobustTrendParams, StlParams};
use crate::error::{invalid, Error, Result};
use crate::periodicity::WelchParams;

/// Smallest series accepted by the detection entry points.
pub const MIN_SERIES_LEN: usize = 16;

/// Optional per-sample timestamps. Detection runs on sample index; these are
/// carried as metadata and only checked for ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Timestamps {
    Integer(Vec<i64>),
    Iso(Vec<String>),
}

impl Timestamps {
    pub fn len(&self) -> usize {
        match self {
            Timestamps::Integer(v) => v.len(),
            Timestamps::Iso(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn first_non_increasing(&self) -> Result<Option<usize>> {
        match self {
            Timestamps::Integer(v) => Ok(v.windows(2).position(|w| w[1] <= w[0]).map(|i| i + 1)),
            Timestamps::Iso(v) => {
                let mut prev: Option<NaiveDateTime> = None;
                for (i, s) in v.iter().enumerate() {
                    let ts = parse_iso(s).ok_or_else(|| Error::BadTimestamp {
                        index: i,
                        value: s.clone(),
                    })?;
                    if let Some(p) = prev {
                        if ts <= p {
                            return Ok(Some(i));
                        }
                    }
                    prev = Some(ts);
                }
                Ok(None)
            }
        }
    }
}

/// Parses the ISO-8601 shapes found in common benchmark CSVs. Offsets are
/// normalised to UTC.
pub fn parse_iso(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_utc());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// An ordered, regularly indexed sequence of observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Timestamps>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            timestamps: None,
        }
    }

    pub fn with_timestamps(values: Vec<f64>, timestamps: Timestamps) -> Self {
        Self {
            values,
            timestamps: Some(timestamps),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Checks the series invariants without consuming it.
    pub fn check(&self) -> Result<()> {
        let n = self.values.len();
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if n < MIN_SERIES_LEN {
            return Err(Error::TooShort(n));
        }
        if let Some(ts) = &self.timestamps {
            if ts.len() != n {
                return Err(Error::TimestampLengthMismatch {
                    values: n,
                    timestamps: ts.len(),
                });
            }
            if let Some(i) = ts.first_non_increasing()? {
                return Err(Error::NonMonotonicTimestamps(i));
            }
        }
        Ok(())
    }
}

/// Returns the series unchanged when every invariant holds.
pub fn validate(series: TimeSeries) -> Result<TimeSeries> {
    series.check()?;
    Ok(series)
}

/// A tuning constant that is either fixed by the caller or derived from the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Tuning {
    #[default]
    Auto,
    Fixed(f64),
}

impl Tuning {
    pub fn resolve(self, auto: impl FnOnce() -> f64) -> f64 {
        match self {
            Tuning::Auto => auto(),
            Tuning::Fixed(v) => v,
        }
    }
}

/// Full detector configuration; echoed verbatim in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub alpha: f64,
    pub max_anomaly_frac: f64,
    pub n_permutations: usize,
    pub psd_percentile: f64,
    pub seed: u64,
    /// Keep every above-threshold local maximum instead of only those that
    /// beat the previously accepted peak.
    pub accept_all_peaks: bool,
    pub welch: WelchParams,
    pub robust_trend: RobustTrendParams,
    pub stl: StlParams,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            max_anomaly_frac: 0.10,
            n_permutations: 100,
            psd_percentile: 0.99,
            seed: 0,
            accept_all_peaks: false,
            welch: WelchParams::default(),
            robust_trend: RobustTrendParams::default(),
            stl: StlParams::default(),
        }
    }
}

impl DetectorConfig {
    /// Series-independent checks.
    pub fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", format!("{} not in (0, 1)", self.alpha)));
        }
        if !(self.max_anomaly_frac > 0.0 && self.max_anomaly_frac <= 0.5) {
            return Err(invalid(
                "max_anomaly_frac",
                format!("{} not in (0, 0.5]", self.max_anomaly_frac),
            ));
        }
        if self.n_permutations < 20 {
            return Err(invalid(
                "n_permutations",
                format!("{} < 20", self.n_permutations),
            ));
        }
        if !(self.psd_percentile > 0.5 && self.psd_percentile < 1.0) {
            return Err(invalid(
                "psd_percentile",
                format!("{} not in (0.5, 1)", self.psd_percentile),
            ));
        }
        self.welch.check()?;
        self.robust_trend.check()?;
        self.stl.check()?;
        Ok(())
    }

    /// Checks that also depend on the series length.
    pub fn check_for_len(&self, n: usize) -> Result<()> {
        self.check()?;
        if self.a_max_raw(n) < 1 {
            return Err(invalid(
                "max_anomaly_frac",
                format!(
                    "floor({} * {n}) < 1; no anomaly budget",
                    self.max_anomaly_frac
                ),
            ));
        }
        Ok(())
    }

    fn a_max_raw(&self, n: usize) -> usize {
        (self.max_anomaly_frac * n as f64).floor() as usize
    }

    /// Upper bound on reported anomalies, floored with a minimum of one.
    pub fn a_max(&self, n: usize) -> usize {
        self.a_max_raw(n).max(1)
    }
}

/// Additive split of a series into trend, seasonal components and residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub trend: Vec<f64>,
    pub seasonals: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
    pub periods: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverDiagnostics>,
}

const TREND_NUDGES: i64 = 4;
const RESIDUAL_STEPS: usize = 4;

fn step_ulps(x: f64, k: i64) -> f64 {
    let mut v = x;
    for _ in 0..k.unsigned_abs() {
        v = if k > 0 { v.next_up() } else { v.next_down() };
    }
    v
}

/// A residual `r` with `fitted + r == y` exactly, if one lies within a few
/// ulps of the rounded difference.
fn closing_residual(y: f64, fitted: f64) -> Option<f64> {
    let r0 = y - fitted;
    let mut up = r0;
    let mut down = r0;
    for _ in 0..=RESIDUAL_STEPS {
        for r in [up, down] {
            if (fitted + r).to_bits() == y.to_bits() {
                return Some(r);
            }
        }
        up = up.next_up();
        down = down.next_down();
    }
    None
}

impl Decomposition {
    /// Builds a decomposition whose residual closes the additive identity:
    /// `trend + Σ seasonals + residual`, summed left to right, reproduces
    /// each input bit for bit.
    ///
    /// The residual is `y − (trend + Σ seasonals)`, which is exact whenever
    /// the fitted part is within a factor two of `y`. Otherwise neighbouring
    /// residuals are tried, then the trend is nudged by a few ulps; a point
    /// that still cannot close (the fitted part dwarfs `y` in magnitude) keeps
    /// the plain difference and shows up in `reconstruction_mismatches`.
    pub fn from_components(
        values: &[f64],
        mut trend: Vec<f64>,
        seasonals: Vec<Vec<f64>>,
        periods: Vec<usize>,
    ) -> Self {
        let fitted = |tr: f64, t: usize| seasonals.iter().fold(tr, |acc, s| acc + s[t]);
        let residual = values
            .iter()
            .enumerate()
            .map(|(t, &y)| {
                let base = trend[t];
                let mut tr = base;
                for nudge in 0..=2 * TREND_NUDGES {
                    if let Some(r) = closing_residual(y, fitted(tr, t)) {
                        trend[t] = tr;
                        return r;
                    }
                    // alternate above and below the fitted trend
                    tr = if nudge % 2 == 0 { step_ulps(base, nudge / 2 + 1) } else { step_ulps(base, -(nudge as i64 / 2 + 1)) };
                }
                y - fitted(base, t)
            })
            .collect();
        Self {
            trend,
            seasonals,
            residual,
            periods,
            solver: None,
        }
    }

    pub fn len(&self) -> usize {
        self.residual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residual.is_empty()
    }

    /// `trend + Σ seasonals + residual`, summed left to right.
    pub fn reconstruct(&self) -> Vec<f64> {
        (0..self.len())
            .map(|t| {
                let mut acc = self.trend[t];
                for s in &self.seasonals {
                    acc += s[t];
                }
                acc + self.residual[t]
            })
            .collect()
    }

    /// Indices where the residual differs from `y − trend − Σ seasonals`
    /// recomputed in the construction order.
    pub fn subtraction_mismatches(&self, values: &[f64]) -> Vec<usize> {
        (0..self.len())
            .filter(|&t| {
                let r = self
                    .seasonals
                    .iter()
                    .fold(values[t] - self.trend[t], |acc, s| acc - s[t]);
                r.to_bits() != self.residual[t].to_bits()
            })
            .collect()
    }

    /// Indices where the left-to-right reconstruction is not bit-identical to
    /// the input.
    pub fn reconstruction_mismatches(&self, values: &[f64]) -> Vec<usize> {
        self.reconstruct()
            .iter()
            .zip(values)
            .enumerate()
            .filter(|(_, (a, b))| a.to_bits() != b.to_bits())
            .map(|(t, _)| t)
            .collect()
    }
}

/// Convergence record of an iterative trend solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    /// Objective value at each accepted (improving) iterate.
    pub objective_trace: Vec<f64>,
    pub final_objective: f64,
}

/// Result of a full detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub anomaly_indices: Vec<usize>,
    /// Robust test statistic of each reported index, aligned with
    /// `anomaly_indices`.
    pub scores: Vec<f64>,
    /// Detected periods, or `[1]` when the series is nonseasonal.
    pub periods_detected: Vec<usize>,
    pub seasonal: bool,
    pub config_echo: DetectorConfig,
    /// Wall-clock seconds spent inside `detect`.
    pub timing: f64,
}

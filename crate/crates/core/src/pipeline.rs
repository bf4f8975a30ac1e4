//! End-to-end detection: periods → decomposition → robust ESD → edge trim.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decomposition::extract_residual;
use crate::error::Result;
use crate::esd::{improved_esd, EsdResult};
use crate::periodicity::scan_periods;
use crate::stats;
use crate::types::{AnomalyReport, DetectorConfig, SolverDiagnostics, TimeSeries};

/// Wall-clock seconds per stage; consecutive checkpoints, so they add up to
/// the report's total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub validation: f64,
    pub periodicity: f64,
    pub decomposition: f64,
    pub esd: f64,
    pub finalize: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.validation + self.periodicity + self.decomposition + self.esd + self.finalize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentVariances {
    pub trend: f64,
    pub seasonals: Vec<f64>,
    pub residual: f64,
}

/// Debug view of a detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTrace {
    pub esd: EsdResult,
    /// Detected periods, `[1]` when nonseasonal.
    pub periods: Vec<usize>,
    pub psd_threshold: f64,
    pub variances: ComponentVariances,
    pub solver: Option<SolverDiagnostics>,
    /// Indices removed by the edge trim.
    pub trimmed: Vec<usize>,
    pub stages: StageTimings,
    pub report: AnomalyReport,
}

/// Drops an edge index whose inward neighbour was not flagged.
fn boundary_trim(flagged: &mut Vec<usize>, n: usize) -> Vec<usize> {
    let has = |v: &Vec<usize>, i: usize| v.contains(&i);
    let mut removed = Vec::new();
    if has(flagged, 0) && !has(flagged, 1) {
        removed.push(0);
    }
    if has(flagged, n - 1) && !has(flagged, n - 2) {
        removed.push(n - 1);
    }
    flagged.retain(|i| !removed.contains(i));
    removed
}

fn run(series: &TimeSeries, config: &DetectorConfig) -> Result<ScoreTrace> {
    let start = Instant::now();
    let mut marks = [0.0; 5];
    let mut stage = 0;
    let mut mark = |marks: &mut [f64; 5]| {
        marks[stage] = start.elapsed().as_secs_f64();
        stage += 1;
    };

    series.check()?;
    let n = series.len();
    config.check_for_len(n)?;
    mark(&mut marks);

    let scan = scan_periods(series, config)?;
    mark(&mut marks);

    let dec = extract_residual(series, &scan.periods, config)?;
    mark(&mut marks);

    let a_max = config.a_max(n);
    let esd = improved_esd(&dec.residual, config.alpha, a_max)?;
    mark(&mut marks);

    let mut flagged = esd.outlier_indices.clone();
    let trimmed = boundary_trim(&mut flagged, n);
    flagged.sort_unstable();
    let scores = flagged
        .iter()
        .map(|&i| {
            esd.stats
                .iter()
                .find(|s| s.candidate_index == i)
                .map_or(f64::NAN, |s| s.r_value)
        })
        .collect();
    let variances = ComponentVariances {
        trend: stats::variance(&dec.trend),
        seasonals: dec.seasonals.iter().map(|s| stats::variance(s)).collect(),
        residual: stats::variance(&dec.residual),
    };
    mark(&mut marks);

    let stages = StageTimings {
        validation: marks[0],
        periodicity: marks[1] - marks[0],
        decomposition: marks[2] - marks[1],
        esd: marks[3] - marks[2],
        finalize: marks[4] - marks[3],
    };
    let report = AnomalyReport {
        anomaly_indices: flagged,
        scores,
        periods_detected: scan.periods.reported(),
        seasonal: scan.periods.is_seasonal,
        config_echo: config.clone(),
        timing: marks[4],
    };
    Ok(ScoreTrace {
        esd,
        periods: scan.periods.reported(),
        psd_threshold: scan.threshold,
        variances,
        solver: dec.solver,
        trimmed,
        stages,
        report,
    })
}

/// Runs the full detector on one series.
pub fn detect(series: &TimeSeries, config: &DetectorConfig) -> Result<AnomalyReport> {
    Ok(run(series, config)?.report)
}

/// Same computation as [`detect`], keeping every intermediate result.
pub fn score_trace(series: &TimeSeries, config: &DetectorConfig) -> Result<ScoreTrace> {
    run(series, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn trim_rules() {
        let mut f = vec![0, 5, 9];
        assert_eq!(boundary_trim(&mut f, 10), vec![0, 9]);
        assert_eq!(f, vec![5]);
        let mut f = vec![0, 1, 8, 9];
        assert!(boundary_trim(&mut f, 10).is_empty());
        assert_eq!(f, vec![0, 1, 8, 9]);
    }

    #[test]
    fn constant_series_is_clean() {
        let r = detect(&TimeSeries::new(vec![5.0; 100]), &DetectorConfig::default()).unwrap();
        assert!(r.anomaly_indices.is_empty());
        assert_eq!(r.periods_detected, vec![1]);
    }

    #[test]
    fn lone_edge_spike_is_trimmed() {
        let mut y = noise(300, 12);
        y[0] = 1e4;
        let cfg = DetectorConfig {
            alpha: 0.001,
            ..Default::default()
        };
        let t = score_trace(&TimeSeries::new(y), &cfg).unwrap();
        assert_eq!(t.esd.outlier_indices, vec![0]);
        assert_eq!(t.trimmed, vec![0]);
        assert!(t.report.anomaly_indices.is_empty());
    }

    #[test]
    fn report_invariants_and_timing() {
        let mut y = noise(500, 3);
        y[100] += 30.0;
        y[250] -= 25.0;
        let s = TimeSeries::new(y);
        let cfg = DetectorConfig::default();
        let t = score_trace(&s, &cfg).unwrap();
        let r = &t.report;
        assert!(r.anomaly_indices.windows(2).all(|w| w[0] < w[1]));
        assert!(r.anomaly_indices.len() <= 50);
        assert!(r.anomaly_indices.contains(&100) && r.anomaly_indices.contains(&250));
        assert_eq!(r.scores.len(), r.anomaly_indices.len());
        let total = t.stages.total();
        assert!(t.stages.validation >= 0.0 && t.stages.esd >= 0.0);
        assert!((total - r.timing).abs() <= 0.2 * r.timing);
        assert_eq!(t.periods, vec![1]);
        assert!(t.variances.seasonals.is_empty());
        assert_eq!(detect(&s, &cfg).unwrap().anomaly_indices, r.anomaly_indices);
    }

    #[test]
    fn rejects_invalid_input() {
        let cfg = DetectorConfig::default();
        assert!(detect(&TimeSeries::new(vec![1.0; 8]), &cfg).is_err());
        let bad = DetectorConfig {
            alpha: 1.5,
            ..Default::default()
        };
        assert!(detect(&TimeSeries::new(noise(64, 1)), &bad).is_err());
    }
}

//! Detection scores, cross-dataset generality and the composite ADCS.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(hits: usize, total: usize, other_misses: usize) -> f64 {
    if total > 0 {
        hits as f64 / total as f64
    } else if other_misses == 0 {
        1.0
    } else {
        0.0
    }
}

fn f1_of(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Point-wise scores with exact index matching.
pub fn prf1(predicted: &[usize], truth: &[usize]) -> EvalScores {
    let p: BTreeSet<usize> = predicted.iter().copied().collect();
    let t: BTreeSet<usize> = truth.iter().copied().collect();
    let tp = p.intersection(&t).count();
    let fp = p.len() - tp;
    let fn_ = t.len() - tp;
    let precision = ratio(tp, tp + fp, fn_);
    let recall = ratio(tp, tp + fn_, fp);
    EvalScores {
        precision,
        recall,
        f1: f1_of(precision, recall),
        tp,
        fp,
        fn_,
    }
}

/// Like [`prf1`], but a prediction within `window` samples of a truth index
/// counts as a hit. Precision is the share of predictions near some truth;
/// recall the share of truths near some prediction; `tp` counts matched
/// truths. `window = 0` reproduces [`prf1`].
pub fn prf1_windowed(predicted: &[usize], truth: &[usize], window: usize) -> EvalScores {
    if window == 0 {
        return prf1(predicted, truth);
    }
    let p: BTreeSet<usize> = predicted.iter().copied().collect();
    let t: BTreeSet<usize> = truth.iter().copied().collect();
    let near = |set: &BTreeSet<usize>, i: usize| set.range(i.saturating_sub(window)..=i + window).next().is_some();
    let p_hit = p.iter().filter(|&&i| near(&t, i)).count();
    let t_hit = t.iter().filter(|&&i| near(&p, i)).count();
    let fp = p.len() - p_hit;
    let fn_ = t.len() - t_hit;
    let precision = ratio(p_hit, p.len(), fn_);
    let recall = ratio(t_hit, t.len(), fp);
    EvalScores {
        precision,
        recall,
        f1: f1_of(precision, recall),
        tp: t_hit,
        fp,
        fn_,
    }
}

/// Mean F1 across datasets and its coefficient of variation (population
/// standard deviation over mean).
pub fn generality(f1_per_dataset: &[f64]) -> Result<(f64, f64)> {
    if f1_per_dataset.is_empty() {
        return Err(invalid("f1_per_dataset", "empty"));
    }
    let n = f1_per_dataset.len() as f64;
    let mean = f1_per_dataset.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    let var = f1_per_dataset.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt() / mean))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdcsWeights {
    pub f1: f64,
    pub generality: f64,
    pub latency: f64,
    pub cpu: f64,
    pub ram: f64,
    pub power: f64,
}

impl Default for AdcsWeights {
    fn default() -> Self {
        Self {
            f1: 1.0,
            generality: 1.0,
            latency: 1.0,
            cpu: 1.0,
            ram: 1.0,
            power: 1.0,
        }
    }
}

impl AdcsWeights {
    fn as_array(&self) -> [f64; 6] {
        [self.f1, self.generality, self.latency, self.cpu, self.ram, self.power]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            f1: self.f1 * k,
            generality: self.generality * k,
            latency: self.latency * k,
            cpu: self.cpu * k,
            ram: self.ram * k,
            power: self.power * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdcsInput {
    pub f1: f64,
    /// Coefficient of variation of F1; clamped to [0, 1] before use.
    pub cv: f64,
    /// Min-max normalized latency within the compared cohort.
    pub latency_norm: f64,
    pub cpu_frac: f64,
    pub ram_frac: f64,
    pub power_frac: f64,
    pub weights: AdcsWeights,
}

fn unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} not in [0, 1]")))
    }
}

/// Weighted mean of F1 and the complements of CV, latency, CPU, RAM and
/// power shares.
pub fn adcomp_score(input: &AdcsInput) -> Result<f64> {
    unit("f1", input.f1)?;
    unit("latency_norm", input.latency_norm)?;
    unit("cpu_frac", input.cpu_frac)?;
    unit("ram_frac", input.ram_frac)?;
    unit("power_frac", input.power_frac)?;
    if !(input.cv >= 0.0) {
        return Err(invalid("cv", format!("{} must be >= 0", input.cv)));
    }
    let w = input.weights.as_array();
    if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(invalid("weights", "must be finite and nonnegative"));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::WeightSumZero);
    }
    let g = input.cv.min(1.0);
    let terms = [
        input.f1,
        1.0 - g,
        1.0 - input.latency_norm,
        1.0 - input.cpu_frac,
        1.0 - input.ram_frac,
        1.0 - input.power_frac,
    ];
    let s: f64 = w.iter().zip(terms).map(|(w, t)| w * t).sum();
    Ok((s / total).clamp(0.0, 1.0))
}

/// Min-max scaling to [0, 1]; a cohort without spread maps to all zeros.
pub fn normalize_latency(cohort: &[f64]) -> Vec<f64> {
    let lo = cohort.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cohort.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; cohort.len()];
    }
    cohort.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_cases() {
        let s = prf1(&[4, 9], &[9, 4]);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = prf1(&[], &[3]);
        assert_eq!((s.recall, s.f1), (0.0, 0.0));
        let s = prf1(&[1, 2, 3], &[2, 3, 4]);
        assert_eq!((s.tp, s.fp, s.fn_), (2, 1, 1));
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_conventions() {
        let s = prf1(&[], &[]);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = prf1(&[5], &[]);
        assert_eq!((s.precision, s.recall), (0.0, 0.0));
    }

    #[test]
    fn windowed_matching() {
        let s = prf1_windowed(&[10, 20, 40], &[11, 30], 1);
        assert_eq!((s.tp, s.fp, s.fn_), (1, 2, 1));
        assert!((s.precision - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.recall, 0.5);
        assert_eq!(prf1_windowed(&[1, 2, 3], &[2, 3, 4], 0), prf1(&[1, 2, 3], &[2, 3, 4]));
    }

    #[test]
    fn generality_examples() {
        let (m, cv) = generality(&[0.8, 0.8, 0.8]).unwrap();
        assert!((m - 0.8).abs() < 1e-15 && cv.abs() < 1e-12);
        assert_eq!(generality(&[0.0, 0.0]), Err(Error::ZeroMean));
        assert!(generality(&[]).is_err());
    }

    #[test]
    fn adcs_extremes() {
        let best = AdcsInput {
            f1: 1.0,
            cv: 0.0,
            latency_norm: 0.0,
            cpu_frac: 0.0,
            ram_frac: 0.0,
            power_frac: 0.0,
            weights: AdcsWeights::default(),
        };
        assert_eq!(adcomp_score(&best).unwrap(), 1.0);
        let worst = AdcsInput {
            f1: 0.0,
            cv: 1.0,
            latency_norm: 1.0,
            cpu_frac: 1.0,
            ram_frac: 1.0,
            power_frac: 1.0,
            ..best
        };
        assert_eq!(adcomp_score(&worst).unwrap(), 0.0);
        let zero = AdcsInput {
            weights: AdcsWeights::default().scaled(0.0),
            ..best
        };
        assert_eq!(adcomp_score(&zero), Err(Error::WeightSumZero));
        // cv above 1 counts as 1
        let wide = AdcsInput { cv: 3.0, ..best };
        let capped = AdcsInput { cv: 1.0, ..best };
        assert_eq!(adcomp_score(&wide).unwrap(), adcomp_score(&capped).unwrap());
        let out_of_range = AdcsInput { cpu_frac: 1.5, ..best };
        assert!(adcomp_score(&out_of_range).is_err());
    }

    #[test]
    fn latency_normalisation() {
        assert_eq!(normalize_latency(&[0.24]), vec![0.0]);
        assert_eq!(normalize_latency(&[0.5, 0.5, 0.5]), vec![0.0; 3]);
        let v = normalize_latency(&[0.19, 0.24, 1.34]);
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 0.05 / 1.15).abs() < 1e-12);
        assert_eq!(v[2], 1.0);
    }
}

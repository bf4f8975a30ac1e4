//! Generalized ESD outlier test, classic and robust flavours.

mod scale;
mod tdist;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::stats;

pub use scale::{robust_scale_s, robust_scale_with_fallback, SN_CONSTANT};
pub use tdist::{inc_beta, ln_gamma, t_cdf, t_pdf, t_quantile};

/// One step of the iterative test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsdIteration {
    pub l: usize,
    /// Position in the original input.
    pub candidate_index: usize,
    /// Test statistic; `inf` when both scale estimates collapsed while some
    /// point still differs from the centre.
    pub r_value: f64,
    pub lambda_value: f64,
    /// `R > λ` at this step.
    pub exceeds: bool,
    /// Final verdict: this step is at or before the last exceedance.
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EsdResult {
    pub outlier_indices: Vec<usize>,
    pub stats: Vec<EsdIteration>,
    /// Set when an infinite statistic was produced by scale collapse.
    pub degenerate_scale: bool,
}

impl EsdResult {
    /// R value of each reported outlier, aligned with `outlier_indices`.
    pub fn outlier_scores(&self) -> Vec<f64> {
        self.stats
            .iter()
            .filter(|s| s.rejected)
            .map(|s| s.r_value)
            .collect()
    }
}

/// Critical value λ for step `l` of a test on `n` points.
pub fn esd_critical(n: usize, l: usize, alpha: f64) -> Result<f64> {
    if l + 3 > n {
        return Err(Error::DegenerateDf { n, l });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("{alpha} not in (0, 1)")));
    }
    let m = (n - l) as f64;
    let df = m - 2.0;
    let p = 1.0 - alpha / (2.0 * m);
    let t = t_quantile(p, df)?;
    Ok(t * (m - 1.0) / (m * (t * t + df)).sqrt())
}

/// Centre and spread of the remaining points, and the largest standardized
/// deviation. `None` stops the test early (no variation left).
type Studentize = fn(&[f64]) -> Result<Option<(f64, f64)>>;

fn robust_location_scale(x: &[f64]) -> Result<Option<(f64, f64)>> {
    let med = stats::median(x);
    let s = robust_scale_with_fallback(x)?;
    if s == 0.0 && x.iter().all(|&v| v == med) {
        return Ok(None);
    }
    Ok(Some((med, s)))
}

fn classic_location_scale(x: &[f64]) -> Result<Option<(f64, f64)>> {
    let mean = stats::mean(x);
    let sd = stats::sample_std(x);
    if sd == 0.0 {
        return Ok(None);
    }
    Ok(Some((mean, sd)))
}

fn check_args(n: usize, alpha: f64, a_max: usize) -> Result<()> {
    if a_max < 1 {
        return Err(invalid("a_max", "must be at least 1"));
    }
    if n < a_max + 3 {
        return Err(Error::TooShort(n));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("{alpha} not in (0, 1)")));
    }
    Ok(())
}

fn run(x: &[f64], alpha: f64, a_max: usize, studentize: Studentize) -> Result<EsdResult> {
    let n = x.len();
    check_args(n, alpha, a_max)?;
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut values: Vec<f64> = x.to_vec();
    let mut out = EsdResult::default();
    for l in 0..a_max {
        let Some((centre, scale)) = studentize(&values)? else {
            break;
        };
        // lowest original index wins ties; `remaining` stays ascending
        let mut best = 0;
        let mut best_dev = f64::NEG_INFINITY;
        for (k, &v) in values.iter().enumerate() {
            let dev = (v - centre).abs();
            if dev > best_dev {
                best_dev = dev;
                best = k;
            }
        }
        let r = if scale > 0.0 {
            best_dev / scale
        } else {
            out.degenerate_scale = true;
            f64::INFINITY
        };
        let lambda = esd_critical(n, l, alpha)?;
        out.stats.push(EsdIteration {
            l,
            candidate_index: remaining[best],
            r_value: r,
            lambda_value: lambda,
            exceeds: r > lambda,
            rejected: false,
        });
        remaining.remove(best);
        values.remove(best);
    }
    if let Some(last) = out.stats.iter().rposition(|s| s.exceeds) {
        for s in &mut out.stats[..=last] {
            s.rejected = true;
        }
        out.outlier_indices = out.stats[..=last].iter().map(|s| s.candidate_index).collect();
    }
    Ok(out)
}

/// Generalized ESD with median and `Sn` in place of mean and standard
/// deviation. Runs all `a_max` steps and accepts every candidate up to the
/// last step whose statistic exceeds its critical value.
pub fn improved_esd(x: &[f64], alpha: f64, a_max: usize) -> Result<EsdResult> {
    run(x, alpha, a_max, robust_location_scale)
}

/// Textbook generalized ESD (mean, sample standard deviation).
pub fn classic_esd(x: &[f64], alpha: f64, a_max: usize) -> Result<EsdResult> {
    run(x, alpha, a_max, classic_location_scale)
}

//! Trend / seasonal / residual extraction.

mod admm;
mod bilateral;
mod difference;
mod seasonal;
mod stl;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::esd::robust_scale_with_fallback;
use crate::periodicity::PeriodSet;
use crate::stats;
use crate::types::{Decomposition, DetectorConfig, SolverDiagnostics, TimeSeries, Tuning};

pub use difference::{first_difference, huber_loss, second_difference, seasonal_difference};
pub use stl::{
    bilateral_denoise, fast_robust_stl, integrate_trend_differences, lad_trend, nonlocal_seasonal,
};

/// Classical Huber constant for 95 % Gaussian efficiency.
pub const HUBER_K: f64 = 1.345;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobustTrendParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub huber_gamma: Tuning,
    pub admm_rho: f64,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
}

impl Default for RobustTrendParams {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 10.0,
            huber_gamma: Tuning::Auto,
            admm_rho: 1.0,
            max_iters: 300,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
        }
    }
}

fn nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} must be finite and >= 0")))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} must be finite and > 0")))
    }
}

fn positive_tuning(name: &'static str, t: Tuning) -> Result<()> {
    match t {
        Tuning::Auto => Ok(()),
        Tuning::Fixed(v) => positive(name, v),
    }
}

impl RobustTrendParams {
    pub fn check(&self) -> Result<()> {
        nonneg("robust_trend.lambda1", self.lambda1)?;
        nonneg("robust_trend.lambda2", self.lambda2)?;
        positive_tuning("robust_trend.huber_gamma", self.huber_gamma)?;
        positive("robust_trend.admm_rho", self.admm_rho)?;
        positive("robust_trend.tol_primal", self.tol_primal)?;
        positive("robust_trend.tol_dual", self.tol_dual)?;
        if self.max_iters < 1 {
            return Err(invalid("robust_trend.max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StlParams {
    pub bilateral_half_width: usize,
    pub bilateral_sigma_d: f64,
    /// Auto: twice the `Sn` scale of the first differences.
    pub bilateral_sigma_i: Tuning,
    pub neighbor_cycles: usize,
    /// Auto: twice the `Sn` scale of the lag-period differences.
    pub nonlocal_sigma: Tuning,
    pub lad_lambda1: f64,
    pub lad_lambda2: f64,
    pub lad_max_iters: usize,
    pub lad_tol: f64,
    /// Run the seasonal filter on the denoised rather than the original
    /// detrended series. The residual is always taken from the original.
    pub seasonal_on_denoised: bool,
}

impl Default for StlParams {
    fn default() -> Self {
        Self {
            bilateral_half_width: 3,
            bilateral_sigma_d: 2.0,
            bilateral_sigma_i: Tuning::Auto,
            neighbor_cycles: 2,
            nonlocal_sigma: Tuning::Auto,
            lad_lambda1: 1.0,
            lad_lambda2: 10.0,
            lad_max_iters: 300,
            lad_tol: 1e-6,
            seasonal_on_denoised: false,
        }
    }
}

impl StlParams {
    pub fn check(&self) -> Result<()> {
        if self.bilateral_half_width < 1 {
            return Err(invalid("stl.bilateral_half_width", "H must be at least 1"));
        }
        if self.neighbor_cycles < 1 {
            return Err(invalid("stl.neighbor_cycles", "K must be at least 1"));
        }
        positive("stl.bilateral_sigma_d", self.bilateral_sigma_d)?;
        positive_tuning("stl.bilateral_sigma_i", self.bilateral_sigma_i)?;
        positive_tuning("stl.nonlocal_sigma", self.nonlocal_sigma)?;
        nonneg("stl.lad_lambda1", self.lad_lambda1)?;
        nonneg("stl.lad_lambda2", self.lad_lambda2)?;
        positive("stl.lad_tol", self.lad_tol)?;
        if self.lad_max_iters < 1 {
            return Err(invalid("stl.lad_max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

/// Auto Huber threshold: `1.345 × Sn` of the series minus its width-7
/// running median. Falls back to the normalised MAD, then the standard
/// deviation of that detrended series, then 1.
pub fn auto_huber_gamma(y: &[f64]) -> f64 {
    let med = stats::running_median(y, 7);
    let detr: Vec<f64> = y.iter().zip(&med).map(|(a, b)| a - b).collect();
    let mut scale = robust_scale_with_fallback(&detr).unwrap_or(0.0);
    if scale <= 0.0 {
        scale = stats::sample_std(&detr);
    }
    if scale <= 0.0 {
        scale = 1.0;
    }
    HUBER_K * scale
}

/// Nonseasonal path: Huber-loss trend with first- and second-difference ℓ1
/// penalties.
pub fn robust_trend(series: &TimeSeries, params: &RobustTrendParams) -> Result<Decomposition> {
    params.check()?;
    let y = &series.values;
    if y.len() < 3 {
        return Err(crate::Error::TooShort(y.len()));
    }
    let gamma = params.huber_gamma.resolve(|| auto_huber_gamma(y));
    let settings = admm::AdmmSettings {
        lambda1: params.lambda1,
        lambda2: params.lambda2,
        rho: params.admm_rho,
        max_iters: params.max_iters,
        tol_primal: params.tol_primal,
        tol_dual: params.tol_dual,
    };
    let (trend, diag) = admm::huber_trend(y, gamma, &settings);
    let mut dec = Decomposition::from_components(y, trend, Vec::new(), Vec::new());
    dec.solver = Some(diag);
    Ok(dec)
}

/// Objective `h_γ(y − t) + λ₁‖D₁t‖₁ + λ₂‖D₂t‖₁`.
pub fn robust_trend_objective(y: &[f64], trend: &[f64], gamma: f64, lambda1: f64, lambda2: f64) -> f64 {
    admm::huber_objective(y, trend, gamma, lambda1, lambda2)
}

/// Objective `‖x − g‖₁ + λ₁‖D₁g‖₁ + λ₂‖D₂g‖₁`.
pub fn lad_objective(x: &[f64], g: &[f64], lambda1: f64, lambda2: f64) -> f64 {
    admm::lad_objective(x, g, lambda1, lambda2)
}

const LAD_SCALE_FLOOR: f64 = 0.1;

/// LAD fit with its solver record.
pub fn lad_trend_with_diagnostics(diffed: &[f64], params: &StlParams) -> Result<(Vec<f64>, SolverDiagnostics)> {
    if diffed.is_empty() {
        return Err(invalid("diffed", "empty input"));
    }
    let settings = admm::AdmmSettings {
        lambda1: params.lad_lambda1,
        lambda2: params.lad_lambda2,
        rho: 1.0,
        max_iters: params.lad_max_iters,
        tol_primal: params.lad_tol,
        tol_dual: params.lad_tol,
    };
    // The LAD objective is positively homogeneous, so the fit is solved on
    // unit-scale data and mapped back; ADMM's ρ = 1 is only well matched to
    // data of order one. A small fraction of the mean absolute deviation
    // floors the robust scale for near-constant input with a few large
    // entries, without letting a single huge value set the scale.
    let med = stats::median(diffed);
    let mean_abs = diffed.iter().map(|v| (v - med).abs()).sum::<f64>() / diffed.len() as f64;
    let scale = robust_scale_with_fallback(diffed)
        .unwrap_or(0.0)
        .max(LAD_SCALE_FLOOR * mean_abs);
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let x: Vec<f64> = diffed.iter().map(|v| v / scale).collect();
    let (mut g, mut diag) = admm::lad_fit(&x, &settings);
    for v in &mut g {
        *v *= scale;
    }
    for v in &mut diag.objective_trace {
        *v *= scale;
    }
    diag.final_objective *= scale;
    Ok((g, diag))
}

/// Chooses the decomposition by the periodicity verdict.
pub fn extract_residual(series: &TimeSeries, periods: &PeriodSet, config: &DetectorConfig) -> Result<Decomposition> {
    if periods.is_seasonal {
        fast_robust_stl(series, periods, &config.stl)
    } else {
        robust_trend(series, &config.robust_trend)
    }
}

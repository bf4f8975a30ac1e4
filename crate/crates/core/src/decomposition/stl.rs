//! Seasonal path: denoise → seasonal difference → LAD trend → non-local
//! seasonal extraction → residual by subtraction.

use super::bilateral::{auto_sigma_i, bilateral};
use super::difference::{check_period, seasonal_difference};
use super::seasonal::{auto_sigma, center_cycles, nonlocal_filter};
use super::StlParams;
use crate::error::{invalid, Result};
use crate::periodicity::PeriodSet;
use crate::stats;
use crate::types::{Decomposition, TimeSeries};

pub fn bilateral_denoise(series: &TimeSeries, params: &StlParams) -> Result<Vec<f64>> {
    params.check()?;
    let y = &series.values;
    let sigma_i = params.bilateral_sigma_i.resolve(|| auto_sigma_i(y));
    Ok(bilateral(
        y,
        params.bilateral_half_width,
        params.bilateral_sigma_d,
        sigma_i,
    ))
}

/// LAD fit of a seasonally differenced series; the result estimates the
/// lag-`T` differences of the trend.
pub fn lad_trend(diffed: &[f64], params: &StlParams) -> Result<Vec<f64>> {
    Ok(super::lad_trend_with_diagnostics(diffed, params)?.0)
}

/// Integrates lag-`period` trend differences into a level series of length
/// `n` starting at 0.
///
/// `g[t]` spans steps `t..t+period`, so `g[t]/period` is the mean per-step
/// slope around step `t + (period−1)/2`. Slopes are linearly interpolated
/// between those centres, held constant beyond them, and summed.
pub fn integrate_trend_differences(g: &[f64], period: usize, n: usize) -> Vec<f64> {
    let offset = (period as f64 - 1.0) / 2.0;
    let last = g.len() - 1;
    let slope = |s: usize| -> f64 {
        let u = s as f64 - offset;
        let v = if u <= 0.0 {
            g[0]
        } else if u >= last as f64 {
            g[last]
        } else {
            let i = u.floor() as usize;
            let f = u - i as f64;
            g[i] * (1.0 - f) + g[i + 1] * f
        };
        v / period as f64
    };
    let mut trend = Vec::with_capacity(n);
    let mut level = 0.0;
    trend.push(level);
    for s in 0..n - 1 {
        level += slope(s);
        trend.push(level);
    }
    trend
}

/// Phase-wise robust smoother followed by per-cycle centring.
pub fn nonlocal_seasonal(detrended: &[f64], period: usize, params: &StlParams) -> Result<Vec<f64>> {
    check_period(period, detrended.len())?;
    params.check()?;
    let sigma = params.nonlocal_sigma.resolve(|| auto_sigma(detrended, period));
    let mut s = nonlocal_filter(detrended, period, params.neighbor_cycles, sigma);
    center_cycles(&mut s, period);
    Ok(s)
}

pub fn fast_robust_stl(series: &TimeSeries, periods: &PeriodSet, params: &StlParams) -> Result<Decomposition> {
    params.check()?;
    let y = &series.values;
    let n = y.len();
    if !periods.is_seasonal || periods.periods.is_empty() {
        return Err(invalid("periods", "seasonal decomposition needs at least one period"));
    }
    for &p in &periods.periods {
        check_period(p, n)?;
    }
    let mut order = periods.periods.clone();
    order.sort_unstable_by(|a, b| b.cmp(a));
    let big = order[0];

    let denoised = bilateral_denoise(series, params)?;
    let d = seasonal_difference(&denoised, big)?;
    let (g, diag) = super::lad_trend_with_diagnostics(&d, params)?;
    let mut trend = integrate_trend_differences(&g, big, n);
    let level = stats::median(&y.iter().zip(&trend).map(|(a, b)| a - b).collect::<Vec<_>>());
    for v in &mut trend {
        *v += level;
    }

    let source = if params.seasonal_on_denoised { &denoised } else { y };
    let mut remainder: Vec<f64> = source.iter().zip(&trend).map(|(a, b)| a - b).collect();
    let mut seasonals = Vec::with_capacity(order.len());
    for &p in &order {
        let s = nonlocal_seasonal(&remainder, p, params)?;
        for (r, v) in remainder.iter_mut().zip(&s) {
            *r -= v;
        }
        seasonals.push(s);
    }
    let mut dec = Decomposition::from_components(y, trend, seasonals, order);
    dec.solver = Some(diag);
    Ok(dec)
}

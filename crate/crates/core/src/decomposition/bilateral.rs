use crate::esd::robust_scale_with_fallback;
use crate::stats;

/// Edge-preserving smoother: each output is a weighted mean of the inputs
/// within `half_width`, weighted by index distance and value similarity.
/// `sigma_i == 0` keeps only neighbours with exactly equal values.
pub(crate) fn bilateral(y: &[f64], half_width: usize, sigma_d: f64, sigma_i: f64) -> Vec<f64> {
    let n = y.len();
    let spatial: Vec<f64> = (0..=half_width)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma_d * sigma_d)).exp())
        .collect();
    let inv_2si2 = if sigma_i > 0.0 { 1.0 / (2.0 * sigma_i * sigma_i) } else { 0.0 };
    (0..n)
        .map(|t| {
            let lo = t.saturating_sub(half_width);
            let hi = (t + half_width).min(n - 1);
            let (mut num, mut den) = (0.0, 0.0);
            let (mut wmin, mut wmax) = (y[t], y[t]);
            for j in lo..=hi {
                let diff = y[j] - y[t];
                let wr = if sigma_i > 0.0 {
                    (-diff * diff * inv_2si2).exp()
                } else if diff == 0.0 {
                    1.0
                } else {
                    0.0
                };
                let w = spatial[t.abs_diff(j)] * wr;
                num += w * diff;
                den += w;
                wmin = wmin.min(y[j]);
                wmax = wmax.max(y[j]);
            }
            // den ≥ the self weight of 1; offsetting by y[t] keeps constant
            // stretches exact, the clamp removes rounding spill
            (y[t] + num / den).clamp(wmin, wmax)
        })
        .collect()
}

/// Default intensity bandwidth: twice the robust scale of the first
/// differences, or 0 when the series has no variation at all.
pub(crate) fn auto_sigma_i(y: &[f64]) -> f64 {
    let d: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    if d.len() < 2 {
        return 0.0;
    }
    let s = robust_scale_with_fallback(&d).unwrap_or(0.0);
    if s > 0.0 {
        return 2.0 * s;
    }
    // mostly-flat series with a few jumps
    2.0 * stats::MAD_SCALE * stats::mad(y)
}

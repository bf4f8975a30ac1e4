use crate::esd::robust_scale_with_fallback;
use crate::stats;

/// Same-phase smoother: for each `t`, a similarity-weighted mean of the
/// samples `t ± m·period` (`m = 1..=k`, clipped) together with `t` itself.
///
/// Similarity is measured against the median of that same-phase set rather
/// than against `x[t]`, so an isolated corrupted sample is pulled back to
/// its cycle-mates instead of anchoring its own weights. `sigma == 0` keeps
/// only samples equal to the median.
pub(crate) fn nonlocal_filter(x: &[f64], period: usize, k: usize, sigma: f64) -> Vec<f64> {
    let n = x.len();
    let inv = if sigma > 0.0 { 1.0 / (2.0 * sigma * sigma) } else { 0.0 };
    let mut phase = Vec::with_capacity(2 * k + 1);
    (0..n)
        .map(|t| {
            phase.clear();
            phase.push(x[t]);
            for m in 1..=k {
                if let Some(j) = t.checked_sub(m * period) {
                    phase.push(x[j]);
                }
                if t + m * period < n {
                    phase.push(x[t + m * period]);
                }
            }
            let reference = stats::median(&phase);
            let (mut num, mut den) = (0.0, 0.0);
            for &v in &phase {
                let d = v - reference;
                let w = if sigma > 0.0 {
                    (-d * d * inv).exp()
                } else if d == 0.0 {
                    1.0
                } else {
                    0.0
                };
                num += w * (v - x[t]);
                den += w;
            }
            if den > 0.0 {
                x[t] + num / den
            } else {
                // no sample sits on the median (even-sized set, σ = 0)
                reference
            }
        })
        .collect()
}

/// Subtracts the mean of every aligned cycle `[jp, (j+1)p)`; a trailing
/// partial cycle uses the mean of the last `p` input samples.
pub(crate) fn center_cycles(s: &mut [f64], period: usize) {
    let n = s.len();
    let full = n / period;
    let tail_mean = (full * period < n).then(|| stats::mean(&s[n - period..]));
    for j in 0..full {
        let block = &mut s[j * period..(j + 1) * period];
        let mean = stats::mean(block);
        for v in block {
            *v -= mean;
        }
    }
    if let Some(mean) = tail_mean {
        for v in &mut s[full * period..] {
            *v -= mean;
        }
    }
}

/// Default similarity bandwidth: twice the robust scale of the lag-`period`
/// differences.
pub(crate) fn auto_sigma(x: &[f64], period: usize) -> f64 {
    let d: Vec<f64> = (0..x.len() - period).map(|t| x[t + period] - x[t]).collect();
    if d.len() < 2 {
        return 0.0;
    }
    2.0 * robust_scale_with_fallback(&d).unwrap_or(0.0)
}

//! Small order-statistic helpers shared across modules.

/// Gaussian consistency factor for the median absolute deviation.
pub const MAD_SCALE: f64 = 1.4826;

/// Median; even lengths average the two central order statistics.
/// Returns NaN for an empty slice.
pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    median_in_place(&mut v)
}

/// Median that reorders `v` in the process.
pub fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    let mid = n / 2;
    let (lo, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *m;
    if n % 2 == 1 {
        upper
    } else {
        let lower = lo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Raw median absolute deviation around the median (no scale factor).
pub fn mad(x: &[f64]) -> f64 {
    let m = median(x);
    let mut dev: Vec<f64> = x.iter().map(|v| (v - m).abs()).collect();
    median_in_place(&mut dev)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_std(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Centered running median with a truncated window at the edges.
pub fn running_median(x: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let n = x.len();
    let mut buf = Vec::with_capacity(width);
    (0..n)
        .map(|t| {
            buf.clear();
            buf.extend_from_slice(&x[t.saturating_sub(half)..(t + half + 1).min(n)]);
            median_in_place(&mut buf)
        })
        .collect()
}

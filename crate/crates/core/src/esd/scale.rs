//! The `Sn` scale estimator of Rousseeuw and Croux.
//!
//! `Sn = c · lomed_i himed_j |x_i − x_j|`. The inner high median runs over all
//! `j` (the zero at `j = i` included), which is the `⌊n/2⌋`-th smallest of the
//! `n − 1` off-diagonal differences; the outer low median is the
//! `⌊(n+1)/2⌋`-th smallest of the `n` inner values.

use crate::error::{Error, Result};
use crate::stats;

/// Consistency constant making `Sn` unbiased for the Gaussian σ.
pub const SN_CONSTANT: f64 = 1.1926;

pub fn robust_scale_s(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort(n));
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let k = n / 2;
    let mut inner: Vec<f64> = (0..n).map(|i| inner_order_stat(&s, i, k)).collect();
    let rank = (n + 1) / 2;
    let (_, v, _) = inner.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(SN_CONSTANT * *v)
}

/// k-th smallest (1-based) of `|s[i] − s[j]|`, `j ≠ i`, with `s` sorted.
///
/// Differences to the left and right of `i` form two ascending runs, so this
/// is a k-th-of-two-sorted-arrays search.
fn inner_order_stat(s: &[f64], i: usize, k: usize) -> f64 {
    let left = |j: usize| s[i] - s[i - 1 - j];
    let right = |j: usize| s[i + 1 + j] - s[i];
    let na = i;
    let nb = s.len() - 1 - i;
    // number of elements taken from the left run
    let mut lo = k.saturating_sub(nb);
    let mut hi = k.min(na);
    while lo < hi {
        let a = (lo + hi) / 2;
        let b = k - a;
        // too few from the left if the next left element is below the last right one
        if a < na && b > 0 && left(a) < right(b - 1) {
            lo = a + 1;
        } else {
            hi = a;
        }
    }
    let a = lo;
    let b = k - a;
    match (a, b) {
        (0, _) => right(b - 1),
        (_, 0) => left(a - 1),
        _ => left(a - 1).max(right(b - 1)),
    }
}

/// Scale used by the robust ESD: `Sn`, falling back to the normalised MAD
/// when `Sn` is zero. A zero return means both estimators collapsed.
pub fn robust_scale_with_fallback(x: &[f64]) -> Result<f64> {
    let s = robust_scale_s(x)?;
    if s > 0.0 {
        return Ok(s);
    }
    Ok(stats::MAD_SCALE * stats::mad(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Direct quadratic evaluation of the same definition.
    fn brute(x: &[f64]) -> f64 {
        let n = x.len();
        let mut inner: Vec<f64> = (0..n)
            .map(|i| {
                let mut d: Vec<f64> = (0..n).map(|j| (x[i] - x[j]).abs()).collect();
                d.sort_by(f64::total_cmp);
                d[n / 2] // himed incl. the zero
            })
            .collect();
        inner.sort_by(f64::total_cmp);
        SN_CONSTANT * inner[(n + 1) / 2 - 1]
    }

    #[test]
    fn worked_examples() {
        assert_eq!(robust_scale_s(&[0.0; 4]).unwrap(), 0.0);
        assert_eq!(robust_scale_s(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), 1.1926);
        assert_eq!(robust_scale_s(&[3.0]), Err(Error::TooShort(1)));
    }

    #[test]
    fn matches_quadratic_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..60 {
            for _ in 0..20 {
                let x: Vec<f64> = (0..n)
                    .map(|_| {
                        let v: f64 = StandardNormal.sample(&mut rng);
                        // coarse rounding exercises ties
                        if n % 3 == 0 { v.round() } else { v }
                    })
                    .collect();
                assert_eq!(robust_scale_s(&x).unwrap(), brute(&x), "{x:?}");
            }
        }
    }

    #[test]
    fn gaussian_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = robust_scale_s(&x).unwrap();
        assert!((0.95..=1.05).contains(&s), "{s}");
    }

    #[test]
    fn fallback_to_mad() {
        // more than half identical: Sn collapses, MAD may too
        let x = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0];
        assert_eq!(robust_scale_s(&x).unwrap(), 0.0);
        assert_eq!(robust_scale_with_fallback(&x).unwrap(), 0.0);
        let x = [0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(robust_scale_with_fallback(&x).unwrap() > 0.0);
    }
}

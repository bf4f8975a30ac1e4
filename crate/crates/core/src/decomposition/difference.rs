use crate::error::{Error, Result};

/// `out[i] = x[i+1] − x[i]`.
pub fn first_difference(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::TooShort(x.len()));
    }
    Ok(x.windows(2).map(|w| w[1] - w[0]).collect())
}

/// `out[i] = x[i+2] − 2x[i+1] + x[i]`.
pub fn second_difference(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 3 {
        return Err(Error::TooShort(x.len()));
    }
    Ok(x.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect())
}

/// `out[t] = x[t+T] − x[t]` for `2 ≤ T ≤ n/2`.
pub fn seasonal_difference(x: &[f64], period: usize) -> Result<Vec<f64>> {
    check_period(period, x.len())?;
    Ok((0..x.len() - period).map(|t| x[t + period] - x[t]).collect())
}

pub(crate) fn check_period(period: usize, n: usize) -> Result<()> {
    if period < 2 || period > n / 2 {
        return Err(Error::PeriodOutOfRange {
            period,
            max: n / 2,
        });
    }
    Ok(())
}

/// `D₁ᵀ v` for `v` of length `n − 1`.
pub(crate) fn first_difference_t(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, &vi) in v.iter().enumerate() {
        out[i] -= vi;
        out[i + 1] += vi;
    }
    out
}

/// `D₂ᵀ v` for `v` of length `n − 2`.
pub(crate) fn second_difference_t(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, &vi) in v.iter().enumerate() {
        out[i] += vi;
        out[i + 1] -= 2.0 * vi;
        out[i + 2] += vi;
    }
    out
}

fn huber_rho(u: f64, gamma: f64) -> f64 {
    let a = u.abs();
    if a <= gamma {
        0.5 * u * u
    } else {
        gamma * a - 0.5 * gamma * gamma
    }
}

/// `Σ ρ_γ(r_i)`: quadratic inside `|u| ≤ γ`, linear outside.
pub fn huber_loss(r: &[f64], gamma: f64) -> f64 {
    r.iter().map(|&u| huber_rho(u, gamma)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_differences() {
        assert_eq!(first_difference(&[1.0, 3.0, 6.0]).unwrap(), vec![2.0, 3.0]);
        assert_eq!(first_difference(&[4.0; 5]).unwrap(), vec![0.0; 4]);
        assert_eq!(first_difference(&[0.0, 1.0, 0.0, 1.0]).unwrap(), vec![1.0, -1.0, 1.0]);
        assert_eq!(first_difference(&[1.0]), Err(Error::TooShort(1)));
    }

    #[test]
    fn second_differences() {
        assert_eq!(second_difference(&[0.0, 1.0, 2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(second_difference(&[0.0, 0.0, 1.0]).unwrap(), vec![1.0]);
        let sq: Vec<f64> = (0..5).map(|t| (t * t) as f64).collect();
        assert_eq!(second_difference(&sq).unwrap(), vec![2.0, 2.0, 2.0]);
        assert_eq!(second_difference(&[1.0, 2.0]), Err(Error::TooShort(2)));
    }

    #[test]
    fn transposes_match_dense_products() {
        let v = [0.5, -1.0, 2.0, 3.5];
        // <D x, v> == <x, Dᵀ v>
        let x = [1.0, -2.0, 0.25, 4.0, 7.0];
        let dx = first_difference(&x).unwrap();
        let lhs: f64 = dx.iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = first_difference_t(&v, 5).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
        let x = [1.0, -2.0, 0.25, 4.0, 7.0, 1.5];
        let dx = second_difference(&x).unwrap();
        let lhs: f64 = dx.iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = second_difference_t(&v, 6).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn seasonal_differences() {
        let per: Vec<f64> = (0..40).map(|t| [1.0, 5.0, -2.0, 0.5][t % 4]).collect();
        assert!(seasonal_difference(&per, 4).unwrap().iter().all(|&v| v == 0.0));
        let ramp: Vec<f64> = (0..40).map(|t| 0.5 * t as f64).collect();
        assert_eq!(seasonal_difference(&ramp, 7).unwrap(), vec![3.5; 33]);
        assert_eq!(
            seasonal_difference(&ramp, 21),
            Err(Error::PeriodOutOfRange { period: 21, max: 20 })
        );
        assert!(seasonal_difference(&ramp, 1).is_err());
    }

    #[test]
    fn huber_branches() {
        assert_eq!(huber_loss(&[0.0, 0.0], 1.3), 0.0);
        assert_eq!(huber_loss(&[1.0], 2.0), 0.5);
        assert_eq!(huber_loss(&[5.0], 2.0), 8.0);
        assert_eq!(huber_loss(&[-5.0, 1.0], 2.0), 8.5);
    }
}

mod common;

use common::{brute_esd, primal_dual, Loss};
use lightesd::decomposition::{auto_huber_gamma, lad_trend, robust_trend, RobustTrendParams, StlParams};
use lightesd::esd::improved_esd;
use lightesd::{TimeSeries, Tuning};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let slope: f64 = rng.random_range(-0.5..0.5);
    let amp: f64 = rng.random_range(0.0..5.0);
    let mut y: Vec<f64> = (0..n)
        .map(|t| {
            let e: f64 = StandardNormal.sample(rng);
            slope * t as f64 + amp * (t as f64 / 11.0).sin() + e
        })
        .collect();
    for _ in 0..rng.random_range(0..4) {
        let i = rng.random_range(0..n);
        y[i] += rng.random_range(-30.0..30.0);
    }
    y
}

#[test]
fn robust_trend_reaches_the_reference_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..12 {
        let n = rng.random_range(20..=200);
        let y = series(&mut rng, n);
        let gamma = auto_huber_gamma(&y);
        let params = RobustTrendParams {
            huber_gamma: Tuning::Fixed(gamma),
            max_iters: 5000,
            tol_primal: 1e-9,
            tol_dual: 1e-9,
            ..Default::default()
        };
        let ours = robust_trend(&TimeSeries::new(y.clone()), &params).unwrap();
        let reference = primal_dual(&y, Loss::Huber(gamma), 1.0, 10.0, 40_000);
        let a = common::huber_objective(&y, &ours.trend, gamma, 1.0, 10.0);
        let b = common::huber_objective(&y, &reference, gamma, 1.0, 10.0);
        assert!(a <= b * (1.0 + 1e-3) + 1e-6, "case {case} n={n}: admm {a} vs reference {b}");
        // the default iteration budget already lands close
        let quick = robust_trend(
            &TimeSeries::new(y.clone()),
            &RobustTrendParams {
                huber_gamma: Tuning::Fixed(gamma),
                ..Default::default()
            },
        )
        .unwrap();
        let c = common::huber_objective(&y, &quick.trend, gamma, 1.0, 10.0);
        assert!(c <= b * 1.01 + 1e-6, "case {case}: default budget {c} vs {b}");
    }
}

#[test]
fn lad_reaches_the_reference_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = StlParams {
        lad_max_iters: 5000,
        lad_tol: 1e-9,
        ..Default::default()
    };
    for case in 0..12 {
        let n = rng.random_range(20..=200);
        let x = series(&mut rng, n);
        let ours = lad_trend(&x, &p).unwrap();
        let reference = primal_dual(&x, Loss::Absolute, p.lad_lambda1, p.lad_lambda2, 40_000);
        let a = common::lad_objective(&x, &ours, 1.0, 10.0);
        let b = common::lad_objective(&x, &reference, 1.0, 10.0);
        assert!(a <= b * (1.0 + 1e-3) + 1e-6, "case {case} n={n}: admm {a} vs reference {b}");
    }
}

#[test]
fn esd_matches_brute_force_on_continuous_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let n = rng.random_range(10..60);
        let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..rng.random_range(0..5) {
            let i = rng.random_range(0..n);
            x[i] *= rng.random_range(3.0..20.0);
        }
        let a_max = rng.random_range(1..=n / 3);
        let ours = improved_esd(&x, 0.05, a_max).unwrap();
        let oracle = brute_esd(&x, 0.05, a_max);
        assert_eq!(ours.stats.len(), oracle.len());
        for (s, o) in ours.stats.iter().zip(&oracle) {
            assert_eq!(s.candidate_index, o.candidate);
            assert_eq!(s.rejected, o.rejected);
            assert!((s.r_value - o.r).abs() <= 1e-9 * o.r.max(1.0));
            assert!((s.lambda_value - o.lambda).abs() <= 1e-6);
        }
    }
}

//! Independent reference implementations used as test oracles. Nothing here
//! calls into the crate's numerical code.

#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, StudentsT};

const SN_C: f64 = 1.1926;
const MAD_C: f64 = 1.4826;

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn median(x: &[f64]) -> f64 {
    let v = sorted(x);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Straight from the definition: for each i the high median of all n
/// distances (self included), then the low median of those.
pub fn sn(x: &[f64]) -> f64 {
    let n = x.len();
    let inner: Vec<f64> = x
        .iter()
        .map(|xi| {
            let d = sorted(&x.iter().map(|xj| (xi - xj).abs()).collect::<Vec<_>>());
            d[n / 2] // rank ⌊n/2⌋+1, 1-based
        })
        .collect();
    SN_C * sorted(&inner)[(n + 1) / 2 - 1]
}

pub fn mad(x: &[f64]) -> f64 {
    let m = median(x);
    MAD_C * median(&x.iter().map(|v| (v - m).abs()).collect::<Vec<_>>())
}

pub fn critical(n: usize, l: usize, alpha: f64) -> f64 {
    let m = (n - l) as f64;
    let p = 1.0 - alpha / (2.0 * m);
    let t = StudentsT::new(0.0, 1.0, m - 2.0).unwrap().inverse_cdf(p);
    t * (m - 1.0) / ((m - 2.0 + t * t) * m).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStep {
    pub candidate: usize,
    pub r: f64,
    pub lambda: f64,
    pub rejected: bool,
}

/// Generalized ESD with median / `Sn`, written as plainly as possible.
pub fn brute_esd(x: &[f64], alpha: f64, a_max: usize) -> Vec<OracleStep> {
    let n = x.len();
    let mut alive: Vec<bool> = vec![true; n];
    let mut steps = Vec::new();
    for l in 0..a_max {
        let idx: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        let vals: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let med = median(&vals);
        if vals.iter().all(|&v| v == med) {
            break;
        }
        let mut s = sn(&vals);
        if s == 0.0 {
            s = mad(&vals);
        }
        let mut best = idx[0];
        for &i in &idx {
            if (x[i] - med).abs() > (x[best] - med).abs() {
                best = i;
            }
        }
        let dev = (x[best] - med).abs();
        let r = if s > 0.0 { dev / s } else { f64::INFINITY };
        steps.push(OracleStep {
            candidate: best,
            r,
            lambda: critical(n, l, alpha),
            rejected: false,
        });
        alive[best] = false;
    }
    let last = steps.iter().rposition(|s| s.r > s.lambda);
    if let Some(last) = last {
        for s in &mut steps[..=last] {
            s.rejected = true;
        }
    }
    steps
}

fn d1(t: &[f64]) -> Vec<f64> {
    t.windows(2).map(|w| w[1] - w[0]).collect()
}

fn d2(t: &[f64]) -> Vec<f64> {
    t.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect()
}

fn d1t(z: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, v) in z.iter().enumerate() {
        out[i] -= v;
        out[i + 1] += v;
    }
    out
}

fn d2t(z: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, v) in z.iter().enumerate() {
        out[i] += v;
        out[i + 1] -= 2.0 * v;
        out[i + 2] += v;
    }
    out
}

pub fn penalty(t: &[f64], l1: f64, l2: f64) -> f64 {
    l1 * d1(t).iter().map(|v| v.abs()).sum::<f64>() + l2 * d2(t).iter().map(|v| v.abs()).sum::<f64>()
}

pub fn huber(u: f64, g: f64) -> f64 {
    if u.abs() <= g {
        0.5 * u * u
    } else {
        g * u.abs() - 0.5 * g * g
    }
}

pub fn huber_objective(y: &[f64], t: &[f64], g: f64, l1: f64, l2: f64) -> f64 {
    y.iter().zip(t).map(|(a, b)| huber(a - b, g)).sum::<f64>() + penalty(t, l1, l2)
}

pub fn lad_objective(x: &[f64], g: &[f64], l1: f64, l2: f64) -> f64 {
    x.iter().zip(g).map(|(a, b)| (a - b).abs()).sum::<f64>() + penalty(g, l1, l2)
}

#[derive(Clone, Copy)]
pub enum Loss {
    Huber(f64),
    Absolute,
}

/// Chambolle–Pock primal–dual iteration for
/// `loss(y − t) + λ₁‖D₁t‖₁ + λ₂‖D₂t‖₁`. Returns the best iterate found.
pub fn primal_dual(y: &[f64], loss: Loss, l1: f64, l2: f64, iters: usize) -> Vec<f64> {
    let n = y.len();
    // τσ‖[D₁; D₂]‖² < 1 with ‖·‖² ≤ 4 + 16
    let tau = 0.95 / 20f64.sqrt();
    let sigma = tau;
    let obj = |t: &[f64]| match loss {
        Loss::Huber(g) => huber_objective(y, t, g, l1, l2),
        Loss::Absolute => lad_objective(y, t, l1, l2),
    };
    let mut t = y.to_vec();
    let mut bar = t.clone();
    let mut z1 = vec![0.0; n - 1];
    let mut z2 = vec![0.0; n.saturating_sub(2)];
    let mut best = t.clone();
    let mut best_obj = obj(&t);
    for _ in 0..iters {
        for (z, v) in z1.iter_mut().zip(d1(&bar)) {
            *z = (*z + sigma * v).clamp(-l1, l1);
        }
        for (z, v) in z2.iter_mut().zip(d2(&bar)) {
            *z = (*z + sigma * v).clamp(-l2, l2);
        }
        let a = d1t(&z1, n);
        let b = d2t(&z2, n);
        let prev = t.clone();
        for i in 0..n {
            let v = t[i] - tau * (a[i] + b[i]);
            let w0 = y[i] - v;
            let w = match loss {
                Loss::Huber(g) => {
                    let q = w0 / (1.0 + tau);
                    if q.abs() <= g {
                        q
                    } else {
                        w0 - tau * g * w0.signum()
                    }
                }
                Loss::Absolute => w0.signum() * (w0.abs() - tau).max(0.0),
            };
            t[i] = y[i] - w;
        }
        for i in 0..n {
            bar[i] = 2.0 * t[i] - prev[i];
        }
        let o = obj(&t);
        if o < best_obj {
            best_obj = o;
            best.copy_from_slice(&t);
        }
    }
    best
}

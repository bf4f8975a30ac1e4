//! ADMM solvers for the two trend objectives:
//!
//! * Huber fit: `h_γ(y − t) + λ₁‖D₁t‖₁ + λ₂‖D₂t‖₁`
//! * LAD fit:   `‖x − g‖₁ + λ₁‖D₁g‖₁ + λ₂‖D₂g‖₁`
//!
//! Both split `z₁ = D₁t`, `z₂ = D₂t`. The Huber term is handled by
//! majorization: each sweep replaces it with the quadratic
//! `½Σ wᵢ(yᵢ − tᵢ)²`, `wᵢ = min(1, γ/|rᵢ|)`, so the `t`-step is one
//! pentadiagonal SPD solve. The LAD fit adds a third split `z₀ = g` whose
//! proximal step is a shifted soft-threshold.

use super::difference::{first_difference_t, huber_loss, second_difference_t};
use crate::types::SolverDiagnostics;

/// ρ is rebalanced every iteration at first, then every `RHO_ADAPT_EVERY`.
const RHO_ADAPT_ITERS: usize = 50;
const RHO_ADAPT_EVERY: usize = 10;
const RHO_MU: f64 = 10.0;
const RHO_TAU: f64 = 2.0;
/// Over-relaxation of the split updates.
const RELAX: f64 = 1.6;

pub(crate) struct AdmmSettings {
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho: f64,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
}

/// Symmetric positive definite matrix with bandwidth 2, factored in place
/// as `L Lᵀ`.
pub(crate) struct Penta {
    d0: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Penta {
    /// `diag + ρ (D₁ᵀD₁ + D₂ᵀD₂)`.
    fn assemble(diag: &[f64], rho: f64) -> Self {
        let n = diag.len();
        let mut d0 = diag.to_vec();
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            d0[i] += rho;
            d0[i + 1] += rho;
            d1[i + 1] -= rho;
        }
        const C: [f64; 3] = [1.0, -2.0, 1.0];
        for i in 0..n.saturating_sub(2) {
            for a in 0..3 {
                d0[i + a] += rho * C[a] * C[a];
                for b in 0..a {
                    let v = rho * C[a] * C[b];
                    if a - b == 1 {
                        d1[i + a] += v;
                    } else {
                        d2[i + a] += v;
                    }
                }
            }
        }
        let mut m = Self { d0, d1, d2 };
        m.factor();
        m
    }

    fn factor(&mut self) {
        let n = self.d0.len();
        for i in 0..n {
            let l2 = if i >= 2 { self.d2[i] / self.d0[i - 2] } else { 0.0 };
            let l1 = if i >= 1 {
                let cross = if i >= 2 { l2 * self.d1[i - 1] } else { 0.0 };
                (self.d1[i] - cross) / self.d0[i - 1]
            } else {
                0.0
            };
            let diag = self.d0[i] - l1 * l1 - l2 * l2;
            self.d0[i] = diag.max(f64::MIN_POSITIVE).sqrt();
            self.d1[i] = l1;
            self.d2[i] = l2;
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n {
            let mut v = b[i];
            if i >= 1 {
                v -= self.d1[i] * b[i - 1];
            }
            if i >= 2 {
                v -= self.d2[i] * b[i - 2];
            }
            b[i] = v / self.d0[i];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.d1[i + 1] * b[i + 1];
            }
            if i + 2 < n {
                v -= self.d2[i + 2] * b[i + 2];
            }
            b[i] = v / self.d0[i];
        }
    }
}

fn soft(v: f64, k: f64) -> f64 {
    if v > k {
        v - k
    } else if v < -k {
        v + k
    } else {
        0.0
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn diff1(t: &[f64]) -> Vec<f64> {
    t.windows(2).map(|w| w[1] - w[0]).collect()
}

fn diff2(t: &[f64]) -> Vec<f64> {
    t.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect()
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub(crate) fn penalty(t: &[f64], lambda1: f64, lambda2: f64) -> f64 {
    lambda1 * l1(&diff1(t)) + lambda2 * l1(&diff2(t))
}

pub(crate) fn huber_objective(y: &[f64], t: &[f64], gamma: f64, lambda1: f64, lambda2: f64) -> f64 {
    let r: Vec<f64> = y.iter().zip(t).map(|(a, b)| a - b).collect();
    huber_loss(&r, gamma) + penalty(t, lambda1, lambda2)
}

pub(crate) fn lad_objective(x: &[f64], g: &[f64], lambda1: f64, lambda2: f64) -> f64 {
    x.iter().zip(g).map(|(a, b)| (a - b).abs()).sum::<f64>() + penalty(g, lambda1, lambda2)
}

/// Keeps the lowest-objective iterate seen so far.
struct Best {
    x: Vec<f64>,
    objective: f64,
    trace: Vec<f64>,
}

impl Best {
    fn new(x: Vec<f64>, objective: f64) -> Self {
        Self {
            x,
            objective,
            trace: vec![objective],
        }
    }

    fn offer(&mut self, x: &[f64], objective: f64) {
        if objective < self.objective {
            self.objective = objective;
            self.x.copy_from_slice(x);
            self.trace.push(objective);
        }
    }

    fn finish(self, converged: bool, iterations: usize) -> (Vec<f64>, SolverDiagnostics) {
        (
            self.x,
            SolverDiagnostics {
                converged,
                iterations,
                final_objective: self.objective,
                objective_trace: self.trace,
            },
        )
    }
}

/// The difference-operator split shared by both solvers.
struct Splits {
    z1: Vec<f64>,
    z2: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl Splits {
    fn new(t: &[f64]) -> Self {
        let z1 = diff1(t);
        let z2 = diff2(t);
        Self {
            u1: vec![0.0; z1.len()],
            u2: vec![0.0; z2.len()],
            z1,
            z2,
        }
    }

    /// `D₁ᵀ(z₁ − u₁) + D₂ᵀ(z₂ − u₂)`.
    fn rhs(&self, n: usize) -> Vec<f64> {
        let a: Vec<f64> = self.z1.iter().zip(&self.u1).map(|(z, u)| z - u).collect();
        let b: Vec<f64> = self.z2.iter().zip(&self.u2).map(|(z, u)| z - u).collect();
        let mut out = first_difference_t(&a, n);
        for (o, v) in out.iter_mut().zip(second_difference_t(&b, n)) {
            *o += v;
        }
        out
    }

    /// z- and u-updates. Returns squared primal residual, squared dual
    /// residual (before the ρ factor), ‖Dt‖², ‖z‖² and ‖Dᵀu‖².
    fn update(&mut self, t: &[f64], lambda1: f64, lambda2: f64, rho: f64) -> [f64; 5] {
        let n = t.len();
        let d1 = diff1(t);
        let d2 = diff2(t);
        let mut dz1 = vec![0.0; d1.len()];
        let mut dz2 = vec![0.0; d2.len()];
        let mut primal = 0.0;
        for (i, &d) in d1.iter().enumerate() {
            let h = RELAX * d + (1.0 - RELAX) * self.z1[i];
            let z = soft(h + self.u1[i], lambda1 / rho);
            dz1[i] = z - self.z1[i];
            self.z1[i] = z;
            self.u1[i] += h - z;
            primal += (d - z) * (d - z);
        }
        for (i, &d) in d2.iter().enumerate() {
            let h = RELAX * d + (1.0 - RELAX) * self.z2[i];
            let z = soft(h + self.u2[i], lambda2 / rho);
            dz2[i] = z - self.z2[i];
            self.z2[i] = z;
            self.u2[i] += h - z;
            primal += (d - z) * (d - z);
        }
        let mut dual = first_difference_t(&dz1, n);
        for (o, v) in dual.iter_mut().zip(second_difference_t(&dz2, n)) {
            *o += v;
        }
        let mut dtu = first_difference_t(&self.u1, n);
        for (o, v) in dtu.iter_mut().zip(second_difference_t(&self.u2, n)) {
            *o += v;
        }
        [
            primal,
            norm2(&dual),
            norm2(&d1) + norm2(&d2),
            norm2(&self.z1) + norm2(&self.z2),
            norm2(&dtu),
        ]
    }

    fn rescale_duals(&mut self, factor: f64) {
        for u in self.u1.iter_mut().chain(self.u2.iter_mut()) {
            *u *= factor;
        }
    }
}

struct Stopping {
    converged: bool,
}

/// Residual checks plus residual balancing of ρ early in the run. Returns
/// the (possibly) updated ρ.
#[allow(clippy::too_many_arguments)]
fn check_and_adapt(
    it: usize,
    norms: [f64; 5],
    extra_primal: f64,
    extra_z: f64,
    n: usize,
    p: usize,
    rho: f64,
    s: &AdmmSettings,
    splits: &mut Splits,
    stop: &mut Stopping,
) -> f64 {
    let [primal, dual, dt, z, dtu] = norms;
    let r = (primal + extra_primal).sqrt();
    let d = rho * dual.sqrt();
    let eps_p = s.tol_primal * ((p as f64).sqrt() + dt.sqrt().max((z + extra_z).sqrt()));
    let eps_d = s.tol_dual * ((n as f64).sqrt() + rho * dtu.sqrt());
    if r <= eps_p && d <= eps_d {
        stop.converged = true;
        return rho;
    }
    if it < RHO_ADAPT_ITERS || it % RHO_ADAPT_EVERY == 0 {
        if r > RHO_MU * d {
            splits.rescale_duals(1.0 / RHO_TAU);
            return rho * RHO_TAU;
        }
        if d > RHO_MU * r {
            splits.rescale_duals(RHO_TAU);
            return rho / RHO_TAU;
        }
    }
    rho
}

/// Huber-loss trend. `y.len() ≥ 3`.
pub(crate) fn huber_trend(y: &[f64], gamma: f64, s: &AdmmSettings) -> (Vec<f64>, SolverDiagnostics) {
    let n = y.len();
    let p = 2 * n - 3;
    let mut t = y.to_vec();
    let mut splits = Splits::new(&t);
    let mut rho = s.rho;
    let mut best = Best::new(t.clone(), huber_objective(y, &t, gamma, s.lambda1, s.lambda2));
    let mut stop = Stopping { converged: false };
    let mut iters = 0;
    for it in 0..s.max_iters {
        iters = it + 1;
        let w: Vec<f64> = y
            .iter()
            .zip(&t)
            .map(|(a, b)| {
                let r = (a - b).abs();
                if r <= gamma {
                    1.0
                } else {
                    gamma / r
                }
            })
            .collect();
        let m = Penta::assemble(&w, rho);
        let mut rhs = splits.rhs(n);
        for i in 0..n {
            rhs[i] = w[i] * y[i] + rho * rhs[i];
        }
        m.solve(&mut rhs);
        t = rhs;
        let norms = splits.update(&t, s.lambda1, s.lambda2, rho);
        best.offer(&t, huber_objective(y, &t, gamma, s.lambda1, s.lambda2));
        rho = check_and_adapt(it, norms, 0.0, 0.0, n, p, rho, s, &mut splits, &mut stop);
        if stop.converged {
            break;
        }
    }
    best.finish(stop.converged, iters)
}

/// Least-absolute-deviation trend. `x.len() ≥ 3`.
pub(crate) fn lad_fit(x: &[f64], s: &AdmmSettings) -> (Vec<f64>, SolverDiagnostics) {
    let n = x.len();
    let p = 3 * n - 3;
    let mut g = x.to_vec();
    let mut splits = Splits::new(&g);
    let mut z0 = g.clone();
    let mut u0 = vec![0.0; n];
    let mut rho = s.rho;
    // every block shares ρ, so the system matrix I + D₁ᵀD₁ + D₂ᵀD₂ is fixed
    let m = Penta::assemble(&vec![1.0; n], 1.0);
    let mut best = Best::new(g.clone(), lad_objective(x, &g, s.lambda1, s.lambda2));
    let mut stop = Stopping { converged: false };
    let mut iters = 0;
    for it in 0..s.max_iters {
        iters = it + 1;
        let mut rhs = splits.rhs(n);
        for i in 0..n {
            rhs[i] += z0[i] - u0[i];
        }
        m.solve(&mut rhs);
        g = rhs;
        let mut norms = splits.update(&g, s.lambda1, s.lambda2, rho);
        let (mut primal0, mut dual0, mut z0n) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let h = RELAX * g[i] + (1.0 - RELAX) * z0[i];
            let z = x[i] + soft(h + u0[i] - x[i], 1.0 / rho);
            dual0 += (z - z0[i]) * (z - z0[i]);
            z0[i] = z;
            u0[i] += h - z;
            primal0 += (g[i] - z) * (g[i] - z);
            z0n += z * z;
        }
        norms[1] += dual0;
        norms[2] += norm2(&g);
        norms[4] += norm2(&u0);
        best.offer(&g, lad_objective(x, &g, s.lambda1, s.lambda2));
        let before = rho;
        rho = check_and_adapt(it, norms, primal0, z0n, n, p, rho, s, &mut splits, &mut stop);
        if rho != before {
            let f = before / rho;
            for u in &mut u0 {
                *u *= f;
            }
        }
        if stop.converged {
            break;
        }
    }
    best.finish(stop.converged, iters)
}

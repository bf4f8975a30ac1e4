//! Seeded synthetic benchmark series and anomaly injection.
//!
//! Every draw comes from `ChaCha8Rng::seed_from_u64(seed)`; generators use
//! stream 0 and injection uses stream 1, so a single seed can drive both
//! without the two sequences overlapping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::stats;
use crate::types::TimeSeries;

pub const MIN_GEN_LEN: usize = 64;
/// Period of the seasonal benchmark, in samples.
pub const STD_PERIOD: f64 = 30.5;
/// Boundary samples at each end that never receive an anomaly.
pub const EDGE_EXCLUSION: usize = 2;
pub const MAX_PLACEMENT_DRAWS: usize = 1000;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Coefficients of `κt² + β sin(2πt/30.5) + γε_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonalParams {
    pub kappa: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub fn gen_seasonal_with_params(n: usize, seed: u64) -> Result<(TimeSeries, SeasonalParams)> {
    if n < MIN_GEN_LEN {
        return Err(Error::TooShort(n));
    }
    let mut rng = rng_for(seed, 0);
    let p = SeasonalParams {
        kappa: rng.random_range(0.001..0.01),
        beta: rng.random_range(1.3e4..1.5e4),
        gamma: rng.random_range(1.5e3..3.0e3),
    };
    let values = (0..n)
        .map(|t| {
            let t = t as f64;
            let e: f64 = StandardNormal.sample(&mut rng);
            p.kappa * t * t + p.beta * (2.0 * std::f64::consts::PI * t / STD_PERIOD).sin() + p.gamma * e
        })
        .collect();
    Ok((TimeSeries::new(values), p))
}

/// Quadratic trend plus a 30.5-sample sinusoid plus Gaussian noise.
pub fn gen_seasonal(n: usize, seed: u64) -> Result<TimeSeries> {
    Ok(gen_seasonal_with_params(n, seed)?.0)
}

/// Gaussian random walk starting at exactly 1.0.
pub fn gen_random_walk(n: usize, seed: u64) -> Result<TimeSeries> {
    if n < MIN_GEN_LEN {
        return Err(Error::TooShort(n));
    }
    let mut rng = rng_for(seed, 0);
    let mut y = Vec::with_capacity(n);
    let mut level = 1.0;
    y.push(level);
    for _ in 1..n {
        let e: f64 = StandardNormal.sample(&mut rng);
        level += e;
        y.push(level);
    }
    Ok(TimeSeries::new(y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub n_spikes: usize,
    pub n_dips: usize,
    pub n_collective: usize,
    /// In units of the series standard deviation.
    pub magnitude_range: (f64, f64),
    pub collective_length_range: (usize, usize),
    pub seed: u64,
}

impl InjectionSpec {
    pub fn none(seed: u64) -> Self {
        Self {
            n_spikes: 0,
            n_dips: 0,
            n_collective: 0,
            magnitude_range: (0.5, 6.0),
            collective_length_range: (3, 8),
            seed,
        }
    }

    /// 7 anomalies: 3 spikes, 2 dips, 2 collective.
    pub fn std_preset(seed: u64) -> Self {
        Self {
            n_spikes: 3,
            n_dips: 2,
            n_collective: 2,
            ..Self::none(seed)
        }
    }

    /// 9 anomalies: 4 spikes, 4 dips, 1 collective.
    pub fn rw_preset(seed: u64) -> Self {
        Self {
            n_spikes: 4,
            n_dips: 4,
            n_collective: 1,
            ..Self::none(seed)
        }
    }

    pub fn check(&self) -> Result<()> {
        let (lo, hi) = self.magnitude_range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
            return Err(invalid("magnitude_range", format!("({lo}, {hi}) is not an ordered nonnegative range")));
        }
        let (a, b) = self.collective_length_range;
        if a < 2 || a > b {
            return Err(invalid(
                "collective_length_range",
                format!("({a}, {b}) needs 2 <= min <= max"),
            ));
        }
        Ok(())
    }

    pub fn total_groups(&self) -> usize {
        self.n_spikes + self.n_dips + self.n_collective
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    Spike,
    Dip,
    Collective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyGroup {
    pub kind: AnomalyKind,
    pub start: usize,
    pub length: usize,
    /// Signed peak offset in units of the series standard deviation.
    pub magnitude_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSeries {
    pub series: TimeSeries,
    pub truth_indices: Vec<usize>,
    pub groups: Vec<AnomalyGroup>,
}

/// Adds spikes, dips and half-sine bumps at random, non-overlapping places.
pub fn inject_anomalies(series: &TimeSeries, spec: &InjectionSpec) -> Result<LabeledSeries> {
    spec.check()?;
    let n = series.len();
    let mut values = series.values.clone();
    let sigma = stats::sample_std(&values);
    let mut rng = rng_for(spec.seed, 1);
    let (lo, hi) = spec.magnitude_range;
    let mut taken: Vec<(usize, usize)> = Vec::new();
    let mut groups = Vec::with_capacity(spec.total_groups());

    let kinds = std::iter::repeat_n(AnomalyKind::Spike, spec.n_spikes)
        .chain(std::iter::repeat_n(AnomalyKind::Dip, spec.n_dips))
        .chain(std::iter::repeat_n(AnomalyKind::Collective, spec.n_collective));
    for kind in kinds {
        let length = match kind {
            AnomalyKind::Collective => {
                let (a, b) = spec.collective_length_range;
                rng.random_range(a..=b)
            }
            _ => 1,
        };
        let start = place(&mut rng, n, length, &taken)?;
        taken.push((start, start + length));
        let m = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let signed = match kind {
            AnomalyKind::Spike => m,
            AnomalyKind::Dip => -m,
            AnomalyKind::Collective => {
                if rng.random_bool(0.5) {
                    m
                } else {
                    -m
                }
            }
        };
        let amp = signed * sigma;
        if length == 1 {
            values[start] += amp;
        } else {
            for k in 0..length {
                let shape = (std::f64::consts::PI * (k + 1) as f64 / (length + 1) as f64).sin();
                values[start + k] += amp * shape;
            }
        }
        groups.push(AnomalyGroup {
            kind,
            start,
            length,
            magnitude_sigma: signed,
        });
    }
    let mut truth: Vec<usize> = taken.iter().flat_map(|&(a, b)| a..b).collect();
    truth.sort_unstable();
    Ok(LabeledSeries {
        series: TimeSeries {
            values,
            timestamps: series.timestamps.clone(),
        },
        truth_indices: truth,
        groups,
    })
}

/// Start of a free region of `length` samples, keeping the edge margin and
/// at least one clean sample between regions.
fn place(rng: &mut ChaCha8Rng, n: usize, length: usize, taken: &[(usize, usize)]) -> Result<usize> {
    let first = EDGE_EXCLUSION;
    let end = n.saturating_sub(EDGE_EXCLUSION);
    if end < first + length {
        return Err(Error::PlacementExhausted(0));
    }
    let last_start = end - length;
    for _ in 0..MAX_PLACEMENT_DRAWS {
        let s = rng.random_range(first..=last_start);
        let e = s + length;
        if taken.iter().all(|&(a, b)| e < a || s > b) {
            return Ok(s);
        }
    }
    Err(Error::PlacementExhausted(MAX_PLACEMENT_DRAWS))
}

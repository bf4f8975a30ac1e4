//! Welch PSD estimate and permutation-thresholded period detection.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::types::{DetectorConfig, TimeSeries};

/// Name of the generator behind every seeded draw, echoed in reports.
pub const PRNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), stream = permutation index";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Welch's parabolic window, `1 − t²`.
    #[default]
    Quadratic,
    /// `1 − |t|`.
    Triangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WelchParams {
    /// Samples per segment; `None` means `min(256, n/2)`.
    pub segment_length: Option<usize>,
    pub overlap_frac: f64,
    pub window: Window,
    /// DFT length per segment (zero padded); `None` means the next power of
    /// two at or above four times the segment length.
    pub nfft: Option<usize>,
}

impl Default for WelchParams {
    fn default() -> Self {
        Self {
            segment_length: None,
            overlap_frac: 0.5,
            window: Window::Quadratic,
            nfft: None,
        }
    }
}

impl WelchParams {
    pub fn check(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.overlap_frac) {
            return Err(invalid(
                "welch.overlap_frac",
                format!("{} not in [0, 0.5]", self.overlap_frac),
            ));
        }
        if let Some(l) = self.segment_length {
            if l < 4 {
                return Err(invalid("welch.segment_length", format!("{l} < 4")));
            }
            if let Some(m) = self.nfft {
                if m < l {
                    return Err(invalid("welch.nfft", format!("{m} shorter than segment {l}")));
                }
            }
        }
        Ok(())
    }

    pub fn segment_length_for(&self, n: usize) -> usize {
        self.segment_length.unwrap_or_else(|| 256.min(n / 2))
    }

    pub fn nfft_for(&self, segment_length: usize) -> usize {
        self.nfft
            .unwrap_or_else(|| (4 * segment_length).next_power_of_two())
            .max(segment_length)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    /// Cycles per sample, ascending, DC excluded.
    pub frequencies: Vec<f64>,
    pub psd: Vec<f64>,
}

impl Periodogram {
    pub fn len(&self) -> usize {
        self.psd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psd.is_empty()
    }

    pub fn max_psd(&self) -> f64 {
        self.psd.iter().copied().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        self.psd
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc })
            .0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSet {
    /// Ordered by descending peak PSD.
    pub periods: Vec<usize>,
    pub is_seasonal: bool,
}

impl PeriodSet {
    pub fn nonseasonal() -> Self {
        Self {
            periods: Vec::new(),
            is_seasonal: false,
        }
    }

    pub fn from_periods(periods: Vec<usize>) -> Self {
        Self {
            is_seasonal: !periods.is_empty(),
            periods,
        }
    }

    /// Periods as reported to users: `[1]` marks a nonseasonal series.
    pub fn reported(&self) -> Vec<usize> {
        if self.is_seasonal {
            self.periods.clone()
        } else {
            vec![1]
        }
    }

    pub fn max_period(&self) -> Option<usize> {
        self.periods.iter().copied().max()
    }
}

/// Reusable Welch estimator for one `(n, params)` shape; the permutation
/// loop evaluates hundreds of periodograms of identical length.
pub struct Welch {
    seg_len: usize,
    step: usize,
    nfft: usize,
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl Welch {
    pub fn new(n: usize, params: &WelchParams) -> Result<Self> {
        params.check()?;
        let seg_len = params.segment_length_for(n);
        if seg_len > n {
            return Err(Error::SegmentTooLong {
                segment_length: seg_len,
                n,
            });
        }
        if seg_len < 4 {
            return Err(invalid("welch.segment_length", format!("{seg_len} < 4")));
        }
        let overlap = (params.overlap_frac * seg_len as f64).floor() as usize;
        let step = seg_len - overlap;
        let nfft = params.nfft_for(seg_len);
        let window = make_window(params.window, seg_len);
        let window_power = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        Ok(Self {
            seg_len,
            step,
            nfft,
            window,
            window_power,
            fft,
        })
    }

    pub fn segment_length(&self) -> usize {
        self.seg_len
    }

    pub fn segment_count(&self, n: usize) -> usize {
        (n - self.seg_len) / self.step + 1
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (1..=self.nfft / 2).map(|j| j as f64 / self.nfft as f64).collect()
    }

    /// Averaged one-sided density, DC bin dropped.
    pub fn psd(&self, x: &[f64]) -> Vec<f64> {
        let n_bins = self.nfft / 2;
        let mut acc = vec![0.0; n_bins];
        let mut buf = vec![Complex::new(0.0, 0.0); self.nfft];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let k = self.segment_count(x.len());
        for s in 0..k {
            let seg = &x[s * self.step..s * self.step + self.seg_len];
            let mean = seg.iter().sum::<f64>() / self.seg_len as f64;
            for (b, (v, w)) in buf.iter_mut().zip(seg.iter().zip(&self.window)) {
                *b = Complex::new((v - mean) * w, 0.0);
            }
            for b in &mut buf[self.seg_len..] {
                *b = Complex::new(0.0, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (j, a) in acc.iter_mut().enumerate() {
                let bin = j + 1;
                let mut p = buf[bin].norm_sqr() / self.window_power;
                if 2 * bin != self.nfft {
                    p *= 2.0;
                }
                *a += p;
            }
        }
        for a in &mut acc {
            *a /= k as f64;
        }
        acc
    }

    pub fn periodogram(&self, x: &[f64]) -> Periodogram {
        Periodogram {
            frequencies: self.frequencies(),
            psd: self.psd(x),
        }
    }
}

fn make_window(kind: Window, len: usize) -> Vec<f64> {
    let centre = (len as f64 - 1.0) / 2.0;
    let half = (len as f64 + 1.0) / 2.0;
    (0..len)
        .map(|k| {
            let t = (k as f64 - centre) / half;
            match kind {
                Window::Quadratic => 1.0 - t * t,
                Window::Triangular => 1.0 - t.abs(),
            }
        })
        .collect()
}

pub fn welch_psd(series: &TimeSeries, params: &WelchParams) -> Result<Periodogram> {
    Ok(Welch::new(series.len(), params)?.periodogram(&series.values))
}

fn permutation_maxima(x: &[f64], welch: &Welch, config: &DetectorConfig) -> Vec<f64> {
    let mut buf = x.to_vec();
    (0..config.n_permutations)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64 + 1);
            buf.copy_from_slice(x);
            buf.shuffle(&mut rng);
            welch.psd(&buf).into_iter().fold(0.0, f64::max)
        })
        .collect()
}

/// 1-based rank of the threshold among the sorted permutation maxima.
pub fn threshold_rank(n_permutations: usize, psd_percentile: f64) -> usize {
    let r = (psd_percentile * n_permutations as f64 - 1e-9).ceil() as usize;
    r.clamp(1, n_permutations)
}

fn threshold_from(x: &[f64], welch: &Welch, config: &DetectorConfig) -> f64 {
    let mut maxima = permutation_maxima(x, welch, config);
    maxima.sort_by(f64::total_cmp);
    maxima[threshold_rank(config.n_permutations, config.psd_percentile) - 1]
}

/// PSD level that the maximum of a shuffled copy of the series stays below
/// with probability `psd_percentile`.
pub fn permutation_threshold(series: &TimeSeries, config: &DetectorConfig) -> Result<f64> {
    series.check()?;
    config.check()?;
    let welch = Welch::new(series.len(), &config.welch)?;
    Ok(threshold_from(&series.values, &welch, config))
}

/// Everything the peak scan looked at, for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodScan {
    pub periods: PeriodSet,
    pub threshold: f64,
    /// Strict local maxima above the threshold.
    pub local_maxima_above: usize,
    /// Accepted peaks before de-duplication of integer periods.
    pub accepted_peaks: usize,
    pub peak_psd: Vec<f64>,
}

pub fn detect_periods(series: &TimeSeries, config: &DetectorConfig) -> Result<PeriodSet> {
    Ok(scan_periods(series, config)?.periods)
}

pub fn scan_periods(series: &TimeSeries, config: &DetectorConfig) -> Result<PeriodScan> {
    series.check()?;
    config.check()?;
    let x = &series.values;
    let n = x.len();
    let welch = Welch::new(n, &config.welch)?;
    if x.iter().all(|&v| v == x[0]) {
        return Ok(PeriodScan {
            periods: PeriodSet::nonseasonal(),
            threshold: 0.0,
            local_maxima_above: 0,
            accepted_peaks: 0,
            peak_psd: Vec::new(),
        });
    }
    let threshold = threshold_from(x, &welch, config);
    let pg = welch.periodogram(x);
    let (freq, pow) = (&pg.frequencies, &pg.psd);
    // a segment must hold at least two full cycles; below that the
    // mean-removed segments leak a broad low-frequency hump
    let f_min = 2.0 / welch.segment_length() as f64;

    let mut local_maxima_above = 0;
    let mut temp_psd = f64::NEG_INFINITY;
    let mut accepted: Vec<(usize, f64)> = Vec::new();
    for j in 1..pow.len().saturating_sub(1) {
        if !(pow[j] > threshold && pow[j] > pow[j - 1] && pow[j] > pow[j + 1]) {
            continue;
        }
        local_maxima_above += 1;
        if !config.accept_all_peaks && pow[j] <= temp_psd {
            continue;
        }
        let period = (1.0 / freq[j]).floor() as usize;
        if freq[j] >= f_min - 1e-12 && period >= 2 && period <= n / 2 {
            accepted.push((period, pow[j]));
            temp_psd = pow[j];
        }
    }
    let accepted_peaks = accepted.len();

    let mut best: Vec<(usize, f64)> = Vec::new();
    for (p, psd) in accepted {
        match best.iter_mut().find(|(q, _)| *q == p) {
            Some(slot) if psd > slot.1 => slot.1 = psd,
            Some(_) => {}
            None => best.push((p, psd)),
        }
    }
    best.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.0.cmp(&a.0)));
    Ok(PeriodScan {
        periods: PeriodSet::from_periods(best.iter().map(|b| b.0).collect()),
        threshold,
        local_maxima_above,
        accepted_peaks,
        peak_psd: best.iter().map(|b| b.1).collect(),
    })
}

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::gen::{generate, Preset};
use super::{emit, internal, CliError, SCHEMA_VERSION, SEED_ENV};
use crate::error::{invalid, Result};
use crate::metrics::{adcomp_score, generality, normalize_latency, prf1_windowed, AdcsInput, AdcsWeights};
use crate::periodicity::PRNG_ALGORITHM;
use crate::pipeline::detect;
use crate::stats;
use crate::types::DetectorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Number of seeds per dataset.
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    /// First seed; seed k of the run is `base_seed + k`.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub base_seed: u64,
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.001])]
    pub alphas: Vec<f64>,
    /// Matching tolerance in samples (0 = exact index match).
    #[arg(long, default_value_t = 0)]
    pub window: usize,
    #[arg(long)]
    pub cpu_frac: Option<f64>,
    #[arg(long)]
    pub ram_frac: Option<f64>,
    #[arg(long)]
    pub power_frac: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all available cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub seeds: usize,
    pub base_seed: u64,
    pub n: usize,
    pub alphas: Vec<f64>,
    pub window: usize,
    pub cpu_frac: Option<f64>,
    pub ram_frac: Option<f64>,
    pub power_frac: Option<f64>,
    pub threads: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            seeds: 10,
            base_seed: 0,
            n: 5000,
            alphas: vec![0.05, 0.001],
            window: 0,
            cpu_frac: None,
            ram_frac: None,
            power_frac: None,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: &'static str,
    pub alpha: f64,
    pub seed: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub n_detected: usize,
    pub n_truth: usize,
    pub seasonal: bool,
    pub periods: Vec<usize>,
    pub latency_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub dataset: &'static str,
    pub alpha: f64,
    pub runs: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    pub mean_latency_seconds: f64,
    pub max_latency_seconds: f64,
}

/// One detector variant (one alpha) summarised across datasets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub alpha: f64,
    pub generality_mean_f1: f64,
    pub generality_cv: f64,
    pub mean_latency_seconds: f64,
    pub latency_norm: f64,
    pub adcs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub schema: u32,
    pub version: &'static str,
    pub prng: &'static str,
    pub n: usize,
    pub seeds: usize,
    pub base_seed: u64,
    pub window: usize,
    pub cpu_frac: f64,
    pub ram_frac: f64,
    pub power_frac: f64,
    pub resource_fractions_measured: bool,
    pub warnings: Vec<String>,
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<Aggregate>,
    pub models: Vec<ModelSummary>,
}

impl BenchReport {
    pub fn aggregate(&self, dataset: &str, alpha: f64) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.dataset == dataset && a.alpha == alpha)
    }
}

const DATASETS: [Preset; 2] = [Preset::Std, Preset::Rw];

fn unit_or_zero(name: &'static str, v: Option<f64>) -> Result<f64> {
    let v = v.unwrap_or(0.0);
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(invalid(name, format!("{v} not in [0, 1]")))
    }
}

/// Runs every (dataset, alpha, seed) combination and summarises it.
pub fn run_bench(opts: &BenchOptions) -> Result<BenchReport> {
    if opts.seeds == 0 {
        return Err(invalid("seeds", "must be at least 1"));
    }
    if opts.alphas.is_empty() {
        return Err(invalid("alphas", "at least one alpha is required"));
    }
    for &alpha in &opts.alphas {
        DetectorConfig { alpha, ..Default::default() }.check()?;
    }
    let mut alphas = opts.alphas.clone();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let cpu = unit_or_zero("cpu_frac", opts.cpu_frac)?;
    let ram = unit_or_zero("ram_frac", opts.ram_frac)?;
    let power = unit_or_zero("power_frac", opts.power_frac)?;
    let measured = opts.cpu_frac.is_some() && opts.ram_frac.is_some() && opts.power_frac.is_some();
    let mut warnings = Vec::new();
    if !measured {
        warnings.push(
            "resource fractions were not measured; missing cpu/ram/power fractions default to 0 in ADCS".to_string(),
        );
    }

    let jobs: Vec<(Preset, u64)> = DATASETS
        .iter()
        .flat_map(|&d| (0..opts.seeds as u64).map(move |k| (d, opts.base_seed + k)))
        .collect();
    let threads = if opts.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        opts.threads
    }
    .min(jobs.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Result<Vec<BenchRow>>>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(preset, seed)) = jobs.get(i) else {
                    break;
                };
                let out = run_job(preset, seed, &alphas, opts);
                results.lock().unwrap().push(out);
            });
        }
    });
    let mut rows = Vec::new();
    for r in results.into_inner().unwrap() {
        rows.extend(r?);
    }
    // fixed (dataset, alpha, seed) order regardless of scheduling
    rows.sort_by(|a, b| {
        a.dataset
            .cmp(b.dataset)
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.seed.cmp(&b.seed))
    });

    let mut datasets: Vec<Preset> = DATASETS.to_vec();
    datasets.sort_by_key(|d| d.name());
    let mut aggregates = Vec::new();
    for d in datasets {
        for &alpha in &alphas {
            let sel: Vec<&BenchRow> = rows.iter().filter(|r| r.dataset == d.name() && r.alpha == alpha).collect();
            let col = |f: fn(&BenchRow) -> f64| sel.iter().map(|r| f(r)).collect::<Vec<_>>();
            let lat = col(|r| r.latency_seconds);
            aggregates.push(Aggregate {
                dataset: d.name(),
                alpha,
                runs: sel.len(),
                mean_precision: stats::mean(&col(|r| r.precision)),
                mean_recall: stats::mean(&col(|r| r.recall)),
                mean_f1: stats::mean(&col(|r| r.f1)),
                mean_latency_seconds: stats::mean(&lat),
                max_latency_seconds: lat.iter().copied().fold(0.0, f64::max),
            });
        }
    }

    let mean_lat: Vec<f64> = alphas
        .iter()
        .map(|&a| {
            let l: Vec<f64> = aggregates.iter().filter(|g| g.alpha == a).map(|g| g.mean_latency_seconds).collect();
            stats::mean(&l)
        })
        .collect();
    let lat_norm = normalize_latency(&mean_lat);
    let mut models = Vec::new();
    for (k, &alpha) in alphas.iter().enumerate() {
        let f1s: Vec<f64> = aggregates.iter().filter(|g| g.alpha == alpha).map(|g| g.mean_f1).collect();
        let (mean, cv) = match generality(&f1s) {
            Ok(v) => v,
            // all-zero F1: no consistency to speak of
            Err(crate::Error::ZeroMean) => (0.0, 1.0),
            Err(e) => return Err(e),
        };
        let adcs = adcomp_score(&AdcsInput {
            f1: mean,
            cv,
            latency_norm: lat_norm[k],
            cpu_frac: cpu,
            ram_frac: ram,
            power_frac: power,
            weights: AdcsWeights::default(),
        })?;
        models.push(ModelSummary {
            alpha,
            generality_mean_f1: mean,
            generality_cv: cv,
            mean_latency_seconds: mean_lat[k],
            latency_norm: lat_norm[k],
            adcs,
        });
    }

    Ok(BenchReport {
        schema: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        prng: PRNG_ALGORITHM,
        n: opts.n,
        seeds: opts.seeds,
        base_seed: opts.base_seed,
        window: opts.window,
        cpu_frac: cpu,
        ram_frac: ram,
        power_frac: power,
        resource_fractions_measured: measured,
        warnings,
        rows,
        aggregates,
        models,
    })
}

fn run_job(preset: Preset, seed: u64, alphas: &[f64], opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    let (labeled, _) = generate(preset, opts.n, &preset.injection(seed), seed)?;
    alphas
        .iter()
        .map(|&alpha| {
            let cfg = DetectorConfig {
                alpha,
                seed,
                ..Default::default()
            };
            let report = detect(&labeled.series, &cfg)?;
            let s = prf1_windowed(&report.anomaly_indices, &labeled.truth_indices, opts.window);
            Ok(BenchRow {
                dataset: preset.name(),
                alpha,
                seed,
                precision: s.precision,
                recall: s.recall,
                f1: s.f1,
                tp: s.tp,
                fp: s.fp,
                fn_: s.fn_,
                n_detected: report.anomaly_indices.len(),
                n_truth: labeled.truth_indices.len(),
                seasonal: report.seasonal,
                periods: report.periods_detected,
                latency_seconds: report.timing,
            })
        })
        .collect()
}

fn to_csv(report: &BenchReport) -> std::result::Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "kind", "dataset", "alpha", "seed", "precision", "recall", "f1", "tp", "fp", "fn", "latency_seconds",
        "generality_cv", "adcs",
    ])
    .map_err(internal)?;
    for r in &report.rows {
        w.write_record([
            "run".into(),
            r.dataset.to_string(),
            r.alpha.to_string(),
            r.seed.to_string(),
            r.precision.to_string(),
            r.recall.to_string(),
            r.f1.to_string(),
            r.tp.to_string(),
            r.fp.to_string(),
            r.fn_.to_string(),
            r.latency_seconds.to_string(),
            String::new(),
            String::new(),
        ])
        .map_err(internal)?;
    }
    for a in &report.aggregates {
        w.write_record([
            "aggregate".into(),
            a.dataset.to_string(),
            a.alpha.to_string(),
            String::new(),
            a.mean_precision.to_string(),
            a.mean_recall.to_string(),
            a.mean_f1.to_string(),
            String::new(),
            String::new(),
            String::new(),
            a.mean_latency_seconds.to_string(),
            String::new(),
            String::new(),
        ])
        .map_err(internal)?;
    }
    for m in &report.models {
        w.write_record([
            "model".into(),
            "all".into(),
            m.alpha.to_string(),
            String::new(),
            String::new(),
            String::new(),
            m.generality_mean_f1.to_string(),
            String::new(),
            String::new(),
            String::new(),
            m.mean_latency_seconds.to_string(),
            m.generality_cv.to_string(),
            m.adcs.to_string(),
        ])
        .map_err(internal)?;
    }
    let bytes = w.into_inner().map_err(internal)?;
    String::from_utf8(bytes).map_err(internal)
}

pub fn run(args: &BenchArgs) -> std::result::Result<(), CliError> {
    let opts = BenchOptions {
        seeds: args.seeds,
        base_seed: args.base_seed,
        n: args.n,
        alphas: args.alphas.clone(),
        window: args.window,
        cpu_frac: args.cpu_frac,
        ram_frac: args.ram_frac,
        power_frac: args.power_frac,
        threads: args.threads,
    };
    let report = run_bench(&opts)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let body = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).map_err(internal)?;
            s.push('\n');
            s
        }
        Format::Csv => to_csv(&report)?,
    };
    emit(args.out.as_deref(), &body)
}

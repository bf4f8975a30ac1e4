use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use super::{emit, internal, read_series_csv, CliError, CsvOptions, SCHEMA_VERSION, SEED_ENV};
use crate::periodicity::PRNG_ALGORITHM;
use crate::pipeline::score_trace;
use crate::types::DetectorConfig;

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// CSV file with a `value` column and an optional `timestamp` column.
    #[arg(long)]
    pub input: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.10)]
    pub max_anomaly_frac: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub n_permutations: usize,
    #[arg(long, default_value_t = 0.99)]
    pub psd_percentile: f64,
    /// Keep every significant spectral peak, not only increasingly strong ones.
    #[arg(long)]
    pub accept_all_peaks: bool,
    /// Name of the value column (e.g. for files with several numeric columns).
    #[arg(long)]
    pub value_column: Option<String>,
    #[arg(long, default_value = "timestamp")]
    pub timestamp_column: String,
    /// Full detector configuration as JSON; the flags above override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write index/value/trend/seasonal/residual series as CSV here.
    #[arg(long)]
    pub emit_plot_data: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct DetectReport<'a> {
    schema: u32,
    version: &'static str,
    n: usize,
    anomaly_indices: &'a [usize],
    scores: &'a [f64],
    periods: &'a [usize],
    seasonal: bool,
    alpha: f64,
    max_anomaly_frac: f64,
    seed: u64,
    latency_seconds: f64,
    prng: &'static str,
    config: &'a DetectorConfig,
}

fn build_config(args: &DetectArgs) -> Result<DetectorConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => DetectorConfig::default(),
    };
    cfg.alpha = args.alpha;
    cfg.max_anomaly_frac = args.max_anomaly_frac;
    cfg.seed = args.seed;
    cfg.n_permutations = args.n_permutations;
    cfg.psd_percentile = args.psd_percentile;
    cfg.accept_all_peaks |= args.accept_all_peaks;
    cfg.check()?;
    Ok(cfg)
}

pub fn run(args: &DetectArgs) -> Result<(), CliError> {
    let cfg = build_config(args)?;
    let opts = CsvOptions {
        value_column: args.value_column.clone().unwrap_or_else(|| "value".into()),
        value_column_explicit: args.value_column.is_some(),
        timestamp_column: args.timestamp_column.clone(),
    };
    let series = read_series_csv(&args.input, &opts)?;
    let trace = score_trace(&series, &cfg)?;
    let r = &trace.report;
    let report = DetectReport {
        schema: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        n: series.len(),
        anomaly_indices: &r.anomaly_indices,
        scores: &r.scores,
        periods: &r.periods_detected,
        seasonal: r.seasonal,
        alpha: cfg.alpha,
        max_anomaly_frac: cfg.max_anomaly_frac,
        seed: cfg.seed,
        latency_seconds: r.timing,
        prng: PRNG_ALGORITHM,
        config: &cfg,
    };
    let mut body = serde_json::to_string_pretty(&report).map_err(internal)?;
    body.push('\n');
    emit(args.out.as_deref(), &body)?;

    if let Some(path) = &args.emit_plot_data {
        let dec = crate::decomposition::extract_residual(
            &series,
            &crate::periodicity::PeriodSet::from_periods(if r.seasonal { r.periods_detected.clone() } else { Vec::new() }),
            &cfg,
        )?;
        let mut w = csv::Writer::from_path(path).map_err(internal)?;
        w.write_record(["index", "value", "trend", "seasonal", "residual", "anomaly"])
            .map_err(internal)?;
        for t in 0..series.len() {
            let seasonal: f64 = dec.seasonals.iter().map(|s| s[t]).sum();
            let flag = r.anomaly_indices.binary_search(&t).is_ok() as u8;
            w.write_record([
                t.to_string(),
                series.values[t].to_string(),
                dec.trend[t].to_string(),
                seasonal.to_string(),
                dec.residual[t].to_string(),
                flag.to_string(),
            ])
            .map_err(internal)?;
        }
        w.flush().map_err(internal)?;
    }
    Ok(())
}

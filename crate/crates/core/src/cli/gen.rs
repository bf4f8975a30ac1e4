use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::{internal, CliError, SCHEMA_VERSION, SEED_ENV};
use crate::periodicity::PRNG_ALGORITHM;
use crate::synth::{
    gen_random_walk, gen_seasonal_with_params, inject_anomalies, AnomalyGroup, InjectionSpec, LabeledSeries,
    SeasonalParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Quadratic trend + 30.5-sample seasonality + noise.
    Std,
    /// Gaussian random walk.
    Rw,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Std => "std",
            Preset::Rw => "rw",
        }
    }

    pub fn injection(self, seed: u64) -> InjectionSpec {
        match self {
            Preset::Std => InjectionSpec::std_preset(seed),
            Preset::Rw => InjectionSpec::rw_preset(seed),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; defaults to `<preset>_<seed>.csv`. The truth file is
    /// written next to it as `<name>.truth.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the preset's spike count.
    #[arg(long)]
    pub spikes: Option<usize>,
    #[arg(long)]
    pub dips: Option<usize>,
    #[arg(long)]
    pub collective: Option<usize>,
    /// Magnitude range in units of the series standard deviation.
    #[arg(long)]
    pub mag_low: Option<f64>,
    #[arg(long)]
    pub mag_high: Option<f64>,
    #[arg(long)]
    pub collective_min: Option<usize>,
    #[arg(long)]
    pub collective_max: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Truth<'a> {
    schema: u32,
    preset: Preset,
    n: usize,
    seed: u64,
    prng: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<SeasonalParams>,
    spec: &'a InjectionSpec,
    truth_indices: &'a [usize],
    groups: &'a [AnomalyGroup],
}

/// Generates the preset series and injects its anomaly mix.
pub fn generate(preset: Preset, n: usize, spec: &InjectionSpec, seed: u64) -> crate::Result<(LabeledSeries, Option<SeasonalParams>)> {
    let (base, params) = match preset {
        Preset::Std => {
            let (s, p) = gen_seasonal_with_params(n, seed)?;
            (s, Some(p))
        }
        Preset::Rw => (gen_random_walk(n, seed)?, None),
    };
    Ok((inject_anomalies(&base, spec)?, params))
}

pub fn truth_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.truth.json"))
}

pub fn run(args: &GenArgs) -> Result<(), CliError> {
    let mut spec = args.preset.injection(args.seed);
    if let Some(v) = args.spikes {
        spec.n_spikes = v;
    }
    if let Some(v) = args.dips {
        spec.n_dips = v;
    }
    if let Some(v) = args.collective {
        spec.n_collective = v;
    }
    if let Some(v) = args.mag_low {
        spec.magnitude_range.0 = v;
    }
    if let Some(v) = args.mag_high {
        spec.magnitude_range.1 = v;
    }
    if let Some(v) = args.collective_min {
        spec.collective_length_range.0 = v;
    }
    if let Some(v) = args.collective_max {
        spec.collective_length_range.1 = v;
    }
    let (labeled, params) = generate(args.preset, args.n, &spec, args.seed)?;

    let csv_path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}_{}.csv", args.preset.name(), args.seed)));
    let mut w = csv::Writer::from_path(&csv_path).map_err(internal)?;
    w.write_record(["timestamp", "value"]).map_err(internal)?;
    for (t, v) in labeled.series.values.iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()]).map_err(internal)?;
    }
    w.flush().map_err(internal)?;

    let truth = Truth {
        schema: SCHEMA_VERSION,
        preset: args.preset,
        n: args.n,
        seed: args.seed,
        prng: PRNG_ALGORITHM,
        generator: params,
        spec: &spec,
        truth_indices: &labeled.truth_indices,
        groups: &labeled.groups,
    };
    let mut body = serde_json::to_string_pretty(&truth).map_err(internal)?;
    body.push('\n');
    let tp = truth_path(&csv_path);
    std::fs::write(&tp, body).map_err(|e| internal(format!("{}: {e}", tp.display())))?;
    Ok(())
}

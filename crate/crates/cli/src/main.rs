// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end for PV fleet entropy analytics.
//!
//! Exit codes: 0 clean run, 1 error, 2 run succeeded and flagged at least
//! one site. Automation should branch on the code, not on output text.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pventropy::detect::{
    CorrelationMethod, DEFAULT_CORRELATION_THRESHOLD, DEFAULT_LOCALIZATION_BAND,
};
use pventropy::ingest::{CleanPolicy, CurtailmentPolicy, LoadConfig};
use pventropy::wpe::EmbeddingConfig;

use config::{FileConfig, RunConfig};

#[derive(Parser)]
#[command(
    name = "pventropy",
    version,
    about = "Detects anomalous rooftop PV systems from generation history alone, by correlating \
             each site's rolling weighted-permutation-entropy profile against the regional mean"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: ingest, profile, detect, and report per region
    Analyze(AnalyzeArgs),
    /// Compute WPE profiles only, without detection
    Profile(CommonArgs),
    /// Sweep (d, tau) combinations and summarize per-site WPE distributions
    Tune(TuneArgs),
    /// Generate a synthetic fleet with ground-truth fault labels
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Input generation CSV
    #[arg(long)]
    input: Option<PathBuf>,
    /// TOML config file; command-line flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input layout: long (site_id,postcode,timestamp,power) or wide
    #[arg(long)]
    format: Option<String>,
    /// Sidecar postcode metadata CSV for wide-format inputs
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Expected sampling interval in seconds (validated against the data)
    #[arg(long)]
    interval_secs: Option<u32>,
    /// Embedding dimension d (3..=7)
    #[arg(short = 'd', long)]
    dimension: Option<usize>,
    /// Time delay tau in samples
    #[arg(short = 't', long)]
    delay: Option<usize>,
    /// Window width: samples, or a duration like "3months", "90d"
    #[arg(long)]
    window: Option<String>,
    /// Window stride: samples or a duration, e.g. "1d"
    #[arg(long)]
    stride: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exclude series with more missing points than this
    #[arg(long)]
    max_missing: Option<usize>,
    /// Skip the chronic-curtailment screen
    #[arg(long)]
    no_screen: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Detection rule: fixed (correlation threshold) or iqr
    #[arg(long)]
    rule: Option<String>,
    /// Correlation threshold for the fixed rule
    #[arg(long)]
    threshold: Option<f64>,
    /// Localization band in regional standard deviations
    #[arg(long)]
    band: Option<f64>,
    /// Postcode range forming one region, e.g. "5000-5100"; repeatable.
    /// Without it, all sites form a single region.
    #[arg(long = "region")]
    regions: Vec<String>,
    /// Correlate each site against the mean of the other sites
    #[arg(long)]
    leave_one_out: bool,
    /// Use Spearman rank correlation instead of Pearson
    #[arg(long)]
    spearman: bool,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Embedding dimensions to sweep, comma-separated
    #[arg(long, default_value = "3,4,5,6,7")]
    dims: String,
    /// Time delays to sweep, comma-separated
    #[arg(long, default_value = "1,2,3")]
    taus: String,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML fleet spec; without it, the built-in 23-site reference fleet
    /// (20 healthy, 3 faulted) is generated
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn resolve(common: &CommonArgs, analyze: Option<&AnalyzeArgs>) -> Result<RunConfig> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let input = common
        .input
        .clone()
        .or(file.input.clone())
        .context("no input file: pass --input or set `input` in the config file")?;
    let format = match common.format.as_deref().or(file.format.as_deref()) {
        Some(text) => config::parse_format(text)?,
        None => pventropy::ingest::CsvFormat::Long,
    };
    let dimension = common
        .dimension
        .or(file.dimension)
        .unwrap_or(config::DEFAULT_DIMENSION);
    let delay = common.delay.or(file.delay).unwrap_or(config::DEFAULT_DELAY);
    let threshold = analyze
        .and_then(|a| a.threshold)
        .or(file.threshold)
        .unwrap_or(DEFAULT_CORRELATION_THRESHOLD);
    let rule = match analyze
        .and_then(|a| a.rule.as_deref())
        .or(file.rule.as_deref())
    {
        Some(text) => config::parse_rule(text, threshold)?,
        None => pventropy::detect::DetectionRule::FixedThreshold { theta: threshold },
    };
    let region_specs: Vec<String> = match analyze {
        Some(a) if !a.regions.is_empty() => a.regions.clone(),
        _ => file.regions.clone().unwrap_or_default(),
    };
    let mut curtailment = CurtailmentPolicy::default();
    if let Some(months) = file.curtailment_months {
        curtailment.max_months = months;
    }
    if let Some(eps) = file.curtailment_epsilon {
        curtailment.negative_epsilon = eps;
    }
    if let Some(run) = file.curtailment_min_run {
        curtailment.min_plateau_run = run;
    }
    if let Some(delta) = file.curtailment_delta {
        curtailment.plateau_delta = delta;
    }
    Ok(RunConfig {
        input,
        load: LoadConfig {
            format,
            interval_secs: common.interval_secs.or(file.interval_secs),
            metadata: common.metadata.clone().or(file.metadata.clone()),
        },
        embedding: EmbeddingConfig::new(dimension, delay)?,
        window: common
            .window
            .clone()
            .or(file.window.clone())
            .unwrap_or_else(|| config::DEFAULT_WINDOW.to_string()),
        stride: common
            .stride
            .clone()
            .or(file.stride.clone())
            .unwrap_or_else(|| config::DEFAULT_STRIDE.to_string()),
        rule,
        method: if analyze.map(|a| a.spearman).unwrap_or(false) || file.spearman.unwrap_or(false) {
            CorrelationMethod::Spearman
        } else {
            CorrelationMethod::Pearson
        },
        band: analyze
            .and_then(|a| a.band)
            .or(file.band)
            .unwrap_or(DEFAULT_LOCALIZATION_BAND),
        regions: config::parse_regions(&region_specs)?,
        out: common
            .out
            .clone()
            .or(file.out.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        clean_policy: CleanPolicy {
            max_missing: common
                .max_missing
                .or(file.max_missing)
                .unwrap_or(CleanPolicy::default().max_missing),
        },
        curtailment,
        screen: !(common.no_screen || file.no_screen.unwrap_or(false)),
        leave_one_out: analyze.map(|a| a.leave_one_out).unwrap_or(false)
            || file.leave_one_out.unwrap_or(false),
    })
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .with_context(|| format!("invalid list entry {part:?}"))
        })
        .collect()
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => {
            let cfg = resolve(&args.common, Some(&args))?;
            commands::cmd_analyze(&cfg)
        }
        Command::Profile(common) => {
            let cfg = resolve(&common, None)?;
            commands::cmd_profile(&cfg)
        }
        Command::Tune(args) => {
            let cfg = resolve(&args.common, None)?;
            let dims = parse_list(&args.dims)?;
            let taus = parse_list(&args.taus)?;
            commands::cmd_tune(&cfg, &dims, &taus)
        }
        Command::Synth(args) => commands::cmd_synth(args.spec.as_deref(), &args.out),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

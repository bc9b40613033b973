// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run configuration: defaults, TOML config files, and flag overrides.
//! Values resolve in that order (flags win over the file, the file wins
//! over defaults).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use pventropy::detect::{CorrelationMethod, DetectionRule};
use pventropy::ingest::{CleanPolicy, CsvFormat, CurtailmentPolicy, LoadConfig, PostcodeRange};
use pventropy::wpe::EmbeddingConfig;

/// Default analysis parameters: d=6, tau=3, 3-month windows rolled
/// one day at a time, correlation threshold 0.8, 2-sigma localization band.
pub const DEFAULT_DIMENSION: usize = 6;
pub const DEFAULT_DELAY: usize = 3;
pub const DEFAULT_WINDOW: &str = "3months";
pub const DEFAULT_STRIDE: &str = "1d";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub format: Option<String>,
    pub metadata: Option<PathBuf>,
    pub interval_secs: Option<u32>,
    pub dimension: Option<usize>,
    pub delay: Option<usize>,
    pub window: Option<String>,
    pub stride: Option<String>,
    pub rule: Option<String>,
    pub threshold: Option<f64>,
    pub band: Option<f64>,
    pub regions: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub max_missing: Option<usize>,
    pub no_screen: Option<bool>,
    pub leave_one_out: Option<bool>,
    pub spearman: Option<bool>,
    pub curtailment_months: Option<usize>,
    pub curtailment_epsilon: Option<f64>,
    pub curtailment_min_run: Option<usize>,
    pub curtailment_delta: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }
}

/// Shared flags of the data-consuming subcommands, after merging.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub load: LoadConfig,
    pub embedding: EmbeddingConfig,
    pub window: String,
    pub stride: String,
    pub rule: DetectionRule,
    pub method: CorrelationMethod,
    pub band: f64,
    pub regions: Vec<PostcodeRange>,
    pub out: PathBuf,
    pub clean_policy: CleanPolicy,
    pub curtailment: CurtailmentPolicy,
    pub screen: bool,
    pub leave_one_out: bool,
}

/// Parses a span like "3months", "90d", "2 weeks", or a bare sample count
/// into samples on a grid with `samples_per_day` samples per day.
pub fn parse_span(text: &str, samples_per_day: usize) -> Result<usize> {
    let s = text.trim().to_lowercase().replace(' ', "");
    if let Ok(samples) = s.parse::<usize>() {
        return Ok(samples);
    }
    let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let n: usize = num
        .parse()
        .with_context(|| format!("invalid duration {text:?}"))?;
    let days = match unit {
        "d" | "day" | "days" => n,
        "w" | "week" | "weeks" => 7 * n,
        "m" | "mo" | "month" | "months" => 30 * n,
        _ => {
            bail!("invalid duration {text:?}: units are d/days, w/weeks, m/months, or bare samples")
        }
    };
    Ok(days * samples_per_day)
}

pub fn parse_format(text: &str) -> Result<CsvFormat> {
    match text.to_lowercase().as_str() {
        "long" => Ok(CsvFormat::Long),
        "wide" => Ok(CsvFormat::Wide),
        other => bail!("unknown CSV format {other:?}: expected long or wide"),
    }
}

pub fn parse_rule(text: &str, threshold: f64) -> Result<DetectionRule> {
    match text.to_lowercase().as_str() {
        "fixed" | "threshold" | "fixed_threshold" => {
            Ok(DetectionRule::FixedThreshold { theta: threshold })
        }
        "iqr" | "iqr_outlier" => Ok(DetectionRule::IqrOutlier),
        other => bail!("unknown detection rule {other:?}: expected fixed or iqr"),
    }
}

pub fn parse_regions(specs: &[String]) -> Result<Vec<PostcodeRange>> {
    specs
        .iter()
        .map(|s| PostcodeRange::parse(s).map_err(anyhow::Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_convert_at_five_minute_resolution() {
        assert_eq!(parse_span("3months", 288).unwrap(), 90 * 288);
        assert_eq!(parse_span("3 months", 288).unwrap(), 90 * 288);
        assert_eq!(parse_span("90d", 288).unwrap(), 25_920);
        assert_eq!(parse_span("2w", 288).unwrap(), 14 * 288);
        assert_eq!(parse_span("25920", 288).unwrap(), 25_920);
        assert_eq!(parse_span("1d", 96).unwrap(), 96);
        assert!(parse_span("3parsecs", 288).is_err());
    }

    #[test]
    fn rules_parse_with_threshold() {
        assert_eq!(
            parse_rule("fixed", 0.85).unwrap(),
            DetectionRule::FixedThreshold { theta: 0.85 }
        );
        assert_eq!(parse_rule("iqr", 0.8).unwrap(), DetectionRule::IqrOutlier);
        assert!(parse_rule("voodoo", 0.8).is_err());
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "dimension = 5\nmystery_knob = 3\n").unwrap();
        assert!(FileConfig::load(&path).is_err());
        std::fs::write(&path, "dimension = 5\ndelay = 2\n").unwrap();
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(cfg.dimension, Some(5));
        assert_eq!(cfg.delay, Some(2));
    }
}

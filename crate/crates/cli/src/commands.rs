// SPDX-License-Identifier: MIT OR Apache-2.0

//! Subcommand implementations. Each command computes everything in memory
//! first and only then writes its output files, so a failing run leaves no
//! partial outputs behind.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use serde::Deserialize;

use pventropy::detect::{
    analyze_region, localize, summarize_generation, RegionAnalysis, RegionOptions, Verdict,
};
use pventropy::ingest::{
    clean, curtailment_screen, group_by_region, load_csv, normalize_per_unit, write_long_csv,
    CleanOutcome, GenerationSeries, RegionGroup, ScreenOutcome, SiteId,
};
use pventropy::profile::{
    hyperparameter_sweep, profile_fleet, profiles_to_json, write_profiles_csv, write_sweep_csv,
    WindowSpec, WpeProfile,
};
use pventropy::report::{build_report, RegionReport};
use pventropy::synth::{default_faults, generate_fleet_with_faults, FaultSpec, FleetSpec};
use pventropy::wpe::EmbeddingConfig;

use crate::config::{parse_span, RunConfig};

/// Exit code signalling "run succeeded and found anomalous sites".
pub const EXIT_ANOMALIES_FOUND: i32 = 2;

struct PreparedFleet {
    series: Vec<GenerationSeries>,
    exclusions: Vec<(SiteId, String)>,
}

fn prepare_fleet(cfg: &RunConfig) -> Result<PreparedFleet> {
    if !cfg.input.exists() {
        bail!("input path {} does not exist", cfg.input.display());
    }
    let raw = load_csv(&cfg.input, &cfg.load)?;
    let mut series = Vec::with_capacity(raw.len());
    let mut exclusions = Vec::new();
    for s in raw {
        let s = match clean(s, &cfg.clean_policy) {
            CleanOutcome::Cleaned(s) => s,
            CleanOutcome::Excluded { site_id, reason } => {
                exclusions.push((site_id, reason.to_string()));
                continue;
            }
        };
        let s = match normalize_per_unit(s) {
            CleanOutcome::Cleaned(s) => s,
            CleanOutcome::Excluded { site_id, reason } => {
                exclusions.push((site_id, reason.to_string()));
                continue;
            }
        };
        if cfg.screen {
            if let ScreenOutcome::Excluded(reason) = curtailment_screen(&s, &cfg.curtailment) {
                exclusions.push((s.site_id, reason.to_string()));
                continue;
            }
        }
        series.push(s);
    }
    Ok(PreparedFleet { series, exclusions })
}

fn resolve_geometry(
    cfg: &RunConfig,
    series: &[GenerationSeries],
) -> Result<(EmbeddingConfig, WindowSpec)> {
    let interval = series
        .first()
        .map(|s| s.interval_secs)
        .or(cfg.load.interval_secs)
        .unwrap_or(300);
    let samples_per_day = (86_400 / interval) as usize;
    let width = parse_span(&cfg.window, samples_per_day)?;
    let stride = parse_span(&cfg.stride, samples_per_day)?;
    let window = WindowSpec::new(width, stride)?;
    Ok((cfg.embedding, window))
}

fn regions_of(cfg: &RunConfig, series: &[GenerationSeries]) -> Result<Vec<RegionGroup>> {
    if cfg.regions.is_empty() {
        return Ok(vec![RegionGroup {
            region_id: "all".into(),
            site_ids: series.iter().map(|s| s.site_id.clone()).collect(),
        }]);
    }
    let grouping = group_by_region(series, &cfg.regions)?;
    for site in &grouping.unmatched {
        eprintln!("warning: site {site} matches no region range; skipped");
    }
    for label in &grouping.empty_ranges {
        eprintln!("warning: region {label} matched no site; omitted");
    }
    Ok(grouping.groups)
}

fn report_exclusions(exclusions: &[(SiteId, String)]) {
    for (site, reason) in exclusions {
        eprintln!("excluded {site}: {reason}");
    }
}

struct RegionOutput {
    report: RegionReport,
    profiles: Vec<WpeProfile>,
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<i32> {
    let fleet = prepare_fleet(cfg)?;
    report_exclusions(&fleet.exclusions);
    if fleet.series.is_empty() {
        bail!("no series left after cleaning and screening");
    }
    let (embedding, window) = resolve_geometry(cfg, &fleet.series)?;
    let by_id: BTreeMap<&SiteId, &GenerationSeries> =
        fleet.series.iter().map(|s| (&s.site_id, s)).collect();

    let opts = RegionOptions {
        rule: cfg.rule,
        method: cfg.method,
        leave_one_out: cfg.leave_one_out,
        ..RegionOptions::default()
    };

    let mut outputs = Vec::new();
    for group in regions_of(cfg, &fleet.series)? {
        if group.site_ids.len() < 2 {
            eprintln!(
                "warning: region {} has {} site(s); at least 2 are needed, skipped",
                group.region_id,
                group.site_ids.len()
            );
            continue;
        }
        let members: Vec<GenerationSeries> = group
            .site_ids
            .iter()
            .map(|id| (*by_id.get(id).expect("grouped site exists")).clone())
            .collect();
        let profiled = profile_fleet(&members, embedding, &window)?;
        for diag in &profiled.diagnostics {
            eprintln!("warning: {diag}");
        }
        let analysis = analyze_region(group.region_id.clone(), &profiled.profiles, &opts)?;
        let localizations = localize_suspects(&analysis, &profiled.profiles, cfg.band)?;
        let generation = summarize_generation(&members)?;
        let report = build_report(&analysis, &localizations, &generation)?;
        outputs.push(RegionOutput {
            report,
            profiles: profiled.profiles,
        });
    }
    if outputs.is_empty() {
        bail!("no region had enough sites to analyze");
    }

    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("cannot create output directory {}", cfg.out.display()))?;
    let all_profiles: Vec<WpeProfile> = outputs
        .iter()
        .flat_map(|o| o.profiles.iter().cloned())
        .collect();
    write_file(&cfg.out.join("profiles.csv"), |w| {
        write_profiles_csv(&all_profiles, w).map_err(anyhow::Error::from)
    })?;
    write_file(&cfg.out.join("correlation_hist.csv"), |w| {
        writeln!(w, "region_id,bin_low,bin_high,count")?;
        for output in &outputs {
            let h = &output.report.histogram;
            for (k, count) in h.counts.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    output.report.region_id,
                    h.bin_edges[k],
                    h.bin_edges[k + 1],
                    count
                )?;
            }
        }
        Ok(())
    })?;
    let mut anomalies = Vec::new();
    for output in &outputs {
        let path = cfg
            .out
            .join(format!("region_{}.json", output.report.region_id));
        let json = pventropy::report::to_json(&output.report)?;
        std::fs::write(&path, json.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))?;
        for site in &output.report.sites {
            if site.verdict != Verdict::Normal {
                anomalies.push(site.site_id.clone());
            }
        }
        println!(
            "region {}: {} sites, {} flagged",
            output.report.region_id,
            output.report.n_sites,
            output
                .report
                .sites
                .iter()
                .filter(|s| s.verdict != Verdict::Normal)
                .count()
        );
    }
    if anomalies.is_empty() {
        println!("no anomalous sites");
        Ok(0)
    } else {
        println!(
            "anomalous sites: {}",
            anomalies
                .iter()
                .map(SiteId::as_str)
                .collect::<Vec<_>>()
                .join(", ")
        );
        Ok(EXIT_ANOMALIES_FOUND)
    }
}

fn localize_suspects(
    analysis: &RegionAnalysis,
    profiles: &[WpeProfile],
    band: f64,
) -> Result<Vec<pventropy::detect::AnomalyLocalization>> {
    let mut out = Vec::new();
    for profile in profiles {
        if analysis.verdicts[&profile.site_id] == Verdict::Normal {
            continue;
        }
        out.push(localize(
            profile,
            &analysis.mean_profile,
            &analysis.point_std,
            band,
        )?);
    }
    Ok(out)
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<i32> {
    let fleet = prepare_fleet(cfg)?;
    report_exclusions(&fleet.exclusions);
    if fleet.series.is_empty() {
        bail!("no series left after cleaning and screening");
    }
    let (embedding, window) = resolve_geometry(cfg, &fleet.series)?;
    let profiled = profile_fleet(&fleet.series, embedding, &window)?;
    for diag in &profiled.diagnostics {
        eprintln!("warning: {diag}");
    }
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("cannot create output directory {}", cfg.out.display()))?;
    write_file(&cfg.out.join("profiles.csv"), |w| {
        write_profiles_csv(&profiled.profiles, w).map_err(anyhow::Error::from)
    })?;
    let json = serde_json::to_string_pretty(&profiles_to_json(&profiled.profiles))?;
    std::fs::write(cfg.out.join("profiles.json"), json.as_bytes())?;
    println!(
        "profiled {} sites, {} windows each",
        profiled.profiles.len(),
        profiled
            .profiles
            .first()
            .map(|p| p.points.len())
            .unwrap_or(0)
    );
    Ok(0)
}

pub fn cmd_tune(cfg: &RunConfig, dims: &[usize], taus: &[usize]) -> Result<i32> {
    let fleet = prepare_fleet(cfg)?;
    report_exclusions(&fleet.exclusions);
    if fleet.series.is_empty() {
        bail!("no series left after cleaning and screening");
    }
    let mut grid = Vec::new();
    for &d in dims {
        for &tau in taus {
            grid.push(EmbeddingConfig::new(d, tau)?);
        }
    }
    if let Some(max_cfg) = grid.iter().max_by_key(|c| c.pattern_count()) {
        for s in &fleet.series {
            if !max_cfg.meets_length_recommendation(s.len()) {
                eprintln!(
                    "warning: site {} has {} samples, below the 5*d! = {} recommended for d={}",
                    s.site_id,
                    s.len(),
                    5 * max_cfg.pattern_count(),
                    max_cfg.dimension()
                );
            }
        }
    }
    let sweep = hyperparameter_sweep(&fleet.series, &grid)?;
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("cannot create output directory {}", cfg.out.display()))?;
    write_file(&cfg.out.join("sweep.csv"), |w| {
        write_sweep_csv(&sweep, w).map_err(anyhow::Error::from)
    })?;
    println!(
        "swept {} parameter cells over {} sites",
        sweep.cells.len(),
        fleet.series.len()
    );
    Ok(0)
}

/// Synthetic fleet description read from a TOML spec file. Timestamps are
/// RFC 3339 strings. Omitted fields fall back to the frozen reference
/// fleet's parameters; omitted faults mean a healthy fleet.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpecFile {
    pub n_sites: usize,
    pub start: DateTime<Utc>,
    pub span_days: u32,
    pub interval_secs: u32,
    pub latitude_band: f64,
    pub weather_seed: u64,
    pub per_site_noise: f64,
    pub postcodes: Vec<String>,
    pub faults: Vec<FaultSpec>,
}

impl Default for SynthSpecFile {
    fn default() -> Self {
        let fleet = FleetSpec::default();
        Self {
            n_sites: fleet.n_sites,
            start: fleet.start,
            span_days: fleet.span_days,
            interval_secs: fleet.interval_secs,
            latitude_band: fleet.latitude_band,
            weather_seed: fleet.weather_seed,
            per_site_noise: fleet.per_site_noise,
            postcodes: fleet.postcodes,
            faults: Vec::new(),
        }
    }
}

impl SynthSpecFile {
    fn into_parts(self) -> (FleetSpec, Vec<FaultSpec>) {
        (
            FleetSpec {
                n_sites: self.n_sites,
                start: self.start,
                span_days: self.span_days,
                interval_secs: self.interval_secs,
                latitude_band: self.latitude_band,
                weather_seed: self.weather_seed,
                per_site_noise: self.per_site_noise,
                postcodes: self.postcodes,
            },
            self.faults,
        )
    }
}

pub fn cmd_synth(spec_path: Option<&Path>, out: &Path) -> Result<i32> {
    let (spec, faults) = match spec_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read spec file {}", path.display()))?;
            let file: SynthSpecFile = toml::from_str(&text)
                .with_context(|| format!("invalid spec file {}", path.display()))?;
            file.into_parts()
        }
        // No spec file: the frozen reference fixture, faults included.
        None => (FleetSpec::default(), default_faults()),
    };
    let fleet = generate_fleet_with_faults(&spec, &faults)?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    write_file(&out.join("fleet.csv"), |w| {
        write_long_csv(&fleet, w).map_err(anyhow::Error::from)
    })?;
    let json = serde_json::to_string_pretty(&faults)?;
    std::fs::write(out.join("faults.json"), json.as_bytes())?;
    println!(
        "generated {} sites x {} samples ({} faulted) into {}",
        fleet.len(),
        fleet.first().map(GenerationSeries::len).unwrap_or(0),
        faults.len(),
        out.display()
    );
    Ok(0)
}

fn write_file(path: &Path, writer: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let file =
        std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut buffered = std::io::BufWriter::new(file);
    writer(&mut buffered)?;
    buffered
        .flush()
        .with_context(|| format!("cannot flush {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_spec_file_parses_faults() {
        let text = r#"
n_sites = 4
span_days = 20
weather_seed = 9

[[faults]]
site_id = "pv_002"
type = "dead_output"
start = "2021-01-05T00:00:00Z"
end = "2021-01-10T00:00:00Z"
severity = 1.0
"#;
        let file: SynthSpecFile = toml::from_str(text).unwrap();
        assert_eq!(file.n_sites, 4);
        assert_eq!(file.faults.len(), 1);
        assert_eq!(file.faults[0].site_id.as_str(), "pv_002");
        let (spec, faults) = file.into_parts();
        assert_eq!(spec.weather_seed, 9);
        assert_eq!(faults[0].severity, 1.0);
    }

    #[test]
    fn synth_spec_defaults_to_frozen_fleet_without_faults() {
        let file: SynthSpecFile = toml::from_str("n_sites = 2").unwrap();
        assert_eq!(file.n_sites, 2);
        assert!(file.faults.is_empty());
        assert_eq!(file.span_days, FleetSpec::default().span_days);
    }
}

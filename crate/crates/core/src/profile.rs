// SPDX-License-Identifier: MIT OR Apache-2.0

//! Rolling-window WPE profiles and the hyperparameter sweep.
//!
//! A profile is the sequence of window-start/WPE points obtained by sliding
//! a fixed-width window over one site's series. Profiles are deterministic:
//! the same inputs produce bit-identical output regardless of thread count,
//! and every point equals [`crate::wpe::wpe`] applied to that window's
//! samples.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{GenerationSeries, SiteId};
use crate::stats::{tukey_box, BoxStats};
use crate::wpe::{self, EmbeddingConfig, WpeValue};

/// Rolling window geometry in samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowSpec {
    width: usize,
    stride: usize,
}

impl WindowSpec {
    pub fn new(width: usize, stride: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidWidth);
        }
        if stride == 0 {
            return Err(Error::InvalidStride);
        }
        Ok(Self { width, stride })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Number of window positions over a series of `n` samples.
    pub fn position_count(&self, n: usize) -> usize {
        if n < self.width {
            0
        } else {
            (n - self.width) / self.stride + 1
        }
    }

    fn check_against(&self, cfg: EmbeddingConfig) -> Result<()> {
        if self.width < cfg.min_window_len() {
            return Err(Error::WindowWidthTooSmall {
                width: self.width,
                min: cfg.min_window_len(),
                d: cfg.dimension(),
                tau: cfg.delay(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    pub window_start: DateTime<Utc>,
    pub value: WpeValue,
}

/// WPE profile of one site: one point per window position, strictly
/// increasing window starts spaced by the stride.
#[derive(Clone, Debug, PartialEq)]
pub struct WpeProfile {
    pub site_id: SiteId,
    pub points: Vec<ProfilePoint>,
}

impl WpeProfile {
    pub fn window_starts(&self) -> Vec<DateTime<Utc>> {
        self.points.iter().map(|p| p.window_start).collect()
    }

    pub fn same_grid_as(&self, other: &WpeProfile) -> bool {
        self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| a.window_start == b.window_start)
    }

    /// Fraction of points that are Undefined; 0 for an empty profile.
    pub fn undefined_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let undefined = self.points.iter().filter(|p| !p.value.is_defined()).count();
        undefined as f64 / self.points.len() as f64
    }
}

/// Computes the WPE profile of one series. Windows start at sample 0 and
/// advance by the stride until the window no longer fits; a series shorter
/// than one window yields an empty profile (callers flag the diagnostic).
pub fn rolling_wpe_profile(
    series: &GenerationSeries,
    cfg: EmbeddingConfig,
    win: &WindowSpec,
) -> Result<WpeProfile> {
    win.check_against(cfg)?;
    let n = series.len();
    let mut points = Vec::with_capacity(win.position_count(n));
    if n >= win.width {
        let (codes, weights) = wpe::pattern_stream(&series.values, cfg);
        let vectors_per_window = win.width - cfg.vector_span();
        let mut bins = vec![0.0f64; cfg.pattern_count()];
        let mut pos = 0;
        while pos + win.width <= n {
            bins.iter_mut().for_each(|b| *b = 0.0);
            let total =
                wpe::accumulate_stream(&codes, &weights, pos..pos + vectors_per_window, &mut bins);
            points.push(ProfilePoint {
                window_start: series.timestamp_at(pos),
                value: wpe::entropy_from_bins(&bins, total, cfg.dimension()),
            });
            pos += win.stride;
        }
    }
    Ok(WpeProfile {
        site_id: series.site_id.clone(),
        points,
    })
}

/// Profiles for a whole fleet plus the diagnostics gathered along the way.
#[derive(Clone, Debug)]
pub struct FleetProfiles {
    pub profiles: Vec<WpeProfile>,
    pub diagnostics: Vec<String>,
}

/// Profiles every site in parallel. Output order follows input order; the
/// result is independent of the evaluation schedule.
pub fn profile_fleet(
    series: &[GenerationSeries],
    cfg: EmbeddingConfig,
    win: &WindowSpec,
) -> Result<FleetProfiles> {
    win.check_against(cfg)?;
    let profiles: Vec<WpeProfile> = series
        .par_iter()
        .map(|s| rolling_wpe_profile(s, cfg, win))
        .collect::<Result<_>>()?;
    let mut diagnostics = Vec::new();
    if !cfg.meets_length_recommendation(win.width()) {
        diagnostics.push(format!(
            "window width {} does not exceed 5*d! = {} for d={}; pattern statistics may be unstable",
            win.width(),
            5 * cfg.pattern_count(),
            cfg.dimension()
        ));
    }
    for (s, p) in series.iter().zip(&profiles) {
        if p.points.is_empty() {
            diagnostics.push(format!(
                "site {}: series of {} samples is shorter than one {}-sample window; empty profile",
                s.site_id,
                s.len(),
                win.width()
            ));
        }
    }
    Ok(FleetProfiles {
        profiles,
        diagnostics,
    })
}

/// WPE of the whole series taken as a single window.
pub fn whole_series_wpe(series: &GenerationSeries, cfg: EmbeddingConfig) -> Result<WpeValue> {
    wpe::wpe(&series.values, cfg)
}

/// Box summary of whole-series WPE across sites for one (d, tau) cell.
#[derive(Clone, Debug)]
pub struct SweepCell {
    pub cfg: EmbeddingConfig,
    pub stats: BoxStats,
    /// Sites contributing a defined WPE value.
    pub n_sites: usize,
    /// Sites skipped because their whole-series WPE was undefined.
    pub n_undefined: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
}

/// The d in 3..=7 by tau in 1..=3 grid (15 cells).
pub fn default_grid() -> Vec<EmbeddingConfig> {
    let mut grid = Vec::with_capacity(15);
    for d in 3..=7 {
        for tau in 1..=3 {
            grid.push(EmbeddingConfig::new(d, tau).expect("static grid"));
        }
    }
    grid
}

/// For each grid cell, computes each site's whole-series WPE and reduces the
/// values across sites to Tukey box statistics.
pub fn hyperparameter_sweep(
    series: &[GenerationSeries],
    grid: &[EmbeddingConfig],
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if series.is_empty() {
        return Err(Error::EmptySeriesSet);
    }
    let cells = grid
        .iter()
        .map(|&cfg| {
            let values: Vec<WpeValue> = series
                .par_iter()
                .map(|s| whole_series_wpe(s, cfg))
                .collect::<Result<_>>()?;
            let defined: Vec<f64> = values.iter().filter_map(|v| v.normalized()).collect();
            let n_undefined = values.len() - defined.len();
            let stats = tukey_box(&defined).ok_or(Error::EmptySeriesSet)?;
            Ok(SweepCell {
                cfg,
                stats,
                n_sites: defined.len(),
                n_undefined,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { cells })
}

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// Writes profiles as `site_id,window_start,wpe` rows (ISO-8601 timestamps,
/// `NaN` for undefined values, full round-trip float precision).
pub fn write_profiles_csv<W: Write>(profiles: &[WpeProfile], mut out: W) -> Result<()> {
    writeln!(out, "site_id,window_start,wpe")?;
    for p in profiles {
        for point in &p.points {
            let ts = point.window_start.format(TIMESTAMP_FORMAT);
            match point.value.normalized() {
                Some(v) => writeln!(out, "{},{},{}", p.site_id, ts, v)?,
                None => writeln!(out, "{},{},NaN", p.site_id, ts)?,
            }
        }
    }
    Ok(())
}

/// One parsed `profiles.csv` row.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileCsvRow {
    pub site_id: SiteId,
    pub window_start: DateTime<Utc>,
    pub wpe: Option<f64>,
}

/// Round-trip reader for the profile CSV schema.
pub fn read_profiles_csv(path: &Path) -> Result<Vec<ProfileCsvRow>> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::CsvParse {
            path: display.clone(),
            line: 0,
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse = |msg: String| Error::CsvParse {
            path: display.clone(),
            line,
            msg,
        };
        if record.len() != 3 {
            return Err(parse(format!("expected 3 columns, got {}", record.len())));
        }
        let ts = DateTime::parse_from_rfc3339(&record[1])
            .map_err(|e| parse(format!("bad timestamp: {e}")))?
            .with_timezone(&Utc);
        let value: f64 = record[2]
            .parse()
            .map_err(|e| parse(format!("bad wpe value: {e}")))?;
        rows.push(ProfileCsvRow {
            site_id: SiteId::new(&record[0]),
            window_start: ts,
            wpe: if value.is_nan() { None } else { Some(value) },
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProfileJsonPoint {
    pub window_start: DateTime<Utc>,
    pub wpe: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProfileJson {
    pub site_id: SiteId,
    pub points: Vec<ProfileJsonPoint>,
}

/// JSON equivalent of the profile CSV export.
pub fn profiles_to_json(profiles: &[WpeProfile]) -> Vec<ProfileJson> {
    profiles
        .iter()
        .map(|p| ProfileJson {
            site_id: p.site_id.clone(),
            points: p
                .points
                .iter()
                .map(|pt| ProfileJsonPoint {
                    window_start: pt.window_start,
                    wpe: pt.value.normalized(),
                })
                .collect(),
        })
        .collect()
}

/// Writes sweep cells as `d,tau,median,q1,q3,whisker_low,whisker_high,n_outliers`.
pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, mut out: W) -> Result<()> {
    writeln!(
        out,
        "d,tau,median,q1,q3,whisker_low,whisker_high,n_outliers"
    )?;
    for cell in &sweep.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cell.cfg.dimension(),
            cell.cfg.delay(),
            cell.stats.median,
            cell.stats.q1,
            cell.stats.q3,
            cell.stats.whisker_low,
            cell.stats.whisker_high,
            cell.stats.outliers.len()
        )?;
    }
    Ok(())
}

/// One parsed `sweep.csv` row.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCsvRow {
    pub d: usize,
    pub tau: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub n_outliers: usize,
}

/// Round-trip reader for the sweep CSV schema.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepCsvRow>> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::CsvParse {
            path: display.clone(),
            line: 0,
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse = |msg: String| Error::CsvParse {
            path: display.clone(),
            line,
            msg,
        };
        if record.len() != 8 {
            return Err(parse(format!("expected 8 columns, got {}", record.len())));
        }
        let field = |i: usize| -> Result<f64> {
            record[i]
                .parse()
                .map_err(|e| parse(format!("column {i}: {e}")))
        };
        rows.push(SweepCsvRow {
            d: record[0].parse().map_err(|e| parse(format!("d: {e}")))?,
            tau: record[1].parse().map_err(|e| parse(format!("tau: {e}")))?,
            median: field(2)?,
            q1: field(3)?,
            q3: field(4)?,
            whisker_low: field(5)?,
            whisker_high: field(6)?,
            n_outliers: record[7]
                .parse()
                .map_err(|e| parse(format!("n_outliers: {e}")))?,
        });
    }
    Ok(rows)
}

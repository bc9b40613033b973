// SPDX-License-Identifier: MIT OR Apache-2.0

//! Loading and preparation of per-site generation series: CSV ingestion
//! (long and wide layouts), gap accounting, last-observation-carried-forward
//! fill, per-unit normalization, curtailment screening, and postcode
//! grouping.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque site identifier, ordered lexicographically for deterministic output.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteId(String);

impl SiteId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SiteId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// Bit mask over sample positions; marks values written by the gap fill.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FillMask {
    words: Vec<u64>,
    len: usize,
}

impl FillMask {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// One site's generation series on a uniform sampling grid.
///
/// Raw loads carry missing samples as NaN; [`clean`] replaces them and
/// records the positions in `filled_mask`, after which every value is
/// finite. `missing_count` is the number of originally missing samples.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationSeries {
    pub site_id: SiteId,
    pub postcode: String,
    pub start: DateTime<Utc>,
    pub interval_secs: u32,
    pub values: Vec<f64>,
    pub missing_count: usize,
    pub filled_mask: FillMask,
}

impl GenerationSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp_at(&self, i: usize) -> DateTime<Utc> {
        self.start + Duration::seconds(i as i64 * self.interval_secs as i64)
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.timestamp_at(self.len())
    }

    /// Samples per 24 hours on this grid.
    pub fn samples_per_day(&self) -> usize {
        (86_400 / self.interval_secs) as usize
    }

    /// Index range of samples with timestamp in `[from, to)`, clamped to the
    /// series span.
    pub fn index_range(&self, from: DateTime<Utc>, to: DateTime<Utc>) -> std::ops::Range<usize> {
        let step = self.interval_secs as i64;
        let lo = ((from - self.start).num_seconds() + step - 1).div_euclid(step);
        let hi = (to - self.start).num_seconds().div_euclid(step)
            + i64::from((to - self.start).num_seconds() % step != 0);
        let lo = lo.clamp(0, self.len() as i64) as usize;
        let hi = hi.clamp(0, self.len() as i64) as usize;
        lo..hi.max(lo)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sites sharing one analysis region (a postcode range).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionGroup {
    pub region_id: String,
    pub site_ids: Vec<SiteId>,
}

/// Input CSV layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsvFormat {
    /// `site_id,postcode,timestamp,power`, one row per site per sample.
    Long,
    /// First column timestamp, one column per site; postcodes come from a
    /// sidecar metadata CSV (`site_id,postcode`).
    Wide,
}

#[derive(Clone, Debug)]
pub struct LoadConfig {
    pub format: CsvFormat,
    /// Expected sampling interval; inferred from the first step when None.
    pub interval_secs: Option<u32>,
    /// Sidecar postcode metadata for wide-format files.
    pub metadata: Option<std::path::PathBuf>,
}

impl Default for LoadConfig {
    fn default() -> Self {
        Self {
            format: CsvFormat::Long,
            interval_secs: None,
            metadata: None,
        }
    }
}

/// Loads a generation CSV into one series per site, sorted by site id.
/// Missing samples (empty power fields) are kept as NaN and counted;
/// timestamps must advance by one constant interval per row.
pub fn load_csv(path: &Path, cfg: &LoadConfig) -> Result<Vec<GenerationSeries>> {
    let mut series = match cfg.format {
        CsvFormat::Long => load_long(path, cfg)?,
        CsvFormat::Wide => load_wide(path, cfg)?,
    };
    series.sort_by(|a, b| a.site_id.cmp(&b.site_id));
    Ok(series)
}

struct SeriesBuilder {
    postcode: String,
    start: DateTime<Utc>,
    last: DateTime<Utc>,
    interval: Option<i64>,
    values: Vec<f64>,
    missing: usize,
}

fn load_long(path: &Path, cfg: &LoadConfig) -> Result<Vec<GenerationSeries>> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let mut builders: BTreeMap<SiteId, SeriesBuilder> = BTreeMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&display, &e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() < 4 {
            return Err(Error::CsvParse {
                path: display.clone(),
                line,
                msg: format!("expected 4 columns, got {}", record.len()),
            });
        }
        let site = SiteId::new(record[0].trim());
        let postcode = record[1].trim().to_string();
        let ts = parse_timestamp(record[2].trim()).map_err(|msg| Error::CsvParse {
            path: display.clone(),
            line,
            msg,
        })?;
        let value = parse_power(record[3].trim()).map_err(|msg| Error::CsvParse {
            path: display.clone(),
            line,
            msg,
        })?;

        match builders.get_mut(&site) {
            None => {
                let mut b = SeriesBuilder {
                    postcode,
                    start: ts,
                    last: ts,
                    interval: cfg.interval_secs.map(i64::from),
                    values: Vec::new(),
                    missing: 0,
                };
                push_value(&mut b, value);
                builders.insert(site, b);
            }
            Some(b) => {
                let delta = (ts - b.last).num_seconds();
                if delta == 0 {
                    return Err(Error::DuplicateTimestamp {
                        path: display.clone(),
                        line,
                        site,
                        timestamp: record[2].trim().to_string(),
                    });
                }
                match b.interval {
                    None => b.interval = Some(delta),
                    Some(step) if step != delta => {
                        return Err(Error::NonUniformSampling {
                            path: display.clone(),
                            line,
                            site,
                            expected: step,
                            got: delta,
                        });
                    }
                    Some(_) => {}
                }
                b.last = ts;
                push_value(b, value);
            }
        }
    }

    builders
        .into_iter()
        .map(|(site_id, b)| finish_builder(site_id, b, &display))
        .collect()
}

fn load_wide(path: &Path, cfg: &LoadConfig) -> Result<Vec<GenerationSeries>> {
    let display = path.display().to_string();
    let postcodes = match &cfg.metadata {
        Some(meta) => load_metadata(meta)?,
        None => BTreeMap::new(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers = reader.headers().map_err(|e| csv_error(&display, &e))?;
    let sites: Vec<SiteId> = headers
        .iter()
        .skip(1)
        .map(|h| SiteId::new(h.trim()))
        .collect();
    if sites.is_empty() {
        return Err(Error::CsvParse {
            path: display,
            line: 1,
            msg: "wide format needs a timestamp column plus one column per site".into(),
        });
    }
    for i in 1..sites.len() {
        if sites[i..].contains(&sites[i - 1]) {
            return Err(Error::CsvParse {
                path: display,
                line: 1,
                msg: format!("duplicated site column {}", sites[i - 1]),
            });
        }
    }

    let mut start: Option<DateTime<Utc>> = None;
    let mut last: Option<DateTime<Utc>> = None;
    let mut interval = cfg.interval_secs.map(i64::from);
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); sites.len()];
    let mut missing = vec![0usize; sites.len()];

    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&display, &e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != sites.len() + 1 {
            return Err(Error::CsvParse {
                path: display.clone(),
                line,
                msg: format!("expected {} columns, got {}", sites.len() + 1, record.len()),
            });
        }
        let ts = parse_timestamp(record[0].trim()).map_err(|msg| Error::CsvParse {
            path: display.clone(),
            line,
            msg,
        })?;
        if let Some(prev) = last {
            let delta = (ts - prev).num_seconds();
            if delta == 0 {
                return Err(Error::DuplicateTimestamp {
                    path: display.clone(),
                    line,
                    site: sites[0].clone(),
                    timestamp: record[0].trim().to_string(),
                });
            }
            match interval {
                None => interval = Some(delta),
                Some(step) if step != delta => {
                    return Err(Error::NonUniformSampling {
                        path: display.clone(),
                        line,
                        site: sites[0].clone(),
                        expected: step,
                        got: delta,
                    });
                }
                Some(_) => {}
            }
        } else {
            start = Some(ts);
        }
        last = Some(ts);
        for (i, field) in record.iter().skip(1).enumerate() {
            let v = parse_power(field.trim()).map_err(|msg| Error::CsvParse {
                path: display.clone(),
                line,
                msg,
            })?;
            match v {
                Some(v) => columns[i].push(v),
                None => {
                    columns[i].push(f64::NAN);
                    missing[i] += 1;
                }
            }
        }
    }

    let start = start.ok_or_else(|| Error::CsvParse {
        path: display.clone(),
        line: 1,
        msg: "no data rows".into(),
    })?;
    let interval = validate_interval(interval.unwrap_or(0), &display)?;

    Ok(sites
        .into_iter()
        .zip(columns)
        .zip(missing)
        .map(|((site_id, values), missing_count)| {
            let n = values.len();
            let postcode = postcodes.get(&site_id).cloned().unwrap_or_default();
            GenerationSeries {
                site_id,
                postcode,
                start,
                interval_secs: interval,
                values,
                missing_count,
                filled_mask: FillMask::new(n),
            }
        })
        .collect())
}

fn load_metadata(path: &Path) -> Result<BTreeMap<SiteId, String>> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let mut map = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&display, &e))?;
        if record.len() < 2 {
            continue;
        }
        map.insert(SiteId::new(record[0].trim()), record[1].trim().to_string());
    }
    Ok(map)
}

fn push_value(b: &mut SeriesBuilder, value: Option<f64>) {
    match value {
        Some(v) => b.values.push(v),
        None => {
            b.values.push(f64::NAN);
            b.missing += 1;
        }
    }
}

fn finish_builder(site_id: SiteId, b: SeriesBuilder, path: &str) -> Result<GenerationSeries> {
    let interval = validate_interval(b.interval.unwrap_or(0), path)?;
    let n = b.values.len();
    Ok(GenerationSeries {
        site_id,
        postcode: b.postcode,
        start: b.start,
        interval_secs: interval,
        values: b.values,
        missing_count: b.missing,
        filled_mask: FillMask::new(n),
    })
}

fn validate_interval(interval: i64, path: &str) -> Result<u32> {
    if interval <= 0 {
        return Err(Error::CsvParse {
            path: path.to_string(),
            line: 0,
            msg: "cannot determine a positive sampling interval (need at least 2 rows per site or an explicit interval)"
                .into(),
        });
    }
    u32::try_from(interval).map_err(|_| Error::CsvParse {
        path: path.to_string(),
        line: 0,
        msg: format!("sampling interval {interval}s out of range"),
    })
}

fn parse_timestamp(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(naive.and_utc());
        }
    }
    Err(format!("unrecognized timestamp {s:?}"))
}

fn parse_power(s: &str) -> std::result::Result<Option<f64>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| format!("unparseable power value {s:?}"))
}

fn csv_error(path: &str, e: &csv::Error) -> Error {
    let line = match e.position() {
        Some(p) => p.line(),
        None => 0,
    };
    Error::CsvParse {
        path: path.to_string(),
        line,
        msg: e.to_string(),
    }
}

/// Why a series was dropped from the analysis set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExclusionReason {
    TooManyMissing { missing: usize, limit: usize },
    DeadOutput,
    Curtailment(String),
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooManyMissing { missing, limit } => {
                write!(f, "{missing} missing points exceed the limit of {limit}")
            }
            Self::DeadOutput => write!(f, "no positive generation over the whole span"),
            Self::Curtailment(msg) => write!(f, "curtailment: {msg}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum CleanOutcome {
    Cleaned(GenerationSeries),
    Excluded {
        site_id: SiteId,
        reason: ExclusionReason,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct CleanPolicy {
    /// Series with more missing points than this are excluded.
    pub max_missing: usize,
}

impl Default for CleanPolicy {
    fn default() -> Self {
        Self { max_missing: 200 }
    }
}

/// Applies the missing-point cutoff and fills surviving gaps with the most
/// recent prior value. Leading gaps, which have no prior observation, are
/// filled with 0 (the nighttime value). Non-missing values are never touched.
pub fn clean(mut series: GenerationSeries, policy: &CleanPolicy) -> CleanOutcome {
    if series.missing_count > policy.max_missing {
        return CleanOutcome::Excluded {
            site_id: series.site_id,
            reason: ExclusionReason::TooManyMissing {
                missing: series.missing_count,
                limit: policy.max_missing,
            },
        };
    }
    let mut last: Option<f64> = None;
    for i in 0..series.values.len() {
        let v = series.values[i];
        if v.is_nan() {
            series.values[i] = last.unwrap_or(0.0);
            series.filled_mask.set(i);
        } else {
            last = Some(v);
        }
    }
    debug_assert_eq!(series.filled_mask.count_ones(), series.missing_count);
    CleanOutcome::Cleaned(series)
}

/// Rescales the series so its full-span maximum equals 1. A series with no
/// positive sample is reported as dead output instead.
pub fn normalize_per_unit(mut series: GenerationSeries) -> CleanOutcome {
    let max = series.max_value();
    if max <= 0.0 {
        return CleanOutcome::Excluded {
            site_id: series.site_id,
            reason: ExclusionReason::DeadOutput,
        };
    }
    for v in series.values.iter_mut() {
        *v /= max;
    }
    CleanOutcome::Cleaned(series)
}

/// Heuristic screen for chronic curtailment. The underlying criterion
/// ("significant negative or high generation curtailment" over many months)
/// has no exact formula; this implementation excludes a series when either
/// symptom appears in more than `max_months` calendar months:
/// (a) values below `-negative_epsilon`, or (b) a flat-topped midday plateau,
/// i.e. a run of at least `min_plateau_run` consecutive samples within
/// `plateau_delta` of its start, at a level inside
/// `[plateau_floor, plateau_ceiling]` of per-unit output.
#[derive(Clone, Copy, Debug)]
pub struct CurtailmentPolicy {
    pub negative_epsilon: f64,
    pub max_months: usize,
    pub min_plateau_run: usize,
    pub plateau_delta: f64,
    pub plateau_floor: f64,
    pub plateau_ceiling: f64,
    pub midday_start_hour: u32,
    pub midday_end_hour: u32,
}

impl Default for CurtailmentPolicy {
    fn default() -> Self {
        Self {
            negative_epsilon: 0.01,
            max_months: 7,
            min_plateau_run: 12,
            plateau_delta: 0.005,
            plateau_floor: 0.05,
            plateau_ceiling: 0.95,
            midday_start_hour: 10,
            midday_end_hour: 15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScreenOutcome {
    Keep,
    Excluded(ExclusionReason),
}

/// Applies the curtailment screen to a cleaned, per-unit series.
pub fn curtailment_screen(series: &GenerationSeries, policy: &CurtailmentPolicy) -> ScreenOutcome {
    let mut negative_months = std::collections::BTreeSet::new();
    let mut clipped_months = std::collections::BTreeSet::new();

    let per_day = series.samples_per_day();
    let n_days = series.len().div_ceil(per_day.max(1));
    let start_sod = series.start.num_seconds_from_midnight() as i64;
    let start_date = series.start.date_naive();

    for day in 0..n_days {
        let month_key = {
            let date = start_date + Duration::days((start_sod + day as i64 * 86_400) / 86_400);
            date.year() * 12 + date.month0() as i32
        };
        let day_range = day * per_day..((day + 1) * per_day).min(series.len());

        let mut run_start: Option<(usize, f64)> = None;
        let mut day_clipped = false;
        for i in day_range {
            let v = series.values[i];
            if v < -policy.negative_epsilon {
                negative_months.insert(month_key);
            }
            let hour = ((start_sod + i as i64 * series.interval_secs as i64) % 86_400) / 3600;
            let in_midday =
                hour >= policy.midday_start_hour as i64 && hour < policy.midday_end_hour as i64;
            let extends = match run_start {
                Some((_, level)) if in_midday => (v - level).abs() <= policy.plateau_delta,
                _ => false,
            };
            if extends {
                let (s, level) = run_start.unwrap();
                if i - s + 1 >= policy.min_plateau_run
                    && level >= policy.plateau_floor
                    && level <= policy.plateau_ceiling
                {
                    day_clipped = true;
                }
            } else if in_midday {
                run_start = Some((i, v));
            } else {
                run_start = None;
            }
        }
        if day_clipped {
            clipped_months.insert(month_key);
        }
    }

    if negative_months.len() > policy.max_months {
        return ScreenOutcome::Excluded(ExclusionReason::Curtailment(format!(
            "negative generation in {} months",
            negative_months.len()
        )));
    }
    if clipped_months.len() > policy.max_months {
        return ScreenOutcome::Excluded(ExclusionReason::Curtailment(format!(
            "flat-topped midday output in {} months",
            clipped_months.len()
        )));
    }
    ScreenOutcome::Keep
}

/// Inclusive postcode range, e.g. "5000-5100" or the single code "5540".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PostcodeRange {
    pub label: String,
    pub lo: u32,
    pub hi: u32,
}

impl PostcodeRange {
    pub fn parse(spec: &str) -> Result<Self> {
        let label = spec.trim().to_string();
        let parse_code = |s: &str| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidRange(spec.to_string()))
        };
        let (lo, hi) = match label.split_once('-') {
            Some((a, b)) => (parse_code(a)?, parse_code(b)?),
            None => {
                let code = parse_code(&label)?;
                (code, code)
            }
        };
        if lo > hi {
            return Err(Error::InvalidRange(spec.to_string()));
        }
        Ok(Self { label, lo, hi })
    }

    pub fn contains(&self, postcode: u32) -> bool {
        (self.lo..=self.hi).contains(&postcode)
    }

    fn overlaps(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

#[derive(Clone, Debug, Default)]
pub struct Grouping {
    pub groups: Vec<RegionGroup>,
    pub unmatched: Vec<SiteId>,
    /// Ranges from the spec that matched no site (groups are omitted).
    pub empty_ranges: Vec<String>,
}

/// Partitions sites into regions by the first matching postcode range.
pub fn group_by_region(series: &[GenerationSeries], ranges: &[PostcodeRange]) -> Result<Grouping> {
    for i in 0..ranges.len() {
        for j in (i + 1)..ranges.len() {
            if ranges[i].overlaps(&ranges[j]) {
                return Err(Error::OverlappingRanges {
                    a: ranges[i].label.clone(),
                    b: ranges[j].label.clone(),
                });
            }
        }
    }
    let mut members: Vec<Vec<SiteId>> = vec![Vec::new(); ranges.len()];
    let mut unmatched = Vec::new();
    for s in series {
        let code = s.postcode.trim().parse::<u32>().ok();
        let slot = code.and_then(|c| ranges.iter().position(|r| r.contains(c)));
        match slot {
            Some(i) => members[i].push(s.site_id.clone()),
            None => unmatched.push(s.site_id.clone()),
        }
    }
    let mut grouping = Grouping::default();
    for (range, site_ids) in ranges.iter().zip(members) {
        if site_ids.is_empty() {
            grouping.empty_ranges.push(range.label.clone());
        } else {
            grouping.groups.push(RegionGroup {
                region_id: range.label.clone(),
                site_ids,
            });
        }
    }
    grouping.unmatched = unmatched;
    Ok(grouping)
}

/// Writes series in the long CSV layout (`site_id,postcode,timestamp,power`),
/// grouped by site, full round-trip float precision. Missing samples (NaN)
/// become empty fields.
pub fn write_long_csv<W: Write>(series: &[GenerationSeries], mut out: W) -> Result<()> {
    writeln!(out, "site_id,postcode,timestamp,power")?;
    for s in series {
        for (i, &v) in s.values.iter().enumerate() {
            let ts = s.timestamp_at(i).format("%Y-%m-%dT%H:%M:%SZ");
            if v.is_nan() {
                writeln!(out, "{},{},{},", s.site_id, s.postcode, ts)?;
            } else {
                writeln!(out, "{},{},{},{}", s.site_id, s.postcode, ts, v)?;
            }
        }
    }
    Ok(())
}

/// Writes series in the wide CSV layout (timestamp column plus one column per
/// site). All series must share the same grid.
pub fn write_wide_csv<W: Write>(series: &[GenerationSeries], mut out: W) -> Result<()> {
    let first = series.first().ok_or(Error::EmptySeriesSet)?;
    for s in series {
        if s.start != first.start
            || s.interval_secs != first.interval_secs
            || s.len() != first.len()
        {
            return Err(Error::SiteSetMismatch(format!(
                "site {} is not on the shared sampling grid",
                s.site_id
            )));
        }
    }
    write!(out, "timestamp")?;
    for s in series {
        write!(out, ",{}", s.site_id)?;
    }
    writeln!(out)?;
    let mut row = String::new();
    for i in 0..first.len() {
        row.clear();
        row.push_str(
            &first
                .timestamp_at(i)
                .format("%Y-%m-%dT%H:%M:%SZ")
                .to_string(),
        );
        for s in series {
            row.push(',');
            let v = s.values[i];
            if !v.is_nan() {
                row.push_str(&format!("{v}"));
            }
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Writes the `site_id,postcode` sidecar for wide-format files.
pub fn write_metadata_csv<W: Write>(series: &[GenerationSeries], mut out: W) -> Result<()> {
    writeln!(out, "site_id,postcode")?;
    for s in series {
        writeln!(out, "{},{}", s.site_id, s.postcode)?;
    }
    Ok(())
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Regional anomaly detection over WPE profiles: mean profile, per-site
//! correlation, outlier flagging, and localization of divergent windows.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{GenerationSeries, SiteId};
use crate::profile::{ProfilePoint, WpeProfile};
use crate::stats;
use crate::wpe::WpeValue;

/// How a site's correlation is turned into a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DetectionRule {
    /// Anomalous iff correlation < theta.
    FixedThreshold { theta: f64 },
    /// Anomalous iff correlation < Q1 - IQR. Note the factor is 1x IQR below
    /// the first quartile, not the 1.5x of Tukey whiskers.
    IqrOutlier,
}

impl DetectionRule {
    pub fn fixed_default() -> Self {
        Self::FixedThreshold {
            theta: DEFAULT_CORRELATION_THRESHOLD,
        }
    }
}

impl std::fmt::Display for DetectionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::FixedThreshold { theta } => write!(f, "fixed threshold {theta}"),
            Self::IqrOutlier => write!(f, "IQR outlier rule"),
        }
    }
}

/// Profiles correlating below this with the regional mean are suspect.
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.8;

/// Default divergence band for localization, in regional standard deviations.
pub const DEFAULT_LOCALIZATION_BAND: f64 = 2.0;

/// Sites undefined in more than this fraction of windows get an
/// Insufficient verdict instead of a correlation.
pub const DEFAULT_MAX_UNDEFINED_FRACTION: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Normal,
    Anomalous,
    /// Too little overlap with the regional grid to decide numerically;
    /// treated as needing inspection, like Anomalous.
    Insufficient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsufficiencyReason {
    TooFewPoints,
    ZeroVariance,
    TooManyUndefined,
}

/// Correlation of one site's profile with the regional mean, or the reason
/// none could be computed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Correlation {
    Defined(f64),
    Insufficient(InsufficiencyReason),
}

impl Correlation {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Defined(v) => Some(*v),
            Self::Insufficient(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

/// Pointwise mean of the given profiles. Undefined values are skipped per
/// point; a point where every site is undefined stays undefined. All
/// profiles must share the same window grid.
pub fn mean_profile(profiles: &[WpeProfile]) -> Result<WpeProfile> {
    check_common_grid(profiles, 2)?;
    let template = &profiles[0];
    let points = (0..template.points.len())
        .map(|i| {
            let mut sum_norm = 0.0;
            let mut sum_raw = 0.0;
            let mut count = 0usize;
            for p in profiles {
                if let WpeValue::Defined {
                    normalized,
                    raw_bits,
                } = p.points[i].value
                {
                    sum_norm += normalized;
                    sum_raw += raw_bits;
                    count += 1;
                }
            }
            let value = if count == 0 {
                WpeValue::Undefined
            } else {
                WpeValue::Defined {
                    normalized: sum_norm / count as f64,
                    raw_bits: sum_raw / count as f64,
                }
            };
            ProfilePoint {
                window_start: template.points[i].window_start,
                value,
            }
        })
        .collect();
    Ok(WpeProfile {
        site_id: SiteId::new("mean"),
        points,
    })
}

/// Per-point standard deviation of the profiles around `mean` (population
/// convention, skipping undefined values). NaN where no site is defined.
pub fn pointwise_std(profiles: &[WpeProfile], mean: &WpeProfile) -> Result<Vec<f64>> {
    for p in profiles {
        if !p.same_grid_as(mean) {
            return Err(Error::GridMismatch {
                site: p.site_id.clone(),
            });
        }
    }
    Ok((0..mean.points.len())
        .map(|i| {
            let Some(m) = mean.points[i].value.normalized() else {
                return f64::NAN;
            };
            let mut acc = 0.0;
            let mut count = 0usize;
            for p in profiles {
                if let Some(v) = p.points[i].value.normalized() {
                    let dev = v - m;
                    acc += dev * dev;
                    count += 1;
                }
            }
            if count == 0 {
                f64::NAN
            } else {
                (acc / count as f64).sqrt()
            }
        })
        .collect())
}

/// Correlation between a site profile and the mean profile over the points
/// where both are defined. Needs at least 3 joint points and nonzero
/// variance on both sides.
pub fn correlate(
    profile: &WpeProfile,
    mean: &WpeProfile,
    method: CorrelationMethod,
) -> Result<Correlation> {
    if !profile.same_grid_as(mean) {
        return Err(Error::GridMismatch {
            site: profile.site_id.clone(),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (a, b) in profile.points.iter().zip(&mean.points) {
        if let (Some(x), Some(y)) = (a.value.normalized(), b.value.normalized()) {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.len() < 3 {
        return Ok(Correlation::Insufficient(InsufficiencyReason::TooFewPoints));
    }
    let r = match method {
        CorrelationMethod::Pearson => stats::pearson(&xs, &ys),
        CorrelationMethod::Spearman => stats::spearman(&xs, &ys),
    };
    Ok(match r {
        Some(v) => Correlation::Defined(v),
        None => Correlation::Insufficient(InsufficiencyReason::ZeroVariance),
    })
}

/// Applies a detection rule to the per-site correlations. Insufficient
/// correlations keep their Insufficient verdict (anomalous-by-default);
/// quartiles for the IQR rule are taken over the defined values only.
pub fn flag_outliers(
    correlations: &BTreeMap<SiteId, Correlation>,
    rule: DetectionRule,
) -> Result<BTreeMap<SiteId, Verdict>> {
    let defined: Vec<f64> = correlations.values().filter_map(|c| c.value()).collect();
    let cutoff = match rule {
        DetectionRule::FixedThreshold { theta } => {
            if correlations.len() < 2 {
                return Err(Error::TooFewSites {
                    rule: rule.to_string(),
                    min: 2,
                    got: correlations.len(),
                    suggestion: "a region with more sites".into(),
                });
            }
            theta
        }
        DetectionRule::IqrOutlier => {
            if defined.len() < 8 {
                return Err(Error::TooFewSites {
                    rule: rule.to_string(),
                    min: 8,
                    got: defined.len(),
                    suggestion: "the fixed-threshold rule".into(),
                });
            }
            let q1 = stats::quantile(&defined, 0.25).expect("nonempty");
            let q3 = stats::quantile(&defined, 0.75).expect("nonempty");
            q1 - (q3 - q1)
        }
    };
    Ok(correlations
        .iter()
        .map(|(site, c)| {
            let verdict = match c {
                Correlation::Insufficient(_) => Verdict::Insufficient,
                Correlation::Defined(v) if *v < cutoff => Verdict::Anomalous,
                Correlation::Defined(_) => Verdict::Normal,
            };
            (site.clone(), verdict)
        })
        .collect())
}

/// Sign pattern of the divergent windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationDirection {
    BelowMean,
    AboveMean,
    Mixed,
}

/// Windows where a site's profile leaves the regional band, with
/// signed deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct AnomalyLocalization {
    pub site_id: SiteId,
    pub divergent_windows: Vec<(DateTime<Utc>, f64)>,
    pub direction: DeviationDirection,
}

/// Flags the window positions where |profile - mean| exceeds `band` times
/// the regional per-point standard deviation. Points undefined on either
/// side (or with no regional spread available) are never flagged.
pub fn localize(
    profile: &WpeProfile,
    mean: &WpeProfile,
    point_std: &[f64],
    band: f64,
) -> Result<AnomalyLocalization> {
    if band <= 0.0 {
        return Err(Error::InvalidBand(band));
    }
    if !profile.same_grid_as(mean) || point_std.len() != mean.points.len() {
        return Err(Error::GridMismatch {
            site: profile.site_id.clone(),
        });
    }
    let mut divergent = Vec::new();
    let mut above = 0usize;
    let mut below = 0usize;
    for (i, (p, m)) in profile.points.iter().zip(&mean.points).enumerate() {
        let (Some(x), Some(mu)) = (p.value.normalized(), m.value.normalized()) else {
            continue;
        };
        let sigma = point_std[i];
        if sigma.is_nan() {
            continue;
        }
        let dev = x - mu;
        if dev.abs() > band * sigma {
            divergent.push((p.window_start, dev));
            if dev > 0.0 {
                above += 1;
            } else {
                below += 1;
            }
        }
    }
    let direction = match (above, below) {
        (0, b) if b > 0 => DeviationDirection::BelowMean,
        (a, 0) if a > 0 => DeviationDirection::AboveMean,
        _ => DeviationDirection::Mixed,
    };
    Ok(AnomalyLocalization {
        site_id: profile.site_id.clone(),
        divergent_windows: divergent,
        direction,
    })
}

/// Options for a full regional analysis pass.
#[derive(Clone, Copy, Debug)]
pub struct RegionOptions {
    pub rule: DetectionRule,
    pub method: CorrelationMethod,
    /// Correlate each site against the mean of the *other* sites instead of
    /// the shared regional mean. Useful for small regions.
    pub leave_one_out: bool,
    pub max_undefined_fraction: f64,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self {
            rule: DetectionRule::fixed_default(),
            method: CorrelationMethod::Pearson,
            leave_one_out: false,
            max_undefined_fraction: DEFAULT_MAX_UNDEFINED_FRACTION,
        }
    }
}

/// Outcome of the regional pass: mean profile, per-point spread, per-site
/// correlations and verdicts.
#[derive(Clone, Debug)]
pub struct RegionAnalysis {
    pub region_id: String,
    pub mean_profile: WpeProfile,
    pub point_std: Vec<f64>,
    pub correlations: BTreeMap<SiteId, Correlation>,
    pub verdicts: BTreeMap<SiteId, Verdict>,
    pub rule: DetectionRule,
}

/// Runs mean profile, correlation, and outlier flagging for one region.
pub fn analyze_region(
    region_id: impl Into<String>,
    profiles: &[WpeProfile],
    opts: &RegionOptions,
) -> Result<RegionAnalysis> {
    let mean = mean_profile(profiles)?;
    let point_std = pointwise_std(profiles, &mean)?;
    let mut correlations = BTreeMap::new();
    for (idx, p) in profiles.iter().enumerate() {
        let c = if p.undefined_fraction() > opts.max_undefined_fraction {
            Correlation::Insufficient(InsufficiencyReason::TooManyUndefined)
        } else if opts.leave_one_out {
            let rest: Vec<WpeProfile> = profiles
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != idx)
                .map(|(_, q)| q.clone())
                .collect();
            correlate(p, &mean_profile(&rest)?, opts.method)?
        } else {
            correlate(p, &mean, opts.method)?
        };
        correlations.insert(p.site_id.clone(), c);
    }
    let verdicts = flag_outliers(&correlations, opts.rule)?;
    Ok(RegionAnalysis {
        region_id: region_id.into(),
        mean_profile: mean,
        point_std,
        correlations,
        verdicts,
        rule: opts.rule,
    })
}

/// Per-site span-mean generation with regional quartile context; shows that
/// pattern anomalies need not move a site's average output.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationSummary {
    pub per_site_mean: BTreeMap<SiteId, f64>,
    pub regional_mean: f64,
    pub q1: f64,
    pub q3: f64,
}

pub fn summarize_generation(series: &[GenerationSeries]) -> Result<GenerationSummary> {
    if series.is_empty() {
        return Err(Error::EmptySeriesSet);
    }
    let per_site_mean: BTreeMap<SiteId, f64> = series
        .iter()
        .map(|s| (s.site_id.clone(), stats::mean(&s.values)))
        .collect();
    let means: Vec<f64> = per_site_mean.values().copied().collect();
    Ok(GenerationSummary {
        regional_mean: stats::mean(&means),
        q1: stats::quantile(&means, 0.25).expect("nonempty"),
        q3: stats::quantile(&means, 0.75).expect("nonempty"),
        per_site_mean,
    })
}

fn check_common_grid(profiles: &[WpeProfile], min: usize) -> Result<()> {
    if profiles.len() < min {
        return Err(Error::TooFewProfiles {
            min,
            got: profiles.len(),
        });
    }
    let first = &profiles[0];
    for p in &profiles[1..] {
        if !p.same_grid_as(first) {
            return Err(Error::GridMismatch {
                site: p.site_id.clone(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn grid(n: usize) -> Vec<DateTime<Utc>> {
        let start = Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap();
        (0..n)
            .map(|i| start + chrono::Duration::days(i as i64))
            .collect()
    }

    fn profile(id: &str, values: &[f64]) -> WpeProfile {
        WpeProfile {
            site_id: SiteId::new(id),
            points: grid(values.len())
                .into_iter()
                .zip(values)
                .map(|(t, &v)| ProfilePoint {
                    window_start: t,
                    value: if v.is_nan() {
                        WpeValue::Undefined
                    } else {
                        WpeValue::Defined {
                            normalized: v,
                            raw_bits: v * 2.0,
                        }
                    },
                })
                .collect(),
        }
    }

    fn values(p: &WpeProfile) -> Vec<Option<f64>> {
        p.points.iter().map(|pt| pt.value.normalized()).collect()
    }

    #[test]
    fn mean_of_two_identical_profiles_is_either_input() {
        let a = profile("a", &[0.4, 0.5, 0.6, 0.7]);
        let b = profile("b", &[0.4, 0.5, 0.6, 0.7]);
        let m = mean_profile(&[a.clone(), b]).unwrap();
        assert_eq!(values(&m), values(&a));
    }

    #[test]
    fn mean_of_constant_profiles() {
        let a = profile("a", &[0.4; 6]);
        let b = profile("b", &[0.6; 6]);
        let m = mean_profile(&[a, b]).unwrap();
        for v in values(&m) {
            assert!((v.unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn mean_skips_undefined_pointwise() {
        let a = profile("a", &[0.4, f64::NAN, f64::NAN]);
        let b = profile("b", &[0.6, 0.8, f64::NAN]);
        let m = mean_profile(&[a, b]).unwrap();
        let vs = values(&m);
        assert!((vs[0].unwrap() - 0.5).abs() < 1e-15);
        assert!((vs[1].unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(vs[2], None);
    }

    #[test]
    fn mean_requires_matching_grids_and_names_the_site() {
        let a = profile("a", &[0.4, 0.5, 0.6]);
        let b = profile("weird", &[0.4, 0.5]);
        match mean_profile(&[a, b]) {
            Err(Error::GridMismatch { site }) => assert_eq!(site.as_str(), "weird"),
            other => panic!("expected grid mismatch, got {other:?}"),
        }
    }

    #[test]
    fn mean_requires_two_profiles() {
        let a = profile("a", &[0.4, 0.5, 0.6]);
        assert!(matches!(
            mean_profile(std::slice::from_ref(&a)),
            Err(Error::TooFewProfiles { min: 2, got: 1 })
        ));
    }

    #[test]
    fn offset_profile_correlates_at_one() {
        let m = profile("mean", &[0.4, 0.6, 0.5, 0.7, 0.55]);
        let p = profile("p", &[0.5, 0.7, 0.6, 0.8, 0.65]);
        let c = correlate(&p, &m, CorrelationMethod::Pearson).unwrap();
        match c {
            Correlation::Defined(v) => assert!((v - 1.0).abs() < 1e-12),
            _ => panic!("expected defined correlation"),
        }
    }

    #[test]
    fn mirrored_profile_correlates_at_minus_one() {
        let base = [0.4, 0.6, 0.5, 0.7, 0.55];
        let avg = base.iter().sum::<f64>() / base.len() as f64;
        let mirrored: Vec<f64> = base.iter().map(|v| 2.0 * avg - v).collect();
        let m = profile("mean", &base);
        let p = profile("p", &mirrored);
        match correlate(&p, &m, CorrelationMethod::Pearson).unwrap() {
            Correlation::Defined(v) => assert!((v + 1.0).abs() < 1e-12),
            _ => panic!("expected defined correlation"),
        }
    }

    #[test]
    fn too_few_joint_points_is_insufficient() {
        let m = profile("mean", &[0.4, f64::NAN, 0.5, f64::NAN, 0.6]);
        let p = profile("p", &[0.5, 0.7, f64::NAN, 0.8, 0.65]);
        // Joint defined points: indices 0 and 4 only.
        assert_eq!(
            correlate(&p, &m, CorrelationMethod::Pearson).unwrap(),
            Correlation::Insufficient(InsufficiencyReason::TooFewPoints)
        );
    }

    #[test]
    fn zero_variance_is_insufficient() {
        let m = profile("mean", &[0.4, 0.5, 0.6, 0.7]);
        let p = profile("p", &[0.5; 4]);
        assert_eq!(
            correlate(&p, &m, CorrelationMethod::Pearson).unwrap(),
            Correlation::Insufficient(InsufficiencyReason::ZeroVariance)
        );
    }

    #[test]
    fn fixed_threshold_flags_only_low_correlations() {
        let mut correlations = BTreeMap::new();
        for (id, c) in [("a", 0.95), ("b", 0.93), ("c", 0.91), ("d", 0.60)] {
            correlations.insert(SiteId::new(id), Correlation::Defined(c));
        }
        let verdicts =
            flag_outliers(&correlations, DetectionRule::FixedThreshold { theta: 0.8 }).unwrap();
        assert_eq!(verdicts[&SiteId::new("a")], Verdict::Normal);
        assert_eq!(verdicts[&SiteId::new("b")], Verdict::Normal);
        assert_eq!(verdicts[&SiteId::new("c")], Verdict::Normal);
        assert_eq!(verdicts[&SiteId::new("d")], Verdict::Anomalous);
    }

    #[test]
    fn iqr_rule_flags_nothing_when_all_equal() {
        let mut correlations = BTreeMap::new();
        for i in 0..9 {
            correlations.insert(SiteId::new(format!("s{i}")), Correlation::Defined(0.9));
        }
        let verdicts = flag_outliers(&correlations, DetectionRule::IqrOutlier).unwrap();
        assert!(verdicts.values().all(|v| *v == Verdict::Normal));
    }

    #[test]
    fn iqr_rule_uses_one_iqr_below_q1() {
        // 11 tight values plus one far site. Q1/Q3 over the 12 defined values.
        let mut correlations = BTreeMap::new();
        let tight = [
            0.90, 0.91, 0.92, 0.93, 0.94, 0.95, 0.96, 0.97, 0.98, 0.99, 1.0,
        ];
        for (i, c) in tight.iter().enumerate() {
            correlations.insert(SiteId::new(format!("s{i:02}")), Correlation::Defined(*c));
        }
        correlations.insert(SiteId::new("low"), Correlation::Defined(0.5));
        let verdicts = flag_outliers(&correlations, DetectionRule::IqrOutlier).unwrap();
        assert_eq!(verdicts[&SiteId::new("low")], Verdict::Anomalous);
        assert_eq!(
            verdicts
                .values()
                .filter(|v| **v == Verdict::Anomalous)
                .count(),
            1
        );
    }

    #[test]
    fn rules_reject_too_few_sites() {
        let mut correlations = BTreeMap::new();
        correlations.insert(SiteId::new("only"), Correlation::Defined(0.9));
        assert!(matches!(
            flag_outliers(&correlations, DetectionRule::fixed_default()),
            Err(Error::TooFewSites { min: 2, .. })
        ));
        for i in 0..6 {
            correlations.insert(SiteId::new(format!("s{i}")), Correlation::Defined(0.9));
        }
        assert!(matches!(
            flag_outliers(&correlations, DetectionRule::IqrOutlier),
            Err(Error::TooFewSites { min: 8, .. })
        ));
    }

    #[test]
    fn insufficient_sites_keep_their_verdict() {
        let mut correlations = BTreeMap::new();
        for i in 0..8 {
            correlations.insert(SiteId::new(format!("s{i}")), Correlation::Defined(0.9));
        }
        correlations.insert(
            SiteId::new("dead"),
            Correlation::Insufficient(InsufficiencyReason::TooManyUndefined),
        );
        let verdicts = flag_outliers(&correlations, DetectionRule::IqrOutlier).unwrap();
        assert_eq!(verdicts[&SiteId::new("dead")], Verdict::Insufficient);
    }

    #[test]
    fn localize_finds_nothing_when_profile_equals_mean() {
        let m = profile("mean", &[0.4, 0.6, 0.5, 0.7]);
        let p = profile("p", &[0.4, 0.6, 0.5, 0.7]);
        let std = vec![0.01; 4];
        let loc = localize(&p, &m, &std, 2.0).unwrap();
        assert!(loc.divergent_windows.is_empty());
    }

    #[test]
    fn localize_flags_constructed_offset_windows() {
        let mut base = vec![0.5; 20];
        for v in base.iter_mut().skip(8).take(5) {
            *v += 0.10; // +10 sigma at sigma = 0.01
        }
        let m = profile("mean", &[0.5; 20]);
        let p = profile("p", &base);
        let std = vec![0.01; 20];
        let loc = localize(&p, &m, &std, 2.0).unwrap();
        assert_eq!(loc.divergent_windows.len(), 5);
        assert_eq!(loc.direction, DeviationDirection::AboveMean);
        let starts: Vec<DateTime<Utc>> = loc.divergent_windows.iter().map(|w| w.0).collect();
        assert_eq!(starts, grid(20)[8..13].to_vec());
    }

    #[test]
    fn localize_rejects_non_positive_band() {
        let m = profile("mean", &[0.5; 4]);
        let p = profile("p", &[0.5; 4]);
        assert!(matches!(
            localize(&p, &m, &[0.01; 4], 0.0),
            Err(Error::InvalidBand(_))
        ));
    }

    #[test]
    fn analyze_region_applies_undefined_fraction_rule() {
        let a = profile("a", &[0.4, 0.5, 0.6, 0.7, 0.5, 0.6, 0.45, 0.65]);
        let b = profile("b", &[0.42, 0.52, 0.62, 0.72, 0.52, 0.62, 0.47, 0.67]);
        let mut dead_values = vec![f64::NAN; 8];
        dead_values[0] = 0.5;
        dead_values[1] = 0.6;
        let dead = profile("dead", &dead_values);
        let analysis = analyze_region("test", &[a, b, dead], &RegionOptions::default()).unwrap();
        assert_eq!(
            analysis.correlations[&SiteId::new("dead")],
            Correlation::Insufficient(InsufficiencyReason::TooManyUndefined)
        );
        assert_eq!(
            analysis.verdicts[&SiteId::new("dead")],
            Verdict::Insufficient
        );
        assert_eq!(analysis.verdicts[&SiteId::new("a")], Verdict::Normal);
    }

    #[test]
    fn verdicts_are_invariant_under_site_reordering() {
        let profiles = vec![
            profile("a", &[0.4, 0.5, 0.6, 0.7, 0.5]),
            profile("b", &[0.41, 0.52, 0.61, 0.72, 0.51]),
            profile("c", &[0.7, 0.3, 0.65, 0.35, 0.9]),
        ];
        let mut reversed = profiles.clone();
        reversed.reverse();
        let opts = RegionOptions::default();
        let v1 = analyze_region("r", &profiles, &opts).unwrap().verdicts;
        let v2 = analyze_region("r", &reversed, &opts).unwrap().verdicts;
        assert_eq!(v1, v2);
    }

    #[test]
    fn generation_summary_of_constant_series() {
        let s = GenerationSeries {
            site_id: SiteId::new("s"),
            postcode: "5000".into(),
            start: Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(),
            interval_secs: 300,
            values: vec![0.5; 100],
            missing_count: 0,
            filled_mask: crate::ingest::FillMask::new(100),
        };
        let mut t = s.clone();
        t.site_id = SiteId::new("t");
        let summary = summarize_generation(&[s, t]).unwrap();
        assert_eq!(summary.per_site_mean[&SiteId::new("s")], 0.5);
        assert_eq!(summary.regional_mean, 0.5);
    }
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Machine-readable region reports: per-site verdicts with correlation and
//! generation context, localization summaries, and the correlation
//! histogram. Serialization is deterministic (stable key order, shortest
//! round-trip floats) so reports can serve as golden files.

use serde::{Deserialize, Serialize};

use crate::detect::{
    AnomalyLocalization, DetectionRule, DeviationDirection, GenerationSummary, RegionAnalysis,
    Verdict,
};
use crate::error::{Error, Result};
use crate::ingest::SiteId;

/// Histogram bin width over the correlation axis [-1, 1].
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.05;
const HISTOGRAM_BINS: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationSummary {
    pub n_divergent_windows: usize,
    pub first_divergent: Option<chrono::DateTime<chrono::Utc>>,
    pub last_divergent: Option<chrono::DateTime<chrono::Utc>>,
    pub direction: DeviationDirection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub site_id: SiteId,
    /// Absent for sites with an Insufficient verdict.
    pub correlation: Option<f64>,
    pub verdict: Verdict,
    pub mean_generation: f64,
    pub localization: Option<LocalizationSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// 41 edges delimiting 40 fixed bins of width 0.05 over [-1, 1].
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub region_id: String,
    pub n_sites: usize,
    pub rule: DetectionRule,
    /// Sorted by ascending correlation; sites without a correlation first.
    pub sites: Vec<SiteRecord>,
    pub regional_mean_generation: f64,
    pub generation_q1: f64,
    pub generation_q3: f64,
    pub histogram: Histogram,
}

/// Builds the report for one region. All three inputs must agree on the
/// site set; localizations may cover any subset of sites.
pub fn build_report(
    analysis: &RegionAnalysis,
    localizations: &[AnomalyLocalization],
    generation: &GenerationSummary,
) -> Result<RegionReport> {
    let sites_in_analysis: Vec<&SiteId> = analysis.correlations.keys().collect();
    let sites_in_generation: Vec<&SiteId> = generation.per_site_mean.keys().collect();
    if sites_in_analysis != sites_in_generation {
        return Err(Error::SiteSetMismatch(format!(
            "analysis covers {} sites, generation summary {}",
            sites_in_analysis.len(),
            sites_in_generation.len()
        )));
    }
    for loc in localizations {
        if !analysis.correlations.contains_key(&loc.site_id) {
            return Err(Error::SiteSetMismatch(format!(
                "localization for unknown site {}",
                loc.site_id
            )));
        }
    }

    let mut sites: Vec<SiteRecord> = analysis
        .correlations
        .iter()
        .map(|(site_id, correlation)| {
            let localization = localizations
                .iter()
                .find(|l| &l.site_id == site_id)
                .map(|l| LocalizationSummary {
                    n_divergent_windows: l.divergent_windows.len(),
                    first_divergent: l.divergent_windows.first().map(|w| w.0),
                    last_divergent: l.divergent_windows.last().map(|w| w.0),
                    direction: l.direction,
                });
            SiteRecord {
                site_id: site_id.clone(),
                correlation: correlation.value(),
                verdict: analysis.verdicts[site_id],
                mean_generation: generation.per_site_mean[site_id],
                localization,
            }
        })
        .collect();
    // Ascending correlation; correlation-less (Insufficient) records first,
    // then by site id for a total deterministic order.
    sites.sort_by(|a, b| {
        match (a.correlation, b.correlation) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.partial_cmp(&y).expect("finite correlations"),
        }
        .then_with(|| a.site_id.cmp(&b.site_id))
    });

    let defined: Vec<f64> = sites.iter().filter_map(|s| s.correlation).collect();
    Ok(RegionReport {
        region_id: analysis.region_id.clone(),
        n_sites: sites.len(),
        rule: analysis.rule,
        sites,
        regional_mean_generation: generation.regional_mean,
        generation_q1: generation.q1,
        generation_q3: generation.q3,
        histogram: correlation_histogram(&defined),
    })
}

/// Counts correlations into 40 fixed bins of width 0.05 over [-1, 1];
/// values at the upper boundary land in the last bin.
pub fn correlation_histogram(correlations: &[f64]) -> Histogram {
    let bin_edges: Vec<f64> = (0..=HISTOGRAM_BINS)
        .map(|k| k as f64 / 20.0 - 1.0)
        .collect();
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for &c in correlations {
        let idx = (((c + 1.0) * 20.0).floor() as isize).clamp(0, HISTOGRAM_BINS as isize - 1);
        counts[idx as usize] += 1;
    }
    Histogram { bin_edges, counts }
}

/// Deterministic JSON rendering of a report.
pub fn to_json(report: &RegionReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn from_json(json: &str) -> Result<RegionReport> {
    Ok(serde_json::from_str(json)?)
}

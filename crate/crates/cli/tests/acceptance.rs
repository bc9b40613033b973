// SPDX-License-Identifier: MIT OR Apache-2.0

//! Acceptance suite: every release-gating requirement, one test per
//! criterion, each printing a PASS line with the measured values. The
//! fixture-backed criteria all run on the frozen 23-site reference fleet
//! (20 healthy sites, 3 injected faults) at the default analysis
//! parameters: d=6, tau=3, 3-month windows, daily stride.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::Instant;

use chrono::{DateTime, Duration, Utc};

use pventropy::detect::{
    analyze_region, localize, summarize_generation, DetectionRule, DeviationDirection,
    RegionAnalysis, RegionOptions, Verdict,
};
use pventropy::ingest::{
    clean, normalize_per_unit, write_metadata_csv, write_wide_csv, CleanOutcome, CleanPolicy,
    ExclusionReason, GenerationSeries, SiteId,
};
use pventropy::profile::{
    default_grid, hyperparameter_sweep, profile_fleet, SweepResult, WindowSpec, WpeProfile,
};
use pventropy::synth::{
    default_faults, generate_fleet, generate_fleet_with_faults, FaultSpec, FleetSpec, SplitMix64,
};
use pventropy::wpe::{wpe, EmbeddingConfig, WpeValue};
use pventropy_oracle::{naive_locf, naive_wpe};

const INTERVAL_SECS: i64 = 300;

fn default_cfg() -> EmbeddingConfig {
    EmbeddingConfig::new(6, 3).unwrap()
}

fn default_window() -> WindowSpec {
    WindowSpec::new(90 * 288, 288).unwrap()
}

/// Runs the ingest-side preparation the analyze command applies.
fn prepare(fleet: Vec<GenerationSeries>) -> Vec<GenerationSeries> {
    fleet
        .into_iter()
        .map(|s| {
            let CleanOutcome::Cleaned(s) = clean(s, &CleanPolicy::default()) else {
                panic!("fixture series must survive cleaning");
            };
            let CleanOutcome::Cleaned(s) = normalize_per_unit(s) else {
                panic!("fixture series must normalize");
            };
            s
        })
        .collect()
}

struct Fixture {
    fleet: Vec<GenerationSeries>,
    faults: Vec<FaultSpec>,
    profiles: Vec<WpeProfile>,
    fixed: RegionAnalysis,
    iqr: RegionAnalysis,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let faults = default_faults();
        let fleet = prepare(generate_fleet_with_faults(&FleetSpec::default(), &faults).unwrap());
        let profiles = profile_fleet(&fleet, default_cfg(), &default_window())
            .unwrap()
            .profiles;
        let fixed = analyze_region("all", &profiles, &RegionOptions::default()).unwrap();
        let iqr = analyze_region(
            "all",
            &profiles,
            &RegionOptions {
                rule: DetectionRule::IqrOutlier,
                ..RegionOptions::default()
            },
        )
        .unwrap();
        Fixture {
            fleet,
            faults,
            profiles,
            fixed,
            iqr,
        }
    })
}

fn faulted_ids(fixture: &Fixture) -> BTreeSet<SiteId> {
    fixture.faults.iter().map(|f| f.site_id.clone()).collect()
}

#[test]
fn acceptance_01_kernel_matches_oracle_within_1e12() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0xACCE55);
    let mut max_diff = 0.0f64;
    for _ in 0..1000 {
        let len = 50 + (rng.next_u64() % 151) as usize;
        let d = 3 + (rng.next_u64() % 2) as usize;
        let tau = 1 + (rng.next_u64() % 3) as usize;
        let window: Vec<f64> = (0..len).map(|_| rng.next_f64() * 4.0 - 2.0).collect();
        let cfg = EmbeddingConfig::new(d, tau).unwrap();
        match (wpe(&window, cfg).unwrap(), naive_wpe(&window, d, tau)) {
            (WpeValue::Defined { normalized, .. }, Some(reference)) => {
                max_diff = max_diff.max((normalized - reference).abs());
            }
            (WpeValue::Undefined, None) => {}
            other => panic!("definedness mismatch: {other:?}"),
        }
    }
    let elapsed = started.elapsed();
    assert!(max_diff < 1e-12, "max |kernel - oracle| = {max_diff:e}");
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}");
    println!(
        "PASS acceptance 01: 1000 random windows match the naive oracle, \
         max |diff| = {max_diff:.3e} (< 1e-12) in {elapsed:?}"
    );
}

#[test]
fn acceptance_02_analytic_limit_cases() {
    let started = Instant::now();
    let cfg = EmbeddingConfig::new(3, 1).unwrap();

    let monotone: Vec<f64> = (0..500).map(|i| 0.3 * i as f64 - 10.0).collect();
    for (d, tau) in [(3, 1), (6, 3)] {
        let c = EmbeddingConfig::new(d, tau).unwrap();
        let WpeValue::Defined { normalized, .. } = wpe(&monotone, c).unwrap() else {
            panic!("monotone window must be defined");
        };
        assert_eq!(normalized, 0.0, "monotone window, d={d}, tau={tau}");
    }

    assert_eq!(wpe(&[0.7; 300], cfg).unwrap(), WpeValue::Undefined);

    let mut rng = SplitMix64::new(2024);
    let uniform: Vec<f64> = (0..50_000).map(|_| rng.next_f64()).collect();
    let WpeValue::Defined { normalized, .. } = wpe(&uniform, cfg).unwrap() else {
        panic!("uniform window must be defined");
    };
    assert!(normalized > 0.99, "uniform WPE = {normalized}");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 5, "took {elapsed:?}");
    println!(
        "PASS acceptance 02: monotone -> 0 exactly, constant -> undefined, \
         50k i.i.d. uniform -> {normalized:.5} (> 0.99) in {elapsed:?}"
    );
}

#[test]
fn acceptance_03_affine_invariance_on_tie_free_windows() {
    let mut rng = SplitMix64::new(0xAF1E);
    let cfg = EmbeddingConfig::new(4, 2).unwrap();
    let mut max_diff = 0.0f64;
    for _ in 0..500 {
        let len = 30 + (rng.next_u64() % 121) as usize;
        // Distinct integers, shuffled: ties impossible, affine maps exact.
        let mut window: Vec<f64> = (0..len).map(|i| (i * 97 + 13) as f64).collect();
        for i in (1..window.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            window.swap(i, j);
        }
        let WpeValue::Defined {
            normalized: base, ..
        } = wpe(&window, cfg).unwrap()
        else {
            panic!("tie-free window must be defined");
        };
        for a in [0.5, 3.0, -2.0] {
            for b in [-1.0, 0.0, 10.0] {
                let mapped: Vec<f64> = window.iter().map(|x| a * x + b).collect();
                let WpeValue::Defined {
                    normalized: image, ..
                } = wpe(&mapped, cfg).unwrap()
                else {
                    panic!("affine image must be defined");
                };
                max_diff = max_diff.max((base - image).abs());
            }
        }
    }
    assert!(max_diff < 1e-12, "max |wpe(ax+b) - wpe(x)| = {max_diff:e}");
    println!(
        "PASS acceptance 03: 500 tie-free windows x 9 affine maps, \
         max |diff| = {max_diff:.3e} (< 1e-12)"
    );
}

#[test]
fn acceptance_04_healthy_region_correlates_above_threshold() {
    // 20 healthy sites, no faults: the fixture's normal cohort.
    let spec = FleetSpec {
        n_sites: 20,
        ..FleetSpec::default()
    };
    let fleet = prepare(generate_fleet(&spec).unwrap());
    let profiles = profile_fleet(&fleet, default_cfg(), &default_window())
        .unwrap()
        .profiles;
    let analysis = analyze_region("all", &profiles, &RegionOptions::default()).unwrap();
    let mut min_corr = f64::INFINITY;
    for corr in analysis.correlations.values() {
        min_corr = min_corr.min(corr.value().expect("healthy sites correlate"));
    }
    assert!(
        min_corr > 0.8,
        "lowest healthy-site correlation {min_corr} <= 0.8"
    );
    println!(
        "PASS acceptance 04: all 20 healthy sites correlate with the regional mean \
         above 0.8 (minimum {min_corr:.4})"
    );
}

#[test]
fn acceptance_05_both_rules_flag_exactly_the_injected_sites() {
    let fx = fixture();
    let expected = faulted_ids(fx);

    for (name, analysis) in [("fixed threshold 0.8", &fx.fixed), ("IQR outlier", &fx.iqr)] {
        let flagged: BTreeSet<SiteId> = analysis
            .verdicts
            .iter()
            .filter(|(_, v)| **v != Verdict::Normal)
            .map(|(s, _)| s.clone())
            .collect();
        assert_eq!(
            flagged, expected,
            "{name} rule flagged {flagged:?}, expected {expected:?}"
        );
    }

    // The same faulted sites are unremarkable by average output: every
    // span-mean lies inside the fleet's interquartile range.
    let generation = summarize_generation(&fx.fleet).unwrap();
    for site in &expected {
        let mean = generation.per_site_mean[site];
        assert!(
            (generation.q1..=generation.q3).contains(&mean),
            "site {site}: span mean {mean} outside fleet IQR [{}, {}]",
            generation.q1,
            generation.q3
        );
    }
    println!(
        "PASS acceptance 05: fixed-threshold and IQR rules both flag exactly {:?}; \
         all three span means inside the fleet IQR [{:.4}, {:.4}]",
        expected.iter().map(SiteId::as_str).collect::<Vec<_>>(),
        generation.q1,
        generation.q3
    );
}

/// Site and regional mean WPE averaged over the windows fully inside the
/// fault interval.
fn wpe_inside_fault(fx: &Fixture, fault: &FaultSpec) -> (f64, f64) {
    let profile = fx
        .profiles
        .iter()
        .find(|p| p.site_id == fault.site_id)
        .expect("fault site profiled");
    let width_span = Duration::seconds(default_window().width() as i64 * INTERVAL_SECS);
    let mut site_sum = 0.0;
    let mut mean_sum = 0.0;
    let mut count = 0usize;
    for (p, m) in profile.points.iter().zip(&fx.fixed.mean_profile.points) {
        if p.window_start >= fault.start && p.window_start + width_span <= fault.end {
            if let (Some(a), Some(b)) = (p.value.normalized(), m.value.normalized()) {
                site_sum += a;
                mean_sum += b;
                count += 1;
            }
        }
    }
    assert!(count > 0, "no window fits inside the fault interval");
    (site_sum / count as f64, mean_sum / count as f64)
}

#[test]
fn acceptance_06_fault_classes_move_wpe_in_the_observed_direction() {
    let fx = fixture();
    let mut lines = Vec::new();
    for fault in &fx.faults {
        let (site, regional) = wpe_inside_fault(fx, fault);
        match fault.kind.name() {
            "partial_shading" => assert!(
                site < regional,
                "repetitive shading should lower WPE: site {site} vs regional {regional}"
            ),
            "curtailment_clipping" | "rapid_fluctuation" => assert!(
                site > regional,
                "{} should raise WPE: site {site} vs regional {regional}",
                fault.kind.name()
            ),
            other => panic!("unexpected fault kind {other}"),
        }
        lines.push(format!("{} {:+.4}", fault.kind.name(), site - regional));
    }
    println!(
        "PASS acceptance 06: fault-interval WPE deltas vs regional mean: {}",
        lines.join(", ")
    );
}

fn iqr_of(sweep: &SweepResult, d: usize, tau: usize) -> f64 {
    sweep
        .cells
        .iter()
        .find(|c| c.cfg.dimension() == d && c.cfg.delay() == tau)
        .expect("cell in sweep")
        .stats
        .iqr()
}

#[test]
fn acceptance_07_sweep_shows_wider_boxes_for_larger_delay_and_dimension() {
    let fx = fixture();
    let sweep = hyperparameter_sweep(&fx.fleet, &default_grid()).unwrap();
    assert_eq!(sweep.cells.len(), 15);
    for d in 3..=7 {
        let narrow = iqr_of(&sweep, d, 1);
        let wide = iqr_of(&sweep, d, 3);
        assert!(
            wide > narrow,
            "d={d}: IQR(tau=3) = {wide} not greater than IQR(tau=1) = {narrow}"
        );
    }
    for tau in 1..=3 {
        for d in 3..6 {
            let lo = iqr_of(&sweep, d, tau);
            let hi = iqr_of(&sweep, d + 1, tau);
            assert!(
                hi >= lo,
                "tau={tau}: IQR decreases from d={d} ({lo}) to d={} ({hi})",
                d + 1
            );
        }
    }
    println!(
        "PASS acceptance 07: IQR(tau=3) > IQR(tau=1) at every d in 3..=7 and \
         IQR non-decreasing in d from 3 to 6 at every tau"
    );
}

/// Jaccard index between the time covered by flagged windows and the
/// injected interval.
fn coverage_jaccard(flagged: &[(DateTime<Utc>, f64)], window_secs: i64, fault: &FaultSpec) -> f64 {
    let mut spans: Vec<(i64, i64)> = flagged
        .iter()
        .map(|(t, _)| (t.timestamp(), t.timestamp() + window_secs))
        .collect();
    spans.sort_unstable();
    let mut merged: Vec<(i64, i64)> = Vec::new();
    for (a, b) in spans {
        match merged.last_mut() {
            Some((_, end)) if a <= *end => *end = (*end).max(b),
            _ => merged.push((a, b)),
        }
    }
    let fs = fault.start.timestamp();
    let fe = fault.end.timestamp();
    let covered: i64 = merged.iter().map(|(a, b)| b - a).sum();
    let intersection: i64 = merged
        .iter()
        .map(|(a, b)| ((*b).min(fe) - (*a).max(fs)).max(0))
        .sum();
    let union = covered + (fe - fs) - intersection;
    if union == 0 {
        0.0
    } else {
        intersection as f64 / union as f64
    }
}

#[test]
fn acceptance_08_flagged_windows_localize_each_fault() {
    let fx = fixture();
    let window_secs = default_window().width() as i64 * INTERVAL_SECS;
    let mut lines = Vec::new();
    for fault in &fx.faults {
        let profile = fx
            .profiles
            .iter()
            .find(|p| p.site_id == fault.site_id)
            .unwrap();
        let loc = localize(profile, &fx.fixed.mean_profile, &fx.fixed.point_std, 2.0).unwrap();
        let jaccard = coverage_jaccard(&loc.divergent_windows, window_secs, fault);
        assert!(
            jaccard >= 0.5,
            "{}: flagged coverage vs injected interval has Jaccard {jaccard}",
            fault.kind.name()
        );
        let expected_direction = match fault.kind.name() {
            "partial_shading" => DeviationDirection::BelowMean,
            _ => DeviationDirection::AboveMean,
        };
        assert_eq!(loc.direction, expected_direction, "{}", fault.kind.name());
        lines.push(format!("{} {:.3}", fault.kind.name(), jaccard));
    }
    println!(
        "PASS acceptance 08: flagged-window coverage overlaps every injected interval \
         with Jaccard >= 0.5 ({})",
        lines.join(", ")
    );
}

#[test]
fn acceptance_09_full_fleet_analysis_stays_under_five_minutes() {
    let spec = FleetSpec {
        n_sites: 105,
        ..FleetSpec::default()
    };
    let fleet = generate_fleet(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    {
        let file = std::fs::File::create(dir.path().join("fleet.csv")).unwrap();
        write_wide_csv(&fleet, std::io::BufWriter::new(file)).unwrap();
        let meta = std::fs::File::create(dir.path().join("meta.csv")).unwrap();
        write_metadata_csv(&fleet, std::io::BufWriter::new(meta)).unwrap();
    }
    drop(fleet);

    let started = Instant::now();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_pventropy"))
        .current_dir(dir.path())
        .args([
            "analyze",
            "--input",
            "fleet.csv",
            "--format",
            "wide",
            "--metadata",
            "meta.csv",
            "--out",
            "results",
        ])
        .output()
        .expect("binary runs");
    let elapsed = started.elapsed();
    assert!(
        output.status.code() == Some(0) || output.status.code() == Some(2),
        "analyze failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(
        dir.path().join("results/profiles.csv").exists()
            && dir.path().join("results/region_all.json").exists(),
        "outputs missing"
    );
    assert!(
        elapsed.as_secs() < 300,
        "105-site analyze took {elapsed:?}, budget is 5 minutes"
    );
    println!(
        "PASS acceptance 09: 105-site, 1-year, 5-minute fleet analyzed in {elapsed:?} \
         (< 5 minutes)"
    );
}

#[test]
fn acceptance_10_cleaning_rules() {
    // 201 missing points at the 200 limit: excluded.
    let spec = FleetSpec {
        n_sites: 2,
        span_days: 30,
        ..FleetSpec::default()
    };
    let fleet = generate_fleet(&spec).unwrap();
    let mut gappy = fleet[0].clone();
    let mut punched = 0usize;
    let mut idx = 7;
    while punched < 201 {
        if !gappy.values[idx].is_nan() {
            gappy.values[idx] = f64::NAN;
            punched += 1;
        }
        idx += 37;
    }
    gappy.missing_count = 201;
    match clean(gappy.clone(), &CleanPolicy { max_missing: 200 }) {
        CleanOutcome::Excluded { reason, .. } => assert_eq!(
            reason,
            ExclusionReason::TooManyMissing {
                missing: 201,
                limit: 200
            }
        ),
        CleanOutcome::Cleaned(_) => panic!("201 missing points must exclude at limit 200"),
    }

    // Under the limit the gap fill must agree with the oracle exactly.
    let mut under = gappy;
    let mut restored = 0;
    for v in under.values.iter_mut() {
        if v.is_nan() && restored < 1 {
            *v = 0.5;
            restored += 1;
        }
    }
    under.missing_count = 200;
    let reference = naive_locf(&under.values);
    let CleanOutcome::Cleaned(cleaned) = clean(under, &CleanPolicy { max_missing: 200 }) else {
        panic!("200 missing points stay in at limit 200");
    };
    assert_eq!(cleaned.values, reference, "gap fill must match the oracle");

    // Per-unit normalization pins the maximum at exactly 1.
    let CleanOutcome::Cleaned(normalized) = normalize_per_unit(cleaned) else {
        panic!("live series must normalize");
    };
    assert_eq!(normalized.max_value(), 1.0);

    println!(
        "PASS acceptance 10: 201 missing points excluded at limit 200, gap fill matches \
         the oracle exactly, per-unit maximum is exactly 1"
    );
}

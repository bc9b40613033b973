// SPDX-License-Identifier: MIT OR Apache-2.0

//! Prints the key statistics of the frozen synthetic fixture: per-site
//! correlations, generation means, sweep IQR trends, fault-window WPE
//! direction, and localization coverage. Used to sanity-check the fixture
//! whenever the generator or fault defaults change.

use pventropy::detect::{
    analyze_region, localize, summarize_generation, DetectionRule, RegionOptions, Verdict,
};
use pventropy::profile::{default_grid, hyperparameter_sweep, profile_fleet, WindowSpec};
use pventropy::synth::{default_faults, generate_fleet_with_faults, FleetSpec};
use pventropy::wpe::EmbeddingConfig;

fn main() {
    let t0 = std::time::Instant::now();
    let spec = FleetSpec::default();
    let faults = default_faults();

    // Clean baselines first: per-site span means without any fault, sorted.
    let clean = pventropy::synth::generate_fleet(&spec).unwrap();
    let clean_summary = summarize_generation(&clean).unwrap();
    let mut baselines: Vec<(String, f64)> = clean_summary
        .per_site_mean
        .iter()
        .map(|(s, m)| (s.to_string(), *m))
        .collect();
    baselines.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    println!("clean baseline means (sorted):");
    for (s, m) in &baselines {
        println!("  {s} {m:.4}");
    }

    let fleet = generate_fleet_with_faults(&spec, &faults).unwrap();
    println!(
        "fleet generated: {} sites in {:?}",
        fleet.len(),
        t0.elapsed()
    );

    let cfg = EmbeddingConfig::new(6, 3).unwrap();
    let win = WindowSpec::new(90 * 288, 288).unwrap();
    let t1 = std::time::Instant::now();
    let profiles = profile_fleet(&fleet, cfg, &win).unwrap();
    println!(
        "profiles: {} points each in {:?}",
        profiles.profiles[0].points.len(),
        t1.elapsed()
    );

    let analysis = analyze_region("all", &profiles.profiles, &RegionOptions::default()).unwrap();
    let faulted: Vec<&str> = faults.iter().map(|f| f.site_id.as_str()).collect();
    let mut normal_min = f64::INFINITY;
    let mut faulted_max = f64::NEG_INFINITY;
    println!("\nsite           corr      verdict   mean_gen");
    let gen = summarize_generation(&fleet).unwrap();
    for (site, corr) in &analysis.correlations {
        let c = corr.value().unwrap_or(f64::NAN);
        let v = analysis.verdicts[site];
        let is_faulted = faulted.contains(&site.as_str());
        if is_faulted {
            faulted_max = faulted_max.max(c);
        } else {
            normal_min = normal_min.min(c);
        }
        println!(
            "{:<12} {:>9.4}   {:<10?} {:>8.4} {}",
            site.to_string(),
            c,
            v,
            gen.per_site_mean[site],
            if is_faulted { "  <-- fault" } else { "" }
        );
    }
    println!(
        "\nnormal min corr = {normal_min:.4}, faulted max corr = {faulted_max:.4}, margin = {:.4}",
        normal_min - faulted_max
    );
    println!(
        "generation quartiles: q1 = {:.4}, mean = {:.4}, q3 = {:.4}",
        gen.q1, gen.regional_mean, gen.q3
    );

    // IQR-rule verdicts.
    let iqr_analysis = analyze_region(
        "all",
        &profiles.profiles,
        &RegionOptions {
            rule: DetectionRule::IqrOutlier,
            ..RegionOptions::default()
        },
    )
    .unwrap();
    let iqr_flagged: Vec<String> = iqr_analysis
        .verdicts
        .iter()
        .filter(|(_, v)| **v != Verdict::Normal)
        .map(|(s, _)| s.to_string())
        .collect();
    println!("IQR rule flags: {iqr_flagged:?}");

    // Fault-direction check: site mean WPE inside fault windows vs regional mean.
    println!("\nfault direction (site vs regional mean WPE inside fault interval):");
    for fault in &faults {
        let profile = profiles
            .profiles
            .iter()
            .find(|p| p.site_id == fault.site_id)
            .unwrap();
        let width_span = chrono::Duration::seconds(win.width() as i64 * 300);
        let mut site_sum = 0.0;
        let mut mean_sum = 0.0;
        let mut n = 0;
        for (p, m) in profile.points.iter().zip(&analysis.mean_profile.points) {
            if p.window_start >= fault.start && p.window_start + width_span <= fault.end {
                if let (Some(a), Some(b)) = (p.value.normalized(), m.value.normalized()) {
                    site_sum += a;
                    mean_sum += b;
                    n += 1;
                }
            }
        }
        println!(
            "  {} {:<22} windows_inside={n:>3} site={:.4} regional={:.4} delta={:+.4}",
            fault.site_id,
            fault.kind.name(),
            site_sum / n.max(1) as f64,
            mean_sum / n.max(1) as f64,
            (site_sum - mean_sum) / n.max(1) as f64
        );
    }

    // Average regional sigma inside each fault interval.
    for fault in &faults {
        let width_span = chrono::Duration::seconds(win.width() as i64 * 300);
        let sigmas: Vec<f64> = analysis
            .mean_profile
            .points
            .iter()
            .zip(&analysis.point_std)
            .filter(|(p, _)| {
                p.window_start >= fault.start && p.window_start + width_span <= fault.end
            })
            .map(|(_, s)| *s)
            .collect();
        let avg = sigmas.iter().sum::<f64>() / sigmas.len().max(1) as f64;
        println!(
            "sigma inside {} fault: avg {:.4} (2-sigma band = {:.4})",
            fault.kind.name(),
            avg,
            2.0 * avg
        );
    }

    // Localization: time-coverage Jaccard of flagged windows vs fault interval.
    println!("\nlocalization (band = 2.0):");
    for fault in &faults {
        let profile = profiles
            .profiles
            .iter()
            .find(|p| p.site_id == fault.site_id)
            .unwrap();
        let loc = localize(profile, &analysis.mean_profile, &analysis.point_std, 2.0).unwrap();
        let width_secs = win.width() as i64 * 300;
        let mut covered: Vec<(i64, i64)> = loc
            .divergent_windows
            .iter()
            .map(|(t, _)| (t.timestamp(), t.timestamp() + width_secs))
            .collect();
        covered.sort();
        let mut merged: Vec<(i64, i64)> = Vec::new();
        for (a, b) in covered {
            match merged.last_mut() {
                Some((_, end)) if a <= *end => *end = (*end).max(b),
                _ => merged.push((a, b)),
            }
        }
        let fs = fault.start.timestamp();
        let fe = fault.end.timestamp();
        let union_len: i64 = {
            let mut total: i64 = merged.iter().map(|(a, b)| b - a).sum();
            let mut inter: i64 = 0;
            for (a, b) in &merged {
                let lo = (*a).max(fs);
                let hi = (*b).min(fe);
                if hi > lo {
                    inter += hi - lo;
                }
            }
            total += (fe - fs) - inter;
            total
        };
        let inter_len: i64 = merged
            .iter()
            .map(|(a, b)| ((*b).min(fe) - (*a).max(fs)).max(0))
            .sum();
        let jaccard = if union_len > 0 {
            inter_len as f64 / union_len as f64
        } else {
            0.0
        };
        println!(
            "  {} {:<22} flagged={:>3} direction={:?} jaccard={:.3}",
            fault.site_id,
            fault.kind.name(),
            loc.divergent_windows.len(),
            loc.direction,
            jaccard
        );
    }

    // Sweep trends.
    let t2 = std::time::Instant::now();
    let sweep = hyperparameter_sweep(&fleet, &default_grid()).unwrap();
    println!("\nsweep in {:?}:", t2.elapsed());
    println!("d tau   median      q1        q3       IQR");
    for cell in &sweep.cells {
        println!(
            "{} {}   {:.5}  {:.5}  {:.5}  {:.6}",
            cell.cfg.dimension(),
            cell.cfg.delay(),
            cell.stats.median,
            cell.stats.q1,
            cell.stats.q3,
            cell.stats.iqr()
        );
    }
    for d in 3..=7 {
        let iqr = |tau: usize| {
            sweep
                .cells
                .iter()
                .find(|c| c.cfg.dimension() == d && c.cfg.delay() == tau)
                .unwrap()
                .stats
                .iqr()
        };
        println!(
            "d={d}: IQR(t1)={:.6} IQR(t3)={:.6} -> tau trend {}",
            iqr(1),
            iqr(3),
            if iqr(3) > iqr(1) { "OK" } else { "VIOLATED" }
        );
    }
    let iqr_at = |d: usize, tau: usize| {
        sweep
            .cells
            .iter()
            .find(|c| c.cfg.dimension() == d && c.cfg.delay() == tau)
            .unwrap()
            .stats
            .iqr()
    };
    for tau in 1..=3 {
        let mut ok = true;
        for d in 3..6 {
            if iqr_at(d + 1, tau) < iqr_at(d, tau) {
                ok = false;
            }
        }
        println!(
            "tau={tau}: IQR non-decreasing d=3..6 {}",
            if ok { "OK" } else { "VIOLATED" }
        );
    }
    println!("\ntotal {:?}", t0.elapsed());
}

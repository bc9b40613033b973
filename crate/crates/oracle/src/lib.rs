// SPDX-License-Identifier: MIT OR Apache-2.0

//! Deliberately naive reference implementations for test oracles.
//!
//! Everything here favors the most literal translation of each definition
//! over speed, and shares no code with the main crate: ranks come from a
//! stable sort instead of pairwise counting, the pattern histogram is a
//! `HashMap` keyed by the rank sequence instead of a Lehmer-indexed array,
//! and the rolling profiler re-derives every window from scratch. Tests
//! compare the fast paths against these.

use std::collections::HashMap;

/// Rank sequence of a vector: position i holds the 1-based rank of element
/// i, ties resolved by original index (stable sort by value, then index).
pub fn naive_ranks(vector: &[f64]) -> Vec<u8> {
    let mut order: Vec<usize> = (0..vector.len()).collect();
    order.sort_by(|&i, &j| {
        vector[i]
            .partial_cmp(&vector[j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut ranks = vec![0u8; vector.len()];
    for (rank, &idx) in order.iter().enumerate() {
        ranks[idx] = rank as u8 + 1;
    }
    ranks
}

/// Population variance of the vector, the per-vector weight.
pub fn naive_weight(vector: &[f64]) -> f64 {
    let d = vector.len() as f64;
    let mean = vector.iter().sum::<f64>() / d;
    vector.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / d
}

/// Weighted pattern probabilities of a window, keyed by rank sequence.
/// Returns the map and the total weight; the map is empty when the total
/// weight is zero.
pub fn naive_distribution(window: &[f64], d: usize, tau: usize) -> (HashMap<Vec<u8>, f64>, f64) {
    let n_vec = window.len() - (d - 1) * tau;
    let mut sums: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut total = 0.0;
    for t in 0..n_vec {
        let vector: Vec<f64> = (0..d).map(|s| window[t + s * tau]).collect();
        let w = naive_weight(&vector);
        total += w;
        *sums.entry(naive_ranks(&vector)).or_insert(0.0) += w;
    }
    if total == 0.0 {
        return (HashMap::new(), 0.0);
    }
    for v in sums.values_mut() {
        *v /= total;
    }
    (sums, total)
}

/// Normalized WPE of a window; None when the total weight is zero.
pub fn naive_wpe(window: &[f64], d: usize, tau: usize) -> Option<f64> {
    let (probs, total) = naive_distribution(window, d, tau);
    if total == 0.0 {
        return None;
    }
    let raw: f64 = probs
        .values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    let d_factorial: usize = (1..=d).product();
    Some(raw / (d_factorial as f64).log2())
}

/// Rolling profile computed window by window with [`naive_wpe`].
pub fn naive_profile(
    values: &[f64],
    d: usize,
    tau: usize,
    width: usize,
    stride: usize,
) -> Vec<Option<f64>> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos + width <= values.len() {
        out.push(naive_wpe(&values[pos..pos + width], d, tau));
        pos += stride;
    }
    out
}

/// Textbook Pearson correlation; joint pairs are used as-is.
pub fn naive_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let dx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let dy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    num / (dx * dy).sqrt()
}

/// Last-observation-carried-forward over NaN gaps, leading gaps to 0.
pub fn naive_locf(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut last = 0.0;
    for &v in values {
        if v.is_nan() {
            out.push(last);
        } else {
            out.push(v);
            last = v;
        }
    }
    out
}

/// Pointwise mean across profiles, skipping None entries.
pub fn naive_pointwise_mean(profiles: &[Vec<Option<f64>>]) -> Vec<Option<f64>> {
    let len = profiles.first().map(Vec::len).unwrap_or(0);
    (0..len)
        .map(|i| {
            let defined: Vec<f64> = profiles.iter().filter_map(|p| p[i]).collect();
            if defined.is_empty() {
                None
            } else {
                Some(defined.iter().sum::<f64>() / defined.len() as f64)
            }
        })
        .collect()
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Weighted ordinal-pattern entropy kernel.
//!
//! Operates on a single window of samples: extracts embedding vectors,
//! ranks them into ordinal patterns, weights each occurrence by the
//! vector's variance, and reduces the weighted pattern distribution to a
//! normalized entropy in \[0, 1\]. All functions are pure and safe to call
//! from any number of threads.

use crate::error::{Error, Result};

/// Smallest useful embedding dimension.
pub const MIN_DIMENSION: usize = 3;
/// Largest supported embedding dimension (7! = 5040 pattern bins).
pub const MAX_DIMENSION: usize = 7;

const FACTORIALS: [usize; 8] = [1, 1, 2, 6, 24, 120, 720, 5040];

/// Embedding dimension `d` and time delay `tau` for vector extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EmbeddingConfig {
    d: usize,
    tau: usize,
}

impl EmbeddingConfig {
    pub fn new(d: usize, tau: usize) -> Result<Self> {
        if !(MIN_DIMENSION..=MAX_DIMENSION).contains(&d) {
            return Err(Error::InvalidDimension(d));
        }
        if tau < 1 {
            return Err(Error::InvalidDelay(tau));
        }
        Ok(Self { d, tau })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn delay(&self) -> usize {
        self.tau
    }

    /// Number of distinct ordinal patterns, d!.
    pub fn pattern_count(&self) -> usize {
        FACTORIALS[self.d]
    }

    /// Sample span covered by one embedding vector, (d-1)*tau.
    pub fn vector_span(&self) -> usize {
        (self.d - 1) * self.tau
    }

    /// Shortest window admitting at least one embedding vector.
    pub fn min_window_len(&self) -> usize {
        self.vector_span() + 1
    }

    /// Number of embedding vectors extracted from a window of `n` samples.
    pub fn vector_count(&self, n: usize) -> usize {
        n.saturating_sub(self.vector_span())
    }

    /// Whether `n` samples give stable pattern statistics (N > 5*d!).
    /// Advisory only; short windows still produce a value.
    pub fn meets_length_recommendation(&self, n: usize) -> bool {
        n > 5 * self.pattern_count()
    }
}

/// Rank sequence of an embedding vector: `ranks[i]` is the 1-based rank of
/// element `i`, ties broken by original index order (earlier index wins the
/// smaller rank).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrdinalPattern {
    ranks: Vec<u8>,
}

impl OrdinalPattern {
    pub fn ranks(&self) -> &[u8] {
        &self.ranks
    }

    pub fn dimension(&self) -> usize {
        self.ranks.len()
    }

    /// Dense index in `[0, d!)` via the Lehmer code of the rank sequence.
    pub fn code(&self) -> usize {
        lehmer_code(&self.ranks)
    }

    /// Inverse of [`OrdinalPattern::code`].
    pub fn from_code(code: usize, d: usize) -> Result<Self> {
        if !(MIN_DIMENSION..=MAX_DIMENSION).contains(&d) {
            return Err(Error::InvalidDimension(d));
        }
        let mut remaining: Vec<u8> = (1..=d as u8).collect();
        let mut ranks = Vec::with_capacity(d);
        let mut rest = code;
        for i in 0..d {
            let base = FACTORIALS[d - 1 - i];
            let digit = rest / base;
            rest %= base;
            ranks.push(remaining.remove(digit));
        }
        Ok(Self { ranks })
    }
}

impl std::fmt::Display for OrdinalPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, r) in self.ranks.iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Weighted pattern distribution over the d! ordinal patterns of a window.
///
/// `probs` sums to 1 whenever `total_weight > 0`; a window whose embedding
/// vectors are all constant has `total_weight == 0` and an all-zero `probs`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDistribution {
    probs: Vec<f64>,
    total_weight: f64,
}

impl WeightedDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// True when every vector in the window had zero variance.
    pub fn is_degenerate(&self) -> bool {
        self.total_weight == 0.0
    }
}

/// Normalized weighted permutation entropy of one window.
///
/// `Undefined` marks a window with zero total weight (e.g. a dead PV string
/// producing flat output); downstream stages treat it as maximally suspect
/// rather than silently numeric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WpeValue {
    Defined { normalized: f64, raw_bits: f64 },
    Undefined,
}

impl WpeValue {
    pub fn normalized(&self) -> Option<f64> {
        match self {
            WpeValue::Defined { normalized, .. } => Some(*normalized),
            WpeValue::Undefined => None,
        }
    }

    pub fn raw_bits(&self) -> Option<f64> {
        match self {
            WpeValue::Defined { raw_bits, .. } => Some(*raw_bits),
            WpeValue::Undefined => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, WpeValue::Defined { .. })
    }
}

/// Ordinal pattern of a single embedding vector.
///
/// The vector length must equal the configured dimension.
pub fn ordinal_pattern(vector: &[f64], cfg: EmbeddingConfig) -> Result<OrdinalPattern> {
    check_vector_len(vector, cfg)?;
    let mut buf = [0u8; MAX_DIMENSION];
    rank_into(vector, &mut buf);
    Ok(OrdinalPattern {
        ranks: buf[..vector.len()].to_vec(),
    })
}

/// Weight of one embedding vector: its population variance,
/// `(1/d) * sum((x_s - mean)^2)`.
pub fn vector_weight(vector: &[f64], cfg: EmbeddingConfig) -> Result<f64> {
    check_vector_len(vector, cfg)?;
    Ok(weight_of(vector))
}

/// Weighted probability of each ordinal pattern across the window.
///
/// Vector `t` (for `t` in `0..N-(d-1)*tau`) contributes its variance weight
/// to the bin of its pattern; bins are then divided by the total weight.
pub fn weighted_distribution(window: &[f64], cfg: EmbeddingConfig) -> Result<WeightedDistribution> {
    check_window_len(window, cfg)?;
    let mut bins = vec![0.0f64; cfg.pattern_count()];
    let total = accumulate_window(window, cfg, &mut bins);
    if total > 0.0 {
        for b in bins.iter_mut() {
            *b /= total;
        }
    }
    Ok(WeightedDistribution {
        probs: bins,
        total_weight: total,
    })
}

/// Normalized weighted permutation entropy of a window.
///
/// `raw_bits = -sum(p * log2(p))` over the weighted pattern distribution
/// (0*log0 = 0), normalized by log2(d!). Returns `Undefined` when the total
/// weight is zero.
pub fn wpe(window: &[f64], cfg: EmbeddingConfig) -> Result<WpeValue> {
    check_window_len(window, cfg)?;
    let mut bins = vec![0.0f64; cfg.pattern_count()];
    let total = accumulate_window(window, cfg, &mut bins);
    Ok(entropy_from_bins(&bins, total, cfg.dimension()))
}

/// Pattern code and weight of every embedding vector of `values`, in vector
/// order. Shared by the rolling profiler so that window sums reproduce
/// [`wpe`] bit for bit.
pub(crate) fn pattern_stream(values: &[f64], cfg: EmbeddingConfig) -> (Vec<u16>, Vec<f64>) {
    let n_vec = cfg.vector_count(values.len());
    let mut codes = Vec::with_capacity(n_vec);
    let mut weights = Vec::with_capacity(n_vec);
    let (d, tau) = (cfg.dimension(), cfg.delay());
    let mut buf = [0.0f64; MAX_DIMENSION];
    for t in 0..n_vec {
        for s in 0..d {
            buf[s] = values[t + s * tau];
        }
        codes.push(pattern_code(&buf[..d]) as u16);
        weights.push(weight_of(&buf[..d]));
    }
    (codes, weights)
}

/// Accumulates `weights[range]` into `bins` by pattern code, returning the
/// total. The per-vector `total += w; bins[code] += w` order matches
/// [`accumulate_window`] exactly so both paths agree bitwise.
pub(crate) fn accumulate_stream(
    codes: &[u16],
    weights: &[f64],
    range: std::ops::Range<usize>,
    bins: &mut [f64],
) -> f64 {
    let mut total = 0.0;
    for t in range {
        let w = weights[t];
        total += w;
        bins[codes[t] as usize] += w;
    }
    total
}

/// Entropy of a weight histogram; shared by [`wpe`] and the profiler.
pub(crate) fn entropy_from_bins(bins: &[f64], total: f64, d: usize) -> WpeValue {
    if total <= 0.0 {
        return WpeValue::Undefined;
    }
    let mut raw = 0.0;
    for &b in bins {
        if b > 0.0 {
            let p = b / total;
            raw -= p * p.log2();
        }
    }
    // A single-pattern window yields -1*log2(1) = -0.0; keep the sign clean.
    if raw == 0.0 {
        raw = 0.0;
    }
    let normalized = raw / (FACTORIALS[d] as f64).log2();
    WpeValue::Defined {
        normalized,
        raw_bits: raw,
    }
}

fn accumulate_window(window: &[f64], cfg: EmbeddingConfig, bins: &mut [f64]) -> f64 {
    let (d, tau) = (cfg.dimension(), cfg.delay());
    let n_vec = cfg.vector_count(window.len());
    let mut buf = [0.0f64; MAX_DIMENSION];
    let mut total = 0.0;
    for t in 0..n_vec {
        for s in 0..d {
            buf[s] = window[t + s * tau];
        }
        let w = weight_of(&buf[..d]);
        total += w;
        bins[pattern_code(&buf[..d])] += w;
    }
    total
}

#[inline]
fn rank_into(values: &[f64], ranks: &mut [u8; MAX_DIMENSION]) {
    let d = values.len();
    for i in 0..d {
        let mut r = 1u8;
        for j in 0..d {
            if values[j] < values[i] || (values[j] == values[i] && j < i) {
                r += 1;
            }
        }
        ranks[i] = r;
    }
}

#[inline]
fn pattern_code(values: &[f64]) -> usize {
    let mut ranks = [0u8; MAX_DIMENSION];
    rank_into(values, &mut ranks);
    lehmer_code(&ranks[..values.len()])
}

#[inline]
fn lehmer_code(ranks: &[u8]) -> usize {
    let d = ranks.len();
    let mut code = 0;
    for i in 0..d {
        let mut smaller_after = 0;
        for j in (i + 1)..d {
            if ranks[j] < ranks[i] {
                smaller_after += 1;
            }
        }
        code += smaller_after * FACTORIALS[d - 1 - i];
    }
    code
}

// Two-pass variance on values shifted by the first element. The shift keeps
// the result exactly 0 for constant vectors (the plain mean of d copies of x
// can differ from x by an ulp, which would leak a ~1e-32 weight and make
// flat windows look defined) and costs nothing for the general case.
#[inline]
fn weight_of(values: &[f64]) -> f64 {
    let d = values.len();
    let base = values[0];
    let mut sum = 0.0;
    for &v in values {
        sum += v - base;
    }
    let mean = sum / d as f64;
    let mut acc = 0.0;
    for &v in values {
        let dev = (v - base) - mean;
        acc += dev * dev;
    }
    acc / d as f64
}

fn check_vector_len(vector: &[f64], cfg: EmbeddingConfig) -> Result<()> {
    if vector.len() != cfg.dimension() {
        return Err(Error::VectorLength {
            expected: cfg.dimension(),
            got: vector.len(),
        });
    }
    Ok(())
}

fn check_window_len(window: &[f64], cfg: EmbeddingConfig) -> Result<()> {
    if window.len() < cfg.min_window_len() {
        return Err(Error::WindowTooShort {
            len: window.len(),
            min: cfg.min_window_len(),
            d: cfg.dimension(),
            tau: cfg.delay(),
        });
    }
    Ok(())
}

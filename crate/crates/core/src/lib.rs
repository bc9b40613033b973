// SPDX-License-Identifier: MIT OR Apache-2.0

//! Batch analytics for rooftop PV fleets.
//!
//! Detects anomalous systems in a region purely from historical generation
//! time series: each site's series is reduced to a weighted permutation
//! entropy (WPE) profile over rolling windows, and sites whose profile
//! decorrelates from the regional mean are flagged for inspection. No
//! irradiance or temperature sensors are involved; the regional fleet itself
//! is the baseline.
//!
//! Pipeline stages, one module each:
//!
//! - [`ingest`]: CSV loading, gap fill, per-unit normalization, screening,
//!   postcode grouping
//! - [`wpe`]: the windowed entropy kernel
//! - [`profile`]: rolling profiles and the hyperparameter sweep
//! - [`detect`]: regional mean, correlations, verdicts, localization
//! - [`report`]: machine-readable region reports
//! - [`synth`]: deterministic synthetic fleets with injected faults, for
//!   testing and demos

pub mod detect;
pub mod error;
pub mod ingest;
pub mod profile;
pub mod report;
pub mod stats;
pub mod synth;
pub mod wpe;

pub use error::{Error, Result};

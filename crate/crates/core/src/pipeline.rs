//! From a CSV of observed pairs to a report: tail index with its interval,
//! or a layer premium. These are the operations behind the `truncext` binary.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::k_select::{select_k, DEFAULT_BETA};
use crate::lynden_bell::{premium_confidence_interval, premium_estimate, PremiumBias, PremiumEstimate, PremiumSettings};
use crate::rng::RngSeed;
use crate::sample::TruncatedSample;
use crate::tail_estimation::{
    confidence_interval, truncated_tail_index, ConfidenceSettings, InferenceReport, TailIndexEstimate, TauSource,
    DEFAULT_MC_POINTS,
};

/// How many smaller fractions to try when the requested `k` hits the pole.
pub const MAX_K_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KSpec {
    Auto,
    Fixed(usize),
}

impl FromStr for KSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(KSpec::Auto);
        }
        s.parse::<usize>().map(KSpec::Fixed).map_err(|_| format!("expected `auto` or a positive integer, got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub k: KSpec,
    pub level: f64,
    pub rt_beta: f64,
    pub mc_points: usize,
    pub seed: RngSeed,
    pub tau: TauSource,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            k: KSpec::Auto,
            level: 0.95,
            rt_beta: DEFAULT_BETA,
            mc_points: DEFAULT_MC_POINTS,
            seed: RngSeed(0),
            tau: TauSource::Estimate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n: usize,
    pub k_spec: KSpec,
    /// Fraction actually used; below the requested one after pole retries.
    pub k: usize,
    pub estimate: TailIndexEstimate,
    pub inference: Option<InferenceReport>,
    /// Why no interval was produced.
    pub ci_unavailable: Option<String>,
}

/// Resolves `k`, stepping down from a fixed fraction while `γ̂₁` is degenerate.
fn resolve_k(sample: &TruncatedSample, spec: KSpec, rt_beta: f64) -> Result<(usize, TailIndexEstimate)> {
    let start = match spec {
        KSpec::Auto => select_k(sample, rt_beta)?.k_star,
        KSpec::Fixed(k) => k,
    };
    let mut last = None;
    for k in (start.saturating_sub(MAX_K_RETRIES)..=start).rev() {
        match truncated_tail_index(sample, k) {
            Ok(est) => return Ok((k, est)),
            Err(e @ Error::Degenerate { .. }) => last = Some(e),
            Err(e) => return Err(last.unwrap_or(e)),
        }
    }
    Err(last.unwrap_or_else(|| Error::SelectionFailed(format!("no usable k at or below {start}"))))
}

pub fn estimate(sample: &TruncatedSample, opts: &EstimateOptions) -> Result<EstimateReport> {
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::param("level", format!("must lie in (0, 1), got {}", opts.level)));
    }
    let (k, estimate) = resolve_k(sample, opts.k, opts.rt_beta)?;
    let settings = ConfidenceSettings { level: opts.level, mc_points: opts.mc_points, seed: opts.seed, tau: opts.tau };
    let (inference, ci_unavailable) = match confidence_interval(sample, k, &settings) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(EstimateReport { n: sample.n(), k_spec: opts.k, k, estimate, inference, ci_unavailable })
}

pub fn estimate_from_csv(path: impl AsRef<Path>, opts: &EstimateOptions) -> Result<EstimateReport> {
    estimate(&TruncatedSample::from_csv_path(path)?, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumOptions {
    pub retention: f64,
    pub k: KSpec,
    pub level: f64,
    pub rt_beta: f64,
    pub mc_points: usize,
    pub seed: RngSeed,
    pub bias: Option<PremiumBias>,
}

impl PremiumOptions {
    pub fn new(retention: f64) -> Self {
        Self {
            retention,
            k: KSpec::Auto,
            level: 0.95,
            rt_beta: DEFAULT_BETA,
            mc_points: DEFAULT_MC_POINTS,
            seed: RngSeed(0),
            bias: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PremiumReport {
    pub n: usize,
    pub k_spec: KSpec,
    pub premium: PremiumEstimate,
    pub gamma2_hat: f64,
    pub ci_unavailable: Option<String>,
}

pub fn premium(sample: &TruncatedSample, opts: &PremiumOptions) -> Result<PremiumReport> {
    if !(opts.retention > 0.0 && opts.retention.is_finite()) {
        return Err(Error::param("retention", format!("must be positive, got {}", opts.retention)));
    }
    let (k, est) = resolve_k(sample, opts.k, opts.rt_beta)?;
    // point estimate first so domain errors surface before the interval
    let point = premium_estimate(sample, k, opts.retention, est.gamma1_hat)?;
    let settings = PremiumSettings { level: opts.level, mc_points: opts.mc_points, seed: opts.seed, bias: opts.bias };
    let (premium, ci_unavailable) = match premium_confidence_interval(sample, k, opts.retention, &settings) {
        Ok(pe) => (pe, None),
        Err(e) => (point, Some(e.to_string())),
    };
    Ok(PremiumReport { n: sample.n(), k_spec: opts.k, premium, gamma2_hat: est.gamma2_hat, ci_unavailable })
}

pub fn premium_from_csv(path: impl AsRef<Path>, opts: &PremiumOptions) -> Result<PremiumReport> {
    premium(&TruncatedSample::from_csv_path(path)?, opts)
}

//! Data-driven choice of the sample fraction `k`.
//!
//! Reiss–Thomas rule: minimize
//! `k⁻¹ Σ_{i=2}^{k} i^β |γ̂₁(i) − median{γ̂₁(2), …, γ̂₁(k)}|`
//! over `k ∈ [max(3, ⌊0.02n⌋), ⌊0.25n⌋]`. Fractions where the estimator hits
//! its pole are left out of both the candidates and the sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::TruncatedSample;
use crate::tail_estimation::tail_index_trace;

pub const DEFAULT_BETA: f64 = 0.3;
pub const MIN_SAMPLE: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub k_star: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// `(k, score)` for every admissible candidate, ascending in `k`.
    pub criterion_values: Vec<(usize, f64)>,
}

/// Search window `[max(3, ⌊0.02n⌋), ⌊0.25n⌋]`.
pub fn search_window(n: usize) -> (usize, usize) {
    let k_min = (n / 50).max(3);
    let k_max = n / 4;
    (k_min, k_max)
}

fn median_in_place(v: &mut [f64]) -> f64 {
    let m = v.len();
    let mid = m / 2;
    let (_, upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if m % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Applies the rule to an estimator trace `k ↦ γ̂₁(k)` (`None` marks a pole).
pub fn reiss_thomas_k<T: Fn(usize) -> Option<f64>>(trace: T, n: usize, beta: f64) -> Result<KSelection> {
    if n < MIN_SAMPLE {
        return Err(Error::param("n", format!("need at least {MIN_SAMPLE} observations, got {n}")));
    }
    if !(0.0..=0.5).contains(&beta) {
        return Err(Error::param("beta", format!("must lie in [0, 0.5], got {beta}")));
    }
    let (k_min, k_max) = search_window(n);
    // (i, γ̂₁(i), i^β) for admissible i
    let points: Vec<(usize, f64, f64)> = (2..=k_max)
        .filter_map(|i| trace(i).filter(|v| v.is_finite()).map(|v| (i, v, (i as f64).powf(beta))))
        .collect();

    let mut criterion_values = Vec::new();
    let mut scratch = Vec::with_capacity(points.len());
    let mut best: Option<(usize, f64)> = None;
    for (pos, &(k, _, _)) in points.iter().enumerate() {
        if k < k_min {
            continue;
        }
        let prefix = &points[..=pos];
        scratch.clear();
        scratch.extend(prefix.iter().map(|p| p.1));
        let med = median_in_place(&mut scratch);
        let score = prefix.iter().map(|&(_, v, w)| w * (v - med).abs()).sum::<f64>() / k as f64;
        if !score.is_finite() {
            continue;
        }
        criterion_values.push((k, score));
        // ascending k, so `<=` breaks ties toward the larger fraction
        if best.is_none_or(|(_, s)| score <= s) {
            best = Some((k, score));
        }
    }
    match best {
        Some((k_star, _)) => Ok(KSelection { k_star, k_min, k_max, criterion_values }),
        None => Err(Error::SelectionFailed(format!("every k in [{k_min}, {k_max}] is degenerate"))),
    }
}

/// Selects `k` for the truncated-data estimator on a sample.
pub fn select_k(sample: &TruncatedSample, beta: f64) -> Result<KSelection> {
    let n = sample.n();
    let (_, k_max) = search_window(n);
    let trace = tail_index_trace(sample, k_max);
    reiss_thomas_k(|k| trace.get(k).copied().flatten(), n, beta)
}

//! Tail-index estimation under random right truncation.
//!
//! The estimator of the loss tail index `γ₁` combines the Hill estimators of
//! the observed `X` margin (index `γ`) and the `Y` margin (index `γ₂`) at a
//! common sample fraction `k`, using `γ = γ₁γ₂/(γ₁+γ₂)`:
//!
//! ```text
//! γ̂₁(k) = k⁻¹ · Σ log(X_{n-i+1}/X_{n-k}) · Σ log(Y_{n-i+1}/Y_{n-k})
//!          / Σ log(X_{n-k}·Y_{n-i+1} / (Y_{n-k}·X_{n-i+1}))
//! ```
//!
//! which equals `γ̂·γ̂₂/(γ̂₂ - γ̂)`. Asymptotic confidence bounds use a
//! bias term built from second-order plug-ins and a variance that depends on
//! the tail copula of `(X, Y)` through the functional `δ(R)`.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::sample::{Margin, TruncatedSample};

/// Default number of Monte Carlo points per integral.
pub const DEFAULT_MC_POINTS: usize = 100_000;

/// Hill estimator from ascending values: `k⁻¹ Σᵢ₌₁ᵏ log(V_{n-i+1}/V_{n-k})`.
pub fn hill(sorted: &[f64], k: usize) -> Result<f64> {
    let n = sorted.len();
    if k == 0 || k >= n {
        return Err(Error::FractionOutOfRange { k, n, reason: "need 1 <= k < n" });
    }
    let pivot = sorted[n - k - 1];
    if !(pivot > 0.0) {
        return Err(Error::DegenerateSample(format!("pivot order statistic {pivot} is not positive")));
    }
    let sum: f64 = sorted[n - k..].iter().map(|&v| (v / pivot).ln()).sum();
    Ok(sum / k as f64)
}

/// One evaluation of the truncated-data estimator at a sample fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailIndexEstimate {
    pub k: usize,
    /// Hill estimate for the observed `X` margin.
    pub gamma_hat: f64,
    /// Hill estimate for the `Y` margin.
    pub gamma2_hat: f64,
    /// Estimate of the loss tail index.
    pub gamma1_hat: f64,
}

/// Evaluates `γ̂₁(k)` together with the two Hill estimates.
///
/// Fails with [`Error::Degenerate`] when `γ̂₂ ≤ γ̂`, where the estimator has
/// its pole; callers may retry with another `k`.
pub fn truncated_tail_index(sample: &TruncatedSample, k: usize) -> Result<TailIndexEstimate> {
    let n = sample.n();
    if k <= 1 || k >= n {
        return Err(Error::FractionOutOfRange { k, n, reason: "need 1 < k < n" });
    }
    let xs = sample.sorted(Margin::X);
    let ys = sample.sorted(Margin::Y);
    let (xk, yk) = (xs[n - k - 1], ys[n - k - 1]);
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut denom = 0.0;
    for i in 1..=k {
        let (xi, yi) = (xs[n - i], ys[n - i]);
        sum_x += (xi / xk).ln();
        sum_y += (yi / yk).ln();
        denom += ((xk * yi) / (yk * xi)).ln();
    }
    let kf = k as f64;
    let gamma_hat = sum_x / kf;
    let gamma2_hat = sum_y / kf;
    if !(gamma2_hat > gamma_hat) || !(denom > 0.0) {
        return Err(Error::Degenerate { k, gamma_hat, gamma2_hat });
    }
    let gamma1_hat = sum_x * sum_y / (kf * denom);
    if !gamma1_hat.is_finite() {
        return Err(Error::Degenerate { k, gamma_hat, gamma2_hat });
    }
    Ok(TailIndexEstimate { k, gamma_hat, gamma2_hat, gamma1_hat })
}

/// `γ̂₁(k)` for every `k` in `0..=k_max` in a single pass (prefix sums of logs).
/// Entries with `k < 2` or at the pole are `None`.
pub fn tail_index_trace(sample: &TruncatedSample, k_max: usize) -> Vec<Option<f64>> {
    let n = sample.n();
    let k_max = k_max.min(n.saturating_sub(1));
    let xs = sample.sorted(Margin::X);
    let ys = sample.sorted(Margin::Y);
    let mut out = vec![None; k_max + 1];
    let (mut sx, mut sy) = (0.0, 0.0);
    for k in 1..=k_max {
        sx += xs[n - k].ln();
        sy += ys[n - k].ln();
        if k < 2 {
            continue;
        }
        let kf = k as f64;
        let g = sx / kf - xs[n - k - 1].ln();
        let g2 = sy / kf - ys[n - k - 1].ln();
        if g2 > g {
            let v = g * g2 / (g2 - g);
            if v.is_finite() && v > 0.0 {
                out[k] = Some(v);
            }
        }
    }
    out
}

/// Empirical tail copula `R̂(s,t) = k⁻¹ #{i : Xᵢ among the top ⌊ks⌋ of X, Yᵢ among the top ⌊kt⌋ of Y}`.
///
/// "Among the top `j`" means `Xᵢ ≥ X_{n-j+1:n}`, so ties at the threshold are
/// included; `j = 0` selects nothing. Precomputes a dominance-count structure so
/// that each evaluation on `(0,1]²` is O(1) (or O(log k) for very large `k`).
#[derive(Debug, Clone)]
pub struct TailCopula {
    k: usize,
    n: usize,
    /// rank-from-top of each pair in each margin (1 = maximum), ties resolved upward
    ranks: Vec<(usize, usize)>,
    index: DominanceIndex,
}

#[derive(Debug, Clone)]
enum DominanceIndex {
    /// `(k+1)²` cumulative counts.
    Table(Vec<u32>),
    /// Points sorted by X-rank, with sorted Y-ranks of each prefix at block boundaries.
    Blocks { a_sorted: Vec<usize>, b_by_a: Vec<usize>, prefix_b: Vec<Vec<usize>> },
}

const TABLE_MAX_K: usize = 1024;
const BLOCK: usize = 64;

impl TailCopula {
    pub fn new(sample: &TruncatedSample, k: usize) -> Result<Self> {
        let n = sample.n();
        if k == 0 || k >= n {
            return Err(Error::FractionOutOfRange { k, n, reason: "need 1 <= k < n" });
        }
        let ranks: Vec<(usize, usize)> = sample
            .pairs()
            .iter()
            .map(|&(x, y)| {
                // smallest j with X_{n-j+1:n} ≤ x is n + 1 - #{X ≤ x}
                (n + 1 - sample.count_le(Margin::X, x), n + 1 - sample.count_le(Margin::Y, y))
            })
            .collect();
        let index = if k <= TABLE_MAX_K {
            let w = k + 1;
            let mut table = vec![0u32; w * w];
            for &(a, b) in &ranks {
                if a <= k && b <= k {
                    table[a * w + b] += 1;
                }
            }
            for a in 0..w {
                for b in 0..w {
                    let mut v = table[a * w + b];
                    if a > 0 {
                        v += table[(a - 1) * w + b];
                    }
                    if b > 0 {
                        v += table[a * w + b - 1];
                    }
                    if a > 0 && b > 0 {
                        v -= table[(a - 1) * w + b - 1];
                    }
                    table[a * w + b] = v;
                }
            }
            DominanceIndex::Table(table)
        } else {
            let mut pts: Vec<(usize, usize)> = ranks.iter().copied().filter(|&(a, b)| a <= k && b <= k).collect();
            pts.sort_unstable();
            let a_sorted: Vec<usize> = pts.iter().map(|p| p.0).collect();
            let b_by_a: Vec<usize> = pts.iter().map(|p| p.1).collect();
            let mut prefix_b = Vec::with_capacity(pts.len() / BLOCK + 1);
            let mut acc: Vec<usize> = Vec::new();
            for (i, &b) in b_by_a.iter().enumerate() {
                if i % BLOCK == 0 {
                    prefix_b.push(acc.clone());
                }
                let pos = acc.partition_point(|&v| v <= b);
                acc.insert(pos, b);
            }
            prefix_b.push(acc);
            DominanceIndex::Blocks { a_sorted, b_by_a, prefix_b }
        };
        Ok(Self { k, n, ranks, index })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn fraction_index(&self, s: f64) -> usize {
        (self.k as f64 * s).floor().max(0.0) as usize
    }

    /// Count of pairs in the top `ja` of X and the top `jb` of Y.
    pub fn count(&self, ja: usize, jb: usize) -> usize {
        if ja == 0 || jb == 0 {
            return 0;
        }
        if ja > self.k || jb > self.k {
            return self.ranks.iter().filter(|&&(a, b)| a <= ja && b <= jb).count();
        }
        match &self.index {
            DominanceIndex::Table(t) => t[ja * (self.k + 1) + jb] as usize,
            DominanceIndex::Blocks { a_sorted, b_by_a, prefix_b } => {
                let len = a_sorted.partition_point(|&a| a <= ja);
                let block = len / BLOCK;
                let base = &prefix_b[block];
                let mut c = base.partition_point(|&b| b <= jb);
                c += b_by_a[block * BLOCK..len].iter().filter(|&&b| b <= jb).count();
                c
            }
        }
    }

    /// `R̂(s, t)`; indices `⌊ks⌋`, `⌊kt⌋` must not exceed `n - 1`.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        if !(s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite()) {
            return Err(Error::param("s,t", format!("must be positive, got ({s}, {t})")));
        }
        let (ja, jb) = (self.fraction_index(s), self.fraction_index(t));
        if ja >= self.n || jb >= self.n {
            return Err(Error::IndexOutOfRange { index: ja.max(jb), len: self.n - 1 });
        }
        Ok(self.count(ja, jb) as f64 / self.k as f64)
    }

    /// Unchecked evaluation on `(0, 1]²`, used inside Monte Carlo loops.
    #[inline]
    pub fn eval_unit(&self, s: f64, t: f64) -> f64 {
        self.count(self.fraction_index(s), self.fraction_index(t)) as f64 / self.k as f64
    }
}

/// Evaluates `R̂(s, t)` at a single point; see [`TailCopula`].
pub fn tail_copula_hat(sample: &TruncatedSample, k: usize, s: f64, t: f64) -> Result<f64> {
    TailCopula::new(sample, k)?.eval(s, t)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Mean and standard error of per-pair averages.
pub(crate) fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    // Welford
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for v in values {
        n += 1;
        let d = v - mean;
        mean += d / n as f64;
        m2 += d * (v - mean);
    }
    let se = if n > 1 { (m2 / (n - 1) as f64 / n as f64).sqrt() } else { 0.0 };
    (mean, se, n)
}

/// Checks `0 ≤ R(s,t) ≤ min(s,t)` on a small grid.
pub(crate) fn check_admissible<R: Fn(f64, f64) -> f64>(r: &R) -> Result<()> {
    const GRID: [f64; 6] = [0.05, 0.2, 0.4, 0.6, 0.8, 1.0];
    for &s in &GRID {
        for &t in &GRID {
            let v = r(s, t);
            if !(v >= -1e-12 && v <= s.min(t) + 1e-12) {
                return Err(Error::param("R", format!("R({s}, {t}) = {v} outside [0, min(s,t)]")));
            }
        }
    }
    Ok(())
}

/// Monte Carlo estimate of
/// `δ(R) = ∫∫ R(s,t)/(st) ds dt − ∫ (R(s,1) − R(1,s)) ds + R(1,1)` over `(0,1]²`.
///
/// The double integral is drawn through `s = u²`, `t = v²`, so the integrand
/// `4R(u²,v²)/(uv)` is bounded by 4 for admissible `R`. Draws come in
/// antithetic pairs `(u, v)`, `(1-u, 1-v)`.
pub fn delta_functional<R: Fn(f64, f64) -> f64>(r: R, mc_points: usize, seed: RngSeed) -> Result<McEstimate> {
    check_admissible(&r)?;
    let pairs = (mc_points / 2).max(1);
    let mut rng = seed.rng();
    let h = |u: f64, v: f64| {
        let (s, t) = (u * u, v * v);
        4.0 * r(s, t) / (u * v) - (r(u, 1.0) - r(1.0, u))
    };
    let (mean, se, _) = mean_and_se((0..pairs).map(|_| {
        let u: f64 = rng.sample(Open01);
        let v: f64 = rng.sample(Open01);
        0.5 * (h(u, v) + h(1.0 - u, 1.0 - v))
    }));
    Ok(McEstimate { value: mean + r(1.0, 1.0), std_error: se })
}

/// Second-order parameter estimate from ascending values using the
/// log-excess moment ratio with tuning exponent 0 at `k = ⌊n^0.975⌋`
/// (capped at `n - 1`), clamped to `[-10, -0.01]`.
pub fn second_order_tau_hat(sorted: &[f64]) -> Result<f64> {
    let n = sorted.len();
    if n < MIN_TAU_SAMPLE {
        return Err(Error::FractionOutOfRange { k: 0, n, reason: "second-order estimation needs n >= 10" });
    }
    let k = ((n as f64).powf(0.975).floor() as usize).min(n - 1);
    let pivot = sorted[n - k - 1];
    if !(pivot > 0.0) {
        return Err(Error::DegenerateSample(format!("pivot {pivot} is not positive")));
    }
    let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
    for &v in &sorted[n - k..] {
        let l = (v / pivot).ln();
        m1 += l;
        m2 += l * l;
        m3 += l * l * l;
    }
    let kf = k as f64;
    let (m1, m2, m3) = (m1 / kf, m2 / kf, m3 / kf);
    if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0) {
        return Err(Error::DegenerateSample("top order statistics are all equal".into()));
    }
    let half_log_m2 = 0.5 * (m2 / 2.0).ln();
    let t = (m1.ln() - half_log_m2) / (half_log_m2 - (m3 / 6.0).ln() / 3.0);
    let rho = -(3.0 * (t - 1.0) / (t - 3.0)).abs();
    if rho.is_nan() {
        return Err(Error::DegenerateSample("second-order statistic is undefined".into()));
    }
    Ok(rho.clamp(TAU_MIN, TAU_MAX))
}

pub const TAU_MIN: f64 = -10.0;
pub const TAU_MAX: f64 = -0.01;
const MIN_TAU_SAMPLE: usize = 10;

/// Plug-in for `√k·A(n/k)`:
/// `√k·τ̂·(V_{n-2k} − 2^{-γ̂}V_{n-k}) / (2^{-γ̂}(2^{-τ̂} − 1)V_{n-k})`.
pub fn lambda_hat(sorted: &[f64], k: usize, gamma_est: f64, tau_est: f64) -> Result<f64> {
    let n = sorted.len();
    if k == 0 || 2 * k >= n {
        return Err(Error::FractionOutOfRange { k, n, reason: "need 2k < n" });
    }
    if !(tau_est < 0.0) {
        return Err(Error::param("tau", format!("must be negative, got {tau_est}")));
    }
    let v_k = sorted[n - k - 1];
    let v_2k = sorted[n - 2 * k - 1];
    let scale = (-gamma_est).exp2();
    Ok((k as f64).sqrt() * tau_est * (v_2k - scale * v_k) / (scale * ((-tau_est).exp2() - 1.0) * v_k))
}

/// `(1 − ζ/2)`-quantile of the standard normal for a two-sided level `1 − ζ`.
pub fn normal_quantile_two_sided(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", format!("must lie in (0, 1), got {level}")));
    }
    Ok(Normal::standard().inverse_cdf(0.5 + 0.5 * level))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lcb: f64,
    pub ucb: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, v: f64) -> bool {
        self.lcb <= v && v <= self.ucb
    }

    pub fn length(&self) -> f64 {
        self.ucb - self.lcb
    }
}

/// Bounds from `(√k(γ̂₁ − γ₁) − μ̂)/σ̂ ≈ N(0, 1)`, i.e. `γ̂₁ − k^{-1/2}(μ̂ ∓ σ̂·z)`.
/// The bias is removed from the estimate, not added to it.
pub fn interval_from_plugins(gamma1_hat: f64, k: usize, mu: f64, sigma: f64, level: f64) -> Result<ConfidenceInterval> {
    let z = normal_quantile_two_sided(level)?;
    let root_k = (k as f64).sqrt();
    Ok(ConfidenceInterval {
        lcb: gamma1_hat - (mu + sigma * z) / root_k,
        ucb: gamma1_hat - (mu - sigma * z) / root_k,
        level,
    })
}

/// Asymptotic bias `μ` of `√k(γ̂₁ − γ₁)`.
///
/// Each Hill estimator carries bias `λ/(1−τ)`; these propagate through
/// `γ₁ = γγ₂/(γ₂−γ)` with weights `∂γ₁/∂γ = c/γ` and `∂γ₁/∂γ₂ = −c₂/γ₂`,
/// where `c = γ₁²/γ`, `c₂ = γ₁²/γ₂`.
pub fn asymptotic_bias(est: &TailIndexEstimate, lambda: f64, lambda2: f64, tau: f64, tau2: f64) -> f64 {
    let g1_sq = est.gamma1_hat * est.gamma1_hat;
    let (c, c2) = (g1_sq / est.gamma_hat, g1_sq / est.gamma2_hat);
    c * lambda / (est.gamma_hat * (1.0 - tau)) - c2 * lambda2 / (est.gamma2_hat * (1.0 - tau2))
}

/// Where second-order parameters come from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum TauSource {
    #[default]
    Estimate,
    Fixed { tau: f64, tau2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSettings {
    pub level: f64,
    pub mc_points: usize,
    pub seed: RngSeed,
    pub tau: TauSource,
}

impl Default for ConfidenceSettings {
    fn default() -> Self {
        Self { level: 0.95, mc_points: DEFAULT_MC_POINTS, seed: RngSeed(0), tau: TauSource::Estimate }
    }
}

/// All plug-in quantities behind one confidence interval for `γ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub estimate: TailIndexEstimate,
    pub tau_hat: f64,
    pub tau2_hat: f64,
    pub lambda_hat: f64,
    pub lambda2_hat: f64,
    pub c_hat: f64,
    pub c2_hat: f64,
    pub delta_hat: f64,
    pub delta_std_error: f64,
    pub mu_hat: f64,
    pub sigma2_hat: f64,
    pub ci: ConfidenceInterval,
}

/// Asymptotic confidence interval for `γ₁` at sample fraction `k`.
///
/// Steps: `γ̂₁, γ̂₂, γ̂, ĉ, ĉ₂`; `τ̂, τ̂₂, λ̂, λ̂₂`; `δ̂ = δ(R̂)` by Monte Carlo;
/// `μ̂` from [`asymptotic_bias`], `σ̂² = 2ĉ² + 2ĉ₂² − 2ĉĉ₂δ̂`;
/// bounds `γ̂₁ − k^{-1/2}(μ̂ ∓ σ̂·z)`. A negative `σ̂²` is an error.
pub fn confidence_interval(sample: &TruncatedSample, k: usize, settings: &ConfidenceSettings) -> Result<InferenceReport> {
    let n = sample.n();
    if 2 * k >= n {
        return Err(Error::FractionOutOfRange { k, n, reason: "need 2k < n" });
    }
    let estimate = truncated_tail_index(sample, k)?;
    let TailIndexEstimate { gamma_hat, gamma2_hat, gamma1_hat, .. } = estimate;
    let c_hat = gamma1_hat * gamma1_hat / gamma_hat;
    let c2_hat = gamma1_hat * gamma1_hat / gamma2_hat;

    let xs = sample.sorted(Margin::X);
    let ys = sample.sorted(Margin::Y);
    let (tau_hat, tau2_hat) = match settings.tau {
        TauSource::Estimate => (second_order_tau_hat(xs)?, second_order_tau_hat(ys)?),
        TauSource::Fixed { tau, tau2 } => (tau, tau2),
    };
    let lambda = lambda_hat(xs, k, gamma_hat, tau_hat)?;
    let lambda2 = lambda_hat(ys, k, gamma2_hat, tau2_hat)?;

    let copula = TailCopula::new(sample, k)?;
    let delta = delta_functional(|s, t| copula.eval_unit(s, t), settings.mc_points, settings.seed)?;

    let mu_hat = asymptotic_bias(&estimate, lambda, lambda2, tau_hat, tau2_hat);
    let sigma2_hat = 2.0 * c_hat * c_hat + 2.0 * c2_hat * c2_hat - 2.0 * c_hat * c2_hat * delta.value;
    if !(sigma2_hat >= 0.0) {
        return Err(Error::NegativeVariance(sigma2_hat));
    }
    let ci = interval_from_plugins(gamma1_hat, k, mu_hat, sigma2_hat.sqrt(), settings.level)?;
    Ok(InferenceReport {
        estimate,
        tau_hat,
        tau2_hat,
        lambda_hat: lambda,
        lambda2_hat: lambda2,
        c_hat,
        c2_hat,
        delta_hat: delta.value,
        delta_std_error: delta.std_error,
        mu_hat,
        sigma2_hat,
        ci,
    })
}

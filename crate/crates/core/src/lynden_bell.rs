//! Lynden-Bell product-limit estimation of the underlying loss distribution,
//! Weissman-type tail extrapolation, and the excess-of-loss premium estimator
//! with its asymptotic variance.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::sample::{Margin, TruncatedSample};
use crate::tail_estimation::{
    check_admissible, delta_functional, mean_and_se, normal_quantile_two_sided, truncated_tail_index,
    ConfidenceInterval, McEstimate, TailCopula, DEFAULT_MC_POINTS,
};

/// `Λₙ(x) = Σ_{Xᵢ > x} 1/(n·Cₙ(Xᵢ))`.
pub fn lambda_n(sample: &TruncatedSample, x: f64) -> f64 {
    let xs = sample.sorted(Margin::X);
    let start = xs.partition_point(|&v| v <= x);
    xs[start..].iter().map(|&v| 1.0 / sample.overlap_count(v) as f64).sum()
}

/// Product form `𝐅ₙ(x) = Π_{X_{i:n} > x} (1 − 1/(n·Cₙ(X_{i:n})))`.
pub fn lynden_bell_product(sample: &TruncatedSample, x: f64) -> f64 {
    let xs = sample.sorted(Margin::X);
    let start = xs.partition_point(|&v| v <= x);
    ProductLimit::over(sample, &xs[start..]).value()
}

/// `Π (m − 1)/m` kept as a reduced integer fraction while it fits, so that
/// telescoping products come out exact. Falls back to floating point.
struct ProductLimit {
    exact: Option<(u128, u128)>,
    approx: f64,
    exhausted: bool,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl ProductLimit {
    fn over(sample: &TruncatedSample, upper: &[f64]) -> Self {
        let mut acc = ProductLimit { exact: Some((1, 1)), approx: 1.0, exhausted: false };
        for &v in upper {
            let m = sample.overlap_count(v) as u128;
            if m == 1 {
                acc.exhausted = true;
            }
            acc.approx *= 1.0 - 1.0 / m as f64;
            acc.exact = acc.exact.and_then(|(num, den)| {
                let (num, den) = (num.checked_mul(m - 1)?, den.checked_mul(m)?);
                let g = gcd(num, den).max(1);
                Some((num / g, den / g))
            });
        }
        acc
    }

    fn value(&self) -> f64 {
        self.exact.map_or(self.approx, |(num, den)| num as f64 / den as f64)
    }

    fn complement(&self) -> f64 {
        self.exact.map_or(1.0 - self.approx, |(num, den)| (den - num) as f64 / den as f64)
    }
}

/// One evaluation of the Lynden-Bell survival estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyndenBellValue {
    /// `1 − 𝐅ₙ(x)`.
    pub survival: f64,
    /// Some factor had `n·Cₙ = 1`, so the product vanished.
    pub mass_exhausted: bool,
    /// Ties above `x` forced the `exp(−Λₙ)` form.
    pub exponential_form: bool,
}

/// Evaluates `1 − 𝐅ₙ(x)`, using the product form on tie-free data above `x`
/// and `exp(−Λₙ(x))` otherwise.
pub fn lynden_bell_eval(sample: &TruncatedSample, x: f64) -> LyndenBellValue {
    let xs = sample.sorted(Margin::X);
    let start = xs.partition_point(|&v| v <= x);
    let upper = &xs[start..];
    let has_ties = upper.windows(2).any(|w| w[0] == w[1]);
    if has_ties {
        let lambda: f64 = upper.iter().map(|&v| 1.0 / sample.overlap_count(v) as f64).sum();
        return LyndenBellValue { survival: -(-lambda).exp_m1(), mass_exhausted: false, exponential_form: true };
    }
    let product = ProductLimit::over(sample, upper);
    LyndenBellValue { survival: product.complement(), mass_exhausted: product.exhausted, exponential_form: false }
}

/// `1 − 𝐅ₙ(x)`, the Lynden-Bell estimate of the underlying loss survival.
pub fn lynden_bell_survival(sample: &TruncatedSample, x: f64) -> f64 {
    lynden_bell_eval(sample, x).survival
}

fn pivot(sample: &TruncatedSample, k: usize) -> Result<f64> {
    let n = sample.n();
    if k == 0 || k >= n {
        return Err(Error::FractionOutOfRange { k, n, reason: "need 1 <= k < n" });
    }
    Ok(sample.sorted(Margin::X)[n - k - 1])
}

/// Weissman-type extrapolation `(x/X_{n−k:n})^{−1/γ̂₁} · (1 − 𝐅ₙ(X_{n−k:n}))` for `x ≥ X_{n−k:n}`.
pub fn weissman_tail(sample: &TruncatedSample, k: usize, gamma1_hat: f64, x: f64) -> Result<f64> {
    if !(gamma1_hat > 0.0) {
        return Err(Error::param("gamma1_hat", format!("must be positive, got {gamma1_hat}")));
    }
    let pivot = pivot(sample, k)?;
    if !(x >= pivot) {
        return Err(Error::BelowPivot { u: x, pivot });
    }
    let base = lynden_bell_survival(sample, pivot);
    if x == pivot {
        return Ok(base);
    }
    Ok((x / pivot).powf(-1.0 / gamma1_hat) * base)
}

/// Premium estimate for the layer above a retention level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumEstimate {
    pub u: f64,
    pub k: usize,
    pub gamma1_hat: f64,
    pub pi_hat: f64,
    /// `X_{n−k:n}`.
    pub pivot: f64,
    /// `1 − 𝐅ₙ(X_{n−k:n})`.
    pub lb_survival_at_pivot: f64,
    pub mass_exhausted: bool,
    pub ci: Option<ConfidenceInterval>,
}

/// `Π̂ₙ = γ̂₁/(1−γ̂₁) · X_{n−k:n} · (u/X_{n−k:n})^{1−1/γ̂₁} · (1 − 𝐅ₙ(X_{n−k:n}))`.
pub fn premium_estimate(sample: &TruncatedSample, k: usize, u: f64, gamma1_hat: f64) -> Result<PremiumEstimate> {
    if !(gamma1_hat > 0.0) {
        return Err(Error::param("gamma1_hat", format!("must be positive, got {gamma1_hat}")));
    }
    if gamma1_hat >= 1.0 {
        return Err(Error::InfiniteMean(gamma1_hat));
    }
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::param("u", format!("must be positive, got {u}")));
    }
    let pivot = pivot(sample, k)?;
    if u < pivot {
        return Err(Error::BelowPivot { u, pivot });
    }
    let lb = lynden_bell_eval(sample, pivot);
    let pi_hat = gamma1_hat / (1.0 - gamma1_hat) * pivot * (u / pivot).powf(1.0 - 1.0 / gamma1_hat) * lb.survival;
    Ok(PremiumEstimate {
        u,
        k,
        gamma1_hat,
        pi_hat,
        pivot,
        lb_survival_at_pivot: lb.survival,
        mass_exhausted: lb.mass_exhausted,
        ci: None,
    })
}

/// Limiting variance `γ₂²/(γ₂² − γ₁²)` of `√k(𝐅̄ₙ(X_{n−k:n})/𝐅̄(X_{n−k:n}) − 1)`.
pub fn tail_ratio_variance(gamma1: f64, gamma2: f64) -> Result<f64> {
    if !(gamma1 > 0.0 && gamma2 > 0.0) {
        return Err(Error::param("gamma", "tail indices must be positive"));
    }
    if gamma1 >= gamma2 {
        return Err(Error::param("gamma1", format!("requires gamma1 < gamma2, got {gamma1} >= {gamma2}")));
    }
    Ok(gamma2 * gamma2 / (gamma2 * gamma2 - gamma1 * gamma1))
}

/// `ζ = ((1−γ₁)·log a + γ₁) / (γ₁(1−γ₁)²)`.
pub fn premium_zeta(gamma1: f64, a: f64) -> f64 {
    ((1.0 - gamma1) * a.ln() + gamma1) / (gamma1 * (1.0 - gamma1).powi(2))
}

/// Monte Carlo estimate of the premium's limiting variance
///
/// `σ*² = ζ²σ² + γ₁²γ₂²/((γ₂²−γ₁²)(1−γ₁)²) + 2γγ₁ζδ*/(1−γ₁)`
///
/// with `σ² = 2c² + 2c₂² − 2cc₂δ(R)`. The integrals in `δ*` carry weights
/// `t⁻¹` and `s^{−γ/γ₂−1}`; they are drawn through `t = v²` and `s = u^α` with
/// `α = 2/(1 − 2γ/γ₂)`, which keeps every integrand bounded when
/// `0 ≤ R(s,t) ≤ min(s,t)`.
pub fn premium_limit_variance<R: Fn(f64, f64) -> f64>(
    gamma1: f64,
    gamma2: f64,
    a: f64,
    r: R,
    mc_points: usize,
    seed: RngSeed,
) -> Result<McEstimate> {
    if !(gamma1 > 0.0 && gamma1 < 1.0) {
        return Err(Error::param("gamma1", format!("must lie in (0, 1), got {gamma1}")));
    }
    if !(gamma1 < gamma2) {
        return Err(Error::param("gamma1", format!("requires gamma1 < gamma2, got {gamma1} >= {gamma2}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::param("a", format!("must be positive, got {a}")));
    }
    check_admissible(&r)?;
    let gamma = gamma1 * gamma2 / (gamma1 + gamma2);
    let c = gamma1 * gamma1 / gamma;
    let c2 = gamma1 * gamma1 / gamma2;
    let b = gamma / gamma2;
    let alpha = 2.0 / (1.0 - 2.0 * b);
    let zeta = premium_zeta(gamma1, a);

    let delta = delta_functional(&r, mc_points, seed.derive(&[1]))?;
    let sigma2 = 2.0 * c * c + 2.0 * c2 * c2 - 2.0 * c * c2 * delta.value;

    let w1 = c2 / gamma1;
    let w2 = c2 / (gamma1 + gamma2);
    let r11 = r(1.0, 1.0);
    // per-draw contribution of -w1·∫R(1,t)/t + w2·(∫R(s,1)s^{-b-1} − ∫∫R(s,t)/(t s^{b+1}))
    let h = |u: f64, v: f64| {
        let t = v * v;
        let s = u.powf(alpha);
        let t1 = 2.0 * r(1.0, t) / v;
        let (t2, t3) = if s > 0.0 {
            let weight = alpha * u.powf(-1.0 - alpha * b);
            let rs1 = r(s, 1.0);
            let rst = r(s, t);
            (
                if rs1 == 0.0 { 0.0 } else { weight * rs1 },
                if rst == 0.0 { 0.0 } else { 2.0 * weight * rst / v },
            )
        } else {
            (0.0, 0.0)
        };
        -w1 * t1 + w2 * (t2 - t3)
    };
    let mut rng = seed.derive(&[2]).rng();
    let pairs = (mc_points / 2).max(1);
    let (mean, se_star, _) = mean_and_se((0..pairs).map(|_| {
        let u: f64 = rng.sample(Open01);
        let v: f64 = rng.sample(Open01);
        0.5 * (h(u, v) + h(1.0 - u, 1.0 - v))
    }));
    let delta_star = c / (gamma * gamma2) + w1 * r11 + mean;

    let middle = gamma1 * gamma1 * gamma2 * gamma2 / ((gamma2 * gamma2 - gamma1 * gamma1) * (1.0 - gamma1).powi(2));
    let cross = 2.0 * gamma * gamma1 * zeta / (1.0 - gamma1);
    let value = zeta * zeta * sigma2 + middle + cross * delta_star;
    if !value.is_finite() {
        return Err(Error::DegenerateSample("premium variance is not finite".into()));
    }
    let se_sigma_part = zeta * zeta * 2.0 * c * c2 * delta.std_error;
    let std_error = (se_sigma_part.powi(2) + (cross * se_star).powi(2)).sqrt();
    Ok(McEstimate { value, std_error })
}

/// Optional asymptotic-bias input for the premium interval: the limit
/// `λ*` of `√k·𝐀(U(n/k))` and the second-order parameter `τ₁` of the loss tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumBias {
    pub lambda_star: f64,
    pub tau1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumSettings {
    pub level: f64,
    pub mc_points: usize,
    pub seed: RngSeed,
    /// `None` takes the asymptotic bias as zero.
    pub bias: Option<PremiumBias>,
}

impl Default for PremiumSettings {
    fn default() -> Self {
        Self { level: 0.95, mc_points: DEFAULT_MC_POINTS, seed: RngSeed(0), bias: None }
    }
}

/// Premium estimate with its asymptotic confidence interval.
///
/// Plug-ins: `γ̂₁, γ̂₂` at `k`, `a = u/X_{n−k:n}`, `R̂` at `k`. The asymptotic
/// normalizer `(u/U(n/k))^{1−1/γ₁}·U(n/k)·𝐅̄(U(n/k))` is replaced by its
/// empirical analogue at the pivot `X_{n−k:n}`.
pub fn premium_confidence_interval(
    sample: &TruncatedSample,
    k: usize,
    u: f64,
    settings: &PremiumSettings,
) -> Result<PremiumEstimate> {
    let est = truncated_tail_index(sample, k)?;
    let mut pe = premium_estimate(sample, k, u, est.gamma1_hat)?;
    if !(est.gamma1_hat < est.gamma2_hat) {
        return Err(Error::DegenerateSample(format!(
            "premium variance needs gamma1_hat < gamma2_hat, got {} >= {}",
            est.gamma1_hat, est.gamma2_hat
        )));
    }
    let a = u / pe.pivot;
    let copula = TailCopula::new(sample, k)?;
    let sigma_star2 = premium_limit_variance(
        est.gamma1_hat,
        est.gamma2_hat,
        a,
        |s, t| copula.eval_unit(s, t),
        settings.mc_points,
        settings.seed,
    )?;
    if !(sigma_star2.value >= 0.0) {
        return Err(Error::NegativeVariance(sigma_star2.value));
    }
    let g1 = est.gamma1_hat;
    let bias = match settings.bias {
        Some(PremiumBias { lambda_star, tau1 }) => lambda_star / ((g1 - 1.0 - tau1) * (g1 - 1.0)),
        None => 0.0,
    };
    let z = normal_quantile_two_sided(settings.level)?;
    let scale = a.powf(1.0 - 1.0 / g1) * pe.pivot * pe.lb_survival_at_pivot / (k as f64).sqrt();
    let half = z * sigma_star2.value.sqrt();
    pe.ci = Some(ConfidenceInterval {
        lcb: pe.pi_hat - scale * (bias + half),
        ucb: pe.pi_hat - scale * (bias - half),
        level: settings.level,
    });
    Ok(pe)
}

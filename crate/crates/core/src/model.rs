//! Burr truncation model: a Burr-distributed loss `X` right-truncated by an
//! independent Burr-distributed `Y`, with the same shape `delta` and tail
//! indices `gamma1 < gamma2`.
//!
//! Besides sampling, the model provides the exact quantities estimators are
//! checked against: underlying and observed survival functions, the overlap
//! function `C`, the cumulative hazard `Λ`, and the net premium.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_upper_tail};
use crate::rng::RngSeed;
use crate::sample::TruncatedSample;

const QUAD_REL_TOL: f64 = 1e-8;

/// Burr survival function `(1 + x^{1/δ})^{-δ/g}`.
pub fn burr_survival(x: f64, delta: f64, g: f64) -> Result<f64> {
    check_shape(delta, g)?;
    if !x.is_finite() || x < 0.0 {
        return Err(Error::param("x", format!("must be finite and nonnegative, got {x}")));
    }
    Ok(burr_survival_unchecked(x, delta, g))
}

#[inline]
pub(crate) fn burr_survival_unchecked(x: f64, delta: f64, g: f64) -> f64 {
    (-(delta / g) * x.powf(1.0 / delta).ln_1p()).exp()
}

/// Burr quantile `((1-u)^{-g/δ} - 1)^δ`, the inverse of `1 - burr_survival`.
pub fn burr_quantile(u: f64, delta: f64, g: f64) -> Result<f64> {
    check_shape(delta, g)?;
    if !(0.0..1.0).contains(&u) {
        return Err(Error::param("u", format!("must lie in [0, 1), got {u}")));
    }
    Ok(burr_quantile_unchecked(u, delta, g))
}

#[inline]
pub(crate) fn burr_quantile_unchecked(u: f64, delta: f64, g: f64) -> f64 {
    (-(g / delta) * (-u).ln_1p()).exp_m1().powf(delta)
}

/// Burr density, derivative of `1 - burr_survival`.
fn burr_density(x: f64, delta: f64, g: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = x.powf(1.0 / delta);
    (-(delta / g + 1.0) * a.ln_1p()).exp() * a / (x * g)
}

fn check_shape(delta: f64, g: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::param("g", format!("must be positive, got {g}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurrTruncationModel {
    gamma1: f64,
    gamma2: f64,
    delta: f64,
    /// Kept as given by [`Self::from_p`] so it reads back exactly.
    p: f64,
}

impl BurrTruncationModel {
    pub fn new(gamma1: f64, gamma2: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("gamma1", gamma1), ("gamma2", gamma2), ("delta", delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self { gamma1, gamma2, delta, p: gamma2 / (gamma1 + gamma2) })
    }

    /// Builds the model whose observation probability `P(X ≤ Y)` equals `p`,
    /// i.e. `gamma2 = p·gamma1/(1-p)`.
    pub fn from_p(p: f64, gamma1: f64, delta: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
        }
        Ok(Self { p, ..Self::new(gamma1, p * gamma1 / (1.0 - p), delta)? })
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Observation probability `P(X ≤ Y) = gamma2/(gamma1+gamma2)`.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Tail index of the observed `X` margin, `gamma1·gamma2/(gamma1+gamma2)`.
    pub fn gamma(&self) -> f64 {
        self.gamma1 * self.gamma2 / (self.gamma1 + self.gamma2)
    }

    /// Second-order parameter of the observed `X` margin as used for the
    /// confidence-interval study, `-2γ/δ`.
    pub fn tau(&self) -> f64 {
        -2.0 * self.gamma() / self.delta
    }

    /// Exact second-order parameter of the observed `X` margin, `-γ/δ`.
    ///
    /// The observed `X` is itself Burr with shape `δ` and index `γ`, so its
    /// quantile function is `t^γ(1 − t^{-γ/δ})^δ`.
    pub fn observed_tau_exact(&self) -> f64 {
        -self.gamma() / self.delta
    }

    /// Second-order parameter of the `Y` margin, `-gamma2/δ`.
    pub fn tau2(&self) -> f64 {
        -self.gamma2 / self.delta
    }

    /// Second-order parameter of the underlying loss tail, `-gamma1/δ`.
    pub fn tau1(&self) -> f64 {
        -self.gamma1 / self.delta
    }

    /// Premium and Lynden-Bell asymptotics require `gamma1 < gamma2`.
    pub fn has_lighter_loss_tail(&self) -> bool {
        self.gamma1 < self.gamma2
    }

    /// Survival function of the underlying (untruncated) loss.
    pub fn loss_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            burr_survival_unchecked(x, self.delta, self.gamma1)
        }
    }

    /// Survival function of the underlying truncation variable.
    pub fn truncation_survival(&self, y: f64) -> f64 {
        if y <= 0.0 {
            1.0
        } else {
            burr_survival_unchecked(y, self.delta, self.gamma2)
        }
    }

    pub fn loss_quantile(&self, u: f64) -> Result<f64> {
        burr_quantile(u, self.delta, self.gamma1)
    }

    /// Survival of the observed `X`. For this model it is exactly Burr with
    /// index `γ` and the same shape.
    pub fn observed_survival_x(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            burr_survival_unchecked(x, self.delta, self.gamma())
        }
    }

    /// Observed `X` survival from its definition `p⁻¹∫ₓ^∞ Ḡ dF`, by quadrature.
    pub fn observed_survival_x_by_quadrature(&self, x: f64) -> Result<f64> {
        let integrand =
            |z: f64| self.truncation_survival(z) * burr_density(z, self.delta, self.gamma1);
        let v = if x <= 0.0 {
            // split at 1 so that the finite part and the tail are both well behaved
            integrate(integrand, 0.0, 1.0, QUAD_REL_TOL, 1e-15)?.value
                + integrate_upper_tail(integrand, 1.0, QUAD_REL_TOL)?.value
        } else {
            integrate_upper_tail(integrand, x, QUAD_REL_TOL)?.value
        };
        Ok((v / self.p()).min(1.0))
    }

    /// Quantile of the observed `X`: `U(t)` with `t = 1/(1-u)`.
    pub fn observed_quantile_x(&self, u: f64) -> Result<f64> {
        burr_quantile(u, self.delta, self.gamma())
    }

    /// Overlap function `C(x) = P(X ≤ x ≤ Y | observed) = p⁻¹F(x)Ḡ(x)`.
    pub fn overlap(&self, x: f64) -> f64 {
        (1.0 - self.loss_survival(x)) * self.truncation_survival(x) / self.p()
    }

    /// Cumulative hazard `Λ(x) = ∫ₓ^∞ dF_obs(z)/C(z)` by quadrature.
    pub fn cumulative_hazard(&self, x: f64) -> Result<f64> {
        let p = self.p();
        let integrand = |z: f64| {
            let density = self.truncation_survival(z) * burr_density(z, self.delta, self.gamma1) / p;
            let c = self.overlap(z);
            if c > 0.0 {
                density / c
            } else {
                0.0
            }
        };
        Ok(integrate_upper_tail(integrand, x, QUAD_REL_TOL)?.value)
    }

    /// Draws `n_total` pairs and keeps those with `x ≤ y`.
    pub fn sample(&self, n_total: usize, seed: RngSeed) -> Result<TruncatedSample> {
        self.sample_with(n_total, &mut seed.rng())
    }

    /// Same as [`sample`](Self::sample) with a caller-supplied generator.
    /// Each pair consumes two uniforms, loss first.
    pub fn sample_with<R: Rng + ?Sized>(&self, n_total: usize, rng: &mut R) -> Result<TruncatedSample> {
        if n_total == 0 {
            return Err(Error::param("N", "must be at least 1"));
        }
        let mut pairs = Vec::with_capacity((n_total as f64 * self.p() * 1.1) as usize + 8);
        for _ in 0..n_total {
            let u: f64 = rng.sample(Open01);
            let v: f64 = rng.sample(Open01);
            let x = burr_quantile_unchecked(u, self.delta, self.gamma1);
            let y = burr_quantile_unchecked(v, self.delta, self.gamma2);
            if x <= y && x > 0.0 && x.is_finite() && y.is_finite() {
                pairs.push((x, y));
            }
        }
        Ok(TruncatedSample::from_valid_pairs(pairs))
    }

    /// Computes `t·Λ(U(t))·C(U(t))`, which tends to `gamma1/γ` as `t → ∞`.
    pub fn hazard_overlap_limit(&self, t: f64) -> Result<f64> {
        if !self.has_lighter_loss_tail() {
            return Err(Error::param(
                "gamma1",
                format!("requires gamma1 < gamma2, got {} >= {}", self.gamma1, self.gamma2),
            ));
        }
        if !(t > 1.0 && t.is_finite()) {
            return Err(Error::param("t", format!("must exceed 1, got {t}")));
        }
        let u = self.observed_quantile_x(1.0 - 1.0 / t)?;
        let hazard = self.cumulative_hazard(u)?;
        Ok(t * hazard * self.overlap(u))
    }
}

/// Samples a truncated data set; see [`BurrTruncationModel::sample`].
pub fn sample_truncated_pairs(model: &BurrTruncationModel, n_total: usize, seed: RngSeed) -> Result<TruncatedSample> {
    model.sample(n_total, seed)
}

/// Net premium `∫ᵤ^∞ F̄(x)dx` of an arbitrary tail with index `gamma1 < 1`.
pub fn true_premium<F: Fn(f64) -> f64>(gamma1: f64, survival: F, u: f64) -> Result<f64> {
    if !(gamma1 > 0.0) {
        return Err(Error::param("gamma1", format!("must be positive, got {gamma1}")));
    }
    if gamma1 >= 1.0 {
        return Err(Error::InfiniteMean(gamma1));
    }
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::param("u", format!("must be positive, got {u}")));
    }
    Ok(integrate_upper_tail(survival, u, QUAD_REL_TOL)?.value)
}

/// Closed-form premium of the exact Pareto tail `x^{-1/γ₁}`, `x ≥ 1`.
pub fn pareto_premium(gamma1: f64, u: f64) -> Result<f64> {
    if !(gamma1 > 0.0) {
        return Err(Error::param("gamma1", format!("must be positive, got {gamma1}")));
    }
    if gamma1 >= 1.0 {
        return Err(Error::InfiniteMean(gamma1));
    }
    if !(u >= 1.0) {
        return Err(Error::param("u", format!("Pareto support starts at 1, got {u}")));
    }
    Ok(gamma1 / (1.0 - gamma1) * u.powf(1.0 - 1.0 / gamma1))
}

/// Built-in loss tails for [`TailModel::premium`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    Pareto { gamma1: f64 },
    Burr { gamma1: f64, delta: f64 },
}

impl TailModel {
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            TailModel::Pareto { gamma1 } => {
                if x <= 1.0 {
                    1.0
                } else {
                    x.powf(-1.0 / gamma1)
                }
            }
            TailModel::Burr { gamma1, delta } => {
                if x <= 0.0 {
                    1.0
                } else {
                    burr_survival_unchecked(x, delta, gamma1)
                }
            }
        }
    }

    /// Pareto uses the closed form; Burr is integrated numerically.
    pub fn premium(&self, u: f64) -> Result<f64> {
        match *self {
            TailModel::Pareto { gamma1 } => pareto_premium(gamma1, u),
            TailModel::Burr { gamma1, .. } => true_premium(gamma1, |x| self.survival(x), u),
        }
    }
}

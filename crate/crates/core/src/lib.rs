//! Extreme-value inference for randomly right-truncated heavy-tailed data.
//!
//! A loss `X` is observed only when it does not exceed an independent
//! truncation variable `Y`. From the observed pairs this crate estimates the
//! tail index `γ₁` of the loss with a single sample fraction, builds
//! asymptotic confidence intervals, reconstructs the loss distribution with
//! the Lynden-Bell product-limit estimator, extrapolates its tail, and prices
//! an excess-of-loss reinsurance layer.
//!
//! | module | contents |
//! |---|---|
//! | [`model`] | Burr truncation model, sampling, exact reference quantities |
//! | [`sample`] | observed pairs, order statistics, `Cₙ`, CSV input |
//! | [`tail_estimation`] | Hill, `γ̂₁`, tail copula, `δ(R)`, second-order plug-ins, CI |
//! | [`lynden_bell`] | product-limit estimator, Weissman tail, premium and its CI |
//! | [`k_select`] | Reiss–Thomas choice of `k` |
//! | [`study`] | seeded Monte Carlo study harness and report formats |
//! | [`pipeline`] | CSV-to-report entry points used by the `truncext` binary |

pub mod error;
pub mod k_select;
pub mod lynden_bell;
pub mod model;
pub mod pipeline;
pub mod quadrature;
pub mod rng;
pub mod sample;
pub mod study;
pub mod tail_estimation;

pub use error::{Error, Result};
pub use k_select::{reiss_thomas_k, select_k, KSelection};
pub use lynden_bell::{
    lambda_n, lynden_bell_survival, premium_confidence_interval, premium_estimate, tail_ratio_variance,
    premium_limit_variance, weissman_tail, PremiumEstimate, PremiumSettings,
};
pub use model::{burr_quantile, burr_survival, sample_truncated_pairs, true_premium, BurrTruncationModel, TailModel};
pub use rng::RngSeed;
pub use sample::{Margin, TruncatedSample};
pub use tail_estimation::{
    confidence_interval, delta_functional, hill, lambda_hat, second_order_tau_hat, tail_copula_hat,
    truncated_tail_index, ConfidenceInterval, ConfidenceSettings, InferenceReport, TailCopula, TailIndexEstimate,
    TauSource,
};

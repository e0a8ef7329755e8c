//! Asymptotic confidence interval for the loss tail index, with every plug-in.
//!
//! cargo run --release --example confidence_interval

use truncext::{confidence_interval, select_k, BurrTruncationModel, ConfidenceSettings, RngSeed, TauSource};

fn main() -> truncext::Result<()> {
    let model = BurrTruncationModel::from_p(0.9, 0.6, 1.0)?;
    let sample = model.sample(1_500, RngSeed(7))?;
    let k = select_k(&sample, 0.3)?.k_star;

    let estimated = confidence_interval(&sample, k, &ConfidenceSettings::default())?;
    println!("{}", serde_json::to_string_pretty(&estimated).unwrap());

    // same interval with the second-order parameters taken from the model
    let fixed = ConfidenceSettings {
        tau: TauSource::Fixed { tau: model.observed_tau_exact(), tau2: model.tau2() },
        ..ConfidenceSettings::default()
    };
    let r = confidence_interval(&sample, k, &fixed)?;
    println!("k = {k}");
    println!("estimated tau: [{:.4}, {:.4}]", estimated.ci.lcb, estimated.ci.ucb);
    println!("model tau:     [{:.4}, {:.4}]", r.ci.lcb, r.ci.ucb);
    println!("true gamma1 = {}", model.gamma1());
    Ok(())
}

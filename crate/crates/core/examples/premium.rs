//! Net premium of an excess-of-loss layer above a retention level.
//!
//! cargo run --release --example premium

use truncext::lynden_bell::premium_confidence_interval;
use truncext::{select_k, true_premium, BurrTruncationModel, PremiumSettings, RngSeed};

fn main() -> truncext::Result<()> {
    let n_total = 20_000;
    let model = BurrTruncationModel::from_p(0.9, 0.6, 1.0)?;
    let sample = model.sample(n_total, RngSeed(5))?;
    let k = select_k(&sample, 0.3)?.k_star;

    // retention exceeded by one loss in 4000
    let u = model.loss_quantile(1.0 - 5.0 / n_total as f64)?;
    let truth = true_premium(model.gamma1(), |x| model.loss_survival(x), u)?;
    let est = premium_confidence_interval(&sample, k, u, &PremiumSettings::default())?;
    let ci = est.ci.expect("interval requested");

    println!("retention u = {u:.2}, k = {k}, gamma1 = {:.4}", est.gamma1_hat);
    println!("premium estimate {:.5}", est.pi_hat);
    println!("95% interval     [{:.5}, {:.5}]", ci.lcb, ci.ucb);
    println!("true premium     {truth:.5}");
    Ok(())
}

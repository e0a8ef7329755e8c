//! Estimate the loss tail index from a simulated truncated sample.
//!
//! cargo run --example tail_index

use truncext::{select_k, truncated_tail_index, BurrTruncationModel, RngSeed};

fn main() -> truncext::Result<()> {
    // 80% of pairs observed, loss tail index 0.6
    let model = BurrTruncationModel::from_p(0.8, 0.6, 1.0)?;
    let sample = model.sample(5_000, RngSeed(42))?;
    println!("observed {} of 5000 pairs (expected share {:.2})", sample.n(), model.p());

    println!("{:>6} {:>10} {:>10} {:>10}", "k", "gamma_X", "gamma_Y", "gamma1");
    for k in [25, 50, 100, 200, 400] {
        let est = truncated_tail_index(&sample, k)?;
        println!("{:>6} {:>10.4} {:>10.4} {:>10.4}", k, est.gamma_hat, est.gamma2_hat, est.gamma1_hat);
    }

    let sel = select_k(&sample, 0.3)?;
    let est = truncated_tail_index(&sample, sel.k_star)?;
    println!("selected k = {} -> gamma1 = {:.4} (true {})", sel.k_star, est.gamma1_hat, model.gamma1());
    Ok(())
}

//! Inspect the Reiss–Thomas criterion used to pick the sample fraction.
//!
//! cargo run --example k_selection

use truncext::tail_estimation::tail_index_trace;
use truncext::{reiss_thomas_k, BurrTruncationModel, RngSeed};

fn main() -> truncext::Result<()> {
    let sample = BurrTruncationModel::from_p(0.7, 0.8, 1.0)?.sample(1_500, RngSeed(3))?;
    let n = sample.n();
    let trace = tail_index_trace(&sample, n / 4);
    for beta in [0.0, 0.3, 0.5] {
        let sel = reiss_thomas_k(|k| trace.get(k).copied().flatten(), n, beta)?;
        let gamma1 = trace[sel.k_star].unwrap();
        println!("beta {beta}: k* = {:>3} in [{}, {}], gamma1 = {gamma1:.4}", sel.k_star, sel.k_min, sel.k_max);
    }

    let sel = reiss_thomas_k(|k| trace.get(k).copied().flatten(), n, 0.3)?;
    println!("\n  k   score    gamma1");
    for &(k, score) in sel.criterion_values.iter().step_by(25) {
        println!("{k:>3} {score:>7.4} {:>9.4}", trace[k].unwrap());
    }
    Ok(())
}

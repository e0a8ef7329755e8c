//! Reconstruct the untruncated loss distribution and extrapolate its tail.
//!
//! cargo run --example lynden_bell

use truncext::lynden_bell::lynden_bell_eval;
use truncext::{select_k, truncated_tail_index, weissman_tail, BurrTruncationModel, Margin, RngSeed};

fn main() -> truncext::Result<()> {
    let model = BurrTruncationModel::from_p(0.7, 0.6, 1.0)?;
    let sample = model.sample(20_000, RngSeed(11))?;

    println!("{:>10} {:>12} {:>12} {:>12}", "x", "product-lim", "naive ecdf", "true");
    for q in [0.5, 0.8, 0.95, 0.99] {
        let x = model.loss_quantile(q)?;
        let lb = lynden_bell_eval(&sample, x);
        let naive = sample.empirical_tail(Margin::X, x);
        println!("{:>10.3} {:>12.5} {:>12.5} {:>12.5}", x, lb.survival, naive, model.loss_survival(x));
    }

    // beyond the data: Weissman extrapolation from the pivot X_{n-k:n}
    let k = select_k(&sample, 0.3)?.k_star;
    let g1 = truncated_tail_index(&sample, k)?.gamma1_hat;
    let top = *sample.sorted(Margin::X).last().unwrap();
    for factor in [1.0, 5.0, 50.0] {
        let x = top * factor;
        let est = weissman_tail(&sample, k, g1, x)?;
        println!("tail at {x:>12.1}: estimate {est:.3e}, true {:.3e}", model.loss_survival(x));
    }
    Ok(())
}

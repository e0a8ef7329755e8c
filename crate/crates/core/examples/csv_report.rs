//! Estimate from a CSV file with header `x,y`, as the `truncext` binary does.
//!
//! cargo run --release --example csv_report

use std::io::Write;

use truncext::pipeline::{estimate_from_csv, premium_from_csv, EstimateOptions, PremiumOptions};
use truncext::{BurrTruncationModel, RngSeed};

fn main() -> truncext::Result<()> {
    let path = std::env::temp_dir().join("truncext_example.csv");
    let sample = BurrTruncationModel::from_p(0.8, 0.6, 1.0)?.sample(3_000, RngSeed(9))?;
    let mut f = std::fs::File::create(&path).expect("temp file");
    writeln!(f, "x,y").unwrap();
    for (x, y) in sample.pairs() {
        writeln!(f, "{x},{y}").unwrap();
    }
    drop(f);

    let report = estimate_from_csv(&path, &EstimateOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());

    let retention = 50.0;
    let premium = premium_from_csv(&path, &PremiumOptions::new(retention))?;
    println!("premium above {retention}: {:.5}", premium.premium.pi_hat);
    Ok(())
}

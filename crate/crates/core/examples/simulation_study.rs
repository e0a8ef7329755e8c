//! A reduced Monte Carlo study: bias, rmse, coverage and interval length.
//!
//! cargo run --release --example simulation_study

use truncext::study::{run_study, to_markdown, StudyConfig, StudyKind};
use truncext::RngSeed;

fn main() -> truncext::Result<()> {
    let config = StudyConfig {
        p_values: vec![0.7, 0.9],
        gamma1_values: vec![0.6],
        n_values: vec![500, 1500],
        replicates: 50,
        mc_points: 20_000,
        seed: RngSeed(2024),
        ..StudyConfig::default()
    };
    let out = run_study(&config, StudyKind::Ci)?;
    print!("{}", to_markdown(&out.rows, StudyKind::Point));
    print!("{}", to_markdown(&out.rows, StudyKind::Ci));
    let failed = out.records.iter().filter(|r| !r.is_ok()).count();
    println!("{failed} of {} replicates discarded", out.records.len());
    Ok(())
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use truncext::pipeline::{self, EstimateOptions, KSpec, PremiumOptions};
use truncext::study::{self, ReportFormat, StudyConfig, StudyKind};
use truncext::{Error, RngSeed, TauSource};

#[derive(Parser)]
#[command(name = "truncext", version, about = "Tail inference for randomly right-truncated heavy-tailed data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo study over a (p, gamma1, N) grid.
    Simulate(SimulateArgs),
    /// Tail index, plug-ins and confidence interval for a CSV of (x, y) pairs.
    Estimate(EstimateArgs),
    /// Premium of the layer above a retention level.
    Premium(PremiumArgs),
}

#[derive(Args)]
struct Common {
    /// Sample fraction: `auto` or an integer.
    #[arg(long, default_value = "auto")]
    k: KSpec,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = truncext::k_select::DEFAULT_BETA)]
    rt_beta: f64,
    #[arg(long, default_value_t = truncext::tail_estimation::DEFAULT_MC_POINTS)]
    mc_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// `point` (bias and rmse) or `ci` (coverage and length).
    kind: StudyKind,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    gamma1: Option<Vec<f64>>,
    #[arg(long = "N", value_delimiter = ',', num_args = 1..)]
    n: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rt_beta: Option<f64>,
    #[arg(long)]
    mc_points: Option<usize>,
    /// Second-order parameters `tau[,tau2]` instead of estimating them.
    #[arg(long)]
    tau_fixed: Option<String>,
    #[arg(long, default_value = "md")]
    format: ReportFormat,
    /// Write every replicate to `<dir>/replicates.csv`.
    #[arg(long)]
    dump_replicates: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    tau_fixed: Option<String>,
}

#[derive(Args)]
struct PremiumArgs {
    #[arg(long)]
    input: PathBuf,
    /// Retention level `u` of the layer.
    #[arg(long)]
    retention: f64,
    #[command(flatten)]
    common: Common,
}

fn parse_tau(s: Option<&str>) -> Result<TauSource, Error> {
    let Some(s) = s else { return Ok(TauSource::Estimate) };
    let bad = || Error::InvalidParameter { name: "tau-fixed", reason: format!("expected `tau` or `tau,tau2`, got `{s}`") };
    let vals: Vec<f64> = s.split(',').map(|v| v.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    match vals[..] {
        [t] if t < 0.0 => Ok(TauSource::Fixed { tau: t, tau2: t }),
        [t, t2] if t < 0.0 && t2 < 0.0 => Ok(TauSource::Fixed { tau: t, tau2: t2 }),
        _ => Err(bad()),
    }
}

fn simulate(a: SimulateArgs) -> Result<(), Error> {
    let mut cfg = StudyConfig::default();
    if let Some(v) = a.p {
        cfg.p_values = v;
    }
    if let Some(v) = a.gamma1 {
        cfg.gamma1_values = v;
    }
    if let Some(v) = a.n {
        cfg.n_values = v;
    }
    cfg.replicates = a.replicates.unwrap_or(cfg.replicates);
    cfg.delta = a.delta.unwrap_or(cfg.delta);
    cfg.level = a.level.unwrap_or(cfg.level);
    cfg.seed = a.seed.map(RngSeed).unwrap_or(cfg.seed);
    cfg.rt_beta = a.rt_beta.unwrap_or(cfg.rt_beta);
    cfg.mc_points = a.mc_points.unwrap_or(cfg.mc_points);
    cfg.tau = parse_tau(a.tau_fixed.as_deref())?;

    let out = match a.threads {
        Some(t) => study::run_study_with_threads(&cfg, a.kind, t)?,
        None => study::run_study(&cfg, a.kind)?,
    };
    if let Some(dir) = a.dump_replicates {
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
        let path = dir.join("replicates.csv");
        let body = study::to_csv(&out.records)?;
        std::fs::write(&path, body).map_err(|e| Error::Io { path, source: e })?;
    }
    print!("{}", study::render(&out.rows, a.kind, a.format)?);
    Ok(())
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn estimate(a: EstimateArgs) -> Result<(), Error> {
    let opts = EstimateOptions {
        k: a.common.k,
        level: a.common.level,
        rt_beta: a.common.rt_beta,
        mc_points: a.common.mc_points,
        seed: RngSeed(a.common.seed),
        tau: parse_tau(a.tau_fixed.as_deref())?,
    };
    let rep = pipeline::estimate_from_csv(&a.input, &opts)?;
    let e = &rep.estimate;
    eprintln!("n          {}", rep.n);
    eprintln!("k          {}", rep.k);
    eprintln!("gamma      {:.6}", e.gamma_hat);
    eprintln!("gamma2     {:.6}", e.gamma2_hat);
    eprintln!("gamma1     {:.6}", e.gamma1_hat);
    match (&rep.inference, &rep.ci_unavailable) {
        (Some(inf), _) => eprintln!("{:.0}% CI    [{:.6}, {:.6}]", 100.0 * inf.ci.level, inf.ci.lcb, inf.ci.ucb),
        (None, Some(why)) => eprintln!("CI         unavailable: {why}"),
        _ => {}
    }
    print_json(&rep);
    Ok(())
}

fn premium(a: PremiumArgs) -> Result<(), Error> {
    let opts = PremiumOptions {
        k: a.common.k,
        level: a.common.level,
        rt_beta: a.common.rt_beta,
        mc_points: a.common.mc_points,
        seed: RngSeed(a.common.seed),
        ..PremiumOptions::new(a.retention)
    };
    let rep = pipeline::premium_from_csv(&a.input, &opts)?;
    let p = &rep.premium;
    eprintln!("n          {}", rep.n);
    eprintln!("k          {}", p.k);
    eprintln!("gamma1     {:.6}", p.gamma1_hat);
    eprintln!("pivot      {:.6}", p.pivot);
    eprintln!("premium    {:.6}", p.pi_hat);
    match (&p.ci, &rep.ci_unavailable) {
        (Some(ci), _) => eprintln!("{:.0}% CI    [{:.6}, {:.6}]", 100.0 * ci.level, ci.lcb, ci.ucb),
        (None, Some(why)) => eprintln!("CI         unavailable: {why}"),
        _ => {}
    }
    print_json(&rep);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Premium(a) => premium(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_degenerate() { 3 } else { 2 })
        }
    }
}

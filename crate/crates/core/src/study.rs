//! Seeded Monte Carlo study over a grid of truncation models.
//!
//! Every `(p, γ₁, N)` cell draws `replicates` truncated samples from the Burr
//! model, selects `k` with the Reiss–Thomas rule, estimates `γ₁` and, for the
//! interval study, builds a confidence interval. Replicate seeds are derived
//! from `(master seed, cell parameters, replicate index)`, and results are
//! reduced in replicate order, so the output does not depend on the number
//! of worker threads.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::k_select::{select_k, DEFAULT_BETA};
use crate::model::BurrTruncationModel;
use crate::rng::RngSeed;
use crate::tail_estimation::{confidence_interval, truncated_tail_index, ConfidenceSettings, TauSource, DEFAULT_MC_POINTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub p_values: Vec<f64>,
    pub gamma1_values: Vec<f64>,
    #[serde(rename = "N_values")]
    pub n_values: Vec<usize>,
    pub replicates: usize,
    /// Burr shape shared by loss and truncation variables.
    pub delta: f64,
    pub level: f64,
    pub seed: RngSeed,
    /// Reiss–Thomas weight exponent.
    pub rt_beta: f64,
    pub mc_points: usize,
    pub tau: TauSource,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            p_values: vec![0.7, 0.8, 0.9],
            gamma1_values: vec![0.6, 0.8],
            n_values: vec![500, 1000, 1500],
            replicates: 200,
            delta: 1.0,
            level: 0.95,
            seed: RngSeed(20_140_601),
            rt_beta: DEFAULT_BETA,
            mc_points: DEFAULT_MC_POINTS,
            tau: TauSource::Estimate,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_values.is_empty() || self.gamma1_values.is_empty() || self.n_values.is_empty() {
            return Err(Error::param("grid", "p, gamma1 and N lists must be non-empty"));
        }
        if let Some(p) = self.p_values.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
        }
        if let Some(g) = self.gamma1_values.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::param("gamma1", format!("must be positive, got {g}")));
        }
        if self.n_values.contains(&0) {
            return Err(Error::param("N", "must be positive"));
        }
        if self.replicates == 0 {
            return Err(Error::param("replicates", "must be positive"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::param("delta", format!("must be positive, got {}", self.delta)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::param("level", format!("must lie in (0, 1), got {}", self.level)));
        }
        Ok(())
    }

    /// Cells in report order: `p`, then `γ₁`, then `N`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &p in &self.p_values {
            for &gamma1 in &self.gamma1_values {
                for &n_total in &self.n_values {
                    out.push(Cell { p, gamma1, n_total });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub p: f64,
    pub gamma1: f64,
    #[serde(rename = "N")]
    pub n_total: usize,
}

impl Cell {
    /// Seed of this cell; depends only on the cell's own parameters.
    pub fn seed(&self, master: RngSeed, delta: f64) -> RngSeed {
        master.derive(&[self.p.to_bits(), self.gamma1.to_bits(), self.n_total as u64, delta.to_bits()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Point,
    Ci,
}

impl FromStr for StudyKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "point" => Ok(StudyKind::Point),
            "ci" => Ok(StudyKind::Ci),
            other => Err(format!("unknown study kind `{other}` (expected point|ci)")),
        }
    }
}

/// Outcome of one replicate; the unit of the per-replicate dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub p: f64,
    pub gamma1: f64,
    #[serde(rename = "N")]
    pub n_total: usize,
    pub replicate: usize,
    pub n: usize,
    pub k: Option<usize>,
    pub gamma1_hat: Option<f64>,
    pub lcb: Option<f64>,
    pub ucb: Option<f64>,
    pub covered: Option<bool>,
    /// `ok`, or the reason the replicate was discarded.
    pub status: String,
}

impl ReplicateRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Aggregate of one cell, averaged over its usable replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRow {
    pub p: f64,
    pub gamma1: f64,
    #[serde(rename = "N")]
    pub n_total: usize,
    pub mean_n: f64,
    pub mean_k: f64,
    pub mean_gamma1_hat: f64,
    pub bias: f64,
    pub rmse: f64,
    pub mean_lcb: Option<f64>,
    pub mean_ucb: Option<f64>,
    pub coverage: Option<f64>,
    pub mean_length: Option<f64>,
    pub replicates_used: usize,
    pub degenerate: usize,
    /// More than half of the replicates were degenerate.
    pub incomplete: bool,
}

/// Runs a single replicate of a cell.
pub fn run_replicate(config: &StudyConfig, cell: Cell, kind: StudyKind, replicate: usize) -> ReplicateRecord {
    let rep_seed = cell.seed(config.seed, config.delta).derive(&[replicate as u64]);
    let mut rec = ReplicateRecord {
        p: cell.p,
        gamma1: cell.gamma1,
        n_total: cell.n_total,
        replicate,
        n: 0,
        k: None,
        gamma1_hat: None,
        lcb: None,
        ucb: None,
        covered: None,
        status: "ok".into(),
    };
    let outcome = (|| -> Result<()> {
        let model = BurrTruncationModel::from_p(cell.p, cell.gamma1, config.delta)?;
        let sample = model.sample(cell.n_total, rep_seed.derive(&[0]))?;
        rec.n = sample.n();
        let sel = select_k(&sample, config.rt_beta)?;
        rec.k = Some(sel.k_star);
        let est = truncated_tail_index(&sample, sel.k_star)?;
        rec.gamma1_hat = Some(est.gamma1_hat);
        if kind == StudyKind::Ci {
            let settings = ConfidenceSettings {
                level: config.level,
                mc_points: config.mc_points,
                seed: rep_seed.derive(&[1]),
                tau: config.tau,
            };
            let report = confidence_interval(&sample, sel.k_star, &settings)?;
            rec.lcb = Some(report.ci.lcb);
            rec.ucb = Some(report.ci.ucb);
            rec.covered = Some(report.ci.contains(cell.gamma1));
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.status = e.to_string();
    }
    rec
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut count) = (0.0, 0usize);
    for v in values {
        sum += v;
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

/// Reduces the records of one cell, in the order given.
pub fn aggregate(cell: Cell, records: &[ReplicateRecord], kind: StudyKind) -> SimulationRow {
    let ok: Vec<&ReplicateRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let degenerate = records.len() - ok.len();
    let nan = f64::NAN;
    let mean_gamma1_hat = mean(ok.iter().filter_map(|r| r.gamma1_hat)).unwrap_or(nan);
    let mse = mean(ok.iter().filter_map(|r| r.gamma1_hat).map(|g| (g - cell.gamma1).powi(2))).unwrap_or(nan);
    let ci = kind == StudyKind::Ci;
    SimulationRow {
        p: cell.p,
        gamma1: cell.gamma1,
        n_total: cell.n_total,
        mean_n: mean(ok.iter().map(|r| r.n as f64)).unwrap_or(nan),
        mean_k: mean(ok.iter().filter_map(|r| r.k).map(|k| k as f64)).unwrap_or(nan),
        mean_gamma1_hat,
        bias: mean_gamma1_hat - cell.gamma1,
        rmse: mse.sqrt(),
        mean_lcb: if ci { mean(ok.iter().filter_map(|r| r.lcb)) } else { None },
        mean_ucb: if ci { mean(ok.iter().filter_map(|r| r.ucb)) } else { None },
        coverage: if ci { mean(ok.iter().filter_map(|r| r.covered).map(|c| if c { 1.0 } else { 0.0 })) } else { None },
        mean_length: if ci { mean(ok.iter().filter_map(|r| Some(r.ucb? - r.lcb?))) } else { None },
        replicates_used: ok.len(),
        degenerate,
        incomplete: 2 * degenerate > records.len(),
    }
}

/// Rows together with every replicate record that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOutput {
    pub rows: Vec<SimulationRow>,
    pub records: Vec<ReplicateRecord>,
}

/// Runs the study on the current rayon pool.
pub fn run_study(config: &StudyConfig, kind: StudyKind) -> Result<StudyOutput> {
    config.validate()?;
    let cells = config.cells();
    let units: Vec<(Cell, usize)> =
        cells.iter().flat_map(|&c| (0..config.replicates).map(move |r| (c, r))).collect();
    let records: Vec<ReplicateRecord> =
        units.par_iter().map(|&(cell, r)| run_replicate(config, cell, kind, r)).collect();
    let rows = cells
        .iter()
        .zip(records.chunks(config.replicates))
        .map(|(&cell, recs)| aggregate(cell, recs, kind))
        .collect();
    Ok(StudyOutput { rows, records })
}

/// Runs the study on a dedicated pool of `threads` workers.
pub fn run_study_with_threads(config: &StudyConfig, kind: StudyKind, threads: usize) -> Result<StudyOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    pool.install(|| run_study(config, kind))
}

/// Bias and rmse of `γ̂₁` per cell.
pub fn run_point_study(config: &StudyConfig) -> Result<Vec<SimulationRow>> {
    Ok(run_study(config, StudyKind::Point)?.rows)
}

/// Point columns plus interval bounds, coverage and length per cell.
pub fn run_ci_study(config: &StudyConfig) -> Result<Vec<SimulationRow>> {
    Ok(run_study(config, StudyKind::Ci)?.rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv|md|json)")),
        }
    }
}

/// Serializes any list of flat records as CSV with a header row.
pub fn to_csv<T: Serialize>(items: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for item in items {
        w.serialize(item).map_err(|e| Error::param("csv", e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::param("csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.digits$}"))
}

/// Markdown tables grouped by `p`, one row per `(γ₁, N)`.
pub fn to_markdown(rows: &[SimulationRow], kind: StudyKind) -> String {
    let mut out = String::new();
    let mut ps: Vec<f64> = Vec::new();
    for r in rows {
        if !ps.contains(&r.p) {
            ps.push(r.p);
        }
    }
    for p in ps {
        let _ = writeln!(out, "### p = {p:.2}\n");
        match kind {
            StudyKind::Point => {
                out.push_str("| γ₁ | N | n | k | γ̂₁ | bias | rmse |\n|---|---|---|---|---|---|---|\n");
                for r in rows.iter().filter(|r| r.p == p) {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {:.0} | {:.0} | {:.3} | {:.3} | {:.3} |{}",
                        r.gamma1,
                        r.n_total,
                        r.mean_n,
                        r.mean_k,
                        r.mean_gamma1_hat,
                        r.bias,
                        r.rmse,
                        if r.incomplete { " incomplete" } else { "" }
                    );
                }
            }
            StudyKind::Ci => {
                out.push_str("| γ₁ | N | lcb−ucb | covpr | length |\n|---|---|---|---|---|\n");
                for r in rows.iter().filter(|r| r.p == p) {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {}−{} | {} | {} |{}",
                        r.gamma1,
                        r.n_total,
                        opt(r.mean_lcb, 3),
                        opt(r.mean_ucb, 3),
                        opt(r.coverage, 2),
                        opt(r.mean_length, 3),
                        if r.incomplete { " incomplete" } else { "" }
                    );
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn render(rows: &[SimulationRow], kind: StudyKind, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => to_csv(rows),
        ReportFormat::Markdown => Ok(to_markdown(rows, kind)),
        ReportFormat::Json => serde_json::to_string_pretty(rows).map_err(|e| Error::param("json", e.to_string())),
    }
}

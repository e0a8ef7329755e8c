//! End-to-end runs of the `truncext` binary.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn truncext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_truncext")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

const HAND: &str = "x,y\n1,1\n2,3\n4,9\n8,27\n";

#[test]
fn estimate_hand_sample() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "hand.csv", HAND);
    let out = truncext(&["estimate", "--input", &input, "--k", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let g1 = v["estimate"]["gamma1_hat"].as_f64().unwrap();
    let (l2, l3) = (2f64.ln(), 3f64.ln());
    assert!((g1 - 1.5 * l2 * l3 / (l3 - l2)).abs() < 1e-10);
    assert!(v["ci_unavailable"].is_string());
}

#[test]
fn malformed_row_reports_line() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.csv", "x,y\n1,2\n2,abc\n3,4\n");
    let out = truncext(&["estimate", "--input", &input]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let input = write(&dir, "order.csv", "x,y\n1,2\n5,4\n");
    let out = truncext(&["estimate", "--input", &input]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn empty_and_missing_inputs() {
    let dir = TempDir::new().unwrap();
    for body in ["", "x,y\n"] {
        let input = write(&dir, "empty.csv", body);
        let out = truncext(&["estimate", "--input", &input]);
        assert_eq!(out.status.code(), Some(2), "{body:?}: {}", stderr(&out));
    }
    let missing = dir.path().join("nope.csv");
    let out = truncext(&["estimate", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = truncext(&["estimate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn premium_on_small_sample_matches_hand_value() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "six.csv", "x,y\n1,10\n2,20\n3,40\n4,80\n5,160\n6,320\n");
    let out = truncext(&["premium", "--input", &input, "--retention", "8", "--k", "2", "--mc-points", "2000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    // top two X over pivot 4, top two Y over pivot 80
    let g = ((6.0f64 / 4.0).ln() + (5.0f64 / 4.0).ln()) / 2.0;
    let g2 = (2f64.ln() + 4f64.ln()) / 2.0;
    let g1 = g * g2 / (g2 - g);
    // overlap counts 5 and 6 above the pivot give survival 1 - (4/5)(5/6)
    let surv = 1.0 / 3.0;
    let expected = 4.0 * surv * g1 / (1.0 - g1) * 2f64.powf(1.0 - 1.0 / g1);
    let got = v["premium"]["pi_hat"].as_f64().unwrap();
    assert!((got - expected).abs() < 1e-12 * expected, "{got} vs {expected}");
    assert_eq!(v["premium"]["pivot"].as_f64(), Some(4.0));
}

#[test]
fn premium_domain_errors() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "six.csv", "x,y\n1,10\n2,20\n3,40\n4,80\n5,160\n6,320\n");
    let out = truncext(&["premium", "--input", &input, "--retention", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("pivot"));

    // γ̂₁ ≈ 2.8 on the hand sample: the layer has no finite premium
    let input = write(&dir, "hand.csv", HAND);
    let out = truncext(&["premium", "--input", &input, "--retention", "10", "--k", "2"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn pole_at_every_fraction_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "pole.csv", "x,y\n1,100\n2,101\n4,102\n100,103\n");
    let out = truncext(&["estimate", "--input", &input, "--k", "3"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn bad_flags_are_input_errors() {
    let out = truncext(&["simulate", "point", "--p", "1.5", "--replicates", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = truncext(&["simulate", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
    let out = truncext(&["simulate", "ci", "--tau-fixed", "0.5", "--replicates", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_csv_header_and_formats() {
    let base = ["simulate", "point", "--p", "0.9", "--gamma1", "0.6", "--N", "500", "--replicates", "5"];
    let out = truncext(&[&base[..], &["--format", "csv"]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "p,gamma1,N,mean_n,mean_k,mean_gamma1_hat,bias,rmse,mean_lcb,mean_ucb,coverage,mean_length,replicates_used,degenerate,incomplete"
    );
    assert_eq!(text.lines().count(), 2);

    let out = truncext(&[&base[..], &["--format", "json"]].concat());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);

    let out = truncext(&base);
    assert!(String::from_utf8(out.stdout).unwrap().contains('|'));
}

#[test]
fn thread_count_does_not_change_output() {
    let base = ["simulate", "ci", "--p", "0.8", "--gamma1", "0.6", "--N", "500", "--replicates", "6", "--mc-points", "2000", "--format", "csv"];
    let one = truncext(&[&base[..], &["--threads", "1"]].concat());
    let four = truncext(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
}

fn read_csv(path: &Path) -> Vec<HashMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records().map(|r| headers.iter().zip(r.unwrap().iter()).map(|(h, v)| (h.to_owned(), v.to_owned())).collect()).collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> Option<f64> {
    let v = &row[key];
    (!v.is_empty()).then(|| v.parse().unwrap())
}

/// Averages the dumped replicates independently and compares with the report.
#[test]
fn report_matches_reaggregated_dump() {
    let dir = TempDir::new().unwrap();
    let dump = dir.path().join("dump");
    let out = truncext(&[
        "simulate", "ci", "--p", "0.7", "--gamma1", "0.8", "--N", "500", "--replicates", "25", "--mc-points", "4000",
        "--format", "csv", "--dump-replicates", dump.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report_path = dir.path().join("report.csv");
    std::fs::write(&report_path, &out.stdout).unwrap();
    let row = &read_csv(&report_path)[0];
    let reps = read_csv(&dump.join("replicates.csv"));
    assert_eq!(reps.len(), 25);

    let ok: Vec<&HashMap<String, String>> = reps.iter().filter(|r| r["status"] == "ok").collect();
    let avg = |f: &dyn Fn(&HashMap<String, String>) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64;
    let gamma1 = 0.8;
    let mean_g = avg(&|r| num(r, "gamma1_hat").unwrap());
    let expect = [
        ("mean_n", avg(&|r| num(r, "n").unwrap())),
        ("mean_k", avg(&|r| num(r, "k").unwrap())),
        ("mean_gamma1_hat", mean_g),
        ("bias", mean_g - gamma1),
        ("rmse", avg(&|r| (num(r, "gamma1_hat").unwrap() - gamma1).powi(2)).sqrt()),
        ("mean_lcb", avg(&|r| num(r, "lcb").unwrap())),
        ("mean_ucb", avg(&|r| num(r, "ucb").unwrap())),
        ("coverage", avg(&|r| if r["covered"] == "true" { 1.0 } else { 0.0 })),
        ("mean_length", avg(&|r| num(r, "ucb").unwrap() - num(r, "lcb").unwrap())),
    ];
    for (key, want) in expect {
        let got = num(row, key).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{key}: {got} vs {want}");
    }
    assert_eq!(num(row, "replicates_used").unwrap() as usize, ok.len());
    assert_eq!(num(row, "degenerate").unwrap() as usize, reps.len() - ok.len());
}

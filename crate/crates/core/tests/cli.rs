mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use aex::portfolio::read_portfolio_csv;
use common::{data_path, DAX, DJIA};

fn aex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aex"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn toy_prices(dir: &Path) -> String {
    let p = dir.join("toy.csv");
    fs::write(
        &p,
        "date,A,B\n2024-01-01,10,20\n2024-01-08,10.5,19.6\n2024-01-15,10.2,20.3\n\
         2024-01-22,10.6,20.1\n2024-01-29,10.4,20.8\n",
    )
    .unwrap();
    p.display().to_string()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn minimal_long_only_variance_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy_prices(dir.path());
    let cfg = write_config(
        dir.path(),
        &format!(
            "seed = 1\n[data]\npath = {data:?}\n[constraints]\npreset = \"long-only\"\n\
             [sampler]\nn1 = 200\n[report]\nout = \"run\"\n"
        ),
    );
    let o = aex(&["optimize", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("run");
    let (assets, x) = read_portfolio_csv(fs::File::open(out.join("solution.csv")).unwrap()).unwrap();
    assert_eq!(assets, ["A", "B"]);
    assert!((x.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-8);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for key in ["objective", "iters_per_stage", "evaluations", "seed", "wall_time_secs", "config_hash", "version"] {
        assert!(report.get(key).is_some(), "report lacks {key}");
    }
    assert_eq!(report["seed"], 1);
    let plot = fs::read_to_string(out.join("plotdata.csv")).unwrap();
    assert!(plot.starts_with("asset,heuristic,baseline\nA,"));
}

#[test]
fn empty_epsilon_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy_prices(dir.path());
    let cfg = write_config(dir.path(), &format!("[data]\npath = {data:?}\n[search]\nepsilons = []\n"));
    let o = aex(&["optimize", "--config", &cfg, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("epsilons"), "{}", stderr(&o));
}

#[test]
fn same_seed_gives_identical_solution_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_path(DJIA).display().to_string();
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run).display().to_string();
        let o = aex(&["optimize", "--data", &data, "--risk", "cvar", "--seed", "99", "--n1", "2000", "--out", &out]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        files.push(fs::read(dir.path().join(run).join("solution.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn solution_round_trips_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_path(DAX).display().to_string();
    let out = dir.path().display().to_string();
    let o = aex(&["optimize", "--data", &data, "--risk", "mad", "--seed", "3", "--n1", "500", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let (assets, x) = read_portfolio_csv(text.as_bytes()).unwrap();
    let mut again = Vec::new();
    aex::portfolio::write_portfolio_csv(&mut again, &assets, &x).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);
}

#[test]
fn compare_prints_weight_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_path(DAX).display().to_string();
    let out = dir.path().display().to_string();
    let o = aex(&["compare", "--data", &data, "--risk", "cvar", "--alpha", "0.95", "--seed", "5", "--n1", "2000", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    let mut lines = table.lines();
    let header = lines.next().unwrap();
    for col in ["Std.Dev.", "VaR(95%)", "Baseline", "Heuristic"] {
        assert!(header.contains(col), "{header}");
    }
    let body: Vec<&str> = lines.collect();
    let rows = &body[..body.len() - 1];
    assert!(!rows.is_empty() && rows.len() < 30);
    for row in rows {
        let cells: Vec<f64> = row.split_whitespace().skip(1).map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 4);
        assert!(cells[2].abs() > 0.0 || cells[3].abs() > 0.0, "zero row {row}");
    }
    assert!(body.last().unwrap().contains("relative gap"));
    assert!(dir.path().join("compare.csv").exists());
}

#[test]
fn compare_refuses_var() {
    let data = data_path(DJIA).display().to_string();
    let o = aex(&["compare", "--data", &data, "--risk", "var", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no convex baseline for VaR"));
}

#[test]
fn exit_codes_by_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    // configuration
    let o = aex(&["optimize", "--risk", "entropy"]);
    assert_eq!(o.status.code(), Some(1));
    let o = aex(&["optimize", "--data", &data_path(DJIA).display().to_string(), "--alpha", "1.5", "--risk", "cvar", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    // data
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,A,B\n2024-01-01,1,2\n2024-01-01,1,2\n2024-01-03,1,2\n").unwrap();
    let o = aex(&["optimize", "--data", &bad.display().to_string(), "--seed", "1", "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("duplicate date"));
    // solver: a return floor no long-only portfolio reaches
    let o = aex(&[
        "optimize", "--data", &data_path(DJIA).display().to_string(), "--constraints", "long-only",
        "--mu", "0.5", "--baseline", "off", "--n1", "200", "--seed", "1", "--out", &out,
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn unseeded_runs_print_their_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy_prices(dir.path());
    let out = dir.path().join("o").display().to_string();
    let o = aex(&["optimize", "--data", &data, "--constraints", "long-only", "--n1", "50", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    let seed: u64 = err
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| panic!("no seed in {err:?}"));
    let report = fs::read_to_string(dir.path().join("o/report.json")).unwrap();
    assert!(report.contains(&format!("\"seed\": {seed}")));
}

#[test]
fn frontier_flags_unreachable_floors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let data = data_path(DJIA).display().to_string();
    let o = aex(&["frontier", "--data", &data, "--risk", "cvar", "--constraints", "long-only", "--mu-grid", "0.5,0.6,0.7", "--seed", "1", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("frontier.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.contains(",false,")));
}

#[test]
fn frontier_risk_rises_with_the_floor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let data = data_path(DAX).display().to_string();
    let grid = "0,0.002,0.004,0.006,0.008,0.01,0.012";
    let o = aex(&["frontier", "--data", &data, "--risk", "cvar", "--mu-grid", grid, "--seed", "1", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("frontier.csv")).unwrap();
    assert!(csv.starts_with("mu,achieved_return,achieved_risk,feasible"));
    let risks: Vec<f64> = csv
        .lines()
        .skip(1)
        .filter(|l| l.contains(",true,"))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(risks.len() >= 2);
    assert!(risks.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{risks:?}");
}

#[test]
fn frontier_needs_two_distinct_floors() {
    let data = data_path(DJIA).display().to_string();
    let o = aex(&["frontier", "--data", &data, "--mu-grid", "0.01,0.01", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grid needs ≥ 2 distinct values"));
}

#[test]
fn sample_and_report_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let data = data_path(DJIA).display().to_string();
    let o = aex(&["sample", "--data", &data, "--n1", "25", "--seed", "2", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let samples = fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 26);

    let o = aex(&["optimize", "--data", &data, "--n1", "300", "--seed", "2", "--out", &out, "--risk", "cvar"]);
    assert_eq!(o.status.code(), Some(0));
    let sol = dir.path().join("solution.csv").display().to_string();
    let o = aex(&["report", "--data", &data, "--portfolio", &sol, "--alphas", "0.9,0.95"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("std dev") && text.contains("CVaR"));
    assert!(stderr(&o).is_empty());

    let o = aex(&["report", "--data", &data_path(DAX).display().to_string(), "--portfolio", &sol]);
    assert_eq!(o.status.code(), Some(2));
}

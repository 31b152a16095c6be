//! The `aex` command line: optimize, compare, frontier, sample, report.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 solver
//! error. Artifacts go to the output directory (`--out`, default `out`).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baselines::{solve_cvar_lp, solve_markowitz_long_only, BaselineSolution, BaselineStatus};
use crate::config::{constraint_preset, DataFormat, ExperimentConfig};
use crate::error::{Error, ErrorClass, Result};
use crate::localsearch::{multi_start, SolveReport};
use crate::portfolio::{
    is_feasible, read_portfolio_csv, write_portfolio_csv, ConstraintSet, Portfolio,
    DEFAULT_FEASIBILITY_TOL,
};
use crate::risk::{risk, risk_report, var_quantile, RiskKind, RiskReport, RiskSpec};
use crate::sampler::sample_batch;
use crate::scenario::{evaluate, LossDistribution, ScenarioSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "aex", version, about = "Heuristic risk minimization for long/short portfolios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the multi-start search and write solution, report and plot data.
    Optimize(CommonArgs),
    /// Optimize, then tabulate the result against the convex baseline.
    Compare(CommonArgs),
    /// Sweep the return floor and record achieved return and risk.
    Frontier(FrontierArgs),
    /// Write a batch of random feasible portfolios.
    Sample(SampleArgs),
    /// Risk report for a portfolio file.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Active,
    LongOnly,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Price or return table (overrides data.path).
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_parser = ["prices", "returns"])]
    format: Option<String>,
    #[arg(long, value_parser = ["variance", "stddev", "mad", "var", "cvar"])]
    risk: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Return floor.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, value_enum)]
    baseline: Option<Toggle>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the constraint set with a preset.
    #[arg(long, value_enum)]
    constraints: Option<Preset>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct FrontierArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated return floors (overrides frontier.mu_grid).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    mu_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
struct SampleArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
struct ReportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// `asset,weight` file as written by optimize.
    #[arg(long)]
    portfolio: PathBuf,
    /// Comma-separated confidence levels (overrides report.alphas).
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Optimize(a) => resolve(&a).and_then(|(cfg, scen)| {
            let out = optimize(&cfg, &scen, "optimize")?;
            write_artifacts(&cfg, &scen, &out)?;
            print_summary(&cfg, &out);
            Ok(())
        }),
        Command::Compare(a) => resolve(&a).and_then(|(cfg, scen)| {
            let table = compare(&cfg, &scen)?;
            write_artifacts(&cfg, &scen, &table.run)?;
            write_compare_csv(&cfg.report.out.join("compare.csv"), &table)?;
            print!("{}", table.render(color_enabled()));
            Ok(())
        }),
        Command::Frontier(a) => resolve(&a.common).and_then(|(mut cfg, scen)| {
            if let Some(g) = a.mu_grid {
                cfg.mu_grid = g;
            }
            let rows = frontier(&cfg, &scen)?;
            let path = cfg.report.out.join("frontier.csv");
            write_frontier_csv(&path, &rows)?;
            let feasible = rows.iter().filter(|r| r.feasible).count();
            println!("{} of {} return floors feasible; wrote {}", feasible, rows.len(), path.display());
            Ok(())
        }),
        Command::Sample(a) => resolve(&a.common).and_then(|(cfg, scen)| {
            let path = cfg.report.out.join("samples.csv");
            let n = write_samples(&cfg, &scen, &path)?;
            println!("wrote {n} samples to {}", path.display());
            Ok(())
        }),
        Command::Report(a) => resolve_with(&a.common, false).and_then(|(mut cfg, scen)| {
            if let Some(al) = a.alphas {
                cfg.report.alphas = al;
                cfg.validate()?;
            }
            let (rep, x) = report_portfolio(&cfg, &scen, &a.portfolio)?;
            print!("{}", render_risk_report(&rep));
            if a.common.out.is_some() {
                let path = cfg.report.out.join("risk_report.json");
                create_out_dir(&cfg.report.out)?;
                write_json(&path, &serde_json::json!({
                    "portfolio": a.portfolio,
                    "weights": x.weights(),
                    "risk_report": rep,
                }))?;
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Config => 1,
        ErrorClass::Data => 2,
        ErrorClass::Solver => 3,
    }
}

/// Plain output when `NO_COLOR` is set or stdout is not a terminal.
pub fn color_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stdout().is_terminal()
}

/// Applies command-line overrides on top of the config file (or defaults),
/// fixes the seed, validates and loads the data.
fn resolve(a: &CommonArgs) -> Result<(ExperimentConfig, ScenarioSet)> {
    resolve_with(a, true)
}

fn resolve_with(a: &CommonArgs, randomized: bool) -> Result<(ExperimentConfig, ScenarioSet)> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, a)?;
    if randomized && cfg.seed.is_none() {
        let seed: u64 = rand::random();
        eprintln!("seed: {seed} (drawn; pass --seed {seed} to repeat this run)");
        cfg.seed = Some(seed);
    }
    cfg.validate()?;
    let scen = cfg.data.load()?;
    cfg.validate_for(scen.n_assets())?;
    Ok((cfg, scen))
}

pub fn apply_overrides(cfg: &mut ExperimentConfig, a: &CommonArgs) -> Result<()> {
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    if let Some(d) = &a.data {
        cfg.data.path = Some(d.clone());
    }
    if let Some(f) = &a.format {
        cfg.data.format = if f == "returns" { DataFormat::Returns } else { DataFormat::Prices };
    }
    if let Some(p) = a.constraints {
        let mu = cfg.constraints.mu;
        cfg.constraints = constraint_preset(match p {
            Preset::Active => "active",
            Preset::LongOnly => "long-only",
        })?
        .with_mu(mu);
    }
    if a.risk.is_some() || a.alpha.is_some() {
        let kind = match &a.risk {
            Some(k) => k.parse::<RiskKind>()?,
            None => cfg.risk.kind,
        };
        if a.alpha.is_some() && !kind.uses_alpha() {
            return Err(Error::Config(format!(
                "--alpha applies to var and cvar, not {}",
                kind.name()
            )));
        }
        let alpha = a.alpha.or(if kind == cfg.risk.kind { cfg.risk.alpha } else { None });
        let spec = RiskSpec::with_default_alpha(kind, alpha)
            .map_err(|e| Error::Config(format!("risk: {e}")))?;
        cfg.set_risk(spec);
    }
    if a.mu.is_some() {
        cfg.constraints.mu = a.mu;
    }
    if let Some(b) = a.baseline {
        cfg.report.baseline = b == Toggle::On;
    }
    if let Some(o) = &a.out {
        cfg.report.out = o.clone();
    }
    if let Some(n) = a.n1 {
        cfg.n1 = n;
    }
    if let Some(n) = a.n2 {
        cfg.search.n2 = n;
    }
    Ok(())
}

/// Which convex solver, if any, covers a risk measure under a constraint set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    MarkowitzQp,
    CvarLp,
}

pub fn baseline_for(spec: &RiskSpec, c: &ConstraintSet, n_assets: usize) -> std::result::Result<BaselineKind, String> {
    match spec.kind {
        RiskKind::Cvar => Ok(BaselineKind::CvarLp),
        RiskKind::Var => Err("no convex baseline for VaR".into()),
        RiskKind::Mad => Err("no convex baseline for MAD".into()),
        RiskKind::Variance | RiskKind::StdDev => {
            let plain_long_only = c.short_sum == 0.0
                && c.long_sum == 1.0
                && (0..n_assets).all(|j| c.lower(j) == 0.0 && c.upper(j) >= 1.0);
            if plain_long_only {
                Ok(BaselineKind::MarkowitzQp)
            } else {
                Err(format!(
                    "no convex baseline for {} under these constraints; the quadratic \
                     baseline covers long-only, fully invested, uncapped portfolios",
                    spec.kind.name()
                ))
            }
        }
    }
}

/// Runs the baseline; the objective is reported in the units of `spec`.
pub fn run_baseline(
    kind: BaselineKind,
    spec: &RiskSpec,
    scen: &ScenarioSet,
    c: &ConstraintSet,
) -> Result<BaselineSolution> {
    match kind {
        BaselineKind::CvarLp => solve_cvar_lp(scen, c, spec.alpha.expect("cvar has alpha"), c.mu),
        BaselineKind::MarkowitzQp => {
            let mut sol = solve_markowitz_long_only(scen, c.mu)?;
            if spec.kind == RiskKind::StdDev && sol.status != BaselineStatus::Infeasible {
                sol.objective = sol.objective.max(0.0).sqrt();
            }
            Ok(sol)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StartSummary {
    pub start_objective: f64,
    pub final_objective: f64,
    pub iters_per_stage: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineSummary {
    pub solver: BaselineKind,
    pub status: BaselineStatus,
    pub objective: f64,
    pub iterations: usize,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complementary: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// The structured `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub wall_time_secs: f64,
    pub n_assets: usize,
    pub n_scenarios: usize,
    pub risk: String,
    pub objective: f64,
    pub iters_per_stage: Vec<usize>,
    pub evaluations: usize,
    pub averaged_restart_used: bool,
    pub averaged_restart_selected: bool,
    pub starts: Vec<StartSummary>,
    pub baseline: Option<BaselineSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_skipped: Option<String>,
    pub relative_gap: Option<f64>,
    pub feasible: bool,
    pub risk_report: RiskReport,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub solve: SolveReport,
    pub baseline: Option<BaselineSolution>,
    pub report: RunReport,
}

/// `(heuristic - baseline) / |baseline|`, zero when both are equal.
pub fn relative_gap(heuristic: f64, baseline: f64) -> f64 {
    if heuristic == baseline {
        0.0
    } else {
        (heuristic - baseline) / baseline.abs()
    }
}

/// Runs the multi-start search and, when enabled and available, the
/// baseline.
pub fn optimize(cfg: &ExperimentConfig, scen: &ScenarioSet, command: &str) -> Result<RunOutcome> {
    let seed = cfg
        .seed
        .ok_or_else(|| Error::Config("seed must be fixed before running".into()))?;
    let started = Instant::now();
    let c = &cfg.constraints;
    let solve = multi_start(scen, c, &cfg.sampler_config(seed), &cfg.search)?;
    if !solve.objective_value.is_finite() {
        return Err(Error::NoFeasiblePortfolio(format!(
            "every candidate violates mu = {}",
            c.mu.unwrap_or(f64::NAN)
        )));
    }

    let (mut baseline, mut baseline_skipped) = (None, None);
    let mut summary = None;
    if cfg.report.baseline {
        match baseline_for(&cfg.risk, c, scen.n_assets()) {
            Ok(kind) => {
                let sol = run_baseline(kind, &cfg.risk, scen, c)?;
                summary = Some(BaselineSummary {
                    solver: kind,
                    status: sol.status,
                    objective: sol.objective,
                    iterations: sol.stats.iterations,
                    residual: sol.stats.residual,
                    complementary: sol.stats.complementary,
                    note: sol.stats.note.clone(),
                });
                baseline = Some(sol);
            }
            Err(why) => baseline_skipped = Some(why),
        }
    }
    let relative = baseline
        .as_ref()
        .filter(|b| b.status == BaselineStatus::Optimal)
        .map(|b| relative_gap(solve.objective_value, b.objective));

    let loss = evaluate(&solve.best, scen)?;
    let feasible = is_feasible(&solve.best, c, Some(scen), DEFAULT_FEASIBILITY_TOL)?.is_feasible();
    let report = RunReport {
        version: VERSION,
        command: command.into(),
        seed,
        config_hash: cfg.hash(),
        wall_time_secs: started.elapsed().as_secs_f64(),
        n_assets: scen.n_assets(),
        n_scenarios: scen.n_scenarios(),
        risk: cfg.risk.to_string(),
        objective: solve.objective_value,
        iters_per_stage: solve.iters_per_stage.clone(),
        evaluations: solve.total_evaluations,
        averaged_restart_used: solve.averaged_restart_used,
        averaged_restart_selected: solve.averaged_restart_selected,
        starts: solve
            .starts
            .iter()
            .map(|s| StartSummary {
                start_objective: s.start_objective,
                final_objective: s.final_objective,
                iters_per_stage: s.iters_per_stage.clone(),
            })
            .collect(),
        baseline: summary,
        baseline_skipped,
        relative_gap: relative,
        feasible,
        risk_report: risk_report(&loss, &cfg.report.alphas)?,
    };
    Ok(RunOutcome {
        solve,
        baseline,
        report,
    })
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)
        .map_err(|e| io_error(path, std::io::Error::other(e)))?;
    writeln!(f).and_then(|_| f.flush()).map_err(|e| io_error(path, e))
}

/// Writes `solution.csv`, `report.json` and `plotdata.csv`.
pub fn write_artifacts(cfg: &ExperimentConfig, scen: &ScenarioSet, run: &RunOutcome) -> Result<()> {
    let dir = &cfg.report.out;
    create_out_dir(dir)?;
    let sol = dir.join("solution.csv");
    let mut f = create(&sol)?;
    write_portfolio_csv(&mut f, scen.assets(), &run.solve.best)?;
    f.flush().map_err(|e| io_error(&sol, e))?;
    write_json(&dir.join("report.json"), &run.report)?;

    let plot = dir.join("plotdata.csv");
    let mut f = create(&plot)?;
    let mut lines = vec!["asset,heuristic,baseline".to_string()];
    for (j, a) in scen.assets().iter().enumerate() {
        let h = run.solve.best.weights()[j];
        let b = match &run.baseline {
            Some(b) if b.status != BaselineStatus::Infeasible => b.portfolio.weights()[j].to_string(),
            _ => String::new(),
        };
        lines.push(format!("{a},{h},{b}"));
    }
    writeln!(f, "{}", lines.join("\n"))
        .and_then(|_| f.flush())
        .map_err(|e| io_error(&plot, e))
}

fn print_summary(cfg: &ExperimentConfig, run: &RunOutcome) {
    let r = &run.report;
    println!("{} objective {:.6e} (seed {}, {:.2}s)", r.risk, r.objective, r.seed, r.wall_time_secs);
    println!("iterations per stage {:?}, {} evaluations", r.iters_per_stage, r.evaluations);
    if let (Some(b), Some(gap)) = (&r.baseline, r.relative_gap) {
        println!("baseline objective {:.6e}, relative gap {:.4}%", b.objective, 100.0 * gap);
    } else if let Some(b) = &r.baseline {
        println!("baseline status {:?}", b.status);
    }
    if let Some(why) = &r.baseline_skipped {
        println!("baseline skipped: {why}");
    }
    println!("wrote {}", cfg.report.out.display());
}

/// Weights below this magnitude count as zero in the comparison table.
pub const TABLE_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub asset: String,
    pub std_dev: f64,
    pub var_quantile: f64,
    pub baseline: f64,
    pub heuristic: f64,
}

#[derive(Debug, Clone)]
pub struct CompareTable {
    pub alpha: f64,
    pub rows: Vec<CompareRow>,
    pub risk: String,
    pub baseline_objective: f64,
    pub heuristic_objective: f64,
    pub relative_gap: f64,
    pub run: RunOutcome,
}

impl CompareTable {
    pub fn render(&self, color: bool) -> String {
        let var_head = format!("VaR({}%)", fmt_pct(self.alpha));
        let w = self.rows.iter().map(|r| r.asset.len()).max().unwrap_or(5).max(5);
        let mut s = format!(
            "{:<w$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
            "", "Std.Dev.", var_head, "Baseline", "Heuristic"
        );
        for r in &self.rows {
            s += &format!(
                "{:<w$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}\n",
                r.asset, r.std_dev, r.var_quantile, r.baseline, r.heuristic
            );
        }
        let summary = format!(
            "{}: baseline {:.6e}, heuristic {:.6e}, relative gap {:.4}%",
            self.risk,
            self.baseline_objective,
            self.heuristic_objective,
            100.0 * self.relative_gap
        );
        if color {
            s += &format!("\x1b[1m{summary}\x1b[0m\n");
        } else {
            s += &summary;
            s.push('\n');
        }
        s
    }
}

fn fmt_pct(alpha: f64) -> String {
    // 0.975 * 100 is 97.49999999999999
    let p = (alpha * 100.0 * 1e6).round() / 1e6;
    format!("{p}")
}

/// Optimizes and lines the result up against the baseline, keeping only
/// assets held by either portfolio.
pub fn compare(cfg: &ExperimentConfig, scen: &ScenarioSet) -> Result<CompareTable> {
    let kind = baseline_for(&cfg.risk, &cfg.constraints, scen.n_assets()).map_err(Error::Config)?;
    let mut cfg = cfg.clone();
    cfg.report.baseline = true;
    let run = optimize(&cfg, scen, "compare")?;
    let base = run.baseline.clone().expect("baseline enabled and available");
    match base.status {
        BaselineStatus::Optimal => {}
        BaselineStatus::Infeasible => {
            return Err(Error::BaselineFailed(format!(
                "{kind:?} baseline is infeasible: {}",
                base.stats.note.clone().unwrap_or_default()
            )))
        }
        BaselineStatus::IterationLimit => {
            return Err(Error::BaselineFailed(format!("{kind:?} baseline hit its iteration limit")))
        }
    }
    let alpha = cfg.risk.alpha.unwrap_or(crate::risk::DEFAULT_ALPHA);
    let sd_spec = RiskSpec::std_dev();
    let mut rows = Vec::new();
    for (j, asset) in scen.assets().iter().enumerate() {
        let (b, h) = (base.portfolio.weights()[j], run.solve.best.weights()[j]);
        if b.abs() <= TABLE_ZERO_TOL && h.abs() <= TABLE_ZERO_TOL {
            continue;
        }
        let col = LossDistribution::new(scen.column(j));
        rows.push(CompareRow {
            asset: asset.clone(),
            std_dev: risk(&col, &sd_spec)?,
            var_quantile: var_quantile(&col, alpha)?,
            baseline: b,
            heuristic: h,
        });
    }
    Ok(CompareTable {
        alpha,
        rows,
        risk: cfg.risk.to_string(),
        baseline_objective: base.objective,
        heuristic_objective: run.solve.objective_value,
        relative_gap: relative_gap(run.solve.objective_value, base.objective),
        run,
    })
}

fn write_compare_csv(path: &Path, t: &CompareTable) -> Result<()> {
    let mut f = create(path)?;
    let mut text = "asset,std_dev,var_quantile,baseline,heuristic\n".to_string();
    for r in &t.rows {
        text += &format!("{},{},{},{},{}\n", r.asset, r.std_dev, r.var_quantile, r.baseline, r.heuristic);
    }
    f.write_all(text.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| io_error(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierRow {
    pub mu: f64,
    pub achieved_return: Option<f64>,
    pub achieved_risk: Option<f64>,
    pub feasible: bool,
    pub solver: &'static str,
}

/// One solve per return floor. Uses the baseline when enabled and available,
/// the heuristic otherwise; infeasible floors are kept and flagged.
pub fn frontier(cfg: &ExperimentConfig, scen: &ScenarioSet) -> Result<Vec<FrontierRow>> {
    let mut distinct = cfg.mu_grid.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Config("frontier.mu_grid: grid needs ≥ 2 distinct values".into()));
    }
    if let Some(bad) = cfg.mu_grid.iter().find(|m| !m.is_finite()) {
        return Err(Error::Config(format!("frontier.mu_grid: {bad} is not finite")));
    }
    let seed = cfg
        .seed
        .ok_or_else(|| Error::Config("seed must be fixed before running".into()))?;
    let kind = if cfg.report.baseline {
        baseline_for(&cfg.risk, &cfg.constraints, scen.n_assets()).ok()
    } else {
        None
    };
    let mut rows = Vec::with_capacity(cfg.mu_grid.len());
    for &mu in &cfg.mu_grid {
        let c = cfg.constraints.clone().with_mu(Some(mu));
        let (x, solver) = match kind {
            Some(k) => {
                let sol = run_baseline(k, &cfg.risk, scen, &c)?;
                let x = (sol.status == BaselineStatus::Optimal).then_some(sol.portfolio);
                (x, if k == BaselineKind::CvarLp { "cvar_lp" } else { "markowitz_qp" })
            }
            None => {
                let rep = multi_start(scen, &c, &cfg.sampler_config(seed), &cfg.search)?;
                (rep.objective_value.is_finite().then_some(rep.best), "heuristic")
            }
        };
        let row = match x {
            Some(x) => {
                let loss = evaluate(&x, scen)?;
                let ret = crate::risk::expected_return(&loss);
                let r = risk(&loss, &cfg.risk)?;
                FrontierRow {
                    mu,
                    achieved_return: Some(ret),
                    achieved_risk: Some(r),
                    feasible: ret >= mu - 1e-9,
                    solver,
                }
            }
            None => FrontierRow {
                mu,
                achieved_return: None,
                achieved_risk: None,
                feasible: false,
                solver,
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

fn write_frontier_csv(path: &Path, rows: &[FrontierRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        create_out_dir(dir)?;
    }
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut text = "mu,achieved_return,achieved_risk,feasible,solver\n".to_string();
    for r in rows {
        text += &format!(
            "{},{},{},{},{}\n",
            r.mu,
            opt(r.achieved_return),
            opt(r.achieved_risk),
            r.feasible,
            r.solver
        );
    }
    let mut f = create(path)?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| io_error(path, e))
}

/// Writes the sampled batch, best first, as `rank,index,objective,<assets>`.
fn write_samples(cfg: &ExperimentConfig, scen: &ScenarioSet, path: &Path) -> Result<usize> {
    let seed = cfg.seed.expect("seed resolved");
    let obj = crate::localsearch::Objective::new(scen, cfg.risk, &cfg.constraints, cfg.search.mu_mode);
    let batch = sample_batch(&cfg.sampler_config(seed), &obj, cfg.search.parallel)?;
    create_out_dir(&cfg.report.out)?;
    let mut f = create(path)?;
    let mut text = format!("rank,index,objective,{}\n", scen.assets().join(","));
    for (rank, s) in batch.iter().enumerate() {
        let w: Vec<String> = s.portfolio.weights().iter().map(f64::to_string).collect();
        text += &format!("{rank},{},{},{}\n", s.index, s.objective, w.join(","));
    }
    f.write_all(text.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| io_error(path, e))?;
    Ok(batch.len())
}

/// Risk report of a portfolio file; its assets must match the data.
pub fn report_portfolio(
    cfg: &ExperimentConfig,
    scen: &ScenarioSet,
    path: &Path,
) -> Result<(RiskReport, Portfolio)> {
    let f = File::open(path).map_err(|e| io_error(path, e))?;
    let (assets, x) = read_portfolio_csv(f)?;
    if assets.len() != scen.n_assets() {
        return Err(Error::PortfolioFile {
            row: 1,
            reason: format!(
                "portfolio lists {} assets, the data has {}",
                assets.len(),
                scen.n_assets()
            ),
        });
    }
    if let Some(j) = (0..assets.len()).find(|&j| assets[j] != scen.assets()[j]) {
        return Err(Error::PortfolioFile {
            row: j + 2,
            reason: format!("asset {:?} where the data has {:?}", assets[j], scen.assets()[j]),
        });
    }
    let loss = evaluate(&x, scen)?;
    Ok((risk_report(&loss, &cfg.report.alphas)?, x))
}

pub fn render_risk_report(r: &RiskReport) -> String {
    let mut s = format!(
        "mean {:.6}\nstd dev {:.6}\nMAD {:.6}\n{:>6}  {:>10}  {:>10}  {:>10}\n",
        r.mean, r.std_dev, r.mad, "alpha", "quantile", "VaR", "CVaR"
    );
    for t in &r.tails {
        s += &format!(
            "{:>6}  {:>10.6}  {:>10.6}  {:>10.6}\n",
            t.alpha, t.var_quantile, t.var_risk, t.cvar_risk
        );
    }
    s
}

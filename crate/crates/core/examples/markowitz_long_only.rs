//! Minimum-variance long-only portfolio: local search against the exact QP.
//!
//! `cargo run --release --example markowitz_long_only [prices.csv]`

use aex::baselines::solve_markowitz_long_only;
use aex::localsearch::{multi_start, SearchConfig};
use aex::sampler::SamplerConfig;
use aex::scenario::{load_prices, to_returns, TableFormat};
use aex::{ConstraintSet, RiskSpec};

fn main() -> aex::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/djia30_synthetic_weekly.csv").into());
    let scen = to_returns(&load_prices(&path, &TableFormat::default())?)?;
    let c = ConstraintSet::long_only();

    let mut search = SearchConfig::new(RiskSpec::variance());
    search.n2 = 2;
    let report = multi_start(&scen, &c, &SamplerConfig::new(c.clone(), 10_000, 1), &search)?;
    let qp = solve_markowitz_long_only(&scen, None)?;

    for (k, s) in report.starts.iter().enumerate() {
        println!("start {k}: iterations per stage {:?}", s.iters_per_stage);
    }
    println!("{:<8} {:>10} {:>10}", "asset", "heuristic", "qp");
    for (j, name) in scen.assets().iter().enumerate() {
        let (h, q) = (report.best.weights()[j], qp.portfolio.weights()[j]);
        if h.abs() > 1e-6 || q.abs() > 1e-6 {
            println!("{name:<8} {h:>10.4} {q:>10.4}");
        }
    }
    println!(
        "std dev: heuristic {:.6}, qp {:.6}",
        report.objective_value.sqrt(),
        qp.objective.sqrt()
    );
    Ok(())
}

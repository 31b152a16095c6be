//! Minimizing VaR directly. There is no convex baseline, so the result is
//! checked against the CVaR-optimal portfolio and a fresh batch of samples.
//!
//! `cargo run --release --example var_minimization [prices.csv]`

use aex::baselines::solve_cvar_lp;
use aex::localsearch::{multi_start, SearchConfig};
use aex::sampler::{sample_portfolio, sample_stream, SamplerConfig};
use aex::scenario::{load_prices, to_returns, TableFormat};
use aex::{evaluate, risk, ConstraintSet, RiskSpec};

fn main() -> aex::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/djia30_synthetic_weekly.csv").into());
    let scen = to_returns(&load_prices(&path, &TableFormat::default())?)?;
    let c = ConstraintSet::default();
    let var = RiskSpec::var(0.95)?;
    let cvar = RiskSpec::cvar(0.95)?;

    let report = multi_start(&scen, &c, &SamplerConfig::new(c.clone(), 10_000, 3), &SearchConfig::new(var))?;
    let lp = solve_cvar_lp(&scen, &c, 0.95, None)?;

    let at = |x: &aex::Portfolio, spec: &RiskSpec| risk(&evaluate(x, &scen)?, spec);
    println!("{:<22} {:>9} {:>9}", "", "VaR 95%", "CVaR 95%");
    println!("{:<22} {:>9.5} {:>9.5}", "VaR-optimal (search)", at(&report.best, &var)?, at(&report.best, &cvar)?);
    println!("{:<22} {:>9.5} {:>9.5}", "CVaR-optimal (LP)", at(&lp.portfolio, &var)?, at(&lp.portfolio, &cvar)?);

    let probe = SamplerConfig::new(c.clone(), 1000, 99);
    let mut best = f64::INFINITY;
    for i in 0..probe.n1 as u64 {
        let x = sample_portfolio(&probe, scen.n_assets(), &mut sample_stream(probe.seed, i))?;
        best = best.min(at(&x, &var)?);
    }
    println!("best VaR among 1000 fresh samples: {best:.5}");
    Ok(())
}

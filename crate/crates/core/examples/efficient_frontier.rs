//! Long-only mean-CVaR frontier from the LP, with the heuristic at every
//! third point. High floors are rarely met by random starts, so the search
//! runs with a quadratic shortfall penalty instead of rejecting them.
//!
//! `cargo run --release --example efficient_frontier [prices.csv]`

use aex::baselines::solve_cvar_lp;
use aex::localsearch::{multi_start, MuMode, SearchConfig};
use aex::sampler::SamplerConfig;
use aex::scenario::{load_prices, to_returns, TableFormat};
use aex::{evaluate, risk, ConstraintSet, RiskSpec};

fn main() -> aex::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/dax30_synthetic_weekly.csv").into());
    let scen = to_returns(&load_prices(&path, &TableFormat::default())?)?;
    let means = scen.asset_means();
    let top = means.iter().copied().fold(f64::MIN, f64::max);
    let cvar = RiskSpec::cvar(0.95)?;
    let mut search = SearchConfig::new(cvar);
    search.mu_mode = MuMode::Penalty { weight: 1e4 };

    println!("{:>9} {:>10} {:>12} {:>12}", "mu", "cvar lp", "cvar search", "return");
    for k in 0..=12 {
        let mu = top * k as f64 / 12.0;
        let c = ConstraintSet::long_only().with_mu(Some(mu));
        let lp = solve_cvar_lp(&scen, &c, 0.95, Some(mu))?;
        let mut line = if lp.is_optimal() {
            format!("{mu:>9.5} {:>10.5}", lp.objective)
        } else {
            format!("{mu:>9.5} {:>10}", "infeasible")
        };
        if k % 3 == 0 {
            let rep = multi_start(&scen, &c, &SamplerConfig::new(c.clone(), 5000, 7), &search)?;
            let ret: f64 = rep.best.weights().iter().zip(&means).map(|(w, m)| w * m).sum();
            let r = risk(&evaluate(&rep.best, &scen)?, &cvar)?;
            line += &format!(" {r:>12.5} {ret:>12.5}");
        }
        println!("{line}");
    }
    Ok(())
}

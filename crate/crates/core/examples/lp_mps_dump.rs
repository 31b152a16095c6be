//! Build the CVaR linear program, solve it with the bundled simplex and write
//! it in MPS format for an external solver.
//!
//! `cargo run --release --example lp_mps_dump [prices.csv] > cvar.mps`

use aex::baselines::{build_cvar_lp, write_mps};
use aex::scenario::{load_prices, to_returns, TableFormat};
use aex::ConstraintSet;

fn main() -> aex::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/djia30_synthetic_weekly.csv").into());
    let scen = to_returns(&load_prices(&path, &TableFormat::default())?)?;
    let lp = build_cvar_lp(&scen, &ConstraintSet::default(), 0.95, None)?;
    eprintln!(
        "{} columns, {} rows, {} tail scenarios",
        lp.model.var_names.len(),
        lp.model.constraints.len(),
        lp.tail_scenarios
    );
    write_mps(std::io::stdout().lock(), &lp.model, "CVAR95")?;
    Ok(())
}

//! Risk report for the equal-weight portfolio of a price file.
//!
//! `cargo run --release --example risk_report [prices.csv]`

use aex::risk::risk_report;
use aex::scenario::{load_prices, to_returns, TableFormat};
use aex::{evaluate, Portfolio};

fn main() -> aex::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/djia30_synthetic_weekly.csv").into());
    let scen = to_returns(&load_prices(&path, &TableFormat::default())?)?;
    let n = scen.n_assets();
    let x = Portfolio::new(vec![1.0 / n as f64; n]);
    let report = risk_report(&evaluate(&x, &scen)?, &[0.9, 0.95, 0.99])?;
    print!("{}", aex::cli::render_risk_report(&report));
    Ok(())
}

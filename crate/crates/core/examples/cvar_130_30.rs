//! CVaR-minimal 130/30 portfolio, heuristic next to the LP optimum, printed
//! as the comparison table the `compare` command writes.
//!
//! `cargo run --release --example cvar_130_30 [prices.csv]`

use std::path::Path;

use aex::cli::compare;
use aex::config::ExperimentConfig;

fn main() -> aex::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/dax30_synthetic_weekly.csv").into());
    let toml = format!(
        r#"
seed = 42
[data]
path = {path:?}
[risk]
kind = "cvar"
alpha = 0.95
[constraints]
preset = "130/30"
[sampler]
n1 = 10000
[search]
n2 = 10
epsilons = [0.05, 0.02, 0.01]
"#
    );
    let cfg = ExperimentConfig::from_toml(&toml, Path::new("."))?;
    let scen = cfg.data.load()?;
    let table = compare(&cfg, &scen)?;
    print!("{}", table.render(false));
    Ok(())
}

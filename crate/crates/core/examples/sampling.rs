//! The sparse random starts: support sizes, side sums and a few draws.
//!
//! `cargo run --release --example sampling`

use aex::portfolio::is_feasible;
use aex::sampler::{sample_portfolio, sample_stream, support_sizes, SamplerConfig};
use aex::ConstraintSet;

fn main() -> aex::Result<()> {
    let n = 30;
    let c = ConstraintSet::default();
    let (longs, shorts) = support_sizes(&c, n);
    println!("{n} assets: {longs} long and {shorts} short positions per draw");

    let cfg = SamplerConfig::new(c.clone(), 100_000, 2024);
    let mut long_hits = vec![0usize; n];
    for i in 0..cfg.n1 as u64 {
        // stream i depends only on (seed, i), so draws can be regenerated individually
        let x = sample_portfolio(&cfg, n, &mut sample_stream(cfg.seed, i))?;
        assert!(is_feasible(&x, &c, None, 1e-8)?.is_feasible());
        for (j, w) in x.weights().iter().enumerate() {
            if *w > 0.0 {
                long_hits[j] += 1;
            }
        }
        if i < 3 {
            let nz: Vec<String> = x
                .weights()
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(j, w)| format!("{j}:{w:+.3}"))
                .collect();
            println!("draw {i}: long {:.3} short {:.3} [{}]", x.long_sum(), x.short_sum(), nz.join(" "));
        }
    }
    let freq: Vec<f64> = long_hits.iter().map(|h| *h as f64 / cfg.n1 as f64).collect();
    let (lo, hi) = freq.iter().fold((1.0f64, 0.0f64), |(a, b), f| (a.min(*f), b.max(*f)));
    println!("per-asset long frequency over {} draws: {lo:.4} .. {hi:.4}", cfg.n1);
    Ok(())
}

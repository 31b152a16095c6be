//! Fixtures and independent reference computations shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use aex::scenario::{load_prices, to_returns, TableFormat};
use aex::ScenarioSet;

pub const DJIA: &str = "djia30_synthetic_weekly.csv";
pub const DAX: &str = "dax30_synthetic_weekly.csv";
pub const FIXTURES: [&str; 2] = [DJIA, DAX];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn fixture(name: &str) -> ScenarioSet {
    let prices = load_prices(data_path(name), &TableFormat::default()).unwrap();
    to_returns(&prices).unwrap()
}

/// Lower-tail size for `s` equally likely scenarios at level `alpha`.
pub fn tail_size(s: usize, alpha: f64) -> usize {
    // smallest m with m >= (1 - alpha) s, counted without ceil()
    let target = (1.0 - alpha) * s as f64;
    let mut m = 1;
    while (m as f64) < target - 1e-9 && m < s {
        m += 1;
    }
    m
}

/// VaR as a counting statement: the smallest return `r_i` such that at least
/// `m` returns are `<= r_i`. Returned negated (a loss).
pub fn var_oracle(returns: &[f64], alpha: f64) -> f64 {
    let m = tail_size(returns.len(), alpha);
    let q = returns
        .iter()
        .copied()
        .filter(|&r| returns.iter().filter(|&&v| v <= r).count() >= m)
        .fold(f64::INFINITY, f64::min);
    -q
}

/// CVaR via the minimization `min_z z + (1/m) Σ (L_i - z)^+` over losses
/// `L = -r`; the minimum is attained at one of the losses.
pub fn cvar_oracle(returns: &[f64], alpha: f64) -> f64 {
    let m = tail_size(returns.len(), alpha) as f64;
    returns
        .iter()
        .map(|&r| {
            let z = -r;
            z + returns.iter().map(|&v| (-v - z).max(0.0)).sum::<f64>() / m
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn variance_oracle(v: &[f64]) -> f64 {
    // two-pass with pairwise differences: Σ_{i<j} (v_i - v_j)^2 / (n (n - 1))
    let n = v.len() as f64;
    let mut acc = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            acc += (v[i] - v[j]).powi(2);
        }
    }
    acc / (n * (n - 1.0))
}

/// First `count` 3-element column subsets in lexicographic order.
pub fn triples(n: usize, count: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if out.len() == count {
                    return out;
                }
                out.push([a, b, c]);
            }
        }
    }
    out
}

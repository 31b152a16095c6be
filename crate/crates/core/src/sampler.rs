//! Sparse random starting portfolios.
//!
//! Each sample picks disjoint random long and short supports of fixed size,
//! spreads the side budgets over them with uniform random proportions, and
//! normalizes to the bounds. Sample `i` of a batch draws from its own ChaCha8
//! stream (`seed`, stream `i`), so a batch is the same whether it is built
//! serially or in parallel.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localsearch::Objective;
use crate::portfolio::{normalize, ConstraintSet, Portfolio};

pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub constraints: ConstraintSet,
    pub n1: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(constraints: ConstraintSet, n1: usize, seed: u64) -> Self {
        SamplerConfig {
            constraints,
            n1,
            seed,
        }
    }

    pub fn validate(&self, n_assets: usize) -> Result<()> {
        if self.n1 == 0 {
            return Err(Error::InvalidSampler("n1 must be at least 1".into()));
        }
        self.constraints.validate(n_assets)?;
        let (n_long, n_short) = support_sizes(&self.constraints, n_assets);
        if n_long == 0 {
            return Err(Error::InvalidSampler(format!(
                "long_frac {} selects no long assets out of {n_assets}",
                self.constraints.long_frac
            )));
        }
        if n_long + n_short > n_assets {
            return Err(Error::InvalidSampler(format!(
                "{n_long} long + {n_short} short slots exceed {n_assets} assets"
            )));
        }
        Ok(())
    }
}

fn round_half_away(v: f64) -> usize {
    // f64::round already rounds half away from zero; the epsilon absorbs
    // products like 0.3 * 5 = 1.4999999999999998.
    (v + 1e-9).round().max(0.0) as usize
}

/// Long and short support sizes for `n_assets` assets.
pub fn support_sizes(c: &ConstraintSet, n_assets: usize) -> (usize, usize) {
    let size = |frac: f64, budget_active: bool| {
        let k = round_half_away(frac * n_assets as f64);
        if budget_active {
            k.max(1)
        } else {
            k
        }
    };
    let n_long = size(c.long_frac, c.long_sum != 0.0);
    let n_short = if c.short_sum == 0.0 {
        0
    } else {
        size(c.short_frac, true)
    };
    (n_long, n_short)
}

/// The RNG stream for sample `index` of a batch seeded with `seed`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws one feasible portfolio, redrawing up to [`MAX_REDRAWS`] times when
/// the drawn support cannot carry the budgets.
pub fn sample_portfolio<R: Rng + ?Sized>(
    cfg: &SamplerConfig,
    n_assets: usize,
    rng: &mut R,
) -> Result<Portfolio> {
    let c = &cfg.constraints;
    let (n_long, n_short) = support_sizes(c, n_assets);
    if n_long == 0 || n_long + n_short > n_assets {
        return Err(Error::InvalidSampler(format!(
            "cannot place {n_long} long and {n_short} short assets among {n_assets}"
        )));
    }
    for _ in 0..=MAX_REDRAWS {
        let picks = index::sample(rng, n_assets, n_long + n_short).into_vec();
        let mut w = vec![0.0; n_assets];
        scatter(&mut w, &picks[..n_long], c.long_sum, rng);
        scatter(&mut w, &picks[n_long..], c.short_sum, rng);
        match normalize(&Portfolio::new(w), c) {
            Ok(x) => return Ok(x),
            Err(Error::EmptySide { .. } | Error::NonConvergent { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::UnsatisfiableSupport {
        retries: MAX_REDRAWS,
    })
}

fn scatter<R: Rng + ?Sized>(w: &mut [f64], support: &[usize], budget: f64, rng: &mut R) {
    if support.is_empty() {
        return;
    }
    // (0, 1]: a zero draw would silently shrink the support
    let u: Vec<f64> = support.iter().map(|_| 1.0 - rng.random::<f64>()).collect();
    let total: f64 = u.iter().sum();
    for (&j, uj) in support.iter().zip(&u) {
        w[j] = uj * budget / total;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPortfolio {
    /// Position in generation order.
    pub index: usize,
    pub portfolio: Portfolio,
    pub objective: f64,
}

/// Draws `n1` samples and returns them sorted by objective, ties in
/// generation order.
pub fn sample_batch(
    cfg: &SamplerConfig,
    objective: &Objective<'_>,
    parallel: bool,
) -> Result<Vec<ScoredPortfolio>> {
    let n_assets = objective.scenarios().n_assets();
    cfg.validate(n_assets)?;
    let draw = |i: usize| -> Result<ScoredPortfolio> {
        let mut rng = sample_stream(cfg.seed, i as u64);
        let portfolio = sample_portfolio(cfg, n_assets, &mut rng)?;
        let value = objective.value(&portfolio);
        Ok(ScoredPortfolio {
            index: i,
            portfolio,
            objective: value,
        })
    };
    let mut batch: Vec<ScoredPortfolio> = if parallel {
        (0..cfg.n1).into_par_iter().map(draw).collect::<Result<_>>()?
    } else {
        (0..cfg.n1).map(draw).collect::<Result<_>>()?
    };
    // stable sort keeps generation order among ties
    batch.sort_by(|a, b| a.objective.total_cmp(&b.objective));
    Ok(batch)
}

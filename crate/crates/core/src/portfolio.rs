//! Portfolios, the active-extension constraint set and side normalization.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};
use crate::risk::expected_return;
use crate::scenario::{evaluate, ScenarioSet};

/// Signed budget fractions, one per asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Portfolio {
    weights: Vec<f64>,
}

impl Portfolio {
    pub fn new(weights: Vec<f64>) -> Self {
        Portfolio { weights }
    }

    pub fn zeros(n: usize) -> Self {
        Portfolio::new(vec![0.0; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn long_sum(&self) -> f64 {
        self.weights.iter().filter(|w| **w > 0.0).sum()
    }

    pub fn short_sum(&self) -> f64 {
        self.weights.iter().filter(|w| **w < 0.0).sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.weights.iter().filter(|w| **w != 0.0).count()
    }

    pub fn max_abs_diff(&self, other: &Portfolio) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for Portfolio {
    fn from(w: Vec<f64>) -> Self {
        Portfolio::new(w)
    }
}

/// A bound shared by every asset or given asset by asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Uniform(f64),
    PerAsset(Vec<f64>),
}

impl Bound {
    pub fn at(&self, j: usize) -> f64 {
        match self {
            Bound::Uniform(v) => *v,
            Bound::PerAsset(v) => v[j],
        }
    }

    fn check_len(&self, n: usize, name: &str) -> Result<()> {
        match self {
            Bound::PerAsset(v) if v.len() != n => Err(Error::InvalidConstraints(format!(
                "{name} has {} entries for {n} assets",
                v.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// The feasible set: per-asset bounds, the long and short budgets, an optional
/// return floor `mu`, and the support fractions the sampler targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintSet {
    pub lower: Bound,
    pub upper: Bound,
    pub long_sum: f64,
    pub short_sum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub long_frac: f64,
    pub short_frac: f64,
}

impl Default for ConstraintSet {
    /// 130/30 with bounds `[-0.1, 0.5]`, 30% of assets long and 10% short.
    fn default() -> Self {
        ConstraintSet {
            lower: Bound::Uniform(-0.1),
            upper: Bound::Uniform(0.5),
            long_sum: 1.30,
            short_sum: -0.30,
            mu: None,
            long_frac: 0.3,
            short_frac: 0.1,
        }
    }
}

impl ConstraintSet {
    /// Fully invested, no shorting, no per-asset cap.
    pub fn long_only() -> Self {
        ConstraintSet {
            lower: Bound::Uniform(0.0),
            upper: Bound::Uniform(1.0),
            long_sum: 1.0,
            short_sum: 0.0,
            mu: None,
            long_frac: 0.3,
            short_frac: 0.0,
        }
    }

    pub fn with_mu(mut self, mu: Option<f64>) -> Self {
        self.mu = mu;
        self
    }

    pub fn lower(&self, j: usize) -> f64 {
        self.lower.at(j)
    }

    pub fn upper(&self, j: usize) -> f64 {
        self.upper.at(j)
    }

    pub fn is_long_only(&self) -> bool {
        self.short_sum == 0.0
    }

    pub fn validate(&self, n_assets: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConstraints(m));
        self.lower.check_len(n_assets, "lower")?;
        self.upper.check_len(n_assets, "upper")?;
        for j in 0..n_assets {
            let (lo, hi) = (self.lower(j), self.upper(j));
            if !(lo.is_finite() && hi.is_finite() && lo <= 0.0 && 0.0 <= hi) {
                return bad(format!("asset {j}: need lower <= 0 <= upper, got [{lo}, {hi}]"));
            }
        }
        if !(self.long_sum.is_finite() && self.long_sum > 0.0) {
            return bad(format!("long_sum must be > 0, got {}", self.long_sum));
        }
        if !(self.short_sum.is_finite() && self.short_sum <= 0.0) {
            return bad(format!("short_sum must be <= 0, got {}", self.short_sum));
        }
        let cap_up: f64 = (0..n_assets).map(|j| self.upper(j)).sum();
        let cap_lo: f64 = (0..n_assets).map(|j| self.lower(j)).sum();
        if cap_up < self.long_sum - 1e-12 {
            return bad(format!(
                "sum of upper bounds {cap_up} is below long_sum {}",
                self.long_sum
            ));
        }
        if cap_lo > self.short_sum + 1e-12 {
            return bad(format!(
                "sum of lower bounds {cap_lo} is above short_sum {}",
                self.short_sum
            ));
        }
        let fracs_ok = self.long_frac >= 0.0
            && self.short_frac >= 0.0
            && self.long_frac + self.short_frac <= 1.0 + 1e-12;
        if !fracs_ok {
            return bad(format!(
                "need 0 <= long_frac, short_frac and long_frac + short_frac <= 1, got {} and {}",
                self.long_frac, self.short_frac
            ));
        }
        if let Some(mu) = self.mu {
            if !mu.is_finite() {
                return bad("mu must be finite".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    LowerBound { asset: usize, by: f64 },
    UpperBound { asset: usize, by: f64 },
    LongSum { by: f64 },
    ShortSum { by: f64 },
    ReturnFloor { by: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Feasibility {
    pub violations: Vec<Violation>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for Feasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("feasible");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            match v {
                Violation::LowerBound { asset, by } => write!(f, "asset {asset} below lower bound by {by:e}")?,
                Violation::UpperBound { asset, by } => write!(f, "asset {asset} above upper bound by {by:e}")?,
                Violation::LongSum { by } => write!(f, "long side off by {by:e}")?,
                Violation::ShortSum { by } => write!(f, "short side off by {by:e}")?,
                Violation::ReturnFloor { by } => write!(f, "expected return below mu by {by:e}")?,
            }
        }
        Ok(())
    }
}

pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-8;

/// Checks bounds and side sums, plus the return floor when both `mu` and a
/// scenario set are given.
pub fn is_feasible(
    x: &Portfolio,
    c: &ConstraintSet,
    scen: Option<&ScenarioSet>,
    tol: f64,
) -> Result<Feasibility> {
    let n = x.len();
    c.lower.check_len(n, "lower")?;
    c.upper.check_len(n, "upper")?;
    let mut violations = Vec::new();
    for (j, &w) in x.weights().iter().enumerate() {
        if w < c.lower(j) - tol {
            violations.push(Violation::LowerBound {
                asset: j,
                by: c.lower(j) - w,
            });
        }
        if w > c.upper(j) + tol {
            violations.push(Violation::UpperBound {
                asset: j,
                by: w - c.upper(j),
            });
        }
    }
    let long_gap = x.long_sum() - c.long_sum;
    if long_gap.abs() > tol {
        violations.push(Violation::LongSum { by: long_gap.abs() });
    }
    let short_gap = x.short_sum() - c.short_sum;
    if short_gap.abs() > tol {
        violations.push(Violation::ShortSum {
            by: short_gap.abs(),
        });
    }
    if let (Some(mu), Some(scen)) = (c.mu, scen) {
        let ret = expected_return(&evaluate(x, scen)?);
        if ret < mu - tol {
            violations.push(Violation::ReturnFloor { by: mu - ret });
        }
    }
    Ok(Feasibility { violations })
}

const SUM_TOL: f64 = 1e-9;
const MAX_PASSES: usize = 100;

/// Rescales the long and short sides separately to their budgets.
///
/// Each pass scales the unclipped entries of a side multiplicatively so the
/// side hits its target, then clips entries that crossed their bound; clipped
/// entries keep their bound and the next pass redistributes the residual.
/// Zero weights stay zero and no weight changes sign.
pub fn normalize(x: &Portfolio, c: &ConstraintSet) -> Result<Portfolio> {
    let n = x.len();
    c.lower.check_len(n, "lower")?;
    c.upper.check_len(n, "upper")?;
    let mut w = x.weights().to_vec();
    normalize_side(&mut w, c, Side::Long)?;
    normalize_side(&mut w, c, Side::Short)?;
    Ok(Portfolio::new(w))
}

fn normalize_side(w: &mut [f64], c: &ConstraintSet, side: Side) -> Result<()> {
    // Work in magnitudes: the short side is mirrored to positive values.
    let (target, sign) = match side {
        Side::Long => (c.long_sum, 1.0),
        Side::Short => (-c.short_sum, -1.0),
    };
    let cap = |j: usize| match side {
        Side::Long => c.upper(j),
        Side::Short => -c.lower(j),
    };
    let support: Vec<usize> = (0..w.len()).filter(|&j| sign * w[j] > 0.0).collect();

    if target == 0.0 {
        for &j in &support {
            w[j] = 0.0;
        }
        return Ok(());
    }
    if support.is_empty() {
        return Err(Error::EmptySide { side });
    }

    let mut clipped = vec![false; w.len()];
    for _ in 0..MAX_PASSES {
        let clipped_mass: f64 = support
            .iter()
            .filter(|&&j| clipped[j])
            .map(|&j| sign * w[j])
            .sum();
        let free: Vec<usize> = support.iter().copied().filter(|&j| !clipped[j]).collect();
        let remaining = target - clipped_mass;
        if free.is_empty() {
            return if remaining.abs() <= SUM_TOL {
                Ok(())
            } else {
                Err(Error::NonConvergent { side })
            };
        }
        let free_mass: f64 = free.iter().map(|&j| sign * w[j]).sum();
        let scale = remaining / free_mass;
        let mut newly_clipped = false;
        for &j in &free {
            let m = sign * w[j] * scale;
            if m > cap(j) {
                w[j] = sign * cap(j);
                clipped[j] = true;
                newly_clipped = true;
            } else {
                w[j] = sign * m;
            }
        }
        if !newly_clipped {
            let total: f64 = support.iter().map(|&j| sign * w[j]).sum();
            if (total - target).abs() <= SUM_TOL {
                return Ok(());
            }
        }
    }
    Err(Error::NonConvergent { side })
}

/// Elementwise mean, not renormalized.
pub fn mean_portfolio(xs: &[Portfolio]) -> Result<Portfolio> {
    let first = xs.first().ok_or(Error::EmptyPortfolioList)?;
    let n = first.len();
    let mut acc = vec![0.0; n];
    for x in xs {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        for (a, w) in acc.iter_mut().zip(x.weights()) {
            *a += w;
        }
    }
    let k = xs.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    Ok(Portfolio::new(acc))
}

/// Writes `asset,weight` rows under a header. Weights use the shortest
/// decimal that parses back to the same `f64`.
pub fn write_portfolio_csv<W: Write>(mut out: W, assets: &[String], x: &Portfolio) -> Result<()> {
    if assets.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: assets.len(),
            got: x.len(),
        });
    }
    let io = |source| Error::Io {
        path: "<portfolio output>".into(),
        source,
    };
    writeln!(out, "asset,weight").map_err(io)?;
    for (name, w) in assets.iter().zip(x.weights()) {
        writeln!(out, "{name},{w}").map_err(io)?;
    }
    Ok(())
}

/// Parses the format written by [`write_portfolio_csv`].
pub fn read_portfolio_csv<R: Read>(input: R) -> Result<(Vec<String>, Portfolio)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut assets = Vec::new();
    let mut weights = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::PortfolioFile {
            row,
            reason: e.to_string(),
        })?;
        if rec.len() != 2 {
            return Err(Error::PortfolioFile {
                row,
                reason: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let w: f64 = rec[1].parse().map_err(|_| Error::PortfolioFile {
            row,
            reason: format!("weight {:?} is not a number", &rec[1]),
        })?;
        if !w.is_finite() {
            return Err(Error::PortfolioFile {
                row,
                reason: "weight must be finite".into(),
            });
        }
        assets.push(rec[0].to_owned());
        weights.push(w);
    }
    Ok((assets, Portfolio::new(weights)))
}

//! Empirical return and risk functionals over a [`LossDistribution`].
//!
//! Loss distributions hold returns, so every "risk" value here is oriented
//! so that smaller is better: VaR and CVaR are the negated lower-tail
//! quantile and tail mean. Scenarios are equally weighted.
//!
//! Tail conventions, with `r` the values sorted ascending and `s = r.len()`:
//!
//! * `k = ceil((1 - alpha) * s) - 1`, clamped to `[0, s - 1]`
//! * VaR risk `= -r[k]`
//! * CVaR risk `= -mean(r[0..=k])`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::LossDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskKind {
    Variance,
    #[serde(alias = "std_dev")]
    StdDev,
    Mad,
    Var,
    Cvar,
}

impl RiskKind {
    pub fn uses_alpha(self) -> bool {
        matches!(self, RiskKind::Var | RiskKind::Cvar)
    }

    pub fn name(self) -> &'static str {
        match self {
            RiskKind::Variance => "variance",
            RiskKind::StdDev => "stddev",
            RiskKind::Mad => "mad",
            RiskKind::Var => "var",
            RiskKind::Cvar => "cvar",
        }
    }
}

impl std::str::FromStr for RiskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "variance" => Ok(RiskKind::Variance),
            "stddev" | "std_dev" => Ok(RiskKind::StdDev),
            "mad" => Ok(RiskKind::Mad),
            "var" => Ok(RiskKind::Var),
            "cvar" => Ok(RiskKind::Cvar),
            other => Err(Error::InvalidRiskSpec(format!("unknown risk kind {other:?}"))),
        }
    }
}

pub const DEFAULT_ALPHA: f64 = 0.95;

/// Selects the risk functional. `alpha` is carried only by VaR and CVaR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    pub kind: RiskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl RiskSpec {
    pub fn variance() -> Self {
        RiskSpec {
            kind: RiskKind::Variance,
            alpha: None,
        }
    }

    pub fn std_dev() -> Self {
        RiskSpec {
            kind: RiskKind::StdDev,
            alpha: None,
        }
    }

    pub fn mad() -> Self {
        RiskSpec {
            kind: RiskKind::Mad,
            alpha: None,
        }
    }

    pub fn var(alpha: f64) -> Result<Self> {
        Self::new(RiskKind::Var, Some(alpha))
    }

    pub fn cvar(alpha: f64) -> Result<Self> {
        Self::new(RiskKind::Cvar, Some(alpha))
    }

    /// Tail measures without an explicit level get [`DEFAULT_ALPHA`].
    pub fn with_default_alpha(kind: RiskKind, alpha: Option<f64>) -> Result<Self> {
        let alpha = if kind.uses_alpha() {
            Some(alpha.unwrap_or(DEFAULT_ALPHA))
        } else {
            None
        };
        Self::new(kind, alpha)
    }

    pub fn new(kind: RiskKind, alpha: Option<f64>) -> Result<Self> {
        let spec = RiskSpec { kind, alpha };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind.uses_alpha(), self.alpha) {
            (true, None) => Err(Error::InvalidRiskSpec(format!(
                "{} needs a confidence level alpha",
                self.kind.name()
            ))),
            (false, Some(_)) => Err(Error::InvalidRiskSpec(format!(
                "{} takes no confidence level",
                self.kind.name()
            ))),
            (true, Some(a)) if !(a > 0.0 && a < 1.0) => Err(Error::InvalidRiskSpec(format!(
                "alpha must lie in (0, 1), got {a}"
            ))),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for RiskSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.alpha {
            Some(a) => write!(f, "{}@{}", self.kind.name(), a),
            None => f.write_str(self.kind.name()),
        }
    }
}

/// Number of scenarios in the lower tail at level `alpha`, `ceil((1 - alpha) s)`
/// clamped to `[1, s]`.
pub fn tail_count(s: usize, alpha: f64) -> usize {
    // Products such as (1 - 0.95) * 20 land a few ulps above the integer.
    let m = ((1.0 - alpha) * s as f64 - 1e-9).ceil();
    (m.max(1.0) as usize).min(s.max(1))
}

/// Index `k` of the VaR order statistic.
pub fn tail_index(s: usize, alpha: f64) -> usize {
    tail_count(s, alpha) - 1
}

pub fn expected_return(loss: &LossDistribution) -> f64 {
    let v = &loss.values;
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

fn require_non_empty(loss: &LossDistribution) -> Result<()> {
    if loss.is_empty() {
        Err(Error::TooFewScenarios { needed: 1, found: 0 })
    } else {
        Ok(())
    }
}

fn sample_variance(v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return Err(Error::TooFewScenarios {
            needed: 2,
            found: v.len(),
        });
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok(ss / (v.len() - 1) as f64)
}

fn mean_abs_deviation(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).abs()).sum::<f64>() / v.len() as f64
}

/// The `tail_count` smallest values in ascending order.
fn lower_tail(v: &[f64], alpha: f64) -> Vec<f64> {
    let m = tail_count(v.len(), alpha);
    let mut sorted = v.to_vec();
    if m < sorted.len() {
        sorted.select_nth_unstable_by(m - 1, f64::total_cmp);
        sorted.truncate(m);
    }
    sorted.sort_unstable_by(f64::total_cmp);
    sorted
}

/// Signed lower empirical quantile `r[k]` of the returns (a negative number
/// for a lossy tail). This is what tables report as "VaR".
pub fn var_quantile(loss: &LossDistribution, alpha: f64) -> Result<f64> {
    require_non_empty(loss)?;
    RiskSpec::var(alpha)?;
    Ok(*lower_tail(&loss.values, alpha).last().expect("non-empty tail"))
}

/// Mean of the lower tail `r[0..=k]` (signed).
pub fn tail_mean(loss: &LossDistribution, alpha: f64) -> Result<f64> {
    require_non_empty(loss)?;
    RiskSpec::cvar(alpha)?;
    let tail = lower_tail(&loss.values, alpha);
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

pub fn risk(loss: &LossDistribution, spec: &RiskSpec) -> Result<f64> {
    spec.validate()?;
    require_non_empty(loss)?;
    let v = &loss.values;
    match spec.kind {
        RiskKind::Variance => sample_variance(v),
        RiskKind::StdDev => sample_variance(v).map(f64::sqrt),
        RiskKind::Mad => Ok(mean_abs_deviation(v)),
        RiskKind::Var => var_quantile(loss, spec.alpha.unwrap()).map(|q| -q),
        RiskKind::Cvar => tail_mean(loss, spec.alpha.unwrap()).map(|m| -m),
    }
}

/// Tail statistics at one confidence level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub alpha: f64,
    /// Signed quantile `r[k]`.
    pub var_quantile: f64,
    /// `-var_quantile`.
    pub var_risk: f64,
    /// Negated tail mean.
    pub cvar_risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub mean: f64,
    pub std_dev: f64,
    pub mad: f64,
    pub tails: Vec<TailRow>,
}

pub fn risk_report(loss: &LossDistribution, alphas: &[f64]) -> Result<RiskReport> {
    require_non_empty(loss)?;
    let tails = alphas
        .iter()
        .map(|&alpha| {
            let q = var_quantile(loss, alpha)?;
            let cvar = -tail_mean(loss, alpha)?;
            Ok(TailRow {
                alpha,
                var_quantile: q,
                var_risk: -q,
                cvar_risk: cvar,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RiskReport {
        mean: expected_return(loss),
        std_dev: risk(loss, &RiskSpec::std_dev())?,
        mad: mean_abs_deviation(&loss.values),
        tails,
    })
}

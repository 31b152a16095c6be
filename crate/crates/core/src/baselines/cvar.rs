//! Minimum CVaR under active-extension constraints as a linear program.
//!
//! Each weight is split as `x = x⁺ - x⁻` with `Σx⁺ = long_sum` and
//! `Σx⁻ = -short_sum`. With `m` tail scenarios the LP
//!
//! ```text
//! min ζ + (1/m) Σ z_i   s.t.  z_i >= -(r_i · x) - ζ,  z_i >= 0
//! ```
//!
//! attains exactly the mean of the `m` largest losses, so its optimum is the
//! empirical CVaR of the extracted portfolio. The LP does not forbid holding
//! an asset long and short at once; solutions that do are flagged.

use super::simplex::{LpModel, LpStatus, RelOp, SimplexOptions};
use super::{BaselineSolution, BaselineStatus, SolverStats};
use crate::error::{Error, Result};
use crate::portfolio::{ConstraintSet, Portfolio};
use crate::risk::{tail_count, RiskSpec};
use crate::scenario::ScenarioSet;

/// Products `x⁺_j x⁻_j` at or below this count as complementary.
pub const COMPLEMENTARITY_TOL: f64 = 1e-9;

/// The LP together with the column indices needed to read a solution back.
#[derive(Debug, Clone)]
pub struct CvarLp {
    pub model: LpModel,
    pub long_cols: Vec<usize>,
    pub short_cols: Vec<usize>,
    pub zeta_col: usize,
    pub shortfall_cols: Vec<usize>,
    pub tail_scenarios: usize,
}

impl CvarLp {
    /// `(x⁺ - x⁻, complementary)` from an LP point.
    pub fn extract(&self, lp_x: &[f64]) -> (Portfolio, bool) {
        let mut complementary = true;
        let w = self
            .long_cols
            .iter()
            .zip(&self.short_cols)
            .map(|(&p, &m)| {
                if lp_x[p] * lp_x[m] > COMPLEMENTARITY_TOL {
                    complementary = false;
                }
                lp_x[p] - lp_x[m]
            })
            .collect();
        (Portfolio::new(w), complementary)
    }
}

pub fn build_cvar_lp(
    scen: &ScenarioSet,
    c: &ConstraintSet,
    alpha: f64,
    mu: Option<f64>,
) -> Result<CvarLp> {
    RiskSpec::cvar(alpha)?;
    let a = scen.n_assets();
    c.validate(a)?;
    let s = scen.n_scenarios();
    let m = tail_count(s, alpha);
    let names = scen.assets();

    let mut model = LpModel::new();
    let mut long_cols = Vec::with_capacity(a);
    let mut short_cols = Vec::with_capacity(a);
    for j in 0..a {
        let (lo, hi) = (c.lower(j), c.upper(j));
        long_cols.push(model.add_var(format!("P_{}", names[j]), 0.0, lo.max(0.0), hi.max(0.0)));
        short_cols.push(model.add_var(
            format!("M_{}", names[j]),
            0.0,
            (-hi).max(0.0),
            (-lo).max(0.0),
        ));
    }
    let zeta_col = model.add_var("ZETA", 1.0, f64::NEG_INFINITY, f64::INFINITY);
    let shortfall_cols: Vec<usize> = (0..s)
        .map(|i| model.add_var(format!("Z{i}"), 1.0 / m as f64, 0.0, f64::INFINITY))
        .collect();
    let n = model.n_vars();

    for (i, r) in scen.rows().enumerate() {
        // z_i + r_i·x⁺ - r_i·x⁻ + ζ >= 0
        let mut row = vec![0.0; n];
        for j in 0..a {
            row[long_cols[j]] = r[j];
            row[short_cols[j]] = -r[j];
        }
        row[zeta_col] = 1.0;
        row[shortfall_cols[i]] = 1.0;
        model.add_constraint(format!("TAIL{i}"), row, RelOp::Ge, 0.0)?;
    }
    let mut long_row = vec![0.0; n];
    let mut short_row = vec![0.0; n];
    for j in 0..a {
        long_row[long_cols[j]] = 1.0;
        short_row[short_cols[j]] = 1.0;
    }
    model.add_constraint("LONG", long_row, RelOp::Eq, c.long_sum)?;
    model.add_constraint("SHORT", short_row, RelOp::Eq, -c.short_sum)?;
    if let Some(mu) = mu.or(c.mu) {
        let means = scen.asset_means();
        let mut row = vec![0.0; n];
        for j in 0..a {
            row[long_cols[j]] = means[j];
            row[short_cols[j]] = -means[j];
        }
        model.add_constraint("RETURN", row, RelOp::Ge, mu)?;
    }

    Ok(CvarLp {
        model,
        long_cols,
        short_cols,
        zeta_col,
        shortfall_cols,
        tail_scenarios: m,
    })
}

/// Solves the LP. `mu` overrides the floor carried by `c`, if any.
pub fn solve_cvar_lp(
    scen: &ScenarioSet,
    c: &ConstraintSet,
    alpha: f64,
    mu: Option<f64>,
) -> Result<BaselineSolution> {
    let lp = build_cvar_lp(scen, c, alpha, mu)?;
    let sol = lp.model.solve(&SimplexOptions::default())?;
    let status = match sol.status {
        LpStatus::Optimal => BaselineStatus::Optimal,
        LpStatus::Infeasible => {
            return Ok(BaselineSolution::infeasible(
                scen.n_assets(),
                "budgets, bounds and return floor admit no portfolio".into(),
            ))
        }
        LpStatus::IterationLimit => BaselineStatus::IterationLimit,
        LpStatus::Unbounded => {
            return Err(Error::BaselineFailed(
                "CVaR LP reported unbounded; the model is bounded below".into(),
            ))
        }
    };
    let (portfolio, complementary) = lp.extract(&sol.x);
    Ok(BaselineSolution {
        portfolio,
        objective: sol.objective,
        status,
        stats: SolverStats {
            iterations: sol.iterations,
            residual: sol.max_violation,
            projected_gradient_norm: None,
            complementary: Some(complementary),
            bland_pivots: sol.bland_pivots,
            note: None,
        },
    })
}

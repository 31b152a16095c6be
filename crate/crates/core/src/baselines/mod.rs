//! Reference solvers: long-only minimum variance, CVaR by linear
//! programming, and exhaustive grid search for tiny universes.

pub mod cvar;
pub mod grid;
pub mod mps;
pub mod qp;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::portfolio::Portfolio;

pub use cvar::{build_cvar_lp, solve_cvar_lp, CvarLp};
pub use grid::{estimate_grid_points, grid_oracle, GRID_BUDGET};
pub use mps::write_mps;
pub use qp::{solve_markowitz_long_only, MarkowitzProblem};
pub use simplex::{LpModel, LpSolution, LpStatus, RelOp, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    /// Primal constraint violation for the LP, projected-gradient norm for
    /// the QP, zero for the grid.
    pub residual: f64,
    pub projected_gradient_norm: Option<f64>,
    /// LP only: whether no asset is held long and short at once.
    pub complementary: Option<bool>,
    pub bland_pivots: usize,
    pub note: Option<String>,
}

impl SolverStats {
    fn empty() -> Self {
        SolverStats {
            iterations: 0,
            residual: 0.0,
            projected_gradient_norm: None,
            complementary: None,
            bland_pivots: 0,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSolution {
    pub portfolio: Portfolio,
    pub objective: f64,
    pub status: BaselineStatus,
    pub stats: SolverStats,
}

impl BaselineSolution {
    pub(crate) fn infeasible(n: usize, note: String) -> Self {
        BaselineSolution {
            portfolio: Portfolio::zeros(n),
            objective: f64::NAN,
            status: BaselineStatus::Infeasible,
            stats: SolverStats {
                note: Some(note),
                ..SolverStats::empty()
            },
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == BaselineStatus::Optimal
    }
}

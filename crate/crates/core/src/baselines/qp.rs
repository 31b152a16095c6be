//! Long-only minimum-variance portfolio: `min x'Cx` s.t. `Σx = 1`, `x >= 0`,
//! optionally `M'x >= mu`.
//!
//! Accelerated projected gradient (FISTA with gradient-based restarts) finds
//! the active set; a KKT solve on that set then polishes the point to
//! machine precision when the multipliers confirm it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{BaselineSolution, BaselineStatus, SolverStats};
use crate::error::Result;
use crate::portfolio::Portfolio;
use crate::scenario::ScenarioSet;

pub const MAX_ITERATIONS: usize = 1_000_000;
const PG_TOL: f64 = 1e-9;
const REL_CHANGE_TOL: f64 = 1e-12;
const REL_CHANGE_WINDOW: usize = 100;

/// Dense data of the quadratic program.
#[derive(Debug, Clone)]
pub struct MarkowitzProblem {
    pub n: usize,
    /// Row-major sample covariance.
    pub cov: Vec<f64>,
    pub means: Vec<f64>,
    pub mu: Option<f64>,
}

impl MarkowitzProblem {
    pub fn new(scen: &ScenarioSet, mu: Option<f64>) -> Result<Self> {
        Ok(MarkowitzProblem {
            n: scen.n_assets(),
            cov: scen.covariance()?,
            means: scen.asset_means(),
            mu,
        })
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let cx = self.cov_times(x);
        x.iter().zip(&cx).map(|(a, b)| a * b).sum()
    }

    fn cov_times(&self, x: &[f64]) -> Vec<f64> {
        self.cov
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.cov_times(x).into_iter().map(|v| 2.0 * v).collect()
    }

    /// Euclidean projection onto the feasible set.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let base = project_simplex(y);
        let Some(mu) = self.mu else { return base };
        if dot(&self.means, &base) >= mu {
            return base;
        }
        // x(θ) = P_simplex(y + θ M); M'x(θ) is nondecreasing in θ
        let shifted = |theta: f64| -> Vec<f64> {
            let z: Vec<f64> = y.iter().zip(&self.means).map(|(a, m)| a + theta * m).collect();
            project_simplex(&z)
        };
        let mut hi = 1.0;
        let mut tries = 0;
        while dot(&self.means, &shifted(hi)) < mu && tries < 200 {
            hi *= 2.0;
            tries += 1;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if dot(&self.means, &shifted(mid)) < mu {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        shifted(hi)
    }

    /// `‖x - P(x - ∇f(x))‖₂`, zero exactly at a KKT point.
    pub fn projected_gradient_norm(&self, x: &[f64]) -> f64 {
        let g = self.gradient(x);
        let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - b).collect();
        let p = self.project(&y);
        x.iter()
            .zip(&p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn lipschitz(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.n, self.n, &self.cov);
        let lmax = SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b));
        2.0 * lmax.max(1e-300)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projection onto `{x >= 0, Σx = 1}` by the sort-and-threshold method.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (i, &v) in u.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            tau = t;
        }
    }
    y.iter().map(|v| (v - tau).max(0.0)).collect()
}

pub fn solve_markowitz_long_only(scen: &ScenarioSet, mu: Option<f64>) -> Result<BaselineSolution> {
    let problem = MarkowitzProblem::new(scen, mu)?;
    Ok(solve_problem(&problem))
}

pub fn solve_problem(p: &MarkowitzProblem) -> BaselineSolution {
    let n = p.n;
    if let Some(mu) = p.mu {
        let best = p.means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if mu > best {
            return BaselineSolution::infeasible(n, format!(
                "mu = {mu} exceeds the largest asset mean {best}"
            ));
        }
    }

    let step = 1.0 / p.lipschitz();
    let mut x = p.project(&vec![1.0 / n as f64; n]);
    let mut y = x.clone();
    let mut t: f64 = 1.0;
    let mut history: Vec<f64> = Vec::with_capacity(REL_CHANGE_WINDOW + 1);
    let mut iterations = 0;
    let mut status = BaselineStatus::IterationLimit;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let g = p.gradient(&y);
        let trial: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let next = p.project(&trial);

        // restart momentum when it points uphill
        let uphill: f64 = g
            .iter()
            .zip(next.iter().zip(&x))
            .map(|(gi, (a, b))| gi * (a - b))
            .sum();
        let t_next = if uphill > 0.0 {
            1.0
        } else {
            0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
        };
        let beta = if uphill > 0.0 { 0.0 } else { (t - 1.0) / t_next };
        y = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        if beta != 0.0 {
            y = p.project(&y);
        }
        x = next;
        t = t_next;

        let f = p.objective(&x);
        history.push(f);
        if history.len() > REL_CHANGE_WINDOW {
            history.remove(0);
        }
        if iterations % 10 == 0 && p.projected_gradient_norm(&x) <= PG_TOL {
            status = BaselineStatus::Optimal;
            break;
        }
        if history.len() == REL_CHANGE_WINDOW {
            let old = history[0];
            if (old - f).abs() <= REL_CHANGE_TOL * old.abs().max(f64::MIN_POSITIVE) {
                status = BaselineStatus::Optimal;
                break;
            }
        }
    }

    if let Some(polished) = polish(p, &x) {
        if p.projected_gradient_norm(&polished) <= p.projected_gradient_norm(&x) {
            x = polished;
        }
    }
    let pg = p.projected_gradient_norm(&x);
    let objective = p.objective(&x);
    BaselineSolution {
        portfolio: Portfolio::new(x),
        objective,
        status,
        stats: SolverStats {
            iterations,
            residual: pg,
            projected_gradient_norm: Some(pg),
            complementary: None,
            bland_pivots: 0,
            note: None,
        },
    }
}

/// Solves the equality-constrained QP on the support of `x` and keeps the
/// result only if it is primal feasible and dual feasible off the support.
fn polish(p: &MarkowitzProblem, x: &[f64]) -> Option<Vec<f64>> {
    let n = p.n;
    let max = x.iter().copied().fold(0.0, f64::max);
    let support: Vec<usize> = (0..n).filter(|&j| x[j] > 1e-10 * max.max(1.0)).collect();
    let mu_active = match p.mu {
        Some(mu) => dot(&p.means, x) - mu <= 1e-10,
        None => false,
    };
    let k = support.len();
    let dim = k + 1 + usize::from(mu_active);
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DVector::<f64>::zeros(dim);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            a[(r, c)] = 2.0 * p.cov[i * n + j];
        }
        a[(r, k)] = -1.0;
        a[(k, r)] = 1.0;
        if mu_active {
            a[(r, k + 1)] = -p.means[i];
            a[(k + 1, r)] = p.means[i];
        }
    }
    b[k] = 1.0;
    if let (true, Some(mu)) = (mu_active, p.mu) {
        b[k + 1] = mu;
    }
    let sol = a.lu().solve(&b)?;
    if (0..k).any(|r| !(sol[r] >= 0.0)) {
        return None;
    }
    let mut out = vec![0.0; n];
    for (r, &j) in support.iter().enumerate() {
        out[j] = sol[r];
    }
    let nu = sol[k];
    let theta = if mu_active { sol[k + 1] } else { 0.0 };
    if theta < 0.0 {
        return None;
    }
    let g = p.gradient(&out);
    let scale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    for j in (0..n).filter(|j| !support.contains(j)) {
        if g[j] - nu - theta * p.means[j] < -1e-9 * scale {
            return None;
        }
    }
    Some(out)
}

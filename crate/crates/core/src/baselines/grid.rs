//! Exhaustive search over weight vectors on a regular lattice.
//!
//! Weights are multiples `k_j * grid` inside the bounds whose long and short
//! side sums each land within `grid / 2` of their budgets. Vectors are
//! visited in lexicographic order of `k`, so among equal objectives the
//! lexicographically smallest wins.

use super::{BaselineSolution, BaselineStatus, SolverStats};
use crate::error::{Error, Result};
use crate::portfolio::{ConstraintSet, Portfolio};
use crate::risk::{risk, RiskSpec};
use crate::scenario::{LossDistribution, ScenarioSet};

pub const GRID_BUDGET: f64 = 1e8;
pub const MAX_GRID_ASSETS: usize = 5;
/// Relative objective difference treated as a tie.
const TIE_TOL: f64 = 1e-12;

struct Lattice {
    grid: f64,
    lo: Vec<i64>,
    hi: Vec<i64>,
    long_target: f64,
    short_target: f64,
    /// Largest long / short units the assets after `j` can still add.
    long_room: Vec<i64>,
    short_room: Vec<i64>,
}

impl Lattice {
    fn new(c: &ConstraintSet, a: usize, grid: f64) -> Self {
        let lo: Vec<i64> = (0..a).map(|j| (c.lower(j) / grid - 1e-9).ceil() as i64).collect();
        let hi: Vec<i64> = (0..a).map(|j| (c.upper(j) / grid + 1e-9).floor() as i64).collect();
        let mut long_room = vec![0; a + 1];
        let mut short_room = vec![0; a + 1];
        for j in (0..a).rev() {
            long_room[j] = long_room[j + 1] + hi[j].max(0);
            short_room[j] = short_room[j + 1] + (-lo[j]).max(0);
        }
        Lattice {
            grid,
            lo,
            hi,
            long_target: c.long_sum / grid,
            short_target: -c.short_sum / grid,
            long_room,
            short_room,
        }
    }

    fn side_ok(units: i64, target: f64) -> bool {
        (units as f64 - target).abs() <= 0.5 + 1e-9
    }

    /// Can assets `j..` still bring the sides into tolerance?
    fn reachable(&self, j: usize, long: i64, short: i64) -> bool {
        let slack = 0.5 + 1e-9;
        long as f64 <= self.long_target + slack
            && short as f64 <= self.short_target + slack
            && (long + self.long_room[j]) as f64 >= self.long_target - slack
            && (short + self.short_room[j]) as f64 >= self.short_target - slack
    }

    /// Number of lattice points satisfying bounds and side sums.
    fn count(&self) -> f64 {
        let a = self.lo.len();
        let lmax = (self.long_target + 1.0).floor().max(0.0) as usize;
        let smax = (self.short_target + 1.0).floor().max(0.0) as usize;
        let idx = |l: usize, s: usize| l * (smax + 1) + s;
        let mut ways = vec![0.0_f64; (lmax + 1) * (smax + 1)];
        ways[0] = 1.0;
        for j in 0..a {
            let mut next = vec![0.0_f64; ways.len()];
            for l in 0..=lmax {
                for s in 0..=smax {
                    let w = ways[idx(l, s)];
                    if w == 0.0 {
                        continue;
                    }
                    for k in self.lo[j]..=self.hi[j] {
                        let (nl, ns) = if k >= 0 {
                            (l + k as usize, s)
                        } else {
                            (l, s + (-k) as usize)
                        };
                        if nl <= lmax && ns <= smax {
                            next[idx(nl, ns)] += w;
                        }
                    }
                }
            }
            ways = next;
        }
        let mut total = 0.0;
        for l in 0..=lmax {
            for s in 0..=smax {
                if Self::side_ok(l as i64, self.long_target) && Self::side_ok(s as i64, self.short_target) {
                    total += ways[idx(l, s)];
                }
            }
        }
        total
    }
}

/// Number of candidate vectors the oracle would evaluate.
pub fn estimate_grid_points(c: &ConstraintSet, n_assets: usize, grid: f64) -> f64 {
    Lattice::new(c, n_assets, grid).count()
}

struct Search<'a> {
    lat: &'a Lattice,
    scen: &'a ScenarioSet,
    spec: RiskSpec,
    means: Option<(Vec<f64>, f64)>,
    k: Vec<i64>,
    /// Per-depth partial returns per scenario.
    partial: Vec<Vec<f64>>,
    best: Option<(f64, Vec<i64>)>,
    visited: usize,
}

impl Search<'_> {
    fn visit(&mut self, j: usize, long: i64, short: i64) -> Result<()> {
        let a = self.lat.lo.len();
        if j == a {
            if !Lattice::side_ok(long, self.lat.long_target)
                || !Lattice::side_ok(short, self.lat.short_target)
            {
                return Ok(());
            }
            self.visited += 1;
            if let Some((means, mu)) = &self.means {
                let ret: f64 = means
                    .iter()
                    .zip(&self.k)
                    .map(|(m, &k)| m * k as f64 * self.lat.grid)
                    .sum();
                if ret < *mu {
                    return Ok(());
                }
            }
            let loss = LossDistribution::new(self.partial[a].clone());
            let value = risk(&loss, &self.spec)?;
            let better = match &self.best {
                None => true,
                Some((b, _)) => value < b - TIE_TOL * b.abs().max(f64::MIN_POSITIVE),
            };
            if better {
                self.best = Some((value, self.k.clone()));
            }
            return Ok(());
        }
        for kj in self.lat.lo[j]..=self.lat.hi[j] {
            let (nl, ns) = if kj >= 0 {
                (long + kj, short)
            } else {
                (long, short - kj)
            };
            if !self.lat.reachable(j + 1, nl, ns) {
                continue;
            }
            self.k[j] = kj;
            let w = kj as f64 * self.lat.grid;
            let (head, tail) = self.partial.split_at_mut(j + 1);
            for (i, (dst, src)) in tail[0].iter_mut().zip(&head[j]).enumerate() {
                *dst = src + w * self.scen.row(i)[j];
            }
            self.visit(j + 1, nl, ns)?;
        }
        self.k[j] = 0;
        Ok(())
    }
}

pub fn grid_oracle(
    scen: &ScenarioSet,
    c: &ConstraintSet,
    spec: &RiskSpec,
    grid: f64,
) -> Result<BaselineSolution> {
    spec.validate()?;
    let a = scen.n_assets();
    c.validate(a)?;
    if a > MAX_GRID_ASSETS {
        return Err(Error::InvalidGrid(format!(
            "{a} assets; the grid oracle handles at most {MAX_GRID_ASSETS}"
        )));
    }
    if !(grid.is_finite() && grid > 0.0) {
        return Err(Error::InvalidGrid(format!("grid step must be positive, got {grid}")));
    }
    let lat = Lattice::new(c, a, grid);
    let estimated = lat.count();
    if estimated > GRID_BUDGET {
        return Err(Error::BudgetExceeded {
            estimated,
            limit: GRID_BUDGET,
        });
    }
    let s = scen.n_scenarios();
    let mut search = Search {
        lat: &lat,
        scen,
        spec: *spec,
        means: c.mu.map(|mu| (scen.asset_means(), mu)),
        k: vec![0; a],
        partial: vec![vec![0.0; s]; a + 1],
        best: None,
        visited: 0,
    };
    search.visit(0, 0, 0)?;
    let visited = search.visited;
    match search.best {
        None => Ok(BaselineSolution::infeasible(
            a,
            "no lattice point satisfies bounds, budgets and return floor".into(),
        )),
        Some((objective, k)) => Ok(BaselineSolution {
            portfolio: Portfolio::new(k.iter().map(|&v| v as f64 * grid).collect()),
            objective,
            status: BaselineStatus::Optimal,
            stats: SolverStats {
                iterations: visited,
                residual: 0.0,
                projected_gradient_norm: None,
                complementary: None,
                bland_pivots: 0,
                note: None,
            },
        }),
    }
}

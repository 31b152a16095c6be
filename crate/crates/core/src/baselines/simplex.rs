//! Dense two-phase tableau simplex.
//!
//! Minimizes `c'x` over rows `a'x {<=, =, >=} b` and variable bounds
//! `lo <= x <= hi` (either side may be infinite). Bounds are folded into a
//! nonnegative standard form: finite lower bounds shift the variable, finite
//! upper bounds become `<=` rows and free variables are split in two.
//!
//! Entering variables are chosen by Dantzig's rule. After `5 (rows + cols)`
//! consecutive degenerate pivots the solver switches to Bland's rule until
//! the next pivot that makes progress.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelOp {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub name: String,
    /// Dense, one coefficient per model variable.
    pub coeffs: Vec<f64>,
    pub op: RelOp,
    pub rhs: f64,
}

/// A dense linear program `min c'x` with named variables and rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub var_names: Vec<String>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<LinearConstraint>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    /// Adds a variable and returns its column index. Rows added earlier are
    /// padded with a zero coefficient.
    pub fn add_var(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        self.var_names.push(name.into());
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        for row in &mut self.constraints {
            row.coeffs.push(0.0);
        }
        self.var_names.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<f64>,
        op: RelOp,
        rhs: f64,
    ) -> Result<usize> {
        if coeffs.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                got: coeffs.len(),
            });
        }
        self.constraints.push(LinearConstraint {
            name: name.into(),
            coeffs,
            op,
            rhs,
        });
        Ok(self.constraints.len() - 1)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|n| n == name)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.objective.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidModel("per-variable vectors differ in length".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel("objective coefficients must be finite".into()));
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::InvalidModel(format!(
                    "variable {} has bounds [{lo}, {hi}]",
                    self.var_names[j]
                )));
            }
        }
        for row in &self.constraints {
            if row.coeffs.len() != n {
                return Err(Error::InvalidModel(format!("row {} has wrong width", row.name)));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "row {} has non-finite entries",
                    row.name
                )));
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let gap = match row.op {
                RelOp::Le => lhs - row.rhs,
                RelOp::Ge => row.rhs - lhs,
                RelOp::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn solve(&self, opts: &SimplexOptions) -> Result<LpSolution> {
        self.validate()?;
        Ok(solve(self, opts))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Reduced-cost and pivot-element tolerance.
    pub tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: 100_000,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Pivots taken under Bland's rule.
    pub bland_pivots: usize,
    pub max_violation: f64,
}

// Original variable j equals `offset + sign * y[col]` (minus `y[col2]` for
// a split free variable).
#[derive(Debug, Clone, Copy)]
struct VarMap {
    offset: f64,
    sign: f64,
    col: usize,
    neg_col: Option<usize>,
}

struct StdRow {
    coeffs: Vec<f64>,
    op: RelOp,
    rhs: f64,
}

fn solve(model: &LpModel, opts: &SimplexOptions) -> LpSolution {
    let n = model.n_vars();
    let mut maps = Vec::with_capacity(n);
    let mut n_y = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (model.lower[j], model.upper[j]);
        let map = if lo.is_finite() {
            if hi.is_finite() {
                bound_rows.push((n_y, hi - lo));
            }
            VarMap { offset: lo, sign: 1.0, col: n_y, neg_col: None }
        } else if hi.is_finite() {
            VarMap { offset: hi, sign: -1.0, col: n_y, neg_col: None }
        } else {
            n_y += 1;
            VarMap { offset: 0.0, sign: 1.0, col: n_y - 1, neg_col: Some(n_y) }
        };
        n_y += 1;
        maps.push(map);
    }

    let to_y = |coeffs: &[f64]| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; n_y];
        let mut shift = 0.0;
        for (j, &a) in coeffs.iter().enumerate() {
            let m = maps[j];
            shift += a * m.offset;
            out[m.col] += a * m.sign;
            if let Some(nc) = m.neg_col {
                out[nc] -= a;
            }
        }
        (out, shift)
    };

    let mut rows: Vec<StdRow> = Vec::new();
    for row in &model.constraints {
        let (coeffs, shift) = to_y(&row.coeffs);
        rows.push(StdRow { coeffs, op: row.op, rhs: row.rhs - shift });
    }
    for &(col, cap) in &bound_rows {
        let mut coeffs = vec![0.0; n_y];
        coeffs[col] = 1.0;
        rows.push(StdRow { coeffs, op: RelOp::Le, rhs: cap });
    }
    let (cost_y, _) = to_y(&model.objective);

    // b >= 0, and a zero right-hand side prefers `<=` (slack basis, no
    // artificial variable).
    for r in &mut rows {
        let flip = r.rhs < 0.0 || (r.rhs == 0.0 && r.op == RelOp::Ge);
        if flip {
            r.rhs = -r.rhs;
            r.coeffs.iter_mut().for_each(|a| *a = -*a);
            r.op = match r.op {
                RelOp::Le => RelOp::Ge,
                RelOp::Ge => RelOp::Le,
                RelOp::Eq => RelOp::Eq,
            };
        }
    }

    let mut tab = Tableau::build(&rows, n_y, opts);
    let status = tab.run(&cost_y);

    let y = tab.primal();
    let mut x = vec![0.0; n];
    for (j, m) in maps.iter().enumerate() {
        let mut v = m.offset + m.sign * y[m.col];
        if let Some(nc) = m.neg_col {
            v -= y[nc];
        }
        x[j] = v;
    }
    let objective = match status {
        LpStatus::Optimal => model.objective_value(&x),
        _ => f64::NAN,
    };
    LpSolution {
        status,
        max_violation: model.max_violation(&x),
        x,
        objective,
        iterations: tab.iterations,
        bland_pivots: tab.bland_pivots,
    }
}

struct Tableau {
    m: usize,
    /// Structural + slack/surplus + artificial columns.
    ncols: usize,
    n_y: usize,
    first_artificial: usize,
    /// Row-major `m × (ncols + 1)`; the last column is the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    removed: Vec<bool>,
    opts: SimplexOptions,
    iterations: usize,
    bland_pivots: usize,
}

impl Tableau {
    fn build(rows: &[StdRow], n_y: usize, opts: &SimplexOptions) -> Self {
        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.op != RelOp::Eq).count();
        let n_art = rows.iter().filter(|r| r.op != RelOp::Le).count();
        let first_artificial = n_y + n_slack;
        let ncols = first_artificial + n_art;
        let w = ncols + 1;
        let mut t = vec![0.0; m * w];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (n_y, first_artificial);
        for (i, r) in rows.iter().enumerate() {
            t[i * w..i * w + n_y].copy_from_slice(&r.coeffs);
            t[i * w + ncols] = r.rhs;
            match r.op {
                RelOp::Le => {
                    t[i * w + s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                RelOp::Ge => {
                    t[i * w + s] = -1.0;
                    s += 1;
                    t[i * w + a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
                RelOp::Eq => {
                    t[i * w + a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        Tableau {
            m,
            ncols,
            n_y,
            first_artificial,
            t,
            basis,
            removed: vec![false; m],
            opts: *opts,
            iterations: 0,
            bland_pivots: 0,
        }
    }

    fn width(&self) -> usize {
        self.ncols + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.ncols)
    }

    fn run(&mut self, cost_y: &[f64]) -> LpStatus {
        let has_artificial = self.first_artificial < self.ncols;
        if has_artificial {
            let mut phase1 = vec![0.0; self.ncols];
            phase1[self.first_artificial..].iter_mut().for_each(|c| *c = 1.0);
            match self.optimize(&phase1, self.ncols) {
                LpStatus::Optimal => {}
                LpStatus::Unbounded => return LpStatus::Infeasible,
                other => return other,
            }
            let infeas: f64 = (0..self.m)
                .filter(|&i| !self.removed[i] && self.basis[i] >= self.first_artificial)
                .map(|i| self.rhs(i))
                .sum();
            let scale = 1.0 + (0..self.m).map(|i| self.rhs(i).abs()).fold(0.0, f64::max);
            if infeas > 1e-7 * scale {
                return LpStatus::Infeasible;
            }
            self.drive_out_artificials();
        }
        let mut cost = vec![0.0; self.ncols];
        cost[..self.n_y].copy_from_slice(cost_y);
        self.optimize(&cost, self.first_artificial)
    }

    /// Pivots zero-level artificial variables out of the basis; rows where
    /// that is impossible are redundant and get dropped.
    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            if self.removed[i] || self.basis[i] < self.first_artificial {
                continue;
            }
            let col = (0..self.first_artificial)
                .filter(|&j| self.at(i, j).abs() > self.opts.tol)
                .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()));
            match col {
                Some(j) => self.pivot(i, j),
                None => self.removed[i] = true,
            }
        }
    }

    fn reduced_costs(&self, cost: &[f64], eligible: usize) -> Vec<f64> {
        let mut d = cost[..eligible].to_vec();
        for i in 0..self.m {
            if self.removed[i] {
                continue;
            }
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.width()..i * self.width() + eligible];
            for (dj, a) in d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        d
    }

    /// Minimizes `cost` with entering columns restricted to `0..eligible`.
    fn optimize(&mut self, cost: &[f64], eligible: usize) -> LpStatus {
        let tol = self.opts.tol;
        let threshold = 5 * (self.m + self.ncols);
        let mut degenerate_run = 0;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return LpStatus::IterationLimit;
            }
            let bland = degenerate_run > threshold;
            let d = self.reduced_costs(cost, eligible);
            let is_basic = {
                let mut b = vec![false; self.ncols];
                for i in 0..self.m {
                    if !self.removed[i] {
                        b[self.basis[i]] = true;
                    }
                }
                b
            };
            let candidates = (0..eligible).filter(|&j| !is_basic[j] && d[j] < -tol);
            let entering = if bland {
                candidates.min()
            } else {
                candidates.min_by(|&a, &b| d[a].total_cmp(&d[b]))
            };
            let Some(e) = entering else {
                return LpStatus::Optimal;
            };

            // ratio test; ties go to the larger pivot (Dantzig) or the
            // smaller basic index (Bland)
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.m {
                if self.removed[i] {
                    continue;
                }
                let a = self.at(i, e);
                if a <= tol {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        if ratio < best_ratio - 1e-12 {
                            true
                        } else if ratio <= best_ratio + 1e-12 {
                            if bland {
                                self.basis[i] < self.basis[l]
                            } else {
                                a > self.at(l, e)
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some(i);
                    best_ratio = ratio;
                }
            }
            let Some(l) = leave else {
                return LpStatus::Unbounded;
            };
            if best_ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            if bland {
                self.bland_pivots += 1;
            }
            self.pivot(l, e);
            self.iterations += 1;
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width();
        let p = self.at(r, e);
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        prow.iter_mut().for_each(|v| *v /= p);
        prow[e] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[e];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[e] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[r] = e;
    }

    fn primal(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n_y];
        for i in 0..self.m {
            if !self.removed[i] && self.basis[i] < self.n_y {
                y[self.basis[i]] = self.rhs(i).max(0.0);
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve_ok(model: &LpModel) -> LpSolution {
        let s = model.solve(&SimplexOptions::default()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal, "{s:?}");
        s
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut m = LpModel::new();
        m.add_var("x", -3.0, 0.0, f64::INFINITY);
        m.add_var("y", -5.0, 0.0, f64::INFINITY);
        m.add_constraint("c1", vec![1.0, 0.0], RelOp::Le, 4.0).unwrap();
        m.add_constraint("c2", vec![0.0, 2.0], RelOp::Le, 12.0).unwrap();
        m.add_constraint("c3", vec![3.0, 2.0], RelOp::Le, 18.0).unwrap();
        let s = solve_ok(&m);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        assert!((s.objective + 36.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows_with_bounds() {
        // min x + 2y + 3z, x + y + z = 1, y + z >= 0.5, x <= 0.3, z in [0.1, 1]
        let mut m = LpModel::new();
        m.add_var("x", 1.0, 0.0, 0.3);
        m.add_var("y", 2.0, 0.0, f64::INFINITY);
        m.add_var("z", 3.0, 0.1, 1.0);
        m.add_constraint("sum", vec![1.0, 1.0, 1.0], RelOp::Eq, 1.0).unwrap();
        m.add_constraint("yz", vec![0.0, 1.0, 1.0], RelOp::Ge, 0.5).unwrap();
        let s = solve_ok(&m);
        // x = 0.3, z = 0.1, y = 0.6 -> 0.3 + 1.2 + 0.3
        assert!((s.objective - 1.8).abs() < 1e-9, "{s:?}");
        assert!(s.max_violation < 1e-9);
    }

    #[test]
    fn free_and_upper_only_variables() {
        // min t s.t. t >= 3 - x, t >= x - 1, x <= 5 (upper only)
        let mut m = LpModel::new();
        m.add_var("t", 1.0, f64::NEG_INFINITY, f64::INFINITY);
        m.add_var("x", 0.0, f64::NEG_INFINITY, 5.0);
        m.add_constraint("a", vec![1.0, 1.0], RelOp::Ge, 3.0).unwrap();
        m.add_constraint("b", vec![1.0, -1.0], RelOp::Ge, -1.0).unwrap();
        let s = solve_ok(&m);
        assert!((s.objective - 1.0).abs() < 1e-9);
        assert!((s.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = LpModel::new();
        m.add_var("x", 1.0, 0.0, 1.0);
        m.add_constraint("c", vec![1.0], RelOp::Ge, 2.0).unwrap();
        assert_eq!(m.solve(&SimplexOptions::default()).unwrap().status, LpStatus::Infeasible);

        let mut m = LpModel::new();
        m.add_var("x", -1.0, 0.0, f64::INFINITY);
        m.add_constraint("c", vec![1.0], RelOp::Ge, 2.0).unwrap();
        assert_eq!(m.solve(&SimplexOptions::default()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut m = LpModel::new();
        m.add_var("x", 1.0, 0.0, f64::INFINITY);
        m.add_var("y", 1.0, 0.0, f64::INFINITY);
        m.add_constraint("a", vec![1.0, 1.0], RelOp::Eq, 1.0).unwrap();
        m.add_constraint("b", vec![2.0, 2.0], RelOp::Eq, 2.0).unwrap();
        let s = solve_ok(&m);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale's example cycles under the textbook Dantzig rule without
        // an anti-cycling safeguard. Optimum -1/20 at x = (1/25, 0, 1, 0).
        let mut m = LpModel::new();
        m.add_var("x1", -0.75, 0.0, f64::INFINITY);
        m.add_var("x2", 150.0, 0.0, f64::INFINITY);
        m.add_var("x3", -0.02, 0.0, f64::INFINITY);
        m.add_var("x4", 6.0, 0.0, f64::INFINITY);
        m.add_constraint("r1", vec![0.25, -60.0, -0.04, 9.0], RelOp::Le, 0.0).unwrap();
        m.add_constraint("r2", vec![0.5, -90.0, -0.02, 3.0], RelOp::Le, 0.0).unwrap();
        m.add_constraint("r3", vec![0.0, 0.0, 1.0, 0.0], RelOp::Le, 1.0).unwrap();
        let s = solve_ok(&m);
        assert!((s.objective + 0.05).abs() < 1e-9, "{s:?}");
    }

    #[test]
    fn iteration_limit() {
        let mut m = LpModel::new();
        m.add_var("x", -1.0, 0.0, 1.0);
        m.add_var("y", -1.0, 0.0, 1.0);
        let s = m
            .solve(&SimplexOptions { max_iterations: 1, tol: 1e-9 })
            .unwrap();
        assert_eq!(s.status, LpStatus::IterationLimit);
    }

    #[test]
    fn rejects_bad_models() {
        let mut m = LpModel::new();
        m.add_var("x", f64::NAN, 0.0, 1.0);
        assert!(m.solve(&SimplexOptions::default()).is_err());
        let mut m = LpModel::new();
        m.add_var("x", 1.0, 0.0, 1.0);
        assert!(m.add_constraint("c", vec![1.0, 2.0], RelOp::Le, 1.0).is_err());
    }
}

//! Multi-start ε-improvement local search.
//!
//! [`improve`] walks from a feasible start to the best strictly improving
//! neighbor until none is left, once per step size in a decreasing schedule.
//! [`multi_start`] runs it from the `n2` best of `n1` random samples, keeps
//! the best result, and when the results disagree restarts once more from
//! their normalized mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::portfolio::{is_feasible, mean_portfolio, normalize, ConstraintSet, Portfolio};
use crate::risk::{expected_return, risk, RiskSpec};
use crate::sampler::{sample_batch, SamplerConfig};
use crate::scenario::ScenarioSet;

/// How the return floor `mu` enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MuMode {
    /// Portfolios below the floor score `+inf`.
    #[default]
    Reject,
    /// `risk + weight * shortfall^2`.
    Penalty { weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub epsilons: Vec<f64>,
    pub n2: usize,
    pub max_iters_per_stage: usize,
    pub objective: RiskSpec,
    #[serde(default)]
    pub mu_mode: MuMode,
    /// Fan out neighbor evaluation and the `n2` improvements over threads.
    /// Results do not depend on this flag.
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

fn default_parallel() -> bool {
    true
}

impl SearchConfig {
    pub fn new(objective: RiskSpec) -> Self {
        SearchConfig {
            epsilons: vec![0.05, 0.01, 0.001],
            n2: 10,
            max_iters_per_stage: 10_000,
            objective,
            mu_mode: MuMode::Reject,
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSearch(m));
        if self.epsilons.is_empty() {
            return bad("epsilons must not be empty".into());
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad(format!("epsilons must be positive, got {:?}", self.epsilons));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!(
                "epsilons must be strictly decreasing, got {:?}",
                self.epsilons
            ));
        }
        if self.n2 == 0 {
            return bad("n2 must be at least 1".into());
        }
        if self.max_iters_per_stage == 0 {
            return bad("max_iters_per_stage must be at least 1".into());
        }
        if let MuMode::Penalty { weight } = self.mu_mode {
            if !(weight.is_finite() && weight > 0.0) {
                return bad(format!("penalty weight must be > 0, got {weight}"));
            }
        }
        self.objective.validate()
    }
}

/// The minimized function: a risk functional of the loss distribution with
/// the return floor handled per [`MuMode`].
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    scen: &'a ScenarioSet,
    spec: RiskSpec,
    mu: Option<f64>,
    mode: MuMode,
}

impl<'a> Objective<'a> {
    pub fn new(scen: &'a ScenarioSet, spec: RiskSpec, c: &ConstraintSet, mode: MuMode) -> Self {
        Objective {
            scen,
            spec,
            mu: c.mu,
            mode,
        }
    }

    pub fn scenarios(&self) -> &'a ScenarioSet {
        self.scen
    }

    pub fn spec(&self) -> RiskSpec {
        self.spec
    }

    /// Objective value; `NaN` only if the portfolio does not fit the
    /// scenario set, which callers rule out up front.
    pub fn value(&self, x: &Portfolio) -> f64 {
        self.try_value(x).unwrap_or(f64::NAN)
    }

    pub fn try_value(&self, x: &Portfolio) -> Result<f64> {
        let loss = self.scen.evaluate_weights(x.weights())?;
        let base = risk(&loss, &self.spec)?;
        let Some(mu) = self.mu else {
            return Ok(base);
        };
        let shortfall = mu - expected_return(&loss);
        if shortfall <= 0.0 {
            return Ok(base);
        }
        Ok(match self.mode {
            MuMode::Reject => f64::INFINITY,
            MuMode::Penalty { weight } => base + weight * shortfall * shortfall,
        })
    }
}

pub fn objective(
    x: &Portfolio,
    scen: &ScenarioSet,
    spec: &RiskSpec,
    c: &ConstraintSet,
    mode: MuMode,
) -> Result<f64> {
    Objective::new(scen, *spec, c, mode).try_value(x)
}

/// Candidates closer than this to the current point count as no-ops.
pub const NOOP_TOL: f64 = 1e-12;

/// The up to `2a` portfolios one ±`eps` step away from `x`, in order
/// (asset 0 `+`, asset 0 `-`, asset 1 `+`, ...).
///
/// A step never moves a weight across zero: it stops at zero and the asset
/// leaves the portfolio. Steps that bounds or normalization turn into no-ops
/// are skipped and candidates that cannot be normalized are dropped.
pub fn neighbors(x: &Portfolio, eps: f64, c: &ConstraintSet) -> Vec<Portfolio> {
    let mut out = Vec::with_capacity(2 * x.len());
    for j in 0..x.len() {
        for dir in [1.0, -1.0] {
            if let Some(y) = step(x, j, dir * eps, c) {
                out.push(y);
            }
        }
    }
    out
}

fn step(x: &Portfolio, j: usize, delta: f64, c: &ConstraintSet) -> Option<Portfolio> {
    let w = x.weights()[j];
    let mut moved = (w + delta).clamp(c.lower(j), c.upper(j));
    if (w > 0.0 && moved < 0.0) || (w < 0.0 && moved > 0.0) {
        moved = 0.0;
    }
    if moved == w {
        return None;
    }
    let mut y = x.clone();
    y.weights_mut()[j] = moved;
    let y = normalize(&y, c).ok()?;
    // normalization can undo the move entirely, e.g. on a one-asset side
    if y.max_abs_diff(x) <= NOOP_TOL {
        return None;
    }
    Some(y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImproveOutcome {
    pub portfolio: Portfolio,
    pub objective: f64,
    pub iters_per_stage: Vec<usize>,
    /// Objective after the start and after every accepted move.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Greedy best-improvement descent over the ε schedule.
pub fn improve(
    x0: &Portfolio,
    cfg: &SearchConfig,
    scen: &ScenarioSet,
    c: &ConstraintSet,
) -> Result<ImproveOutcome> {
    cfg.validate()?;
    let obj = Objective::new(scen, cfg.objective, c, cfg.mu_mode);
    improve_with(x0, cfg, &obj, c)
}

fn improve_with(
    x0: &Portfolio,
    cfg: &SearchConfig,
    obj: &Objective<'_>,
    c: &ConstraintSet,
) -> Result<ImproveOutcome> {
    let feas = is_feasible(x0, c, None, crate::portfolio::DEFAULT_FEASIBILITY_TOL)?;
    if !feas.is_feasible() {
        return Err(Error::InfeasibleStart(feas.to_string()));
    }
    let mut current = x0.clone();
    let mut current_value = obj.try_value(&current)?;
    let mut trace = vec![current_value];
    let mut evaluations = 1;
    let mut iters_per_stage = Vec::with_capacity(cfg.epsilons.len());

    for &eps in &cfg.epsilons {
        let mut iters = 0;
        loop {
            let candidates = neighbors(&current, eps, c);
            let values: Vec<f64> = if cfg.parallel {
                candidates.par_iter().map(|y| obj.value(y)).collect()
            } else {
                candidates.iter().map(|y| obj.value(y)).collect()
            };
            evaluations += values.len();
            // first strict minimum wins, i.e. lowest (asset, +) on ties
            let mut best: Option<usize> = None;
            for (i, v) in values.iter().enumerate() {
                if *v < current_value && best.is_none_or(|b| *v < values[b]) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            if iters == cfg.max_iters_per_stage {
                return Err(Error::IterationCapExceeded {
                    eps,
                    cap: cfg.max_iters_per_stage,
                });
            }
            current = candidates.into_iter().nth(b).expect("index in range");
            current_value = values[b];
            trace.push(current_value);
            iters += 1;
        }
        iters_per_stage.push(iters);
    }

    Ok(ImproveOutcome {
        portfolio: current,
        objective: current_value,
        iters_per_stage,
        trace,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartTrace {
    pub start: Portfolio,
    pub start_objective: f64,
    pub final_portfolio: Portfolio,
    pub final_objective: f64,
    pub iters_per_stage: Vec<usize>,
    pub trace: Vec<f64>,
}

impl StartTrace {
    fn new(start: Portfolio, out: ImproveOutcome) -> Self {
        StartTrace {
            start,
            start_objective: out.trace[0],
            final_portfolio: out.portfolio,
            final_objective: out.objective,
            iters_per_stage: out.iters_per_stage,
            trace: out.trace,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub best: Portfolio,
    pub objective_value: f64,
    /// Iteration counts of the run that produced `best`.
    pub iters_per_stage: Vec<usize>,
    pub starts: Vec<StartTrace>,
    /// The improved starts disagreed and a restart from their mean ran.
    pub averaged_restart_used: bool,
    /// The averaged restart produced `best`.
    pub averaged_restart_selected: bool,
    pub averaged_restart: Option<StartTrace>,
    /// Why the averaged restart could not run (its mean failed to normalize).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub averaged_restart_skipped: Option<String>,
    pub total_evaluations: usize,
}

/// Two improved portfolios closer than this in the max norm count as equal.
pub const AGREEMENT_TOL: f64 = 1e-6;

pub fn multi_start(
    scen: &ScenarioSet,
    c: &ConstraintSet,
    scfg: &SamplerConfig,
    lcfg: &SearchConfig,
) -> Result<SolveReport> {
    lcfg.validate()?;
    scfg.validate(scen.n_assets())?;
    c.validate(scen.n_assets())?;
    let obj = Objective::new(scen, lcfg.objective, c, lcfg.mu_mode);
    let batch = sample_batch(scfg, &obj, lcfg.parallel)?;
    let mut total_evaluations = batch.len();

    let elite: Vec<&Portfolio> = batch.iter().take(lcfg.n2).map(|s| &s.portfolio).collect();
    let run = |x: &&Portfolio| improve_with(x, lcfg, &obj, c);
    let outcomes: Vec<ImproveOutcome> = if lcfg.parallel {
        elite.par_iter().map(run).collect::<Result<_>>()?
    } else {
        elite.iter().map(run).collect::<Result<_>>()?
    };
    total_evaluations += outcomes.iter().map(|o| o.evaluations).sum::<usize>();

    let finals: Vec<Portfolio> = outcomes.iter().map(|o| o.portfolio.clone()).collect();
    let starts: Vec<StartTrace> = elite
        .iter()
        .zip(outcomes)
        .map(|(s, o)| StartTrace::new((*s).clone(), o))
        .collect();

    let mut best_idx = 0;
    for (i, s) in starts.iter().enumerate() {
        if s.final_objective < starts[best_idx].final_objective {
            best_idx = i;
        }
    }
    let mut best = starts[best_idx].final_portfolio.clone();
    let mut best_value = starts[best_idx].final_objective;
    let mut iters_per_stage = starts[best_idx].iters_per_stage.clone();

    let disagree = finals
        .iter()
        .enumerate()
        .any(|(i, a)| finals[i + 1..].iter().any(|b| a.max_abs_diff(b) > AGREEMENT_TOL));

    let mut averaged_restart = None;
    let mut averaged_restart_selected = false;
    let mut averaged_restart_skipped = None;
    if disagree {
        match normalize(&mean_portfolio(&finals)?, c) {
            Ok(mean) => {
                let out = improve_with(&mean, lcfg, &obj, c)?;
                total_evaluations += out.evaluations;
                if out.objective < best_value {
                    best = out.portfolio.clone();
                    best_value = out.objective;
                    iters_per_stage = out.iters_per_stage.clone();
                    averaged_restart_selected = true;
                }
                averaged_restart = Some(StartTrace::new(mean, out));
            }
            Err(e @ (Error::EmptySide { .. } | Error::NonConvergent { .. })) => {
                averaged_restart_skipped = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
    }

    Ok(SolveReport {
        best,
        objective_value: best_value,
        iters_per_stage,
        starts,
        averaged_restart_used: averaged_restart.is_some(),
        averaged_restart_selected,
        averaged_restart,
        averaged_restart_skipped,
        total_evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::Bound;

    fn toy() -> ScenarioSet {
        ScenarioSet::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                vec![0.02, -0.01, 0.005],
                vec![-0.01, 0.02, 0.000],
                vec![0.01, 0.00, -0.004],
                vec![-0.02, 0.01, 0.003],
            ],
            "weekly",
        )
        .unwrap()
    }

    #[test]
    fn objective_passthrough_and_mu_modes() {
        let scen = toy();
        let spec = RiskSpec::variance();
        let x = Portfolio::new(vec![0.2, 0.3, 0.5]);
        let base = risk(&scen.evaluate_weights(x.weights()).unwrap(), &spec).unwrap();
        let c = ConstraintSet::long_only();
        assert_eq!(objective(&x, &scen, &spec, &c, MuMode::Reject).unwrap(), base);

        let slack = c.clone().with_mu(Some(-1.0));
        for mode in [MuMode::Reject, MuMode::Penalty { weight: 10.0 }] {
            assert_eq!(objective(&x, &scen, &spec, &slack, mode).unwrap(), base);
        }

        let tight = c.with_mu(Some(0.01));
        assert_eq!(
            objective(&x, &scen, &spec, &tight, MuMode::Reject).unwrap(),
            f64::INFINITY
        );
        let ret = expected_return(&scen.evaluate_weights(x.weights()).unwrap());
        let pen = objective(&x, &scen, &spec, &tight, MuMode::Penalty { weight: 10.0 }).unwrap();
        assert!((pen - (base + 10.0 * (0.01 - ret).powi(2))).abs() < 1e-15);
    }

    #[test]
    fn neighbor_count_and_boundary_skip() {
        let c = ConstraintSet::default();
        let mut w = vec![0.0; 30];
        w[0] = 0.5;
        w[1] = 0.5;
        w[2] = 0.3;
        w[3] = -0.1;
        w[4] = -0.1;
        w[5] = -0.1;
        let x = Portfolio::new(w);
        let ns = neighbors(&x, 0.05, &c);
        assert!(ns.len() <= 60);
        // asset 0 sits at its upper bound, so its + move is skipped and the
        // first candidate is its - move
        assert!(ns[0].weights()[0] < 0.5);
    }

    #[test]
    fn sign_flip_truncates_to_zero() {
        let c = ConstraintSet {
            lower: Bound::Uniform(0.0),
            upper: Bound::Uniform(1.0),
            long_sum: 1.0,
            short_sum: 0.0,
            ..ConstraintSet::default()
        };
        let x = Portfolio::new(vec![0.997, 0.003]);
        let y = step(&x, 1, -0.01, &c).unwrap();
        assert_eq!(y.weights()[1], 0.0);
        assert_eq!(y.weights()[0], 1.0);

        let c = ConstraintSet {
            lower: Bound::Uniform(-1.0),
            upper: Bound::Uniform(1.0),
            long_sum: 1.0,
            short_sum: -0.5,
            ..ConstraintSet::default()
        };
        let x = Portfolio::new(vec![0.997, 0.003, -0.5]);
        let y = step(&x, 1, -0.01, &c).unwrap();
        assert_eq!(y.weights()[1], 0.0);
    }

    #[test]
    fn zero_weight_may_enter_either_side() {
        let c = ConstraintSet {
            lower: Bound::Uniform(-0.5),
            upper: Bound::Uniform(1.5),
            long_sum: 1.3,
            short_sum: -0.3,
            ..ConstraintSet::default()
        };
        let x = Portfolio::new(vec![1.3, -0.3, 0.0]);
        let up = step(&x, 2, 0.1, &c).unwrap();
        assert!(up.weights()[2] > 0.0);
        assert!((up.long_sum() - 1.3).abs() < 1e-12);
        let down = step(&x, 2, -0.1, &c).unwrap();
        assert!(down.weights()[2] < 0.0);
        assert!((down.short_sum() + 0.3).abs() < 1e-12);
    }

    #[test]
    fn single_asset_universe_is_a_fixed_point() {
        let scen =
            ScenarioSet::new(vec!["A".into()], vec![vec![0.01], vec![-0.02]], "w").unwrap();
        let c = ConstraintSet::long_only();
        let cfg = SearchConfig::new(RiskSpec::variance());
        let out = improve(&Portfolio::new(vec![1.0]), &cfg, &scen, &c).unwrap();
        assert_eq!(out.portfolio.weights(), &[1.0]);
        assert_eq!(out.iters_per_stage, vec![0, 0, 0]);
    }

    #[test]
    fn improving_a_local_optimum_changes_nothing() {
        let scen = toy();
        let c = ConstraintSet::long_only();
        let cfg = SearchConfig::new(RiskSpec::variance());
        let first = improve(&Portfolio::new(vec![1.0, 0.0, 0.0]), &cfg, &scen, &c).unwrap();
        let again = improve(&first.portfolio, &cfg, &scen, &c).unwrap();
        assert_eq!(again.portfolio, first.portfolio);
        assert_eq!(again.iters_per_stage, vec![0, 0, 0]);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let scen = toy();
        let cfg = SearchConfig::new(RiskSpec::variance());
        let r = improve(
            &Portfolio::new(vec![0.5, 0.2, 0.2]),
            &cfg,
            &scen,
            &ConstraintSet::long_only(),
        );
        assert!(matches!(r, Err(Error::InfeasibleStart(_))));
    }

    #[test]
    fn iteration_cap() {
        let scen = toy();
        let mut cfg = SearchConfig::new(RiskSpec::variance());
        cfg.max_iters_per_stage = 1;
        cfg.epsilons = vec![0.001];
        let r = improve(
            &Portfolio::new(vec![1.0, 0.0, 0.0]),
            &cfg,
            &scen,
            &ConstraintSet::long_only(),
        );
        assert!(matches!(r, Err(Error::IterationCapExceeded { cap: 1, .. })));
    }

    #[test]
    fn config_validation() {
        let mut cfg = SearchConfig::new(RiskSpec::variance());
        assert!(cfg.validate().is_ok());
        cfg.epsilons = vec![];
        assert!(cfg.validate().is_err());
        cfg.epsilons = vec![0.01, 0.05];
        assert!(cfg.validate().is_err());
        cfg.epsilons = vec![0.05, 0.0];
        assert!(cfg.validate().is_err());
        cfg.epsilons = vec![0.05];
        cfg.mu_mode = MuMode::Penalty { weight: 0.0 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_elite_start_never_averages() {
        let scen = toy();
        let c = ConstraintSet {
            long_frac: 0.67,
            ..ConstraintSet::long_only()
        };
        let scfg = SamplerConfig::new(c.clone(), 50, 11);
        let mut lcfg = SearchConfig::new(RiskSpec::variance());
        lcfg.n2 = 1;
        let rep = multi_start(&scen, &c, &scfg, &lcfg).unwrap();
        assert!(!rep.averaged_restart_used);
        assert_eq!(rep.starts.len(), 1);
        assert_eq!(rep.objective_value, rep.starts[0].final_objective);
    }
}

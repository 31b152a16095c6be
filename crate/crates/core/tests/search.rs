mod common;

use aex::baselines::grid_oracle;
use aex::localsearch::{improve, multi_start, neighbors, Objective, MuMode, SearchConfig};
use aex::portfolio::{is_feasible, ConstraintSet, Portfolio};
use aex::sampler::{sample_batch, sample_portfolio, sample_stream, support_sizes, SamplerConfig};
use aex::{RiskSpec, ScenarioSet};
use common::{fixture, DAX, DJIA};

const TOL: f64 = 1e-8;

fn feasible(x: &Portfolio, c: &ConstraintSet) -> bool {
    is_feasible(x, c, None, TOL).unwrap().is_feasible()
}

#[test]
fn long_support_coverage_is_uniform() {
    let c = ConstraintSet::default();
    let cfg = SamplerConfig::new(c, 100_000, 11);
    let mut hits = [0usize; 30];
    for i in 0..cfg.n1 {
        let x = sample_portfolio(&cfg, 30, &mut sample_stream(cfg.seed, i as u64)).unwrap();
        for (j, w) in x.weights().iter().enumerate() {
            if *w > 0.0 {
                hits[j] += 1;
            }
        }
    }
    for (j, h) in hits.iter().enumerate() {
        let f = *h as f64 / cfg.n1 as f64;
        assert!((f - 0.3).abs() <= 0.02, "asset {j}: long frequency {f}");
    }
}

#[test]
fn full_batch_is_feasible_sparse_and_sorted() {
    let scen = fixture(DJIA);
    let c = ConstraintSet::default();
    let cfg = SamplerConfig::new(c.clone(), 10_000, 5);
    let obj = Objective::new(&scen, RiskSpec::cvar(0.95).unwrap(), &c, MuMode::Reject);
    let batch = sample_batch(&cfg, &obj, true).unwrap();
    assert_eq!(batch.len(), 10_000);
    let (nl, ns) = support_sizes(&c, 30);
    for s in &batch {
        assert!(feasible(&s.portfolio, &c));
        let nz = s.portfolio.nonzero_count();
        assert!((2..=nl + ns).contains(&nz));
    }
    assert!(batch.windows(2).all(|w| w[0].objective <= w[1].objective));
    let again = sample_batch(&cfg, &obj, false).unwrap();
    assert_eq!(batch, again);
}

#[test]
fn singleton_batch() {
    let scen = fixture(DAX);
    let c = ConstraintSet::long_only();
    let obj = Objective::new(&scen, RiskSpec::variance(), &c, MuMode::Reject);
    let batch = sample_batch(&SamplerConfig::new(c, 1, 0), &obj, true).unwrap();
    assert_eq!(batch.len(), 1);
}

#[test]
fn neighbors_stay_feasible_and_bounded() {
    let c = ConstraintSet::default();
    let cfg = SamplerConfig::new(c.clone(), 1, 9);
    for i in 0..50 {
        let x = sample_portfolio(&cfg, 30, &mut sample_stream(9, i)).unwrap();
        for eps in [0.05, 0.01, 0.001] {
            let nb = neighbors(&x, eps, &c);
            assert!(nb.len() <= 60);
            assert!(nb.iter().all(|y| feasible(y, &c)));
        }
    }
}

fn search_case() -> (ScenarioSet, ConstraintSet, SearchConfig) {
    let scen = fixture(DAX);
    let c = ConstraintSet::default();
    let mut s = SearchConfig::new(RiskSpec::cvar(0.95).unwrap());
    s.epsilons = vec![0.05, 0.02, 0.01];
    (scen, c, s)
}

#[test]
fn descent_is_strict_and_ends_locally_optimal() {
    let (scen, c, s) = search_case();
    let obj = Objective::new(&scen, s.objective, &c, s.mu_mode);
    let cfg = SamplerConfig::new(c.clone(), 1, 21);
    for i in 0..5 {
        let x0 = sample_portfolio(&cfg, 30, &mut sample_stream(21, i)).unwrap();
        let out = improve(&x0, &s, &scen, &c).unwrap();
        assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(out.trace.len(), 1 + out.iters_per_stage.iter().sum::<usize>());
        assert!(feasible(&out.portfolio, &c));
        let last = *s.epsilons.last().unwrap();
        for y in neighbors(&out.portfolio, last, &c) {
            assert!(obj.value(&y) >= out.objective);
        }
    }
}

#[test]
fn parallel_and_serial_reports_agree() {
    let (scen, c, mut s) = search_case();
    let cfg = SamplerConfig::new(c.clone(), 2000, 3);
    s.parallel = true;
    let a = multi_start(&scen, &c, &cfg, &s).unwrap();
    s.parallel = false;
    let b = multi_start(&scen, &c, &cfg, &s).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.objective_value, {
        let obj = Objective::new(&scen, s.objective, &c, s.mu_mode);
        obj.value(&a.best)
    });
    assert_eq!(a.iters_per_stage.len(), 3);
}

#[test]
fn one_elite_start_skips_the_restart() {
    let (scen, c, mut s) = search_case();
    s.n2 = 1;
    let rep = multi_start(&scen, &c, &SamplerConfig::new(c.clone(), 500, 1), &s).unwrap();
    assert!(!rep.averaged_restart_used);
    assert_eq!(rep.starts.len(), 1);
}

#[test]
fn three_asset_min_variance_matches_fine_grid() {
    let scen = fixture(DJIA).subset(&[0, 1, 2]).unwrap();
    let c = ConstraintSet::long_only();
    let s = SearchConfig::new(RiskSpec::variance());
    let rep = multi_start(&scen, &c, &SamplerConfig::new(c.clone(), 1000, 4), &s).unwrap();
    let grid = grid_oracle(&scen, &c, &RiskSpec::variance(), 0.001).unwrap();
    assert!(
        (rep.objective_value - grid.objective).abs() <= 1e-4,
        "{} vs {}",
        rep.objective_value,
        grid.objective
    );
}

#[test]
fn penalty_mode_reaches_the_floor() {
    let scen = fixture(DJIA);
    let means = scen.asset_means();
    let best = means.iter().copied().fold(f64::MIN, f64::max);
    let mu = 0.8 * best;
    let c = ConstraintSet::long_only().with_mu(Some(mu));
    let mut s = SearchConfig::new(RiskSpec::variance());
    s.mu_mode = MuMode::Penalty { weight: 1e4 };
    let rep = multi_start(&scen, &c, &SamplerConfig::new(c.clone(), 2000, 8), &s).unwrap();
    let ret: f64 = rep.best.weights().iter().zip(&means).map(|(w, m)| w * m).sum();
    assert!(ret >= mu - 1e-3 * mu.abs(), "return {ret} vs floor {mu}");
}

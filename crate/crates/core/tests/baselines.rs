mod common;

use aex::baselines::qp::MarkowitzProblem;
use aex::baselines::{
    build_cvar_lp, estimate_grid_points, grid_oracle, solve_cvar_lp, solve_markowitz_long_only,
    write_mps, BaselineStatus,
};
use aex::portfolio::{is_feasible, Bound, ConstraintSet, Portfolio};
use aex::sampler::{sample_portfolio, sample_stream, SamplerConfig};
use aex::{evaluate, risk, RiskSpec};
use common::{cvar_oracle, fixture, FIXTURES, DJIA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn qp_matches_fine_grid_on_three_assets() {
    let scen = fixture(DJIA).subset(&[3, 7, 12]).unwrap();
    let qp = solve_markowitz_long_only(&scen, None).unwrap();
    let grid = grid_oracle(&scen, &ConstraintSet::long_only(), &RiskSpec::variance(), 0.001).unwrap();
    assert_eq!(qp.status, BaselineStatus::Optimal);
    assert!((qp.objective - grid.objective).abs() <= 1e-5);
    assert!(grid.objective >= qp.objective - 1e-15);
}

#[test]
fn qp_is_first_order_optimal_on_fixtures() {
    for f in FIXTURES {
        let scen = fixture(f);
        let means = scen.asset_means();
        let top = means.iter().copied().fold(f64::MIN, f64::max);
        for mu in [None, Some(0.5 * top)] {
            let sol = solve_markowitz_long_only(&scen, mu).unwrap();
            assert_eq!(sol.status, BaselineStatus::Optimal);
            let p = MarkowitzProblem::new(&scen, mu).unwrap();
            assert!(p.projected_gradient_norm(sol.portfolio.weights()) <= 1e-8);
            let loss = evaluate(&sol.portfolio, &scen).unwrap();
            let var = risk(&loss, &RiskSpec::variance()).unwrap();
            assert!((var - sol.objective).abs() <= 1e-15);
        }
    }
}

/// 130/30 budgets with a short bound loose enough that five assets can hold
/// both sides without netting.
fn five_asset_constraints() -> ConstraintSet {
    ConstraintSet {
        lower: Bound::Uniform(-0.3),
        ..ConstraintSet::default()
    }
}

#[test]
fn cvar_lp_matches_grid_on_five_assets() {
    let scen = fixture(DJIA).subset(&[0, 5, 10, 15, 20]).unwrap();
    let c = five_asset_constraints();
    let lp = solve_cvar_lp(&scen, &c, 0.95, None).unwrap();
    let spec = RiskSpec::cvar(0.95).unwrap();
    assert!(estimate_grid_points(&c, 5, 0.01) < 1e8);
    let grid = grid_oracle(&scen, &c, &spec, 0.01).unwrap();
    assert!(
        (lp.objective - grid.objective).abs() <= 1e-3,
        "lp {} grid {}",
        lp.objective,
        grid.objective
    );
    assert!(grid.objective >= lp.objective - 1e-12);
}

#[test]
fn cvar_lp_objective_is_the_empirical_cvar() {
    for f in FIXTURES {
        let scen = fixture(f);
        for c in [ConstraintSet::default(), ConstraintSet::long_only()] {
            for alpha in [0.9, 0.95, 0.99] {
                let sol = solve_cvar_lp(&scen, &c, alpha, None).unwrap();
                assert_eq!(sol.status, BaselineStatus::Optimal);
                let loss = evaluate(&sol.portfolio, &scen).unwrap();
                assert!((sol.objective - cvar_oracle(&loss.values, alpha)).abs() <= 1e-7);
                if sol.stats.complementary == Some(true) {
                    let feas = is_feasible(&sol.portfolio, &c, None, 1e-6).unwrap();
                    assert!(feas.is_feasible(), "{feas}");
                }
            }
        }
    }
}

#[test]
fn cvar_lp_bounds_random_portfolios_from_below() {
    let scen = fixture(DJIA);
    let c = ConstraintSet::default();
    let lp = solve_cvar_lp(&scen, &c, 0.95, None).unwrap();
    let spec = RiskSpec::cvar(0.95).unwrap();
    let cfg = SamplerConfig::new(c, 1, 77);
    for i in 0..1000 {
        let x = sample_portfolio(&cfg, 30, &mut sample_stream(77, i)).unwrap();
        let v = risk(&evaluate(&x, &scen).unwrap(), &spec).unwrap();
        assert!(v >= lp.objective - 1e-9);
    }
}

#[test]
fn grid_beats_every_spot_checked_lattice_point() {
    let scen = fixture(DJIA).subset(&[2, 4, 6]).unwrap();
    let c = ConstraintSet::long_only();
    let spec = RiskSpec::cvar(0.95).unwrap();
    let grid = grid_oracle(&scen, &c, &spec, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let a = rng.random_range(0..=100);
        let b = rng.random_range(0..=100 - a);
        let x = Portfolio::new(vec![a as f64 / 100.0, b as f64 / 100.0, (100 - a - b) as f64 / 100.0]);
        let v = risk(&evaluate(&x, &scen).unwrap(), &spec).unwrap();
        assert!(grid.objective <= v);
    }
    let lp = solve_cvar_lp(&scen, &c, 0.95, None).unwrap();
    assert!(grid.objective >= lp.objective - 1e-12);
}

#[test]
fn cvar_frontier_is_monotone() {
    let scen = fixture(DJIA);
    let c = ConstraintSet::long_only();
    let means = scen.asset_means();
    let top = means.iter().copied().fold(f64::MIN, f64::max);
    let mut last = f64::NEG_INFINITY;
    for k in 0..8 {
        let mu = top * k as f64 / 8.0;
        let sol = solve_cvar_lp(&scen, &c, 0.95, Some(mu)).unwrap();
        assert_eq!(sol.status, BaselineStatus::Optimal);
        assert!(sol.objective >= last - 1e-12);
        last = sol.objective;
    }
}

#[test]
fn mps_dump_lists_every_row_and_column() {
    let scen = fixture(DJIA).subset(&[0, 1, 2, 3]).unwrap();
    let lp = build_cvar_lp(&scen, &ConstraintSet::default(), 0.95, None).unwrap();
    let mut buf = Vec::new();
    write_mps(&mut buf, &lp.model, "cvar").unwrap();
    let text = String::from_utf8(buf).unwrap();
    let sections: Vec<&str> = text.lines().filter(|l| !l.starts_with([' ', '*'])).collect();
    assert_eq!(sections, ["NAME          cvar", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"]);
    let rows = text.lines().filter(|l| l.starts_with(" G ") || l.starts_with(" E ")).count();
    assert_eq!(rows, lp.model.constraints.len());
    assert!(text.contains(" FR BND       ZETA"));
}

//! Heuristic risk minimization for long/short ("active extension") equity
//! portfolios over return scenarios.
//!
//! A batch of sparse random portfolios is drawn, the best few are improved by
//! coordinate moves of shrinking size, and the winner is compared against
//! exact convex baselines where those exist. The risk measure is pluggable:
//! variance, standard deviation, mean absolute deviation, Value-at-Risk and
//! Conditional Value-at-Risk.
//!
//! ```
//! use aex::{ConstraintSet, RiskSpec, ScenarioSet};
//! use aex::localsearch::{multi_start, SearchConfig};
//! use aex::sampler::SamplerConfig;
//!
//! let rows = vec![
//!     vec![0.010, -0.004, 0.006],
//!     vec![-0.006, 0.008, 0.001],
//!     vec![0.004, 0.002, -0.003],
//!     vec![0.007, -0.005, 0.004],
//! ];
//! let scen = ScenarioSet::new(vec!["A".into(), "B".into(), "C".into()], rows, "week").unwrap();
//! let c = ConstraintSet::long_only();
//! let mut search = SearchConfig::new(RiskSpec::variance());
//! search.n2 = 3;
//! let report = multi_start(&scen, &c, &SamplerConfig::new(c.clone(), 200, 7), &search).unwrap();
//! assert!((report.best.long_sum() - 1.0).abs() < 1e-9);
//! ```

pub mod baselines;
pub mod cli;
pub mod config;
pub mod error;
pub mod localsearch;
pub mod portfolio;
pub mod risk;
pub mod sampler;
pub mod scenario;

pub use error::{Error, ErrorClass, Result};
pub use portfolio::{normalize, Bound, ConstraintSet, Portfolio};
pub use risk::{risk, RiskKind, RiskSpec};
pub use scenario::{evaluate, LossDistribution, ScenarioSet};

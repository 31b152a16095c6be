//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 42
//!
//! [data]
//! path = "prices.csv"        # relative to this file
//! format = "prices"          # or "returns"
//!
//! [risk]
//! kind = "cvar"
//! alpha = 0.95
//!
//! [constraints]
//! preset = "active"          # or "long-only"; the fields below override it
//! upper = 0.5
//!
//! [sampler]
//! n1 = 10000
//!
//! [search]
//! epsilons = [0.05, 0.02, 0.01]
//! n2 = 10
//! ```
//!
//! Every section is optional except `data.path`, which may also come from the
//! command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::localsearch::{MuMode, SearchConfig};
use crate::portfolio::{Bound, ConstraintSet};
use crate::risk::{RiskKind, RiskSpec};
use crate::sampler::SamplerConfig;
use crate::scenario::{load_prices, load_returns, to_returns, ScenarioSet, TableFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    #[default]
    Prices,
    Returns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub format: DataFormat,
    pub delimiter: char,
    pub period_label: String,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            path: None,
            format: DataFormat::Prices,
            delimiter: ',',
            period_label: "week".into(),
        }
    }
}

impl DataConfig {
    pub fn load(&self) -> Result<ScenarioSet> {
        let path = self
            .path
            .as_ref()
            .ok_or_else(|| Error::Config("data.path is required (or pass --data)".into()))?;
        if !self.delimiter.is_ascii() {
            return Err(Error::Config(format!(
                "data.delimiter must be a single ASCII character, got {:?}",
                self.delimiter
            )));
        }
        let fmt = TableFormat {
            delimiter: self.delimiter as u8,
        };
        match self.format {
            DataFormat::Prices => {
                Ok(to_returns(&load_prices(path, &fmt)?)?.with_period_label(&self.period_label))
            }
            DataFormat::Returns => load_returns(path, &fmt, &self.period_label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    /// Confidence levels for the risk report.
    pub alphas: Vec<f64>,
    pub baseline: bool,
    pub out: PathBuf,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            alphas: vec![0.9, 0.95, 0.99],
            baseline: true,
            out: PathBuf::from("out"),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub data: DataConfig,
    pub risk: RiskSpec,
    pub constraints: ConstraintSet,
    pub n1: usize,
    pub search: SearchConfig,
    pub report: ReportConfig,
    pub mu_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let risk = RiskSpec::variance();
        ExperimentConfig {
            seed: None,
            data: DataConfig::default(),
            risk,
            constraints: ConstraintSet::default(),
            n1: 10_000,
            search: SearchConfig::new(risk),
            report: ReportConfig::default(),
            mu_grid: Vec::new(),
        }
    }
}

// File layout; every field optional so defaults can fill in.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    #[serde(default)]
    data: RawData,
    #[serde(default)]
    risk: RawRisk,
    #[serde(default)]
    constraints: RawConstraints,
    #[serde(default)]
    sampler: RawSampler,
    #[serde(default)]
    search: RawSearch,
    #[serde(default)]
    report: RawReport,
    #[serde(default)]
    frontier: RawFrontier,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    path: Option<PathBuf>,
    format: Option<DataFormat>,
    delimiter: Option<char>,
    period_label: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRisk {
    kind: Option<RiskKind>,
    alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraints {
    preset: Option<String>,
    lower: Option<Bound>,
    upper: Option<Bound>,
    long_sum: Option<f64>,
    short_sum: Option<f64>,
    mu: Option<f64>,
    long_frac: Option<f64>,
    short_frac: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampler {
    n1: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    epsilons: Option<Vec<f64>>,
    n2: Option<usize>,
    max_iters_per_stage: Option<usize>,
    mu_mode: Option<MuMode>,
    parallel: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReport {
    alphas: Option<Vec<f64>>,
    baseline: Option<bool>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrontier {
    mu_grid: Option<Vec<f64>>,
}

pub fn constraint_preset(name: &str) -> Result<ConstraintSet> {
    match name {
        "active" | "130/30" => Ok(ConstraintSet::default()),
        "long-only" | "long_only" => Ok(ConstraintSet::long_only()),
        other => Err(Error::Config(format!(
            "constraints.preset must be \"active\" or \"long-only\", got {other:?}"
        ))),
    }
}

impl ExperimentConfig {
    /// Parses TOML text; relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = ExperimentConfig {
            seed: raw.seed,
            ..Default::default()
        };

        let d = raw.data;
        cfg.data.path = d.path.map(|p| if p.is_relative() { base_dir.join(p) } else { p });
        if let Some(f) = d.format {
            cfg.data.format = f;
        }
        if let Some(c) = d.delimiter {
            cfg.data.delimiter = c;
        }
        if let Some(l) = d.period_label {
            cfg.data.period_label = l;
        }

        let kind = raw.risk.kind.unwrap_or(RiskKind::Variance);
        cfg.risk = RiskSpec::with_default_alpha(kind, raw.risk.alpha)
            .map_err(|e| Error::Config(format!("risk: {e}")))?;

        let rc = raw.constraints;
        let mut c = match rc.preset.as_deref() {
            Some(p) => constraint_preset(p)?,
            None => ConstraintSet::default(),
        };
        if let Some(v) = rc.lower {
            c.lower = v;
        }
        if let Some(v) = rc.upper {
            c.upper = v;
        }
        if let Some(v) = rc.long_sum {
            c.long_sum = v;
        }
        if let Some(v) = rc.short_sum {
            c.short_sum = v;
        }
        if rc.mu.is_some() {
            c.mu = rc.mu;
        }
        if let Some(v) = rc.long_frac {
            c.long_frac = v;
        }
        if let Some(v) = rc.short_frac {
            c.short_frac = v;
        }
        cfg.constraints = c;

        if let Some(n1) = raw.sampler.n1 {
            cfg.n1 = n1;
        }
        let s = raw.search;
        if let Some(v) = s.epsilons {
            cfg.search.epsilons = v;
        }
        if let Some(v) = s.n2 {
            cfg.search.n2 = v;
        }
        if let Some(v) = s.max_iters_per_stage {
            cfg.search.max_iters_per_stage = v;
        }
        if let Some(v) = s.mu_mode {
            cfg.search.mu_mode = v;
        }
        if let Some(v) = s.parallel {
            cfg.search.parallel = v;
        }
        cfg.search.objective = cfg.risk;

        let r = raw.report;
        if let Some(v) = r.alphas {
            cfg.report.alphas = v;
        }
        if let Some(v) = r.baseline {
            cfg.report.baseline = v;
        }
        if let Some(v) = r.out {
            cfg.report.out = if v.is_relative() { base_dir.join(v) } else { v };
        }
        if let Some(v) = raw.frontier.mu_grid {
            cfg.mu_grid = v;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn set_risk(&mut self, risk: RiskSpec) {
        self.risk = risk;
        self.search.objective = risk;
    }

    /// Checks everything that does not depend on the data; error messages
    /// name the offending field.
    pub fn validate(&self) -> Result<()> {
        let field = |section: &str, e: Error| -> Error {
            let msg = match e {
                Error::InvalidSearch(m)
                | Error::InvalidSampler(m)
                | Error::InvalidConstraints(m)
                | Error::InvalidRiskSpec(m)
                | Error::Config(m) => m,
                other => other.to_string(),
            };
            Error::Config(format!("{section}.{msg}"))
        };
        self.risk.validate().map_err(|e| field("risk", e))?;
        self.search.validate().map_err(|e| field("search", e))?;
        if self.n1 == 0 {
            return Err(Error::Config("sampler.n1 must be at least 1".into()));
        }
        if let Some(a) = self.report.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::Config(format!(
                "report.alphas must lie in (0, 1), got {a}"
            )));
        }
        Ok(())
    }

    /// Data-dependent checks.
    pub fn validate_for(&self, n_assets: usize) -> Result<()> {
        self.validate()?;
        self.constraints.validate(n_assets).map_err(|e| match e {
            Error::InvalidConstraints(m) => Error::Config(format!("constraints.{m}")),
            other => other,
        })
    }

    pub fn sampler_config(&self, seed: u64) -> SamplerConfig {
        SamplerConfig::new(self.constraints.clone(), self.n1, seed)
    }

    /// Hex SHA-256 of the canonical JSON form of this configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

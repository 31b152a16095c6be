//! Price ingestion, return construction and the loss-distribution primitive.
//!
//! A [`ScenarioSet`] is a dense row-major matrix of simple period returns,
//! one row per equally likely scenario and one column per asset. Applying
//! weights to every row gives the [`LossDistribution`] that all risk
//! functionals consume.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::portfolio::Portfolio;

/// Options for reading delimited price or return tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableFormat {
    pub delimiter: u8,
}

impl Default for TableFormat {
    fn default() -> Self {
        TableFormat { delimiter: b',' }
    }
}

/// Dates × assets table of closing prices, columns in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub dates: Vec<String>,
    pub assets: Vec<String>,
    /// `prices[t][j]` is the price of asset `j` on `dates[t]`.
    pub prices: Vec<Vec<f64>>,
}

impl PriceTable {
    pub fn n_rows(&self) -> usize {
        self.prices.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }
}

pub fn load_prices(path: impl AsRef<Path>, format: &TableFormat) -> Result<PriceTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_prices(file, format)
}

pub fn parse_prices<R: Read>(reader: R, format: &TableFormat) -> Result<PriceTable> {
    let table = parse_table(reader, format)?;
    if table.prices.len() < 3 {
        return Err(Error::TooFewRows {
            needed: 3,
            found: table.prices.len(),
        });
    }
    Ok(table)
}

/// Reads a table whose cells are already simple returns (same layout as a
/// price table) straight into a scenario set.
pub fn load_returns(
    path: impl AsRef<Path>,
    format: &TableFormat,
    period_label: &str,
) -> Result<ScenarioSet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let table = parse_table(file, format)?;
    ScenarioSet::new(table.assets, table.prices, period_label)
}

fn parse_table<R: Read>(reader: R, format: &TableFormat) -> Result<PriceTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::MalformedRow {
            row: 1,
            reason: e.to_string(),
        })?,
        None => return Err(Error::TooFewRows { needed: 3, found: 0 }),
    };
    if header.len() < 2 {
        return Err(Error::MalformedRow {
            row: 1,
            reason: "header needs a date column and at least one asset".into(),
        });
    }
    let assets: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    for (j, name) in assets.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::MissingCell { row: 1, col: j + 2 });
        }
        if assets[..j].contains(name) {
            return Err(Error::MalformedRow {
                row: 1,
                reason: format!("duplicate asset identifier {name:?}"),
            });
        }
    }

    let mut dates: Vec<String> = Vec::new();
    let mut prices = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            row: line,
            reason: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() > header.len() {
            return Err(Error::MalformedRow {
                row: line,
                reason: format!("{} fields, header has {}", rec.len(), header.len()),
            });
        }
        let date = rec.get(0).unwrap_or("");
        if date.is_empty() {
            return Err(Error::MissingCell { row: line, col: 1 });
        }
        if !is_iso_date(date) {
            return Err(Error::MalformedRow {
                row: line,
                reason: format!("{date:?} is not an ISO-8601 date"),
            });
        }
        if let Some(prev) = dates.last() {
            match date.cmp(prev.as_str()) {
                std::cmp::Ordering::Equal => return Err(Error::DuplicateDate { row: line }),
                std::cmp::Ordering::Less => return Err(Error::NonIncreasingDate { row: line }),
                std::cmp::Ordering::Greater => {}
            }
        }
        let mut row = Vec::with_capacity(assets.len());
        for col in 1..header.len() {
            let cell = rec.get(col).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::MissingCell {
                    row: line,
                    col: col + 1,
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: line,
                col: col + 1,
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    row: line,
                    col: col + 1,
                });
            }
            row.push(v);
        }
        dates.push(date.to_owned());
        prices.push(row);
    }

    Ok(PriceTable {
        dates,
        assets,
        prices,
    })
}

// YYYY-MM-DD, optionally followed by a time part ("T..."). Lexicographic
// order of such strings is chronological order.
fn is_iso_date(s: &str) -> bool {
    let date = s.split('T').next().unwrap_or("");
    let b = date.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return false;
    }
    let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    if !(digits(0..4) && digits(5..7) && digits(8..10)) {
        return false;
    }
    let month: u32 = date[5..7].parse().unwrap_or(0);
    let day: u32 = date[8..10].parse().unwrap_or(0);
    (1..=12).contains(&month) && (1..=31).contains(&day)
}

/// Simple returns `p[t+1] / p[t] - 1`, one scenario per consecutive pair.
pub fn to_returns(prices: &PriceTable) -> Result<ScenarioSet> {
    if prices.n_rows() < 3 {
        return Err(Error::TooFewRows {
            needed: 3,
            found: prices.n_rows(),
        });
    }
    for (t, row) in prices.prices.iter().enumerate() {
        if let Some(j) = row.iter().position(|&p| p <= 0.0) {
            return Err(Error::NonPositivePrice {
                row: t + 2,
                col: j + 2,
            });
        }
    }
    let rows = prices
        .prices
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| b / a - 1.0).collect())
        .collect();
    ScenarioSet::new(prices.assets.clone(), rows, "period")
}

/// Equally weighted return scenarios; immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    assets: Vec<String>,
    n_scenarios: usize,
    /// Row-major, `n_scenarios × assets.len()`.
    returns: Vec<f64>,
    period_label: String,
}

impl ScenarioSet {
    /// Builds a scenario set from per-scenario rows.
    ///
    /// Every entry must be finite and strictly greater than -1, identifiers
    /// unique and rows the same width as `assets`.
    pub fn new(
        assets: Vec<String>,
        rows: Vec<Vec<f64>>,
        period_label: impl Into<String>,
    ) -> Result<Self> {
        if assets.is_empty() || rows.is_empty() {
            return Err(Error::InvalidScenarios(
                "need at least one asset and one scenario".into(),
            ));
        }
        for (j, name) in assets.iter().enumerate() {
            if assets[..j].contains(name) {
                return Err(Error::InvalidScenarios(format!(
                    "duplicate asset identifier {name:?}"
                )));
            }
        }
        let a = assets.len();
        let mut returns = Vec::with_capacity(a * rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != a {
                return Err(Error::DimensionMismatch {
                    expected: a,
                    got: row.len(),
                });
            }
            for (j, &r) in row.iter().enumerate() {
                if !r.is_finite() || r <= -1.0 {
                    return Err(Error::InvalidScenarios(format!(
                        "return {r} at scenario {i}, asset {j} must be finite and > -1"
                    )));
                }
            }
            returns.extend_from_slice(row);
        }
        Ok(ScenarioSet {
            assets,
            n_scenarios: rows.len(),
            returns,
            period_label: period_label.into(),
        })
    }

    pub fn with_period_label(mut self, label: impl Into<String>) -> Self {
        self.period_label = label.into();
        self
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_scenarios(&self) -> usize {
        self.n_scenarios
    }

    pub fn period_label(&self) -> &str {
        &self.period_label
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let a = self.n_assets();
        &self.returns[i * a..(i + 1) * a]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.returns.chunks_exact(self.n_assets())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Per-asset mean returns.
    pub fn asset_means(&self) -> Vec<f64> {
        let a = self.n_assets();
        let mut m = vec![0.0; a];
        for row in self.rows() {
            for (acc, r) in m.iter_mut().zip(row) {
                *acc += r;
            }
        }
        let s = self.n_scenarios as f64;
        m.iter_mut().for_each(|v| *v /= s);
        m
    }

    /// Unbiased sample covariance (divisor `s - 1`), row-major `a × a`.
    pub fn covariance(&self) -> Result<Vec<f64>> {
        let s = self.n_scenarios;
        if s < 2 {
            return Err(Error::TooFewScenarios { needed: 2, found: s });
        }
        let a = self.n_assets();
        let means = self.asset_means();
        let mut cov = vec![0.0; a * a];
        for row in self.rows() {
            for i in 0..a {
                let di = row[i] - means[i];
                for j in i..a {
                    cov[i * a + j] += di * (row[j] - means[j]);
                }
            }
        }
        let d = (s - 1) as f64;
        for i in 0..a {
            for j in i..a {
                let v = cov[i * a + j] / d;
                cov[i * a + j] = v;
                cov[j * a + i] = v;
            }
        }
        Ok(cov)
    }

    /// Restricts the set to the given asset columns, in the given order.
    pub fn subset(&self, columns: &[usize]) -> Result<ScenarioSet> {
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.n_assets()) {
            return Err(Error::DimensionMismatch {
                expected: self.n_assets(),
                got: bad + 1,
            });
        }
        let assets = columns.iter().map(|&j| self.assets[j].clone()).collect();
        let rows = self
            .rows()
            .map(|r| columns.iter().map(|&j| r[j]).collect())
            .collect();
        ScenarioSet::new(assets, rows, self.period_label.clone())
    }

    /// All returns multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<ScenarioSet> {
        let rows = self
            .rows()
            .map(|r| r.iter().map(|v| v * factor).collect())
            .collect();
        ScenarioSet::new(self.assets.clone(), rows, self.period_label.clone())
    }

    /// Per-scenario portfolio returns for a raw weight slice.
    pub fn evaluate_weights(&self, weights: &[f64]) -> Result<LossDistribution> {
        if weights.len() != self.n_assets() {
            return Err(Error::DimensionMismatch {
                expected: self.n_assets(),
                got: weights.len(),
            });
        }
        let values = self
            .rows()
            .map(|row| row.iter().zip(weights).map(|(r, w)| r * w).sum())
            .collect();
        Ok(LossDistribution { values })
    }
}

/// Per-scenario portfolio returns (profits; negative values are losses).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossDistribution {
    pub values: Vec<f64>,
}

impl LossDistribution {
    pub fn new(values: Vec<f64>) -> Self {
        LossDistribution { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `values[i] = Σ_j x[j] · returns[i][j]`.
pub fn evaluate(x: &Portfolio, scen: &ScenarioSet) -> Result<LossDistribution> {
    scen.evaluate_weights(x.weights())
}

//! Fixed-format MPS export of an [`LpModel`].
//!
//! Names longer than eight characters or containing blanks do not fit the
//! fixed layout; in that case every row or column gets a generated name and
//! the originals are listed in leading comment lines.

use std::io::Write;

use super::simplex::{LpModel, RelOp};
use crate::error::{Error, Result};

fn fits(name: &str) -> bool {
    !name.is_empty() && name.len() <= 8 && !name.contains(char::is_whitespace)
}

/// Shortest decimal that fits a 12-character field.
fn num(v: f64) -> String {
    let s = format!("{v}");
    if s.len() <= 12 {
        return s;
    }
    for digits in (1..=8).rev() {
        let s = format!("{v:.digits$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:.0e}")
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: "<mps>".into(),
        source: e,
    }
}

pub fn write_mps<W: Write>(mut out: W, model: &LpModel, name: &str) -> Result<()> {
    model.validate()?;
    let col_names: Vec<String> = if model.var_names.iter().all(|n| fits(n)) {
        model.var_names.clone()
    } else {
        (0..model.n_vars()).map(|j| format!("C{j:07}")).collect()
    };
    let row_names: Vec<String> = if model.constraints.iter().all(|r| fits(&r.name) && r.name != "COST") {
        model.constraints.iter().map(|r| r.name.clone()).collect()
    } else {
        (0..model.constraints.len()).map(|i| format!("R{i:07}")).collect()
    };

    let mut w = |line: String| writeln!(out, "{line}").map_err(io_err);
    for (j, orig) in model.var_names.iter().enumerate() {
        if col_names[j] != *orig {
            w(format!("* {} = {}", col_names[j], orig))?;
        }
    }
    for (i, row) in model.constraints.iter().enumerate() {
        if row_names[i] != row.name {
            w(format!("* {} = {}", row_names[i], row.name))?;
        }
    }
    w(format!("NAME          {}", name.chars().take(8).collect::<String>()))?;
    w("ROWS".into())?;
    w(" N  COST".into())?;
    for (i, row) in model.constraints.iter().enumerate() {
        let t = match row.op {
            RelOp::Le => "L",
            RelOp::Eq => "E",
            RelOp::Ge => "G",
        };
        w(format!(" {t}  {}", row_names[i]))?;
    }
    w("COLUMNS".into())?;
    for j in 0..model.n_vars() {
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if model.objective[j] != 0.0 {
            entries.push(("COST", model.objective[j]));
        }
        for (i, row) in model.constraints.iter().enumerate() {
            if row.coeffs[j] != 0.0 {
                entries.push((&row_names[i], row.coeffs[j]));
            }
        }
        if entries.is_empty() {
            // keep the column declared
            entries.push(("COST", 0.0));
        }
        for (r, v) in entries {
            w(format!("    {:<8}  {:<8}  {:>12}", col_names[j], r, num(v)))?;
        }
    }
    w("RHS".into())?;
    for (i, row) in model.constraints.iter().enumerate() {
        if row.rhs != 0.0 {
            w(format!("    {:<8}  {:<8}  {:>12}", "RHS", row_names[i], num(row.rhs)))?;
        }
    }
    w("BOUNDS".into())?;
    for j in 0..model.n_vars() {
        let (lo, hi) = (model.lower[j], model.upper[j]);
        let c = &col_names[j];
        let mut b = |kind: &str, v: Option<f64>| {
            let val = v.map(num).unwrap_or_default();
            w(format!(" {kind} {:<8}  {:<8}  {:>12}", "BND", c, val).trim_end().to_string())
        };
        if lo == hi {
            b("FX", Some(lo))?;
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => b("FR", None)?,
            (false, true) => {
                b("MI", None)?;
                b("UP", Some(hi))?;
            }
            (true, _) => {
                if lo != 0.0 {
                    b("LO", Some(lo))?;
                }
                if hi.is_finite() {
                    b("UP", Some(hi))?;
                }
            }
        }
    }
    w("ENDATA".into())?;
    Ok(())
}

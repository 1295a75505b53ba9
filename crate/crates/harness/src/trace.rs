//! CSV iteration traces.
//!
//! Fixed header `k,s,x0..x{n-1},surrogate_value,grad_norm,step_norm,l,radius,
//! L_s,reg_weight,ratio`; floats carry 17 significant digits so parsing a
//! trace back reproduces the exact binary values. Files are written to a
//! temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use steklov_core::solver::IterationRecord;

use crate::{HarnessError, Result};

/// 17 significant digits: round-trip exact for 64-bit floats.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trace_header(dim: usize) -> String {
    let mut cols: Vec<String> = vec!["k".into(), "s".into()];
    for i in 0..dim {
        cols.push(format!("x{i}"));
    }
    for c in [
        "surrogate_value",
        "grad_norm",
        "step_norm",
        "l",
        "radius",
        "L_s",
        "reg_weight",
        "ratio",
    ] {
        cols.push(c.into());
    }
    cols.join(",")
}

pub fn format_trace(records: &[IterationRecord], dim: usize) -> String {
    let mut out = trace_header(dim);
    out.push('\n');
    for r in records {
        out.push_str(&r.k.to_string());
        out.push(',');
        out.push_str(&r.s.to_string());
        for v in &r.x {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        for v in [r.surrogate_value, r.grad_norm, r.step_norm] {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push(',');
        out.push_str(&r.l.to_string());
        for v in [r.radius, r.l_s, r.reg_weight, r.ratio] {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

/// Write-temp-then-rename so concurrent readers never observe a torn file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_trace(path: &Path, records: &[IterationRecord], dim: usize) -> Result<()> {
    write_atomic(path, &format_trace(records, dim))
}

/// One parsed trace line; the step vector is not part of the file format.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: u32,
    pub s: u32,
    pub x: Vec<f64>,
    pub surrogate_value: f64,
    pub grad_norm: f64,
    pub step_norm: f64,
    pub l: u32,
    pub radius: f64,
    pub l_s: f64,
    pub reg_weight: f64,
    pub ratio: f64,
}

pub fn parse_trace(path_label: &str, text: &str) -> Result<Vec<TraceRow>> {
    let malformed = |reason: &str| HarnessError::Malformed {
        path: path_label.to_string(),
        reason: reason.to_string(),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed("empty trace"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 11 || cols[0] != "k" || cols[1] != "s" {
        return Err(malformed("unexpected header"));
    }
    let dim = cols.len() - 10;
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(malformed(&format!(
                "row {} has {} fields",
                ln + 2,
                fields.len()
            )));
        }
        let pf = |s: &str| s.parse::<f64>().map_err(|_| malformed("bad float"));
        let pi = |s: &str| s.parse::<u32>().map_err(|_| malformed("bad integer"));
        let mut x = Vec::with_capacity(dim);
        for f in &fields[2..2 + dim] {
            x.push(pf(f)?);
        }
        rows.push(TraceRow {
            k: pi(fields[0])?,
            s: pi(fields[1])?,
            x,
            surrogate_value: pf(fields[2 + dim])?,
            grad_norm: pf(fields[3 + dim])?,
            step_norm: pf(fields[4 + dim])?,
            l: pi(fields[5 + dim])?,
            radius: pf(fields[6 + dim])?,
            l_s: pf(fields[7 + dim])?,
            reg_weight: pf(fields[8 + dim])?,
            ratio: pf(fields[9 + dim])?,
        });
    }
    if rows.is_empty() {
        return Err(malformed("trace has no rows"));
    }
    Ok(rows)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let text = fs::read_to_string(path)?;
    parse_trace(&path.display().to_string(), &text)
}

//! CSV readers and writers for matrices, solutions, paths and curve tables.
//!
//! Numbers are written with Rust's shortest round-trip formatting and
//! every line ends in `\n`.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use ndarray::Array2;

use crate::cca::CcaSolution;
use crate::error::{Error, Result};
use crate::experiment::CurveTable;
use crate::greedy::{Move, PathStats, SparsityPath};
use crate::num::Real;
use crate::oracle::CurvePoint;

pub const PATH_HEADER: &str = "step,side,index,card_I,card_J,rho,bound_value";
pub const WEIGHTS_HEADER: &str = "step,side,variable_index,weight";
pub const CURVE_HEADER: &str = "total_cardinality,method,mode,mean_rho,std_rho,trials";
pub const SOLUTION_HEADER: &str = "kind,index,value";

/// Reads a numeric CSV into a dense matrix, skipping one header row if asked.
pub fn read_matrix(path: &Path, header: bool) -> Result<Array2<f64>> {
    let shown = path.display().to_string();
    let csv_err = |message: String| Error::Csv { path: shown.clone(), message };
    let file = File::open(path).map_err(|e| csv_err(e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (k, record) in reader.records().enumerate() {
        let line = k + 1 + usize::from(header);
        let record = record.map_err(|e| csv_err(format!("row {line}: {e}")))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(csv_err(format!("row {line}: expected {w} fields, found {}", record.len())));
            }
            _ => {}
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| csv_err(format!("row {line}, column {}: not a number: {field:?}", c + 1)))?;
            if !v.is_finite() {
                return Err(csv_err(format!("row {line}, column {}: non-finite value", c + 1)));
            }
            values.push(v);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| csv_err("no data rows".into()))?;
    Array2::from_shape_vec((rows, width), values).map_err(|e| csv_err(e.to_string()))
}

/// Writes a matrix as headerless CSV.
pub fn write_matrix<T: Real, W: Write>(out: &mut W, a: &Array2<T>) -> io::Result<()> {
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// `kind,index,value` rows: one `rho` row, then `x`/`y` weights by variable index.
pub fn write_solution<T: Real, W: Write>(out: &mut W, sol: &CcaSolution<T>) -> io::Result<()> {
    writeln!(out, "{SOLUTION_HEADER}")?;
    writeln!(out, "rho,,{}", sol.rho)?;
    for (&i, w) in sol.pattern.x().iter().zip(sol.a.iter()) {
        writeln!(out, "x,{i},{w}")?;
    }
    for (&j, w) in sol.pattern.y().iter().zip(sol.b.iter()) {
        writeln!(out, "y,{j},{w}")?;
    }
    Ok(())
}

fn move_fields(action: Move) -> (&'static str, String) {
    match action {
        Move::Seed { .. } => ("seed", String::new()),
        Move::Full => ("full", String::new()),
        Move::Add { side, index } | Move::Remove { side, index } => match side {
            crate::Side::X => ("x", index.to_string()),
            crate::Side::Y => ("y", index.to_string()),
        },
    }
}

pub fn write_path<T: Real, W: Write>(out: &mut W, path: &SparsityPath<T>) -> io::Result<()> {
    writeln!(out, "{PATH_HEADER}")?;
    for e in &path.entries {
        let (side, index) = move_fields(e.action);
        let bound = e.bound_value.map(|b| b.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{side},{index},{},{},{},{bound}",
            e.step,
            e.pattern.card_x(),
            e.pattern.card_y(),
            e.solution.rho
        )?;
    }
    Ok(())
}

/// Counter lines appended after a path, prefixed with `#`.
pub fn write_stats<W: Write>(out: &mut W, stats: &PathStats) -> io::Result<()> {
    writeln!(out, "# cca_solves,{}", stats.cca_solves)?;
    writeln!(out, "# bound_evaluations,{}", stats.bound_evaluations)?;
    writeln!(out, "# exact_fallbacks,{}", stats.exact_fallbacks)
}

pub fn write_weights<T: Real, W: Write>(out: &mut W, path: &SparsityPath<T>) -> io::Result<()> {
    writeln!(out, "{WEIGHTS_HEADER}")?;
    for e in &path.entries {
        let sol = &e.solution;
        for (&i, w) in sol.pattern.x().iter().zip(sol.a.iter()) {
            writeln!(out, "{},x,{i},{w}", e.step)?;
        }
        for (&j, w) in sol.pattern.y().iter().zip(sol.b.iter()) {
            writeln!(out, "{},y,{j},{w}", e.step)?;
        }
    }
    Ok(())
}

/// Oracle curve in the path layout: `step` counts from the smallest
/// cardinality, `side` is `oracle`, and `index`/`bound_value` are empty.
pub fn write_oracle_curve<T: Real, W: Write>(out: &mut W, curve: &[CurvePoint<T>]) -> io::Result<()> {
    writeln!(out, "{PATH_HEADER}")?;
    for (step, p) in curve.iter().enumerate() {
        writeln!(out, "{step},oracle,,{},{},{},", p.k_a, p.k_b, p.rho())?;
    }
    Ok(())
}

pub fn write_oracle_weights<T: Real, W: Write>(out: &mut W, curve: &[CurvePoint<T>]) -> io::Result<()> {
    writeln!(out, "{WEIGHTS_HEADER}")?;
    for (step, p) in curve.iter().enumerate() {
        let sol = &p.solution;
        for (&i, w) in sol.pattern.x().iter().zip(sol.a.iter()) {
            writeln!(out, "{step},x,{i},{w}")?;
        }
        for (&j, w) in sol.pattern.y().iter().zip(sol.b.iter()) {
            writeln!(out, "{step},y,{j},{w}")?;
        }
    }
    Ok(())
}

pub fn write_curve_table<T: Real, W: Write>(out: &mut W, table: &CurveTable<T>) -> io::Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.total_cardinality, r.method, r.mode, r.mean_rho, r.std_rho, r.trials
        )?;
    }
    Ok(())
}

//! Plain-text formats: signal CSV and edge lists.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rmvg_core::hvg::VisibilityGraph;
use rmvg_core::TaskData;

use crate::error::{csv_at, io_at, Error, Result};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// `t,input[,target]` with a header row and 1-based `t`.
pub fn write_signal(path: &Path, data: &TaskData) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_at(path))?;
    let target = data.target.as_ref().map(|s| s.values());
    let mut header = vec!["t", "input"];
    if target.is_some() {
        header.push("target");
    }
    w.write_record(&header).map_err(csv_at(path))?;
    for (t, &x) in data.input.values().iter().enumerate() {
        let mut row = vec![(t + 1).to_string(), num(x)];
        if let Some(y) = target {
            row.push(num(y[t]));
        }
        w.write_record(&row).map_err(csv_at(path))?;
    }
    w.flush().map_err(io_at(path))
}

/// Reads one named column of a headed CSV as numbers.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_at(path))?;
    let headers = r.headers().map_err(csv_at(path))?.clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| Error::Format(format!("{}: no column '{column}'", path.display())))?;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_at(path))?;
        let field = rec.get(idx).unwrap_or("").trim();
        let v: f64 = field.parse().map_err(|_| {
            Error::Format(format!("{}: row {}: bad number '{field}'", path.display(), line + 2))
        })?;
        out.push(v);
    }
    Ok(out)
}

/// One `i j weight` line per edge, 1-based, sorted by `(i, j)`.
pub fn write_edges(path: &Path, g: &VisibilityGraph) -> Result<()> {
    let file = File::create(path).map_err(io_at(path))?;
    let mut w = BufWriter::new(file);
    let weights = g.weights();
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        let weight = weights.get(e).copied().unwrap_or(1.0);
        writeln!(w, "{} {} {}", i + 1, j + 1, num(weight)).map_err(io_at(path))?;
    }
    w.flush().map_err(io_at(path))
}

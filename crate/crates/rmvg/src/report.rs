//! Sweep artifacts: raw per-run rows, trial-mean tables, correlation reports.

use std::fs;
use std::path::{Path, PathBuf};

use rmvg_core::sweep::CorrelationReport;

use crate::error::{csv_at, io_at, Result};
use crate::format::num;
use crate::heatmap;
use crate::runner::{AccuracyOutput, MemoryOutput};

pub const RAW_FILE: &str = "raw.csv";
pub const MANIFOLD_FILE: &str = "manifold.csv";
pub const CORRELATION_FILE: &str = "correlation.csv";

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_at(path))?;
    w.write_record(header).map_err(csv_at(path))?;
    for row in rows {
        w.write_record(row).map_err(csv_at(path))?;
    }
    w.flush().map_err(io_at(path))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn write_correlation(path: &Path, report: &CorrelationReport) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|row| {
            let (r, p) = row.result.map_or((String::new(), String::new()), |c| (num(c.r), num(c.p)));
            vec![row.measure.clone(), row.mode.clone(), r, p, row.n.to_string()]
        })
        .collect();
    write_rows(path, &strings(&["measure", "mode", "r", "p", "n"]), &rows)
}

fn status<T>(outcome: &std::result::Result<T, rmvg_core::Error>) -> String {
    match outcome {
        Ok(_) => "ok".into(),
        Err(e) => e.to_string(),
    }
}

/// Writes the three CSV files, plus one PNG per manifold when `heatmaps`
/// is set. Returns the paths written.
pub fn write_accuracy(dir: &Path, out: &AccuracyOutput, heatmaps: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    let cfg = &out.config;
    let columns: Vec<String> = cfg.measures.iter().map(|m| m.column()).collect();

    let mut header = strings(&["k", "j", "trial", "rho", "omega", "seed", "status", "nrmse", "gamma"]);
    header.extend(columns.iter().cloned());
    let mut runs: Vec<_> = out.runs.iter().collect();
    runs.sort_by_key(|r| r.item);
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|run| {
            let mut row = vec![
                run.item.k.to_string(),
                run.item.j.to_string(),
                run.item.trial.to_string(),
                num(run.rho),
                num(run.omega),
                run.item.seed(cfg.base_seed).to_string(),
                status(&run.outcome),
            ];
            match &run.outcome {
                Ok(v) => {
                    row.push(num(v.nrmse));
                    row.push(num(v.gamma));
                    row.extend(v.measures.iter().map(|&x| num(x)));
                }
                Err(_) => row.extend(std::iter::repeat(String::new()).take(2 + columns.len())),
            }
            row
        })
        .collect();
    let raw = dir.join(RAW_FILE);
    write_rows(&raw, &header, &rows)?;

    let res = &out.result;
    let mut header = strings(&["k", "j", "rho", "omega", "count", "nrmse", "gamma"]);
    header.extend(columns.iter().cloned());
    let mut rows = Vec::new();
    for (k, &rho) in res.rhos.iter().enumerate() {
        for (j, &omega) in res.omegas.iter().enumerate() {
            let c = res.cell(k, j);
            let mut row = vec![
                k.to_string(),
                j.to_string(),
                num(rho),
                num(omega),
                res.counts[c].to_string(),
                num(res.nrmse.values[c]),
                num(res.gamma.values[c]),
            ];
            row.extend(res.measures.iter().map(|m| num(m.values[c])));
            rows.push(row);
        }
    }
    let manifold = dir.join(MANIFOLD_FILE);
    write_rows(&manifold, &header, &rows)?;

    let correlation = dir.join(CORRELATION_FILE);
    write_correlation(&correlation, &out.report)?;

    let mut written = vec![raw, manifold, correlation];
    if heatmaps {
        let grids = [("gamma".to_string(), &res.gamma.values), ("nrmse".to_string(), &res.nrmse.values)]
            .into_iter()
            .chain(columns.iter().cloned().zip(res.measures.iter().map(|m| &m.values)));
        for (name, values) in grids {
            let path = dir.join(format!("heatmap_{name}.png"));
            heatmap::write(&path, values, res.rhos.len(), res.omegas.len())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Column name for one delta series, e.g. `delta_dg_sc@20:15`.
pub fn memory_column(window: rmvg_core::memory::DelayWindow, measure: rmvg_core::sweep::MemoryMeasure) -> String {
    format!("{}@{window}", measure.column())
}

pub fn write_memory(dir: &Path, out: &MemoryOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    let cfg = &out.config;
    let mut columns: Vec<String> = cfg.windows.iter().map(|w| format!("mc@{w}")).collect();
    columns.extend(cfg.columns().into_iter().map(|(w, m)| memory_column(w, m)));

    let mut header = strings(&["k", "trial", "rho", "seed", "status", "mc"]);
    header.extend(columns.iter().cloned());
    let mut runs: Vec<_> = out.runs.iter().collect();
    runs.sort_by_key(|r| r.item);
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|run| {
            let mut row = vec![
                run.item.k.to_string(),
                run.item.trial.to_string(),
                num(run.rho),
                run.item.seed(cfg.base_seed).to_string(),
                status(&run.outcome),
            ];
            match &run.outcome {
                Ok(v) => {
                    row.push(num(v.capacity));
                    row.extend(v.window_capacity.iter().chain(&v.deltas).map(|&x| num(x)));
                }
                Err(_) => row.extend(std::iter::repeat(String::new()).take(1 + columns.len())),
            }
            row
        })
        .collect();
    let raw = dir.join(RAW_FILE);
    write_rows(&raw, &header, &rows)?;

    let res = &out.result;
    let mut header = strings(&["k", "rho", "count", "mc"]);
    header.extend(columns.iter().cloned());
    let rows: Vec<Vec<String>> = res
        .rhos
        .iter()
        .enumerate()
        .map(|(k, &rho)| {
            let mut row = vec![k.to_string(), num(rho), res.counts[k].to_string(), num(res.capacity[k])];
            row.extend(res.window_capacity.iter().chain(&res.deltas).map(|d| num(d[k])));
            row
        })
        .collect();
    let table = dir.join(MANIFOLD_FILE);
    write_rows(&table, &header, &rows)?;

    let correlation = dir.join(CORRELATION_FILE);
    write_correlation(&correlation, &out.report)?;
    Ok(vec![raw, table, correlation])
}

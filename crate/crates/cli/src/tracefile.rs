// SPDX-License-Identifier: Apache-2.0

//! CSV traces. Floats are written with 17 significant digits so a trace
//! read back reproduces every double exactly; missing values are empty cells.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use grpda::solvers::IterateHistory;
use grpda::TraceRow;
use thiserror::Error;

pub const TRACE_HEADER: &str =
    "iter,wall_seconds,tau_n,beta_n,delta_n,ls_trials,fwd_matvecs,adj_matvecs,gap,objective,ergodic_gap";

/// Columns that hold floating-point values and may be fitted.
pub const FLOAT_COLUMNS: &[&str] = &["wall_seconds", "tau_n", "beta_n", "delta_n", "gap", "objective", "ergodic_gap"];

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> TraceFileError + '_ {
    move |source| TraceFileError::Io { path: path.to_path_buf(), source }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn render_trace(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 200);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.iter,
            fmt_f64(r.wall_seconds),
            fmt_f64(r.tau_n),
            fmt_f64(r.beta_n),
            fmt_f64(r.delta_n),
            r.ls_trials,
            r.fwd_matvecs,
            r.adj_matvecs,
            fmt_opt(r.gap),
            fmt_opt(r.objective),
            fmt_opt(r.ergodic_gap),
        );
    }
    out
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<(), TraceFileError> {
    fs::write(path, render_trace(rows)).map_err(io_err(path))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, TraceFileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_trace(&text).map_err(|(line, message)| TraceFileError::Format { path: path.to_path_buf(), line, message })
}

/// Parses a trace; errors carry a 1-based line number.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>, (usize, String)> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != TRACE_HEADER {
        return Err((1, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 11 {
            return Err((i + 1, format!("expected 11 cells, found {}", cells.len())));
        }
        let bad = |what: &str, cell: &str| (i + 1, format!("bad {what} {cell:?}"));
        let int = |k: usize| cells[k].parse::<u64>().map_err(|_| bad("integer", cells[k]));
        let float = |k: usize| cells[k].parse::<f64>().map_err(|_| bad("number", cells[k]));
        let opt = |k: usize| if cells[k].is_empty() { Ok(None) } else { float(k).map(Some) };
        rows.push(TraceRow {
            iter: int(0)? as usize,
            wall_seconds: float(1)?,
            tau_n: float(2)?,
            beta_n: float(3)?,
            delta_n: float(4)?,
            ls_trials: int(5)? as usize,
            fwd_matvecs: int(6)?,
            adj_matvecs: int(7)?,
            gap: opt(8)?,
            objective: opt(9)?,
            ergodic_gap: opt(10)?,
        });
    }
    Ok(rows)
}

/// Values of a float column as `(iter, value)` pairs, skipping empty cells.
pub fn column(rows: &[TraceRow], name: &str) -> Option<Vec<(usize, f64)>> {
    let get: fn(&TraceRow) -> Option<f64> = match name {
        "wall_seconds" => |r| Some(r.wall_seconds),
        "tau_n" => |r| Some(r.tau_n),
        "beta_n" => |r| Some(r.beta_n),
        "delta_n" => |r| Some(r.delta_n),
        "ls_trials" => |r| Some(r.ls_trials as f64),
        "fwd_matvecs" => |r| Some(r.fwd_matvecs as f64),
        "adj_matvecs" => |r| Some(r.adj_matvecs as f64),
        "gap" => |r| r.gap,
        "objective" => |r| r.objective,
        "ergodic_gap" => |r| r.ergodic_gap,
        _ => return None,
    };
    Some(rows.iter().filter_map(|r| get(r).map(|v| (r.iter, v))).collect())
}

/// Two-column whitespace file for external plotting.
pub fn write_pairs(path: &Path, header: &str, pairs: impl Iterator<Item = (f64, f64)>) -> Result<(), TraceFileError> {
    let mut out = format!("# {header}\n");
    for (a, b) in pairs {
        let _ = writeln!(out, "{} {}", fmt_f64(a), fmt_f64(b));
    }
    fs::write(path, out).map_err(io_err(path))
}

/// One row per stored iterate: `n, tau, beta`, then `x_*`, `z_*`, `y_*`.
pub fn write_iterates(path: &Path, h: &IterateHistory) -> Result<(), TraceFileError> {
    let (q, p) = (h.x.first().map_or(0, Vec::len), h.y.first().map_or(0, Vec::len));
    let mut out = String::from("n,tau,beta");
    for (prefix, dim) in [("x", q), ("z", q), ("y", p)] {
        for i in 0..dim {
            let _ = write!(out, ",{prefix}_{i}");
        }
    }
    out.push('\n');
    for n in 0..h.x.len() {
        let _ = write!(out, "{n},{},{}", fmt_f64(h.tau[n]), fmt_f64(h.beta[n]));
        for v in h.x[n].iter().chain(&h.z[n]).chain(&h.y[n]) {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn read_iterates(path: &Path) -> Result<IterateHistory, TraceFileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let fail = |line: usize, message: String| TraceFileError::Format { path: path.to_path_buf(), line, message };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    if header.len() < 3 || header[..3] != ["n", "tau", "beta"] {
        return Err(fail(1, "unexpected iterates header".into()));
    }
    let count = |prefix: &str| header.iter().filter(|h| h.starts_with(prefix)).count();
    let (q, p) = (count("x_"), count("y_"));
    if count("z_") != q {
        return Err(fail(1, "x and z columns differ in number".into()));
    }
    let mut h = IterateHistory::default();
    for (i, line) in lines.enumerate() {
        let vals: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let vals = vals.map_err(|e| fail(i + 2, e.to_string()))?;
        if vals.len() != 3 + 2 * q + p {
            return Err(fail(i + 2, format!("expected {} cells, found {}", 3 + 2 * q + p, vals.len())));
        }
        h.tau.push(vals[1]);
        h.beta.push(vals[2]);
        h.x.push(vals[3..3 + q].to_vec());
        h.z.push(vals[3 + q..3 + 2 * q].to_vec());
        h.y.push(vals[3 + 2 * q..].to_vec());
    }
    Ok(h)
}

/// A saddle point file: the primal point on the first non-comment line and
/// the dual point on the second, entries separated by whitespace.
pub fn read_saddle(path: &Path) -> Result<(Vec<f64>, Vec<f64>), TraceFileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let fail = |line: usize, message: String| TraceFileError::Format { path: path.to_path_buf(), line, message };
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        points.push(v.map_err(|e| fail(i + 1, e.to_string()))?);
    }
    match <[Vec<f64>; 2]>::try_from(points) {
        Ok([x, y]) => Ok((x, y)),
        Err(p) => Err(fail(0, format!("expected 2 point lines, found {}", p.len()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iter: usize) -> TraceRow {
        TraceRow {
            iter,
            wall_seconds: 0.1 * iter as f64,
            tau_n: 1.0 / 3.0,
            beta_n: 1.0,
            delta_n: std::f64::consts::PI,
            ls_trials: iter % 2,
            fwd_matvecs: iter as u64,
            adj_matvecs: iter as u64 + 1,
            gap: Some(1e-300 * iter as f64),
            objective: None,
            ergodic_gap: Some(-0.0),
        }
    }

    #[test]
    fn trace_round_trips_exactly() {
        let rows: Vec<TraceRow> = (1..=5).map(row).collect();
        let back = parse_trace(&render_trace(&rows)).unwrap();
        assert_eq!(back, rows);
        assert_eq!(render_trace(&[]), format!("{TRACE_HEADER}\n"));
    }

    #[test]
    fn malformed_rows_report_line() {
        let text = format!("{TRACE_HEADER}\n1,x,0,0,0,0,0,0,,,\n");
        assert_eq!(parse_trace(&text).unwrap_err().0, 2);
        assert_eq!(parse_trace("iter\n").unwrap_err().0, 1);
    }

    #[test]
    fn iterates_and_saddle_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let h = IterateHistory {
            x: vec![vec![0.5, 0.5], vec![0.25, 0.75]],
            z: vec![vec![0.5, 0.5], vec![0.3, 0.7]],
            y: vec![vec![1.0 / 3.0, 2.0 / 3.0, 0.0]; 2],
            tau: vec![0.1, 0.2],
            beta: vec![1.0, 1.0],
        };
        let path = dir.path().join("it.csv");
        write_iterates(&path, &h).unwrap();
        assert_eq!(read_iterates(&path).unwrap(), h);
        let saddle = dir.path().join("saddle.txt");
        fs::write(&saddle, "# xbar then ybar\n0.5 0.5\n0.5 0.5\n").unwrap();
        assert_eq!(read_saddle(&saddle).unwrap(), (vec![0.5, 0.5], vec![0.5, 0.5]));
    }
}

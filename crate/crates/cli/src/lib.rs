// SPDX-License-Identifier: Apache-2.0

//! Benchmark harness for the `grpda` solvers.
//!
//! A run reads a flat TOML [`config`], executes the algorithm × seed grid
//! ([`bench`]) and writes one CSV trace per job ([`tracefile`]) plus JSON
//! summaries. Traces can be checked against solver invariants ([`check`])
//! and fitted for convergence rates ([`fit`]).

pub mod bench;
pub mod check;
pub mod config;
pub mod fit;
pub mod tracefile;

use std::fs;
use std::io;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use bench::{run_benchmark, run_job, BenchReport, JobResult, Summary};
pub use check::{check_invariants, InvariantReport, Status, TraceInfo};
pub use config::{parse_config, BenchConfig, ConfigParseError};
pub use fit::{fit_rate, RateFit, RateModel};

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigParseError },
    #[error(transparent)]
    Bench(#[from] bench::BenchError),
    #[error(transparent)]
    TraceFile(#[from] tracefile::TraceFileError),
    #[error("{path}: {message}")]
    Summary { path: PathBuf, message: String },
    #[error(transparent)]
    Fit(#[from] fit::FitError),
}

impl AppError {
    /// Stable identifier for the machine-readable error line.
    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Io { .. } => "io",
            AppError::Config { .. } => "config",
            AppError::Bench(_) => "bench",
            AppError::TraceFile(_) => "trace",
            AppError::Summary { .. } => "summary",
            AppError::Fit(_) => "fit",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({ "error": self.kind(), "message": self.to_string() });
        if let AppError::Config { source, .. } = self {
            v["violations"] =
                source.violations().iter().map(|x| serde_json::json!({ "key": x.key, "message": x.message })).collect();
        }
        v
    }
}

pub fn load_config(path: &Path) -> Result<BenchConfig, AppError> {
    let text = fs::read_to_string(path).map_err(|source| AppError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text).map_err(|source| AppError::Config { path: path.to_path_buf(), source })
}

pub fn load_summary(path: &Path) -> Result<Summary, AppError> {
    let text = fs::read_to_string(path).map_err(|source| AppError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| AppError::Summary { path: path.to_path_buf(), message: e.to_string() })
}

/// Checks a trace file. The job summary and recorded iterates next to the
/// trace are picked up when present; `summary` overrides the former.
pub fn check_trace_file(
    trace: &Path,
    saddle: Option<&Path>,
    summary: Option<&Path>,
) -> Result<InvariantReport, AppError> {
    let rows = tracefile::read_trace(trace)?;
    let summary_path = summary.map(Path::to_path_buf).unwrap_or_else(|| bench::summary_path_for(trace));
    if !summary_path.exists() {
        return Err(AppError::Summary {
            path: summary_path,
            message: "summary not found; the check needs the algorithm and its parameters".into(),
        });
    }
    let s = load_summary(&summary_path)?;
    let info = TraceInfo::from_summary(&s).map_err(|message| AppError::Summary { path: summary_path, message })?;
    let iterates_path = bench::iterates_path_for(trace);
    let iterates = if iterates_path.exists() { Some(tracefile::read_iterates(&iterates_path)?) } else { None };
    let saddle = saddle.map(tracefile::read_saddle).transpose()?;
    Ok(check_invariants(&rows, &info, iterates.as_ref(), saddle.as_ref().map(|(x, y)| (x.as_slice(), y.as_slice()))))
}

pub fn fit_trace_file(
    trace: &Path,
    column: &str,
    model: RateModel,
    window: Option<RangeInclusive<usize>>,
) -> Result<RateFit, AppError> {
    let rows = tracefile::read_trace(trace)?;
    Ok(fit_rate(&rows, column, model, window)?)
}

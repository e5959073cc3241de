// SPDX-License-Identifier: Apache-2.0

//! Least-squares rate fits on trace columns.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use grpda::TraceRow;
use serde::Serialize;
use thiserror::Error;

use crate::tracefile::column;

pub const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `log value` against `log n`; the slope is the power-law exponent.
    LogLog,
    /// `log value` against `n`; the slope is the log of the linear rate.
    SemiLog,
}

impl RateModel {
    pub fn as_str(self) -> &'static str {
        match self {
            RateModel::LogLog => "loglog",
            RateModel::SemiLog => "semilog",
        }
    }
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "loglog" => Ok(RateModel::LogLog),
            "semilog" => Ok(RateModel::SemiLog),
            _ => Err(format!("unknown model {s:?}, expected loglog or semilog")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// First and last iteration used.
    pub window: (usize, usize),
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("{found} points in the window, need at least {MIN_FIT_POINTS}")]
    TooFewPoints { found: usize },
    #[error("column {column} is not positive at iteration {iter} (value {value})")]
    NonPositive { column: String, iter: usize, value: f64 },
}

/// Ordinary least squares; `r2 = 1` for a constant response.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    if ys.iter().all(|y| *y == ys[0]) {
        return (0.0, ys[0], 1.0);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Fits `(n, value)` pairs that are already restricted to a window.
pub fn fit_points(points: &[(usize, f64)], model: RateModel, name: &str) -> Result<RateFit, FitError> {
    if points.len() < MIN_FIT_POINTS {
        return Err(FitError::TooFewPoints { found: points.len() });
    }
    if let Some(&(iter, value)) = points.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(FitError::NonPositive { column: name.to_string(), iter, value });
    }
    let xs: Vec<f64> = points
        .iter()
        .map(|(n, _)| match model {
            RateModel::LogLog => (*n as f64).ln(),
            RateModel::SemiLog => *n as f64,
        })
        .collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    let (slope, intercept, r2) = least_squares(&xs, &ys);
    Ok(RateFit { slope, intercept, r2, window: (points[0].0, points[points.len() - 1].0), points: points.len() })
}

pub fn fit_rate(
    rows: &[TraceRow],
    name: &str,
    model: RateModel,
    window: Option<RangeInclusive<usize>>,
) -> Result<RateFit, FitError> {
    let values = column(rows, name).ok_or_else(|| FitError::UnknownColumn(name.to_string()))?;
    let points: Vec<(usize, f64)> =
        values.into_iter().filter(|(n, _)| window.as_ref().is_none_or(|w| w.contains(n))).collect();
    fit_points(&points, model, name)
}

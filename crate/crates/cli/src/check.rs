// SPDX-License-Identifier: Apache-2.0

//! Post-hoc invariant checks on a written trace.
//!
//! Each check reports its worst slack: the smallest amount by which the
//! inequality holds over the trace, negative when it is violated.

use grpda::solvers::{descent_sequences, growth_cap, IterateHistory};
use grpda::{AlgorithmId, TraceRow};
use serde::Serialize;

use crate::bench::Summary;

pub const TAU_CAP_TOL: f64 = 1e-15;
pub const DESCENT_TOL: f64 = 1e-10;
pub const GAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantResult {
    pub name: &'static str,
    pub status: Status,
    pub worst_margin: Option<f64>,
    /// Iteration where the worst margin occurs.
    pub at_iter: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub results: Vec<InvariantResult>,
}

impl InvariantReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.status != Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&InvariantResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

/// What the checks need to know about the run beyond its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceInfo {
    pub algorithm: AlgorithmId,
    pub psi: Option<f64>,
    pub sigma: Option<f64>,
    pub tau0: Option<f64>,
    pub iterations: Option<usize>,
    pub ls_trials: Option<usize>,
}

impl TraceInfo {
    pub fn from_summary(s: &Summary) -> Result<Self, String> {
        Ok(Self {
            algorithm: s.algorithm.parse()?,
            psi: s.psi,
            sigma: s.sigma,
            tau0: s.tau0,
            iterations: Some(s.iterations),
            ls_trials: Some(s.ls_trials),
        })
    }
}

/// Running minimum of `(slack, iter)`.
struct Worst(Option<(f64, usize)>);

impl Worst {
    fn new() -> Self {
        Worst(None)
    }

    fn see(&mut self, slack: f64, iter: usize) {
        if self.0.is_none_or(|(w, _)| slack < w || slack.is_nan()) {
            self.0 = Some((slack, iter));
        }
    }

    fn finish(self, name: &'static str, threshold: f64, detail: String) -> InvariantResult {
        match self.0 {
            None => skipped(name, "no data"),
            Some((slack, iter)) => InvariantResult {
                name,
                status: if slack >= threshold { Status::Pass } else { Status::Fail },
                worst_margin: Some(slack),
                at_iter: Some(iter),
                detail,
            },
        }
    }
}

fn skipped(name: &'static str, why: &str) -> InvariantResult {
    InvariantResult { name, status: Status::Skipped, worst_margin: None, at_iter: None, detail: why.to_string() }
}

pub fn check_invariants(
    rows: &[TraceRow],
    info: &TraceInfo,
    iterates: Option<&IterateHistory>,
    saddle: Option<(&[f64], &[f64])>,
) -> InvariantReport {
    let mut results = Vec::new();

    let mut w = Worst::new();
    for pair in rows.windows(2) {
        w.see(pair[1].iter as f64 - pair[0].iter as f64, pair[1].iter);
    }
    results.push(w.finish("iter_increasing", 1.0, "min step between consecutive iter values".into()));

    let mut w = Worst::new();
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let fwd = b.fwd_matvecs as f64 - a.fwd_matvecs as f64;
        let adj = b.adj_matvecs as f64 - a.adj_matvecs as f64;
        w.see(fwd.min(adj), b.iter);
    }
    results.push(w.finish("counters_nondecreasing", 0.0, "min per-row increment of the matvec counters".into()));

    match (info.iterations, info.ls_trials) {
        (Some(iters), Some(ls)) => {
            let sum: usize = rows.iter().map(|r| r.ls_trials).sum();
            let ok = iters == rows.len() && ls == sum;
            results.push(InvariantResult {
                name: "summary_consistency",
                status: if ok { Status::Pass } else { Status::Fail },
                worst_margin: None,
                at_iter: None,
                detail: format!("summary iter {iters} vs {} rows, #LS {ls} vs column sum {sum}", rows.len()),
            });
        }
        _ => results.push(skipped("summary_consistency", "no summary")),
    }

    if info.algorithm.uses_growth_cap() {
        match info.psi {
            Some(psi) => {
                let cap = growth_cap(psi);
                let mut w = Worst::new();
                let mut prev = info.tau0;
                for r in rows {
                    if let Some(tp) = prev {
                        w.see(cap * tp + TAU_CAP_TOL - r.tau_n, r.iter);
                    }
                    prev = Some(r.tau_n);
                }
                results.push(w.finish("tau_cap", 0.0, format!("tau_n <= {cap:.6} tau_(n-1) + {TAU_CAP_TOL:e}")));
            }
            None => results.push(skipped("tau_cap", "psi unknown")),
        }
    } else {
        results.push(skipped("tau_cap", "algorithm has no growth cap"));
    }

    let mut w = Worst::new();
    for r in rows {
        if let Some(g) = r.gap {
            w.see(g + GAP_TOL, r.iter);
        }
    }
    results.push(w.finish("gap_nonnegative", 0.0, format!("gap >= -{GAP_TOL:e}")));

    if info.algorithm == AlgorithmId::AgrpdaL {
        let mut w = Worst::new();
        for pair in rows.windows(2) {
            w.see(pair[1].beta_n - pair[0].beta_n, pair[1].iter);
        }
        let mono = w.finish("beta_increasing", f64::MIN_POSITIVE, "min increment of beta_n".into());
        results.push(mono);
        results.push(beta_quadratic_growth(rows));
    } else {
        results.push(skipped("beta_increasing", "constant dual weight"));
        results.push(skipped("beta_quadratic_growth", "constant dual weight"));
    }

    results.push(descent_check(info, iterates, saddle));
    InvariantReport { results }
}

/// `β_n / n²` over the tail `n ≥ min(100, N/10)`: the minimum must be
/// positive and within a factor 10 of the median.
fn beta_quadratic_growth(rows: &[TraceRow]) -> InvariantResult {
    let n = rows.last().map_or(0, |r| r.iter);
    let lo = (n / 10).clamp(1, 100);
    let mut ratios: Vec<(f64, usize)> =
        rows.iter().filter(|r| r.iter >= lo).map(|r| (r.beta_n / (r.iter * r.iter) as f64, r.iter)).collect();
    if ratios.len() < 8 {
        return skipped("beta_quadratic_growth", "fewer than 8 rows in the window");
    }
    let mut sorted: Vec<f64> = ratios.iter().map(|r| r.0).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    ratios.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (min, at) = ratios[0];
    let pass = min > 0.0 && min >= median / 10.0;
    InvariantResult {
        name: "beta_quadratic_growth",
        status: if pass { Status::Pass } else { Status::Fail },
        worst_margin: Some(min - median / 10.0),
        at_iter: Some(at),
        detail: format!("beta_n/n^2 over n in [{lo}, {n}]: min {min:e}, median {median:e}"),
    }
}

fn descent_check(
    info: &TraceInfo,
    iterates: Option<&IterateHistory>,
    saddle: Option<(&[f64], &[f64])>,
) -> InvariantResult {
    const NAME: &str = "descent";
    if !matches!(info.algorithm, AlgorithmId::GrpdaL | AlgorithmId::GrpdaScscL) {
        return skipped(NAME, "only defined for constant-weight linesearch runs");
    }
    let (Some(h), Some((xbar, ybar))) = (iterates, saddle) else {
        return skipped(NAME, "needs recorded iterates and a saddle point");
    };
    let (Some(psi), Some(sigma)) = (info.psi, info.sigma) else {
        return skipped(NAME, "psi or sigma unknown");
    };
    if h.x.first().map_or(0, Vec::len) != xbar.len() || h.y.first().map_or(0, Vec::len) != ybar.len() {
        return InvariantResult {
            name: NAME,
            status: Status::Fail,
            worst_margin: None,
            at_iter: None,
            detail: "saddle point dimensions do not match the iterates".into(),
        };
    }
    let (a, b) = descent_sequences(h, psi, sigma, xbar, ybar);
    let mut w = Worst::new();
    for (i, bi) in b.iter().enumerate() {
        w.see(a[i] - bi + DESCENT_TOL - a[i + 1], i + 1);
    }
    w.finish(NAME, 0.0, format!("a_(n+1) <= a_n - b_n + {DESCENT_TOL:e}"))
}

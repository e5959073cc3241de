// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::time::{Duration, Instant};

use crate::linalg::{estimate_spectral_norm, DEFAULT_NORM_MAX_ITER, DEFAULT_NORM_TOL};

use super::grpda::{agrpda_l_iterate, grpda_fixed_iterate, grpda_l_iterate, grpda_scsc_iterate};
use super::pda::pda_l_iterate;
use super::{Algorithm, AlgorithmId, SaddleProblem, SolverError, SolverState, StepReport};

/// When to stop. Iteration stops at the first criterion that fires; the
/// budget `max_iters` always applies.
#[derive(Debug, Clone, PartialEq)]
pub struct StopCriteria {
    /// Stop once `G(x_n, y_n) < gap_tol`.
    pub gap_tol: Option<f64>,
    /// Stop once `F(x_n) − f_star < obj_tol`; ignored without `f_star`.
    pub obj_tol: Option<f64>,
    pub f_star: Option<f64>,
    pub max_iters: usize,
    pub wall_clock_limit: Option<Duration>,
    /// Evaluate the gap at the ergodic average every iteration.
    pub track_ergodic_gap: bool,
    /// Keep every `(x_n, z_n, y_n, τ_n, β_n)` for post-hoc diagnostics.
    pub record_iterates: bool,
}

impl StopCriteria {
    pub fn iterations(max_iters: usize) -> Self {
        Self {
            gap_tol: None,
            obj_tol: None,
            f_star: None,
            max_iters,
            wall_clock_limit: None,
            track_ergodic_gap: false,
            record_iterates: false,
        }
    }

    pub fn with_gap_tol(mut self, tol: f64) -> Self {
        self.gap_tol = Some(tol);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    GapTolerance,
    ObjectiveTolerance,
    IterationBudget,
    WallClock,
    Failed(SolverError),
}

impl Termination {
    pub fn is_failure(&self) -> bool {
        matches!(self, Termination::Failed(_))
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::GapTolerance => f.write_str("gap tolerance"),
            Termination::ObjectiveTolerance => f.write_str("objective tolerance"),
            Termination::IterationBudget => f.write_str("iteration budget"),
            Termination::WallClock => f.write_str("wall clock"),
            Termination::Failed(e) => write!(f, "failed: {e}"),
        }
    }
}

/// Diagnostics of iteration `iter`. Matvec counters are cumulative and
/// include setup products.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// Cumulative solver time, excluding setup and gap/objective evaluation.
    pub wall_seconds: f64,
    pub tau_n: f64,
    pub beta_n: f64,
    pub delta_n: f64,
    pub ls_trials: usize,
    pub fwd_matvecs: u64,
    pub adj_matvecs: u64,
    pub gap: Option<f64>,
    pub objective: Option<f64>,
    pub ergodic_gap: Option<f64>,
}

/// All iterates of a run; index 0 holds the starting point and `τ₀`, `β₀`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterateHistory {
    pub x: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub tau: Vec<f64>,
    pub beta: Vec<f64>,
}

impl IterateHistory {
    fn push(&mut self, state: &SolverState) {
        self.x.push(state.x.clone());
        self.z.push(state.z.clone());
        self.y.push(state.y.clone());
        self.tau.push(state.tau_prev);
        self.beta.push(state.beta);
    }

    /// Number of completed iterations `N`.
    pub fn len(&self) -> usize {
        self.x.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub algorithm: AlgorithmId,
    pub rows: Vec<TraceRow>,
    pub tau0: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// `(X_N, Y_N)`, absent when no iteration completed.
    pub ergodic: Option<(Vec<f64>, Vec<f64>)>,
    pub fwd_matvecs: u64,
    pub adj_matvecs: u64,
    pub ls_trials: usize,
    pub termination: Termination,
    pub setup_seconds: f64,
    pub warnings: Vec<String>,
    pub iterates: Option<IterateHistory>,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn total_seconds(&self) -> f64 {
        self.setup_seconds + self.rows.last().map_or(0.0, |r| r.wall_seconds)
    }
}

fn check_moduli(problem: &SaddleProblem, algorithm: &Algorithm) -> Result<(), SolverError> {
    match algorithm {
        Algorithm::AgrpdaL(c) => {
            let modulus = problem.g.strong_convexity();
            if modulus < c.gamma_g {
                return Err(SolverError::NotStronglyConvex { which: "g", modulus });
            }
        }
        Algorithm::GrpdaScscL(_) => {
            for (which, modulus) in [("g", problem.g.strong_convexity()), ("f*", problem.fstar.strong_convexity())] {
                if modulus <= 0.0 {
                    return Err(SolverError::NotStronglyConvex { which, modulus });
                }
            }
        }
        _ => {}
    }
    Ok(())
}

fn step(problem: &SaddleProblem, state: &mut SolverState, algorithm: &Algorithm) -> Result<StepReport, SolverError> {
    match algorithm {
        Algorithm::Grpda(c) => Ok(grpda_fixed_iterate(problem, state, c.tau, c.sigma, c.psi)),
        Algorithm::GrpdaL(c) => grpda_l_iterate(problem, state, c),
        Algorithm::AgrpdaL(c) => agrpda_l_iterate(problem, state, c),
        Algorithm::GrpdaScscL(c) => grpda_scsc_iterate(problem, state, c),
        Algorithm::PdaL(c) => pda_l_iterate(problem, state, c),
    }
}

/// Runs `algorithm` from `(x0, y0)` until a criterion in `criteria` fires.
///
/// Invalid parameters and linesearch stalls end the run with
/// [`Termination::Failed`]; rows computed before a stall are kept.
pub fn run(
    problem: &SaddleProblem,
    algorithm: &Algorithm,
    x0: Vec<f64>,
    y0: Vec<f64>,
    criteria: &StopCriteria,
) -> Trace {
    let k = &problem.k;
    let (fwd0, adj0) = (k.fwd_count(), k.adj_count());
    let setup_start = Instant::now();
    let mut warnings = Vec::new();
    let mut state = SolverState::new(problem, x0, y0, algorithm.tau0(), algorithm.beta0());
    let mut history = criteria.record_iterates.then(|| {
        let mut h = IterateHistory::default();
        h.push(&state);
        h
    });
    let mut trace = Trace {
        algorithm: algorithm.id(),
        rows: Vec::new(),
        tau0: algorithm.tau0(),
        x: Vec::new(),
        y: Vec::new(),
        z: Vec::new(),
        ergodic: None,
        fwd_matvecs: 0,
        adj_matvecs: 0,
        ls_trials: 0,
        termination: Termination::IterationBudget,
        setup_seconds: 0.0,
        warnings: Vec::new(),
        iterates: None,
    };

    let precheck = algorithm.validate().map_err(SolverError::from).and_then(|_| check_moduli(problem, algorithm));
    if let Err(e) = precheck {
        trace.termination = Termination::Failed(e);
    } else if let Algorithm::Grpda(c) = algorithm {
        let l = estimate_spectral_norm(k, DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITER);
        if !c.step_condition_holds(l.value) {
            warnings.push(format!(
                "tau*sigma*L^2 = {:.6e} is not below psi = {} (L estimated as {:.6e})",
                c.tau * c.sigma * l.value * l.value,
                c.psi,
                l.value
            ));
        }
    }
    trace.setup_seconds = setup_start.elapsed().as_secs_f64();

    let mut solver_time = Duration::ZERO;
    let need_gap = criteria.gap_tol.is_some() || problem.gap.is_some();
    while !trace.termination.is_failure() && state.iter < criteria.max_iters {
        let t = Instant::now();
        let report = step(problem, &mut state, algorithm);
        solver_time += t.elapsed();
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                trace.termination = Termination::Failed(e);
                break;
            }
        };
        if let Some(h) = history.as_mut() {
            h.push(&state);
        }
        let gap = if need_gap { problem.gap.as_ref().map(|g| g(&state.x, &state.y)) } else { None };
        let objective = problem.objective.as_ref().map(|f| f(&state.x, &state.y));
        let ergodic_gap = match (&problem.gap, criteria.track_ergodic_gap) {
            (Some(g), true) => {
                let (ex, ey) = state.ergodic.average();
                Some(g(&ex, &ey))
            }
            _ => None,
        };
        trace.rows.push(TraceRow {
            iter: state.iter,
            wall_seconds: solver_time.as_secs_f64(),
            tau_n: report.tau,
            beta_n: report.beta,
            delta_n: report.delta,
            ls_trials: report.ls_trials,
            fwd_matvecs: k.fwd_count() - fwd0,
            adj_matvecs: k.adj_count() - adj0,
            gap,
            objective,
            ergodic_gap,
        });
        if let (Some(tol), Some(g)) = (criteria.gap_tol, gap) {
            if g < tol {
                trace.termination = Termination::GapTolerance;
                break;
            }
        }
        if let (Some(tol), Some(f_star), Some(f)) = (criteria.obj_tol, criteria.f_star, objective) {
            if f - f_star < tol {
                trace.termination = Termination::ObjectiveTolerance;
                break;
            }
        }
        if criteria.wall_clock_limit.is_some_and(|limit| solver_time >= limit) {
            trace.termination = Termination::WallClock;
            break;
        }
    }

    trace.fwd_matvecs = k.fwd_count() - fwd0;
    trace.adj_matvecs = k.adj_count() - adj0;
    trace.ls_trials = state.ls_trials_total;
    trace.ergodic = (!state.ergodic.is_empty()).then(|| state.ergodic.average());
    trace.x = state.x;
    trace.y = state.y;
    trace.z = state.z;
    trace.warnings = warnings;
    trace.iterates = history;
    trace
}

// SPDX-License-Identifier: Apache-2.0

//! Benchmark execution: one job per `(algorithm, seed)` pair.

use std::env;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use grpda::linalg::{DEFAULT_NORM_MAX_ITER, DEFAULT_NORM_TOL};
use grpda::problems::{
    gen_lasso_with, gen_matrix_game_with, lasso_as_saddle, lasso_start, matrix_game_as_saddle, matrix_game_start,
    reference_optimum, swap_primal_dual, LassoInstance, MatrixGameInstance,
};
use grpda::solvers::{default_perturb_scale, init_tau0};
use grpda::{estimate_spectral_norm, AlgorithmId, SaddleProblem, SeededRng, StopCriteria, Termination, Trace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{BenchConfig, Family, ProblemSpec};
use crate::tracefile::{write_iterates, write_pairs, write_trace, TraceFileError};

/// Overrides `output_dir` from the config when set.
pub const OUT_DIR_ENV: &str = "GRPDA_OUT_DIR";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    TraceFile(#[from] TraceFileError),
    #[error("summary: {0}")]
    Json(#[from] serde_json::Error),
}

/// A generated instance in the orientation the solver sees.
pub struct BuiltProblem {
    pub problem: SaddleProblem,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub game: Option<MatrixGameInstance>,
    pub lasso: Option<LassoInstance>,
}

pub fn build_problem(spec: &ProblemSpec, seed: u64) -> BuiltProblem {
    let (problem, x0, y0, game, lasso) = match spec.family {
        Family::MatrixGame(variant) => {
            let inst = gen_matrix_game_with(variant, spec.p, spec.q, seed, spec.noise);
            let (x0, y0) = matrix_game_start(&inst.k);
            (matrix_game_as_saddle(&inst), x0, y0, Some(inst), None)
        }
        Family::Lasso { case, s, v, mu_reg } => {
            let mut inst = gen_lasso_with(case, spec.p, spec.q, s, v, seed, spec.noise);
            inst.mu_reg = mu_reg;
            let (x0, y0) = lasso_start(&inst);
            (lasso_as_saddle(&inst), x0, y0, None, Some(inst))
        }
    };
    if spec.swap {
        BuiltProblem { problem: swap_primal_dual(&problem), x0: y0, y0: x0, game, lasso }
    } else {
        BuiltProblem { problem, x0, y0, game, lasso }
    }
}

/// The Table-row view of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub algorithm: String,
    pub family: String,
    pub instance: String,
    pub p: usize,
    pub q: usize,
    pub seed: u64,
    pub swap: bool,
    pub iterations: usize,
    pub ls_trials: usize,
    pub ls_per_iter: f64,
    pub fwd_matvecs: u64,
    pub adj_matvecs: u64,
    pub wall_seconds: f64,
    pub setup_seconds: f64,
    pub termination: String,
    pub failed: bool,
    pub tau0: Option<f64>,
    pub psi: Option<f64>,
    pub sigma: Option<f64>,
    pub beta0: f64,
    pub gamma_g: Option<f64>,
    pub final_gap: Option<f64>,
    pub final_objective: Option<f64>,
    pub f_star: Option<f64>,
    pub warnings: Vec<String>,
}

pub struct JobResult {
    pub trace: Trace,
    pub summary: Summary,
}

fn failed_trace(id: AlgorithmId, built: &BuiltProblem, error: grpda::SolverError) -> Trace {
    Trace {
        algorithm: id,
        rows: Vec::new(),
        tau0: f64::NAN,
        x: built.x0.clone(),
        y: built.y0.clone(),
        z: built.x0.clone(),
        ergodic: None,
        fwd_matvecs: 0,
        adj_matvecs: 0,
        ls_trials: 0,
        termination: Termination::Failed(error),
        setup_seconds: 0.0,
        warnings: Vec::new(),
        iterates: None,
    }
}

/// Runs one job without touching the filesystem.
pub fn run_job(cfg: &BenchConfig, id: AlgorithmId, seed: u64) -> JobResult {
    let built = build_problem(&cfg.problem, seed);
    let params = &cfg.params;
    let problem = &built.problem;

    let f_star = match (cfg.stop.f_star, cfg.stop.reference_budget) {
        (Some(f), _) => Some(f),
        (None, Some(budget)) if problem.objective.is_some() => {
            Some(reference_optimum(problem, &built.x0, &built.y0, budget))
        }
        _ => None,
    };
    let norm_estimate = if id == AlgorithmId::Grpda && (params.tau.is_none() || params.dual_step.is_none()) {
        estimate_spectral_norm(&problem.k, DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITER).value
    } else {
        1.0
    };
    let gamma_g = params.gamma_g.unwrap_or_else(|| problem.g.strong_convexity());
    let tau0 = match (params.tau0, id) {
        (Some(t), _) => Ok(t),
        (None, AlgorithmId::Grpda) => Ok(f64::NAN),
        (None, _) => {
            let mut rng = SeededRng::from_seed(params.init_seed);
            let scale = params.perturb_scale.unwrap_or_else(|| default_perturb_scale(&built.y0));
            init_tau0(&problem.k, &built.y0, scale, params.psi_for(id), params.beta, &mut rng)
        }
    };
    let algorithm = tau0.map(|t| params.algorithm(id, t, norm_estimate, gamma_g));

    let criteria = StopCriteria {
        gap_tol: cfg.stop.gap_tol,
        obj_tol: cfg.stop.obj_tol,
        f_star,
        max_iters: cfg.stop.max_iters,
        wall_clock_limit: cfg.stop.wall_limit_seconds.map(Duration::from_secs_f64),
        track_ergodic_gap: cfg.stop.track_ergodic_gap,
        record_iterates: cfg.stop.record_iterates,
    };
    let trace = match &algorithm {
        Ok(alg) => grpda::run(problem, alg, built.x0.clone(), built.y0.clone(), &criteria),
        Err(e) => failed_trace(id, &built, e.clone()),
    };

    let iterations = trace.rows.len();
    let last = trace.rows.last();
    let summary = Summary {
        name: cfg.name.clone(),
        algorithm: id.as_str().to_string(),
        family: cfg.problem.family.name().to_string(),
        instance: cfg.problem.family.instance_name().to_string(),
        p: cfg.problem.p,
        q: cfg.problem.q,
        seed,
        swap: cfg.problem.swap,
        iterations,
        ls_trials: trace.ls_trials,
        ls_per_iter: if iterations == 0 { 0.0 } else { trace.ls_trials as f64 / iterations as f64 },
        fwd_matvecs: trace.fwd_matvecs,
        adj_matvecs: trace.adj_matvecs,
        wall_seconds: trace.total_seconds(),
        setup_seconds: trace.setup_seconds,
        termination: trace.termination.to_string(),
        failed: trace.termination.is_failure(),
        tau0: trace.tau0.is_finite().then_some(trace.tau0),
        psi: algorithm.as_ref().ok().and_then(|a| a.psi()),
        sigma: match id {
            AlgorithmId::GrpdaL | AlgorithmId::GrpdaScscL => Some(params.sigma_for(id)),
            AlgorithmId::AgrpdaL => Some(1.0),
            AlgorithmId::Grpda | AlgorithmId::PdaL => None,
        },
        beta0: algorithm.as_ref().map_or(params.beta, |a| a.beta0()),
        gamma_g: (id == AlgorithmId::AgrpdaL).then_some(gamma_g),
        final_gap: last.and_then(|r| r.gap),
        final_objective: last.and_then(|r| r.objective),
        f_star,
        warnings: trace.warnings.clone(),
    };
    JobResult { trace, summary }
}

/// Files written for one job.
#[derive(Debug, Clone, PartialEq)]
pub struct JobFiles {
    pub trace_csv: PathBuf,
    pub summary_json: PathBuf,
    pub time_gap: PathBuf,
    pub iter_gap: PathBuf,
    pub iterates_csv: Option<PathBuf>,
}

impl JobFiles {
    pub fn for_job(dir: &Path, name: &str, id: AlgorithmId, seed: u64) -> Self {
        let stem = dir.join(format!("{name}_{id}_seed{seed}"));
        let with = |ext: &str| PathBuf::from(format!("{}.{ext}", stem.display()));
        JobFiles {
            trace_csv: with("csv"),
            summary_json: with("summary.json"),
            time_gap: with("time_gap.dat"),
            iter_gap: with("iter_gap.dat"),
            iterates_csv: None,
        }
    }
}

/// `<trace>.summary.json` for a `<stem>.csv` trace path.
pub fn summary_path_for(trace_csv: &Path) -> PathBuf {
    trace_csv.with_extension("summary.json")
}

/// `<trace>.iterates.csv` for a `<stem>.csv` trace path.
pub fn iterates_path_for(trace_csv: &Path) -> PathBuf {
    trace_csv.with_extension("iterates.csv")
}

pub fn write_job(
    dir: &Path,
    cfg: &BenchConfig,
    id: AlgorithmId,
    seed: u64,
    job: &JobResult,
) -> Result<JobFiles, BenchError> {
    let mut files = JobFiles::for_job(dir, &cfg.name, id, seed);
    write_trace(&files.trace_csv, &job.trace.rows)?;
    let json = serde_json::to_string_pretty(&job.summary)?;
    fs::write(&files.summary_json, json + "\n")
        .map_err(|source| BenchError::Io { path: files.summary_json.clone(), source })?;

    // Matrix games plot the gap; LASSO plots F(x_n) − F* when F* is known.
    let (label, series): (&str, Vec<(usize, f64, f64)>) = if job.trace.rows.iter().any(|r| r.gap.is_some()) {
        ("gap", job.trace.rows.iter().filter_map(|r| r.gap.map(|g| (r.iter, r.wall_seconds, g))).collect())
    } else {
        let shift = job.summary.f_star.unwrap_or(0.0);
        let label = if job.summary.f_star.is_some() { "objective_residual" } else { "objective" };
        (
            label,
            job.trace.rows.iter().filter_map(|r| r.objective.map(|f| (r.iter, r.wall_seconds, f - shift))).collect(),
        )
    };
    write_pairs(&files.time_gap, &format!("wall_seconds {label}"), series.iter().map(|s| (s.1, s.2)))?;
    write_pairs(&files.iter_gap, &format!("iter {label}"), series.iter().map(|s| (s.0 as f64, s.2)))?;
    if let Some(h) = &job.trace.iterates {
        let path = iterates_path_for(&files.trace_csv);
        write_iterates(&path, h)?;
        files.iterates_csv = Some(path);
    }
    Ok(files)
}

type JobOutcome = Result<(Summary, JobFiles), BenchError>;

pub struct BenchReport {
    pub output_dir: PathBuf,
    pub summaries: Vec<Summary>,
    pub files: Vec<JobFiles>,
}

/// Directory the benchmark writes to, honoring [`OUT_DIR_ENV`].
pub fn output_dir(cfg: &BenchConfig) -> PathBuf {
    env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| cfg.output_dir.clone())
}

/// Runs the algorithm × seed grid in parallel and writes every job's files
/// plus `<name>.summary.json`. Jobs are ordered algorithm-major in the report.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    run_benchmark_in(cfg, &output_dir(cfg))
}

pub fn run_benchmark_in(cfg: &BenchConfig, dir: &Path) -> Result<BenchReport, BenchError> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Io { path: dir.to_path_buf(), source })?;
    let jobs: Vec<(AlgorithmId, u64)> =
        cfg.algorithms.iter().flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s))).collect();
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<JobOutcome>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(id, seed)) = jobs.get(i) else { break };
                let job = run_job(cfg, id, seed);
                let out = write_job(dir, cfg, id, seed, &job).map(|files| (job.summary, files));
                results.lock().expect("no worker panics while holding the lock")[i] = Some(out);
            });
        }
    });
    let mut summaries = Vec::with_capacity(jobs.len());
    let mut files = Vec::with_capacity(jobs.len());
    for r in results.into_inner().expect("workers joined") {
        let (s, f) = r.expect("every job ran")?;
        summaries.push(s);
        files.push(f);
    }
    let path = dir.join(format!("{}.summary.json", cfg.name));
    let json = serde_json::to_string_pretty(&summaries)?;
    fs::write(&path, json + "\n").map_err(|source| BenchError::Io { path, source })?;
    Ok(BenchReport { output_dir: dir.to_path_buf(), summaries, files })
}

/// Fixed-width results table. Runs that hit
/// the budget show their termination reason next to the counts.
pub fn render_table(summaries: &[Summary]) -> String {
    let mut out = format!(
        "{:<14} {:>6} {:>10} {:>8} {:>9} {:>11} {:>11}  {}\n",
        "algorithm", "seed", "iter", "#LS", "#LS/iter", "matvecs", "time[s]", "termination"
    );
    for s in summaries {
        out.push_str(&format!(
            "{:<14} {:>6} {:>10} {:>8} {:>9.3} {:>11} {:>11.3}  {}\n",
            s.algorithm,
            s.seed,
            s.iterations,
            s.ls_trials,
            s.ls_per_iter,
            s.fwd_matvecs + s.adj_matvecs,
            s.wall_seconds,
            s.termination
        ));
    }
    out
}

// SPDX-License-Identifier: Apache-2.0

use crate::linalg::lincomb;

use super::linesearch::{linesearch_dual, LinesearchOutcome, LinesearchParams};
use super::{growth_cap, AgrpdaLConfig, GrpdaLConfig, SaddleProblem, SolverError, SolverState, StepReport};

/// `z_n` and `x_n = Prox_{τ_{n−1}g}(z_n − τ_{n−1}Kᵀy_{n−1})`, using the cached `Kᵀy_{n−1}`.
fn primal_step(problem: &SaddleProblem, state: &SolverState, psi: f64) -> (Vec<f64>, Vec<f64>) {
    let z = lincomb((psi - 1.0) / psi, &state.x, 1.0 / psi, &state.z);
    let tau = state.tau_prev;
    let arg: Vec<f64> = z.iter().zip(&state.kty).map(|(zi, ki)| zi - tau * ki).collect();
    let x = problem.g.prox(tau, &arg);
    (z, x)
}

fn commit(
    state: &mut SolverState,
    z: Vec<f64>,
    x: Vec<f64>,
    kx: Vec<f64>,
    ls: LinesearchOutcome,
    beta: f64,
    weight: f64,
) -> StepReport {
    let delta = ls.tau / state.tau_prev;
    state.ergodic.update(weight, &x, &ls.y);
    state.z = z;
    state.x = x;
    state.kx = Some(kx);
    state.y = ls.y;
    state.kty = ls.kty;
    state.tau_prev = ls.tau;
    state.beta = beta;
    state.delta = delta;
    state.iter += 1;
    state.ls_trials_total += ls.trials;
    StepReport { tau: ls.tau, beta, delta, ls_trials: ls.trials, omega: None }
}

fn linesearch_iterate(
    problem: &SaddleProblem,
    state: &mut SolverState,
    cfg: &GrpdaLConfig,
    sigma: f64,
) -> Result<StepReport, SolverError> {
    let (z, x) = primal_step(problem, state, cfg.psi);
    let kx = problem.k.apply(&x);
    let params = LinesearchParams { psi: cfg.psi, mu: cfg.mu, max_trials: cfg.max_ls_trials };
    let ls = linesearch_dual(problem, state, &kx, cfg.beta, sigma, params)?;
    let weight = ls.tau;
    Ok(commit(state, z, x, kx, ls, cfg.beta, weight))
}

/// One iteration of the linesearch method for convex `g` and `f*`.
pub fn grpda_l_iterate(
    problem: &SaddleProblem,
    state: &mut SolverState,
    cfg: &GrpdaLConfig,
) -> Result<StepReport, SolverError> {
    linesearch_iterate(problem, state, cfg, cfg.sigma)
}

/// One iteration of the variant for strongly convex `g` and `f*`; the
/// moduli do not enter the update and `σ = 1`.
pub fn grpda_scsc_iterate(
    problem: &SaddleProblem,
    state: &mut SolverState,
    cfg: &GrpdaLConfig,
) -> Result<StepReport, SolverError> {
    linesearch_iterate(problem, state, cfg, 1.0)
}

/// `ω_n = (ψ − φ̂)/(ψ + φ̂γ_gτ_{n−1})` and `β_n = β_{n−1}(1 + γ_gω_nτ_{n−1})`.
///
/// Panics unless `psi > growth_cap`.
pub fn update_omega_beta(gamma_g: f64, tau_prev: f64, beta_prev: f64, psi: f64, growth_cap: f64) -> (f64, f64) {
    assert!(psi > growth_cap, "psi must exceed the growth cap");
    let omega = (psi - growth_cap) / (psi + growth_cap * gamma_g * tau_prev);
    (omega, beta_prev * (1.0 + gamma_g * omega * tau_prev))
}

/// One iteration of the accelerated method for strongly convex `g`.
///
/// Uses `cfg.gamma_g` as given; compatibility with `g` is checked by
/// [`run`](super::run).
pub fn agrpda_l_iterate(
    problem: &SaddleProblem,
    state: &mut SolverState,
    cfg: &AgrpdaLConfig,
) -> Result<StepReport, SolverError> {
    let (z, x) = primal_step(problem, state, cfg.psi);
    let (omega, beta) = update_omega_beta(cfg.gamma_g, state.tau_prev, state.beta, cfg.psi, growth_cap(cfg.psi));
    let kx = problem.k.apply(&x);
    let params = LinesearchParams { psi: cfg.psi, mu: cfg.mu, max_trials: cfg.max_ls_trials };
    let ls = linesearch_dual(problem, state, &kx, beta, 1.0, params)?;
    let weight = beta * ls.tau;
    let report = commit(state, z, x, kx, ls, beta, weight);
    Ok(StepReport { omega: Some(omega), ..report })
}

/// One constant-step iteration with primal step `tau` and dual step `sigma_dual`.
pub fn grpda_fixed_iterate(
    problem: &SaddleProblem,
    state: &mut SolverState,
    tau: f64,
    sigma_dual: f64,
    psi: f64,
) -> StepReport {
    state.tau_prev = tau;
    let (z, x) = primal_step(problem, state, psi);
    let kx = problem.k.apply(&x);
    let u: Vec<f64> = state.y.iter().zip(&kx).map(|(y, k)| y + sigma_dual * k).collect();
    let y = problem.fstar.prox(sigma_dual, &u);
    let kty = problem.k.apply_adjoint(&y);
    let ls = LinesearchOutcome { tau, y, kty, trials: 0 };
    let beta = state.beta;
    commit(state, z, x, kx, ls, beta, tau)
}

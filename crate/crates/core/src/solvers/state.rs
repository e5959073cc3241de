// SPDX-License-Identifier: Apache-2.0

use crate::linalg::{norm, LinearOperator, SeededRng};
use crate::prox::AffineProx;

use super::{ErgodicAverager, SaddleProblem, SolverError};

/// `Kᵀ` applied to the fixed directions of an affine dual prox, computed once
/// per run so that trial dual points never need a fresh adjoint product.
#[derive(Debug, Clone)]
pub(crate) struct AffineCache {
    pub prox: AffineProx,
    pub kt_rank_one: Option<Vec<f64>>,
    pub kt_offset: Option<Vec<f64>>,
}

impl AffineCache {
    fn build(prox: AffineProx, k: &LinearOperator) -> Self {
        let kt_rank_one = prox.rank_one_direction().map(|v| k.apply_adjoint(v));
        let kt_offset = prox.offset_direction().map(|d| k.apply_adjoint(d));
        Self { prox, kt_rank_one, kt_offset }
    }
}

/// Extra memory for the extrapolated baseline.
#[derive(Debug, Clone)]
pub(crate) struct PdaMemory {
    /// `K x_{n−1}`
    pub kx_prev: Vec<f64>,
    /// `KᵀK x_{n−1}`, only on the affine path.
    pub ktkx_prev: Option<Vec<f64>>,
    /// `θ_{n−1} = τ_{n−1}/τ_{n−2}`, starting at 1.
    pub theta: f64,
}

/// Iterate bundle owned by one solver run.
///
/// Between iterations `kty` always holds `Kᵀy` for the current `y`, so the
/// next primal step consumes it without a new product.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    /// `τ_{n−1}` going into the next iteration.
    pub tau_prev: f64,
    /// Current dual weight: constant `β`, or `β_n` for the accelerated variant.
    pub beta: f64,
    /// `δ_n = τ_n/τ_{n−1}` of the last iteration.
    pub delta: f64,
    pub kty: Vec<f64>,
    /// `K x_n` from the last iteration.
    pub kx: Option<Vec<f64>>,
    pub iter: usize,
    pub ls_trials_total: usize,
    pub ergodic: ErgodicAverager,
    pub(crate) affine: Option<AffineCache>,
    pub(crate) pda: Option<PdaMemory>,
}

impl SolverState {
    /// `x_0 = z_0`, `y_0`, `τ_0` and initial dual weight. Computes `Kᵀy_0`
    /// and, for an affine dual prox, `Kᵀ` of its fixed directions.
    pub fn new(problem: &SaddleProblem, x0: Vec<f64>, y0: Vec<f64>, tau0: f64, beta: f64) -> Self {
        assert_eq!(x0.len(), problem.primal_dim(), "x0 has wrong dimension");
        assert_eq!(y0.len(), problem.dual_dim(), "y0 has wrong dimension");
        assert!(tau0 > 0.0, "tau0 must be positive");
        let kty = problem.k.apply_adjoint(&y0);
        let affine = problem.fstar.affine().map(|a| AffineCache::build(a, &problem.k));
        Self {
            z: x0.clone(),
            x: x0,
            y: y0,
            tau_prev: tau0,
            beta,
            delta: 1.0,
            kty,
            kx: None,
            iter: 0,
            ls_trials_total: 0,
            ergodic: ErgodicAverager::new(),
            affine,
            pda: None,
        }
    }

    /// Disables the matvec-free dual linesearch even when `f*` is affine.
    pub fn without_affine_fast_path(mut self) -> Self {
        self.affine = None;
        self
    }

    pub fn uses_affine_fast_path(&self) -> bool {
        self.affine.is_some()
    }
}

/// What one iteration produced, besides the updated state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub tau: f64,
    pub beta: f64,
    pub delta: f64,
    /// Rejected linesearch trials in this iteration.
    pub ls_trials: usize,
    /// `ω_n` for the accelerated variant.
    pub omega: Option<f64>,
}

const TAU0_MAX_ATTEMPTS: usize = 16;

/// `m = ‖y₋₁ − y₀‖ / ‖Kᵀy₋₁ − Kᵀy₀‖` for a random `y₋₁` at distance
/// `perturb_scale` from `y₀`, redrawn while `Kᵀ(y₋₁ − y₀) = 0`.
///
/// One adjoint product per draw. Panics if `K` is zero.
pub fn dual_step_ratio(
    k: &LinearOperator,
    y0: &[f64],
    perturb_scale: f64,
    rng: &mut SeededRng,
) -> Result<f64, SolverError> {
    assert!(!k.is_zero(), "stepsize initialization needs a nonzero operator");
    assert!(perturb_scale > 0.0, "perturb_scale must be positive");
    assert_eq!(y0.len(), k.rows());
    for _ in 0..TAU0_MAX_ATTEMPTS {
        let step: Vec<f64> = rng.unit_vector(y0.len()).into_iter().map(|u| perturb_scale * u).collect();
        let y_minus: Vec<f64> = y0.iter().zip(&step).map(|(a, b)| a + b).collect();
        let dy: Vec<f64> = y_minus.iter().zip(y0).map(|(a, b)| a - b).collect();
        let kt_dy = norm(&k.apply_adjoint(&dy));
        if kt_dy > 0.0 {
            return Ok(norm(&dy) / kt_dy);
        }
    }
    Err(SolverError::Tau0Init { attempts: TAU0_MAX_ATTEMPTS })
}

/// `τ₀ = √(ψ/β)·m`, see [`dual_step_ratio`].
pub fn init_tau0(
    k: &LinearOperator,
    y0: &[f64],
    perturb_scale: f64,
    psi: f64,
    beta: f64,
    rng: &mut SeededRng,
) -> Result<f64, SolverError> {
    let m = dual_step_ratio(k, y0, perturb_scale, rng)?;
    Ok((psi / beta).sqrt() * m)
}

/// Default perturbation radius `1e-6·max(1, ‖y₀‖)`.
pub fn default_perturb_scale(y0: &[f64]) -> f64 {
    1e-6 * norm(y0).max(1.0)
}

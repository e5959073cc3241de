// SPDX-License-Identifier: Apache-2.0

use crate::linalg::{dist, LinearOperator};
use crate::prox::ProxFn;

use super::state::AffineCache;
use super::{growth_cap, SaddleProblem, SolverError, SolverState};

/// Backtracking parameters shared by the golden-ratio linesearch variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinesearchParams {
    pub psi: f64,
    pub mu: f64,
    pub max_trials: usize,
}

/// Accepted dual step.
#[derive(Debug, Clone, PartialEq)]
pub struct LinesearchOutcome {
    pub tau: f64,
    pub y: Vec<f64>,
    pub kty: Vec<f64>,
    /// Number of rejected trials before acceptance.
    pub trials: usize,
}

/// `√(β_n τ_n)·‖Kᵀy_n − Kᵀy_{n−1}‖ ≤ σ·√(ψ/τ_{n−1})·‖y_n − y_{n−1}‖`, compared
/// without slack. A zero dual move is accepted outright.
pub fn dual_acceptance(
    beta_n: f64,
    tau: f64,
    tau_prev: f64,
    psi: f64,
    sigma: f64,
    kty_diff_norm: f64,
    y_diff_norm: f64,
) -> bool {
    if y_diff_norm == 0.0 {
        return true;
    }
    (beta_n * tau).sqrt() * kty_diff_norm <= sigma * (psi / tau_prev).sqrt() * y_diff_norm
}

/// Produces trial dual points `y_t = Prox_{λf*}(y_prev + λ·d)` together with
/// `Kᵀy_t`. With an affine prox, `Kᵀy_t` is assembled from cached products:
/// `Kᵀy_t = a·(Kᵀy_prev + λ·Kᵀd) + r·⟨v, u⟩·Kᵀv + c·Kᵀw`.
pub(crate) struct DualTrial<'a> {
    pub fstar: &'a ProxFn,
    pub k: &'a LinearOperator,
    pub y_prev: &'a [f64],
    pub kty_prev: &'a [f64],
    pub affine: Option<&'a AffineCache>,
}

impl DualTrial<'_> {
    /// `dir` is the dual ascent direction `K x̃`; `kt_dir` is `Kᵀ dir` and must
    /// be supplied exactly when the affine path is active.
    pub fn evaluate(&self, lambda: f64, dir: &[f64], kt_dir: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
        let u: Vec<f64> = self.y_prev.iter().zip(dir).map(|(y, d)| y + lambda * d).collect();
        match (self.affine, kt_dir) {
            (Some(cache), Some(kt_dir)) => {
                let c = cache.prox.coefficients(lambda);
                let y = cache.prox.apply(lambda, &u);
                let mut kty: Vec<f64> =
                    self.kty_prev.iter().zip(kt_dir).map(|(a, b)| c.identity * (a + lambda * b)).collect();
                if let (Some(v), Some(ktv)) = (cache.prox.rank_one_direction(), &cache.kt_rank_one) {
                    let s = c.rank_one * crate::linalg::dot(v, &u);
                    kty.iter_mut().zip(ktv).for_each(|(o, w)| *o += s * w);
                }
                if let Some(ktd) = &cache.kt_offset {
                    kty.iter_mut().zip(ktd).for_each(|(o, w)| *o += c.offset * w);
                }
                (y, kty)
            }
            (None, None) => {
                let y = self.fstar.prox(lambda, &u);
                let kty = self.k.apply_adjoint(&y);
                (y, kty)
            }
            _ => unreachable!("kt_dir must be given exactly on the affine path"),
        }
    }
}

/// Generic backtracking: tries `start, start·μ, start·μ², …` until `attempt`
/// accepts, allowing at most `max_trials` rejections.
pub(crate) fn backtrack(
    start: f64,
    mu: f64,
    max_trials: usize,
    iteration: usize,
    mut attempt: impl FnMut(f64) -> Option<(Vec<f64>, Vec<f64>)>,
) -> Result<LinesearchOutcome, SolverError> {
    let mut tau = start;
    for trials in 0..=max_trials {
        if let Some((y, kty)) = attempt(tau) {
            return Ok(LinesearchOutcome { tau, y, kty, trials });
        }
        if trials < max_trials {
            tau *= mu;
        }
    }
    Err(SolverError::LinesearchStall { iteration, trials: max_trials + 1, last_tau: tau })
}

/// Dual linesearch of the golden-ratio methods.
///
/// Starting from `τ = φ̂·τ_{n−1}`, shrinks `τ` by `μ` until the trial
/// `y = Prox_{β_n τ f*}(y_{n−1} + β_n τ K x_n)` passes [`dual_acceptance`].
/// `kx` is `K x_n`. On the affine path `Kᵀ(K x_n)` is formed once, so at most
/// one adjoint product is spent regardless of the number of trials.
pub fn linesearch_dual(
    problem: &SaddleProblem,
    state: &SolverState,
    kx: &[f64],
    beta_n: f64,
    sigma_factor: f64,
    params: LinesearchParams,
) -> Result<LinesearchOutcome, SolverError> {
    let trial = DualTrial {
        fstar: &problem.fstar,
        k: &problem.k,
        y_prev: &state.y,
        kty_prev: &state.kty,
        affine: state.affine.as_ref(),
    };
    let kt_kx = state.affine.as_ref().map(|_| problem.k.apply_adjoint(kx));
    let tau_prev = state.tau_prev;
    backtrack(growth_cap(params.psi) * tau_prev, params.mu, params.max_trials, state.iter + 1, |tau| {
        let (y, kty) = trial.evaluate(beta_n * tau, kx, kt_kx.as_deref());
        let accepted = dual_acceptance(
            beta_n,
            tau,
            tau_prev,
            params.psi,
            sigma_factor,
            dist(&kty, &state.kty),
            dist(&y, &state.y),
        );
        accepted.then_some((y, kty))
    })
}

// SPDX-License-Identifier: Apache-2.0

use crate::linalg::{dist_sq, lincomb};

use super::{growth_cap, IterateHistory};

/// Sequences `a_n`, `b_n` and `θ_n` along one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RateDiagnostics {
    /// `a_seq[i] = a_{i+1}`, for `n = 1..=N`.
    pub a_seq: Vec<f64>,
    /// `b_seq[i] = b_{i+1}`, for `n = 1..N−1`.
    pub b_seq: Vec<f64>,
    /// `theta_seq[i] = θ_{i+1}`, present when both moduli were supplied.
    pub theta_seq: Option<Vec<f64>>,
}

impl RateDiagnostics {
    pub fn compute(
        history: &IterateHistory,
        psi: f64,
        sigma: f64,
        xbar: &[f64],
        ybar: &[f64],
        moduli: Option<(f64, f64)>,
    ) -> Self {
        let (a_seq, b_seq) = descent_sequences(history, psi, sigma, xbar, ybar);
        let theta_seq = moduli.map(|(gamma_g, gamma_f)| theta_sequence(history, psi, gamma_g, gamma_f));
        Self { a_seq, b_seq, theta_seq }
    }

    /// Largest violation of `a_{n+1} ≤ a_n − b_n` (nonpositive when it holds).
    pub fn worst_descent_margin(&self) -> f64 {
        self.b_seq
            .iter()
            .enumerate()
            .map(|(i, b)| self.a_seq[i + 1] - (self.a_seq[i] - b))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn next_z(psi: f64, x: &[f64], z: &[f64]) -> Vec<f64> {
    lincomb((psi - 1.0) / psi, x, 1.0 / psi, z)
}

/// `a_n = ψ/(ψ−1)·‖z_{n+1} − x̄‖² + (1/β)‖y_{n−1} − ȳ‖²` and
/// `b_n = ψδ_n‖z_{n+1} − x_n‖² + (1−σ)(ψδ_n‖x_{n+1} − x_n‖² + (1/β)‖y_n − y_{n−1}‖²)`
/// for a constant dual weight `β`, read from the history.
pub fn descent_sequences(
    history: &IterateHistory,
    psi: f64,
    sigma: f64,
    xbar: &[f64],
    ybar: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n_max = history.len();
    let mut a = Vec::with_capacity(n_max);
    let mut b = Vec::with_capacity(n_max.saturating_sub(1));
    for n in 1..=n_max {
        let beta = history.beta[n];
        let z_next = next_z(psi, &history.x[n], &history.z[n]);
        a.push(psi / (psi - 1.0) * dist_sq(&z_next, xbar) + dist_sq(&history.y[n - 1], ybar) / beta);
        if n < n_max {
            let delta = history.tau[n] / history.tau[n - 1];
            let dy = dist_sq(&history.y[n], &history.y[n - 1]) / beta;
            let dx = dist_sq(&history.x[n + 1], &history.x[n]);
            b.push(psi * delta * dist_sq(&z_next, &history.x[n]) + (1.0 - sigma) * (psi * delta * dx + dy));
        }
    }
    (a, b)
}

/// `θ_n = min{1 + ω_nγ_gτ_{n−1}, 1 + βγ_fτ_{n−1}}` with
/// `ω_n = (ψ − φ̂)/(ψ + φ̂γ_gτ_{n−1})`, for `n = 1..=N`.
pub fn theta_sequence(history: &IterateHistory, psi: f64, gamma_g: f64, gamma_f: f64) -> Vec<f64> {
    let cap = growth_cap(psi);
    (1..=history.len())
        .map(|n| {
            let tau_prev = history.tau[n - 1];
            let beta = history.beta[n];
            let omega = (psi - cap) / (psi + cap * gamma_g * tau_prev);
            (1.0 + omega * gamma_g * tau_prev).min(1.0 + beta * gamma_f * tau_prev)
        })
        .collect()
}

/// `ψ/(ψ−1)·‖z₂ − x̄‖² + (1/β)‖y₀ − ȳ‖²`, with `z₂` formed from `x₁`, `z₁`.
/// Panics if the history has no completed iteration.
pub fn ergodic_bound_numerator(history: &IterateHistory, psi: f64, xbar: &[f64], ybar: &[f64]) -> f64 {
    assert!(!history.is_empty(), "need at least one iteration");
    let z2 = next_z(psi, &history.x[1], &history.z[1]);
    psi / (psi - 1.0) * dist_sq(&z2, xbar) + dist_sq(&history.y[0], ybar) / history.beta[0]
}

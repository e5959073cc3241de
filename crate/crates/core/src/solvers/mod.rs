// SPDX-License-Identifier: Apache-2.0

//! Primal-dual solvers for `min_x max_y g(x) + ⟨Kx, y⟩ − f*(y)`.
//!
//! The golden-ratio family replaces extrapolation by a convex combination
//! `z_n = ((ψ−1)/ψ)·x_{n−1} + (1/ψ)·z_{n−1}` of past primal iterates. The
//! linesearch variants pick the stepsize `τ_n` by backtracking on the dual
//! update only, starting from `φ̂·τ_{n−1}` with `φ̂ = (1+ψ)/ψ²`.
//!
//! | id | update |
//! |----|--------|
//! | `grpda` | constant steps, requires `τσ‖K‖² < ψ` |
//! | `grpda-l` | dual backtracking with safety factor `σ < 1` |
//! | `agrpda-l` | `g` strongly convex, growing dual weight `β_n` |
//! | `grpda-scsc-l` | both `g` and `f*` strongly convex, `σ = 1` |
//! | `pda-l` | Chambolle–Pock extrapolation with backtracking, baseline |

mod diagnostics;
mod ergodic;
mod grpda;
mod linesearch;
mod pda;
mod run;
mod state;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{dot, LinearOperator};
use crate::prox::{ExtendedReal, ProxFn};

pub use diagnostics::{descent_sequences, ergodic_bound_numerator, theta_sequence, RateDiagnostics};
pub use ergodic::ErgodicAverager;
pub use grpda::{agrpda_l_iterate, grpda_fixed_iterate, grpda_l_iterate, grpda_scsc_iterate, update_omega_beta};
pub use linesearch::{dual_acceptance, linesearch_dual, LinesearchOutcome, LinesearchParams};
pub use pda::{pda_acceptance, pda_l_iterate};
pub use run::{run, IterateHistory, StopCriteria, Termination, Trace, TraceRow};
pub use state::{default_perturb_scale, dual_step_ratio, init_tau0, SolverState, StepReport};

/// `φ = (1 + √5)/2`, the upper limit for the convex-combination parameter ψ.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// The unique real root of `ψ³ − ψ − 1`; accelerated variants need `ψ > PSI0`.
pub const PSI0: f64 = 1.324_717_957_244_746;

/// Largest per-iteration stepsize growth `φ̂ = (1+ψ)/ψ²`.
pub fn growth_cap(psi: f64) -> f64 {
    (1.0 + psi) / (psi * psi)
}

/// Bilinear function evaluated at a `(primal, dual)` pair.
pub type PairFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// The triple `(g, f*, K)` with optional evaluators.
///
/// `gap` and `objective` receive `(primal, dual)` iterates. Objectives usually
/// look only at the primal part; after [`swap_primal_dual`](crate::problems::swap_primal_dual)
/// they follow the original variable into the dual slot.
#[derive(Clone)]
pub struct SaddleProblem {
    pub g: ProxFn,
    pub fstar: ProxFn,
    pub k: Arc<LinearOperator>,
    pub gap: Option<PairFn>,
    pub objective: Option<PairFn>,
}

impl SaddleProblem {
    pub fn new(g: ProxFn, fstar: ProxFn, k: Arc<LinearOperator>) -> Self {
        Self { g, fstar, k, gap: None, objective: None }
    }

    pub fn with_gap(mut self, gap: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.gap = Some(Arc::new(gap));
        self
    }

    pub fn with_objective(mut self, objective: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.objective = Some(Arc::new(objective));
        self
    }

    /// Dimension `q` of the primal variable.
    pub fn primal_dim(&self) -> usize {
        self.k.cols()
    }

    /// Dimension `p` of the dual variable.
    pub fn dual_dim(&self) -> usize {
        self.k.rows()
    }

    /// `L(x, y) = g(x) + ⟨Kx, y⟩ − f*(y)`, with `±∞` outside the domains.
    /// `None` when either function has no evaluator.
    pub fn lagrangian(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        let gx = self.g.eval(x)?;
        let fy = self.fstar.eval(y)?;
        Some(match (gx, fy) {
            (ExtendedReal::Infinite, _) => f64::INFINITY,
            (_, ExtendedReal::Infinite) => f64::NEG_INFINITY,
            (ExtendedReal::Finite(gx), ExtendedReal::Finite(fy)) => gx + dot(&self.k.apply_uninstrumented(x), y) - fy,
        })
    }

    /// `G(x, y) = L(x, ȳ) − L(x̄, y)` relative to a saddle point `(x̄, ȳ)`.
    pub fn relative_gap(&self, x: &[f64], y: &[f64], xbar: &[f64], ybar: &[f64]) -> Option<f64> {
        Some(self.lagrangian(x, ybar)? - self.lagrangian(xbar, y)?)
    }
}

impl fmt::Debug for SaddleProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SaddleProblem")
            .field("g", &self.g)
            .field("fstar", &self.fstar)
            .field("k", &self.k)
            .field("gap", &self.gap.is_some())
            .field("objective", &self.objective.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{param} out of {range}")]
    OutOfRange { param: &'static str, value: f64, range: String },
    #[error("{0}")]
    Requirement(String),
}

fn check_open(param: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), ConfigError> {
    if value > lo && value < hi {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange { param, value, range: format!("({lo}, {hi:.6})") })
    }
}

fn check_positive(param: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange { param, value, range: "(0, inf)".into() })
    }
}

fn format_open_interval(lo: f64, hi: f64) -> String {
    format!("({lo:.6}, {hi:.6})")
}

pub const DEFAULT_MAX_LS_TRIALS: usize = 60;

/// Parameters of the linesearch algorithm for the general convex case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrpdaLConfig {
    pub psi: f64,
    pub sigma: f64,
    pub beta: f64,
    pub mu: f64,
    pub tau0: f64,
    pub max_ls_trials: usize,
}

impl GrpdaLConfig {
    /// `ψ = 1.5`, `σ = 0.99`, `β = 1`, `μ = 0.7`.
    pub fn with_tau0(tau0: f64) -> Self {
        Self { psi: 1.5, sigma: 0.99, beta: 1.0, mu: 0.7, tau0, max_ls_trials: DEFAULT_MAX_LS_TRIALS }
    }

    pub fn growth_cap(&self) -> f64 {
        growth_cap(self.psi)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check_open("psi", self.psi, 1.0, GOLDEN_RATIO)?;
        check_open("sigma", self.sigma, 0.0, 1.0)?;
        check_positive("beta", self.beta)?;
        check_open("mu", self.mu, 0.0, 1.0)?;
        check_positive("tau0", self.tau0)?;
        if self.max_ls_trials == 0 {
            return Err(ConfigError::Requirement("max_ls_trials must be positive".into()));
        }
        Ok(())
    }

    /// Same checks with `σ = 1` allowed and `ψ > ψ₀`, for the doubly strongly
    /// convex variant.
    pub fn validate_scsc(&self) -> Result<(), ConfigError> {
        if !(self.psi > PSI0 && self.psi < GOLDEN_RATIO) {
            return Err(ConfigError::OutOfRange {
                param: "psi",
                value: self.psi,
                range: format_open_interval(PSI0, GOLDEN_RATIO),
            });
        }
        if self.sigma != 1.0 {
            return Err(ConfigError::Requirement("sigma must equal 1 for grpda-scsc-l".into()));
        }
        check_positive("beta", self.beta)?;
        check_open("mu", self.mu, 0.0, 1.0)?;
        check_positive("tau0", self.tau0)?;
        if self.max_ls_trials == 0 {
            return Err(ConfigError::Requirement("max_ls_trials must be positive".into()));
        }
        Ok(())
    }
}

/// Parameters of the accelerated variant for strongly convex `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgrpdaLConfig {
    pub psi: f64,
    pub beta0: f64,
    pub gamma_g: f64,
    pub mu: f64,
    pub tau0: f64,
    pub max_ls_trials: usize,
}

impl AgrpdaLConfig {
    pub fn growth_cap(&self) -> f64 {
        growth_cap(self.psi)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.psi > PSI0 && self.psi < GOLDEN_RATIO) {
            return Err(ConfigError::OutOfRange {
                param: "psi",
                value: self.psi,
                range: format_open_interval(PSI0, GOLDEN_RATIO),
            });
        }
        check_positive("beta0", self.beta0)?;
        check_positive("gamma_g", self.gamma_g)?;
        check_open("mu", self.mu, 0.0, 1.0)?;
        check_positive("tau0", self.tau0)?;
        if self.max_ls_trials == 0 {
            return Err(ConfigError::Requirement("max_ls_trials must be positive".into()));
        }
        Ok(())
    }
}

/// Constant-step iteration; `psi ∈ (1, φ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedGrpdaConfig {
    pub psi: f64,
    pub tau: f64,
    pub sigma: f64,
}

impl FixedGrpdaConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.psi > 1.0 && self.psi <= GOLDEN_RATIO) {
            return Err(ConfigError::OutOfRange {
                param: "psi",
                value: self.psi,
                range: format!("(1, {GOLDEN_RATIO:.6}]"),
            });
        }
        check_positive("tau", self.tau)?;
        check_positive("sigma", self.sigma)
    }

    /// `τσL̂² < ψ` for an estimate `L̂` of `‖K‖`.
    pub fn step_condition_holds(&self, norm_estimate: f64) -> bool {
        self.tau * self.sigma * norm_estimate * norm_estimate < self.psi
    }
}

/// Baseline primal-dual algorithm with linesearch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdaLConfig {
    pub tau0: f64,
    pub mu: f64,
    pub delta: f64,
    pub beta: f64,
    pub max_ls_trials: usize,
}

impl PdaLConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_positive("tau0", self.tau0)?;
        check_open("mu", self.mu, 0.0, 1.0)?;
        check_open("delta", self.delta, 0.0, 1.0)?;
        check_positive("beta", self.beta)?;
        if self.max_ls_trials == 0 {
            return Err(ConfigError::Requirement("max_ls_trials must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmId {
    Grpda,
    GrpdaL,
    AgrpdaL,
    GrpdaScscL,
    PdaL,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] =
        [AlgorithmId::Grpda, AlgorithmId::GrpdaL, AlgorithmId::AgrpdaL, AlgorithmId::GrpdaScscL, AlgorithmId::PdaL];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::Grpda => "grpda",
            AlgorithmId::GrpdaL => "grpda-l",
            AlgorithmId::AgrpdaL => "agrpda-l",
            AlgorithmId::GrpdaScscL => "grpda-scsc-l",
            AlgorithmId::PdaL => "pda-l",
        }
    }

    /// Whether the stepsize comes from a golden-ratio linesearch capped by `φ̂`.
    pub fn uses_growth_cap(self) -> bool {
        matches!(self, AlgorithmId::GrpdaL | AlgorithmId::AgrpdaL | AlgorithmId::GrpdaScscL)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmId::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

/// An algorithm together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Grpda(FixedGrpdaConfig),
    GrpdaL(GrpdaLConfig),
    AgrpdaL(AgrpdaLConfig),
    GrpdaScscL(GrpdaLConfig),
    PdaL(PdaLConfig),
}

impl Algorithm {
    pub fn id(&self) -> AlgorithmId {
        match self {
            Algorithm::Grpda(_) => AlgorithmId::Grpda,
            Algorithm::GrpdaL(_) => AlgorithmId::GrpdaL,
            Algorithm::AgrpdaL(_) => AlgorithmId::AgrpdaL,
            Algorithm::GrpdaScscL(_) => AlgorithmId::GrpdaScscL,
            Algorithm::PdaL(_) => AlgorithmId::PdaL,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Algorithm::Grpda(c) => c.validate(),
            Algorithm::GrpdaL(c) => c.validate(),
            Algorithm::AgrpdaL(c) => c.validate(),
            Algorithm::GrpdaScscL(c) => c.validate_scsc(),
            Algorithm::PdaL(c) => c.validate(),
        }
    }

    /// Initial primal stepsize.
    pub fn tau0(&self) -> f64 {
        match self {
            Algorithm::Grpda(c) => c.tau,
            Algorithm::GrpdaL(c) | Algorithm::GrpdaScscL(c) => c.tau0,
            Algorithm::AgrpdaL(c) => c.tau0,
            Algorithm::PdaL(c) => c.tau0,
        }
    }

    /// Initial dual weight (`β`, or `β₀` for the accelerated variant).
    pub fn beta0(&self) -> f64 {
        match self {
            Algorithm::Grpda(_) => 1.0,
            Algorithm::GrpdaL(c) | Algorithm::GrpdaScscL(c) => c.beta,
            Algorithm::AgrpdaL(c) => c.beta0,
            Algorithm::PdaL(c) => c.beta,
        }
    }

    pub fn psi(&self) -> Option<f64> {
        match self {
            Algorithm::Grpda(c) => Some(c.psi),
            Algorithm::GrpdaL(c) | Algorithm::GrpdaScscL(c) => Some(c.psi),
            Algorithm::AgrpdaL(c) => Some(c.psi),
            Algorithm::PdaL(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("linesearch stalled at iteration {iteration}: {trials} trials rejected, last tau {last_tau:e}")]
    LinesearchStall { iteration: usize, trials: usize, last_tau: f64 },
    #[error("could not draw y_-1 with K^T y_-1 != K^T y_0 after {attempts} attempts")]
    Tau0Init { attempts: usize },
    #[error("{which} must be strongly convex (modulus {modulus})")]
    NotStronglyConvex { which: &'static str, modulus: f64 },
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_cap_identity() {
        for psi in [1.01, 1.2, 1.5, 1.6] {
            let cap = growth_cap(psi);
            assert!(cap > 1.0 && cap < 2.0);
            assert!((psi * cap - (1.0 + 1.0 / psi)).abs() < 1e-15);
        }
        assert!((growth_cap(1.5) - 10.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn psi0_is_the_cubic_root() {
        assert!((PSI0.powi(3) - PSI0 - 1.0).abs() < 1e-15);
        assert!(PSI0 > growth_cap(PSI0) - 1e-12);
        assert!(1.4 > growth_cap(1.4));
        assert!((GOLDEN_RATIO - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-16);
    }

    #[test]
    fn psi_range_message() {
        let mut c = GrpdaLConfig::with_tau0(1.0);
        c.psi = 2.0;
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.starts_with("psi out of (1, 1.618"), "{msg}");
    }

    #[test]
    fn algorithm_ids_roundtrip() {
        for id in AlgorithmId::ALL {
            assert_eq!(id.as_str().parse::<AlgorithmId>().unwrap(), id);
        }
        assert!("admm".parse::<AlgorithmId>().is_err());
    }
}

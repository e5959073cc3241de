// SPDX-License-Identifier: Apache-2.0

//! Proximal operators `Prox_{λh}(x) = argmin_y h(y) + ‖y − x‖²/(2λ)` for the
//! functions used by the solvers, plus the affine structure that lets the
//! dual linesearch run without extra matrix-vector products.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{dot, norm_sq};

/// Value of an extended real-valued convex function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// The finite value, or `None` for `+∞`.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }
}

impl std::ops::Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::Infinite,
        }
    }
}

/// Feasibility tolerance used when evaluating indicator functions.
pub const INDICATOR_TOL: f64 = 1e-9;

/// A closed proper convex function exposed through its proximal map.
pub trait Prox: fmt::Debug + Send + Sync {
    /// `Prox_{λh}(x)`. Panics if `lambda <= 0`.
    fn prox(&self, lambda: f64, x: &[f64]) -> Vec<f64>;

    /// `h(x)`, when the function value is available.
    fn eval(&self, _x: &[f64]) -> Option<ExtendedReal> {
        None
    }

    /// Strong convexity modulus `γ ≥ 0`.
    fn strong_convexity(&self) -> f64 {
        0.0
    }

    /// Present when `Prox_{λh}` is an affine map of its argument.
    fn affine(&self) -> Option<AffineProx> {
        None
    }
}

/// Shared handle to a proximable function.
pub type ProxFn = Arc<dyn Prox>;

fn check_lambda(lambda: f64) {
    assert!(lambda > 0.0, "prox parameter must be strictly positive, got {lambda}");
}

/// Coefficients of an affine prox at a fixed `λ`:
/// `Prox_{λh}(u) = identity·u + rank_one·⟨v, u⟩·v + offset·d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCoefficients {
    pub identity: f64,
    pub rank_one: f64,
    pub offset: f64,
}

type CoefficientFn = dyn Fn(f64) -> AffineCoefficients + Send + Sync;

/// Affine prox `u ↦ A(λ)u + c(λ)` with `A(λ)` a multiple of the identity plus a
/// symmetric rank-one term along a fixed `v`, and `c(λ)` a multiple of a fixed `d`.
#[derive(Clone)]
pub struct AffineProx {
    rank_one_dir: Option<Arc<[f64]>>,
    offset_dir: Option<Arc<[f64]>>,
    coefficients: Arc<CoefficientFn>,
}

impl AffineProx {
    pub fn new(
        rank_one_dir: Option<Arc<[f64]>>,
        offset_dir: Option<Arc<[f64]>>,
        coefficients: impl Fn(f64) -> AffineCoefficients + Send + Sync + 'static,
    ) -> Self {
        Self { rank_one_dir, offset_dir, coefficients: Arc::new(coefficients) }
    }

    pub fn coefficients(&self, lambda: f64) -> AffineCoefficients {
        (self.coefficients)(lambda)
    }

    pub fn rank_one_direction(&self) -> Option<&[f64]> {
        self.rank_one_dir.as_deref()
    }

    pub fn offset_direction(&self) -> Option<&[f64]> {
        self.offset_dir.as_deref()
    }

    /// Evaluates the map directly from its coefficients.
    pub fn apply(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        let c = self.coefficients(lambda);
        let mut out: Vec<f64> = u.iter().map(|ui| c.identity * ui).collect();
        if let Some(v) = self.rank_one_direction() {
            let s = c.rank_one * dot(v, u);
            out.iter_mut().zip(v).for_each(|(o, vi)| *o += s * vi);
        }
        if let Some(d) = self.offset_direction() {
            out.iter_mut().zip(d).for_each(|(o, di)| *o += c.offset * di);
        }
        out
    }
}

impl fmt::Debug for AffineProx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffineProx")
            .field("rank_one", &self.rank_one_dir.is_some())
            .field("offset", &self.offset_dir.is_some())
            .finish()
    }
}

/// `h(x) = weight·‖x‖₁`; the prox is componentwise soft-thresholding.
#[derive(Debug, Clone)]
pub struct L1Norm {
    weight: f64,
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

impl Prox for L1Norm {
    fn prox(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        check_lambda(lambda);
        x.iter().map(|&xi| soft_threshold(xi, lambda * self.weight)).collect()
    }

    fn eval(&self, x: &[f64]) -> Option<ExtendedReal> {
        Some(ExtendedReal::Finite(self.weight * x.iter().map(|v| v.abs()).sum::<f64>()))
    }
}

pub fn prox_l1(weight: f64) -> ProxFn {
    assert!(weight > 0.0, "l1 weight must be positive");
    Arc::new(L1Norm { weight })
}

/// `h(x) = l1·‖x‖₁ + (l2/2)·‖x‖²`, strongly convex with modulus `l2`.
#[derive(Debug, Clone)]
pub struct ElasticNet {
    l1: f64,
    l2: f64,
}

impl Prox for ElasticNet {
    fn prox(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        check_lambda(lambda);
        let shrink = 1.0 / (1.0 + lambda * self.l2);
        x.iter().map(|&xi| shrink * soft_threshold(xi, lambda * self.l1)).collect()
    }

    fn eval(&self, x: &[f64]) -> Option<ExtendedReal> {
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        Some(ExtendedReal::Finite(self.l1 * l1 + 0.5 * self.l2 * norm_sq(x)))
    }

    fn strong_convexity(&self) -> f64 {
        self.l2
    }

    fn affine(&self) -> Option<AffineProx> {
        if self.l1 != 0.0 {
            return None;
        }
        let l2 = self.l2;
        Some(AffineProx::new(None, None, move |lambda| AffineCoefficients {
            identity: 1.0 / (1.0 + lambda * l2),
            rank_one: 0.0,
            offset: 0.0,
        }))
    }
}

pub fn prox_elastic_net(l1: f64, l2: f64) -> ProxFn {
    assert!(l1 >= 0.0 && l2 >= 0.0, "elastic-net weights must be nonnegative");
    Arc::new(ElasticNet { l1, l2 })
}

/// Euclidean projection onto the unit simplex `{z : Σzᵢ = 1, z ≥ 0}` by
/// descending sort and running-sum threshold. Ties keep their original order.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    assert!(!x.is_empty(), "cannot project an empty vector onto the simplex");
    let mut sorted = x.to_vec();
    // sort_by is stable
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Indicator of the unit simplex.
#[derive(Debug, Clone, Default)]
pub struct SimplexIndicator;

impl Prox for SimplexIndicator {
    fn prox(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        check_lambda(lambda);
        project_simplex(x)
    }

    fn eval(&self, x: &[f64]) -> Option<ExtendedReal> {
        let sum: f64 = x.iter().sum();
        let feasible = (sum - 1.0).abs() <= INDICATOR_TOL && x.iter().all(|v| *v >= -INDICATOR_TOL);
        Some(if feasible { ExtendedReal::Finite(0.0) } else { ExtendedReal::Infinite })
    }
}

pub fn prox_simplex() -> ProxFn {
    Arc::new(SimplexIndicator)
}

/// `f*(y) = ½‖y‖² + ⟨b, y⟩`, the conjugate of the least-squares term `½‖· − b‖²`.
#[derive(Debug, Clone)]
pub struct QuadraticConjugate {
    b: Arc<[f64]>,
}

impl Prox for QuadraticConjugate {
    fn prox(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        check_lambda(lambda);
        assert_eq!(u.len(), self.b.len());
        let s = 1.0 / (1.0 + lambda);
        u.iter().zip(self.b.iter()).map(|(ui, bi)| s * (ui - lambda * bi)).collect()
    }

    fn eval(&self, y: &[f64]) -> Option<ExtendedReal> {
        Some(ExtendedReal::Finite(0.5 * norm_sq(y) + dot(&self.b, y)))
    }

    fn strong_convexity(&self) -> f64 {
        1.0
    }

    fn affine(&self) -> Option<AffineProx> {
        Some(AffineProx::new(None, Some(self.b.clone()), |lambda| AffineCoefficients {
            identity: 1.0 / (1.0 + lambda),
            rank_one: 0.0,
            offset: -lambda / (1.0 + lambda),
        }))
    }
}

pub fn prox_quadratic_conjugate(b: Vec<f64>) -> ProxFn {
    Arc::new(QuadraticConjugate { b: b.into() })
}

/// `f*(y) = ½‖y − b‖²`.
#[derive(Debug, Clone)]
pub struct ShiftedQuadratic {
    b: Arc<[f64]>,
}

impl Prox for ShiftedQuadratic {
    fn prox(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        check_lambda(lambda);
        assert_eq!(u.len(), self.b.len());
        let s = 1.0 / (1.0 + lambda);
        u.iter().zip(self.b.iter()).map(|(ui, bi)| s * (ui + lambda * bi)).collect()
    }

    fn eval(&self, y: &[f64]) -> Option<ExtendedReal> {
        let d: f64 = y.iter().zip(self.b.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        Some(ExtendedReal::Finite(0.5 * d))
    }

    fn strong_convexity(&self) -> f64 {
        1.0
    }

    fn affine(&self) -> Option<AffineProx> {
        Some(AffineProx::new(None, Some(self.b.clone()), |lambda| AffineCoefficients {
            identity: 1.0 / (1.0 + lambda),
            rank_one: 0.0,
            offset: lambda / (1.0 + lambda),
        }))
    }
}

pub fn prox_shifted_quadratic(b: Vec<f64>) -> ProxFn {
    Arc::new(ShiftedQuadratic { b: b.into() })
}

/// `f*(y) = ⟨c, y⟩`.
#[derive(Debug, Clone)]
pub struct LinearFunction {
    c: Arc<[f64]>,
}

impl Prox for LinearFunction {
    fn prox(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        check_lambda(lambda);
        assert_eq!(u.len(), self.c.len());
        u.iter().zip(self.c.iter()).map(|(ui, ci)| ui - lambda * ci).collect()
    }

    fn eval(&self, y: &[f64]) -> Option<ExtendedReal> {
        Some(ExtendedReal::Finite(dot(&self.c, y)))
    }

    fn affine(&self) -> Option<AffineProx> {
        Some(AffineProx::new(None, Some(self.c.clone()), |lambda| AffineCoefficients {
            identity: 1.0,
            rank_one: 0.0,
            offset: -lambda,
        }))
    }
}

pub fn prox_linear_conjugate(c: Vec<f64>) -> ProxFn {
    Arc::new(LinearFunction { c: c.into() })
}

/// Indicator of the hyperplane `{u : ⟨a, u⟩ = b}`.
#[derive(Debug, Clone)]
pub struct HyperplaneIndicator {
    a: Arc<[f64]>,
    b: f64,
    a_norm_sq: f64,
}

impl Prox for HyperplaneIndicator {
    fn prox(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        check_lambda(lambda);
        let s = (self.b - dot(u, &self.a)) / self.a_norm_sq;
        u.iter().zip(self.a.iter()).map(|(ui, ai)| ui + s * ai).collect()
    }

    fn eval(&self, u: &[f64]) -> Option<ExtendedReal> {
        let residual = (dot(u, &self.a) - self.b).abs();
        let scale = self.a_norm_sq.sqrt() * (1.0 + crate::linalg::norm(u));
        Some(if residual <= INDICATOR_TOL * scale { ExtendedReal::Finite(0.0) } else { ExtendedReal::Infinite })
    }

    fn affine(&self) -> Option<AffineProx> {
        let inv = 1.0 / self.a_norm_sq;
        let b = self.b;
        Some(AffineProx::new(Some(self.a.clone()), Some(self.a.clone()), move |_| AffineCoefficients {
            identity: 1.0,
            rank_one: -inv,
            offset: b * inv,
        }))
    }
}

/// Panics if `a` is the zero vector.
pub fn prox_hyperplane_indicator(a: Vec<f64>, b: f64) -> ProxFn {
    let a_norm_sq = norm_sq(&a);
    assert!(a_norm_sq > 0.0, "hyperplane normal must be nonzero");
    Arc::new(HyperplaneIndicator { a: a.into(), b, a_norm_sq })
}

/// Prox of the convex conjugate `h*` obtained through the Moreau
/// decomposition `Prox_{λh*}(x) = x − λ·Prox_{h/λ}(x/λ)`.
#[derive(Debug, Clone)]
pub struct MoreauConjugate {
    inner: ProxFn,
}

impl MoreauConjugate {
    pub fn inner(&self) -> &ProxFn {
        &self.inner
    }
}

impl Prox for MoreauConjugate {
    fn prox(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        check_lambda(lambda);
        let scaled: Vec<f64> = x.iter().map(|v| v / lambda).collect();
        let p = self.inner.prox(1.0 / lambda, &scaled);
        x.iter().zip(&p).map(|(xi, pi)| xi - lambda * pi).collect()
    }

    fn affine(&self) -> Option<AffineProx> {
        let inner = self.inner.affine()?;
        let rank_one = inner.rank_one_dir.clone();
        let offset = inner.offset_dir.clone();
        Some(AffineProx::new(rank_one, offset, move |lambda| {
            let c = inner.coefficients(1.0 / lambda);
            AffineCoefficients { identity: 1.0 - c.identity, rank_one: -c.rank_one, offset: -lambda * c.offset }
        }))
    }
}

/// The prox of `h*` given the prox of `h`.
pub fn moreau_conjugate(p: ProxFn) -> ProxFn {
    Arc::new(MoreauConjugate { inner: p })
}

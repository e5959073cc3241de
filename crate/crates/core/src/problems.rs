// SPDX-License-Identifier: Apache-2.0

//! Benchmark instances: zero-sum matrix games over simplices and LASSO.

use std::fmt;
use std::fs;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::linalg::{
    dist_sq, estimate_spectral_norm, norm_sq, LinearOperator, MatrixFormatError, SeededRng, DEFAULT_NORM_MAX_ITER,
    DEFAULT_NORM_TOL,
};
use crate::prox::{prox_l1, prox_quadratic_conjugate, prox_simplex};
use crate::solvers::{
    default_perturb_scale, init_tau0, run, Algorithm, FixedGrpdaConfig, GrpdaLConfig, SaddleProblem, StopCriteria,
};

/// How a written `N(0, s)` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseReading {
    /// `s` is the variance.
    #[default]
    Variance,
    /// `s` is the standard deviation.
    StdDev,
}

impl NoiseReading {
    pub fn std_dev(self, s: f64) -> f64 {
        match self {
            NoiseReading::Variance => s.sqrt(),
            NoiseReading::StdDev => s,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseReading::Variance => "variance",
            NoiseReading::StdDev => "stddev",
        }
    }
}

impl FromStr for NoiseReading {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "variance" => Ok(NoiseReading::Variance),
            "stddev" => Ok(NoiseReading::StdDev),
            _ => Err(format!("unknown noise reading {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixGameVariant {
    /// Entries uniform on `[−1, 1]`.
    Uniform11,
    /// Entries `N(0, 1)`.
    Normal01,
    /// Entries `N(0, 10)`.
    Normal010,
    /// Bernoulli(0.1) pattern with values uniform on `[0, 1]`.
    Sparse10Pct,
}

impl MatrixGameVariant {
    pub const ALL: [MatrixGameVariant; 4] = [
        MatrixGameVariant::Uniform11,
        MatrixGameVariant::Normal01,
        MatrixGameVariant::Normal010,
        MatrixGameVariant::Sparse10Pct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MatrixGameVariant::Uniform11 => "uniform11",
            MatrixGameVariant::Normal01 => "normal01",
            MatrixGameVariant::Normal010 => "normal0_10",
            MatrixGameVariant::Sparse10Pct => "sparse10pct",
        }
    }

    /// `(p, q)` of the full-size experiment.
    pub fn full_dims(self) -> (usize, usize) {
        match self {
            MatrixGameVariant::Uniform11 | MatrixGameVariant::Normal01 => (100, 100),
            MatrixGameVariant::Normal010 => (500, 100),
            MatrixGameVariant::Sparse10Pct => (1000, 2000),
        }
    }
}

impl fmt::Display for MatrixGameVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatrixGameVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alias = match s {
            "i" => "uniform11",
            "ii" => "normal01",
            "iii" => "normal0_10",
            "iv" => "sparse10pct",
            other => other,
        };
        MatrixGameVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == alias)
            .ok_or_else(|| format!("unknown matrix game variant {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameInstance {
    pub k: Arc<LinearOperator>,
    pub variant: MatrixGameVariant,
    pub seed: u64,
    pub noise: NoiseReading,
}

pub fn gen_matrix_game(variant: MatrixGameVariant, p: usize, q: usize, seed: u64) -> MatrixGameInstance {
    gen_matrix_game_with(variant, p, q, seed, NoiseReading::Variance)
}

/// Like [`gen_matrix_game`], with an explicit reading of `N(0, 10)`.
pub fn gen_matrix_game_with(
    variant: MatrixGameVariant,
    p: usize,
    q: usize,
    seed: u64,
    noise: NoiseReading,
) -> MatrixGameInstance {
    assert!(p >= 1 && q >= 1, "matrix game needs p, q >= 1");
    let mut rng = SeededRng::from_seed(seed);
    let sd = noise.std_dev(10.0);
    let entries: Vec<f64> = (0..p * q)
        .map(|_| match variant {
            MatrixGameVariant::Uniform11 => rng.uniform(-1.0, 1.0),
            MatrixGameVariant::Normal01 => rng.standard_normal(),
            MatrixGameVariant::Normal010 => sd * rng.standard_normal(),
            MatrixGameVariant::Sparse10Pct => {
                if rng.random::<f64>() < 0.1 {
                    rng.uniform(0.0, 1.0)
                } else {
                    0.0
                }
            }
        })
        .collect();
    MatrixGameInstance { k: Arc::new(LinearOperator::from_row_major(p, q, entries)), variant, seed, noise }
}

fn check_simplex(v: &[f64], what: &str) {
    let sum: f64 = v.iter().sum();
    assert!((sum - 1.0).abs() <= 1e-9 && v.iter().all(|vi| *vi >= -1e-9), "{what} is not in the unit simplex");
}

/// `max_i (Kx)_i − min_j (Kᵀy)_j`. Panics when `x` or `y` leaves its simplex
/// by more than `1e-9`.
pub fn matrix_game_gap(k: &LinearOperator, x: &[f64], y: &[f64]) -> f64 {
    check_simplex(x, "x");
    check_simplex(y, "y");
    let kx = k.apply_uninstrumented(x);
    let kty = k.apply_adjoint_uninstrumented(y);
    kx.iter().copied().fold(f64::NEG_INFINITY, f64::max) - kty.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `g = ι_{Δ_q}`, `f* = ι_{Δ_p}` with the matrix-game gap attached.
pub fn matrix_game_as_saddle(inst: &MatrixGameInstance) -> SaddleProblem {
    let k = inst.k.clone();
    SaddleProblem::new(prox_simplex(), prox_simplex(), inst.k.clone()).with_gap(move |x, y| matrix_game_gap(&k, x, y))
}

/// Uniform mixed strategies `(1/q, …)`, `(1/p, …)`.
pub fn matrix_game_start(k: &LinearOperator) -> (Vec<f64>, Vec<f64>) {
    let (p, q) = (k.rows(), k.cols());
    (vec![1.0 / q as f64; q], vec![1.0 / p as f64; p])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LassoCase {
    /// `N(0, 1)` entries.
    Gaussian,
    /// Columns `K₁ = A₁/√(1−v²)`, `K_j = vK_{j−1} + A_j`.
    Correlated,
}

impl LassoCase {
    pub fn as_str(self) -> &'static str {
        match self {
            LassoCase::Gaussian => "gaussian",
            LassoCase::Correlated => "correlated",
        }
    }
}

impl fmt::Display for LassoCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LassoCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" | "i" => Ok(LassoCase::Gaussian),
            "correlated" | "ii" => Ok(LassoCase::Correlated),
            _ => Err(format!("unknown lasso case {s:?}")),
        }
    }
}

pub const DEFAULT_LASSO_MU: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoInstance {
    pub k: Arc<LinearOperator>,
    pub b: Vec<f64>,
    pub mu_reg: f64,
    pub xstar: Vec<f64>,
    pub case: LassoCase,
    pub v: f64,
    pub s: usize,
    pub seed: u64,
    pub noise: NoiseReading,
}

pub fn gen_lasso(case: LassoCase, p: usize, q: usize, s: usize, v: f64, seed: u64) -> LassoInstance {
    gen_lasso_with(case, p, q, s, v, seed, NoiseReading::Variance)
}

/// Draws `K`, then the support and values of `x*` (uniform on `[−10, 10]`),
/// then `ω ~ N(0, 0.1)`, and sets `b = Kx* + ω`. Panics unless `s ≤ q` and
/// `0 ≤ v < 1`.
pub fn gen_lasso_with(
    case: LassoCase,
    p: usize,
    q: usize,
    s: usize,
    v: f64,
    seed: u64,
    noise: NoiseReading,
) -> LassoInstance {
    assert!(p >= 1 && q >= 1, "lasso needs p, q >= 1");
    assert!(s <= q, "support size s must not exceed q");
    assert!((0.0..1.0).contains(&v), "v must lie in [0, 1)");
    let mut rng = SeededRng::from_seed(seed);
    let mut entries: Vec<f64> = (0..p * q).map(|_| rng.standard_normal()).collect();
    if case == LassoCase::Correlated {
        let scale = 1.0 / (1.0 - v * v).sqrt();
        for i in 0..p {
            let row = &mut entries[i * q..(i + 1) * q];
            row[0] *= scale;
            for j in 1..q {
                row[j] += v * row[j - 1];
            }
        }
    }
    let k = LinearOperator::from_row_major(p, q, entries);
    let mut xstar = vec![0.0; q];
    for j in index::sample(&mut rng, q, s) {
        let mut value = 0.0;
        while value == 0.0 {
            value = rng.uniform(-10.0, 10.0);
        }
        xstar[j] = value;
    }
    let sd = noise.std_dev(0.1);
    let b: Vec<f64> = k.apply_uninstrumented(&xstar).into_iter().map(|kx| kx + sd * rng.standard_normal()).collect();
    LassoInstance { k: Arc::new(k), b, mu_reg: DEFAULT_LASSO_MU, xstar, case, v, s, seed, noise }
}

/// `F(x) = μ‖x‖₁ + ½‖Kx − b‖²`.
pub fn lasso_objective(inst: &LassoInstance, x: &[f64]) -> f64 {
    let kx = inst.k.apply_uninstrumented(x);
    inst.mu_reg * x.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * dist_sq(&kx, &inst.b)
}

/// `g = μ‖·‖₁`, `f*(y) = ½‖y‖² + ⟨b, y⟩`, objective `F` of the primal part.
pub fn lasso_as_saddle(inst: &LassoInstance) -> SaddleProblem {
    let owned = inst.clone();
    SaddleProblem::new(prox_l1(inst.mu_reg), prox_quadratic_conjugate(inst.b.clone()), inst.k.clone())
        .with_objective(move |x, _| lasso_objective(&owned, x))
}

/// `x₀ = 0`, `y₀ = Kx₀ − b`.
pub fn lasso_start(inst: &LassoInstance) -> (Vec<f64>, Vec<f64>) {
    (vec![0.0; inst.k.cols()], inst.b.iter().map(|b| -b).collect())
}

/// Exchanges `(g, K, x)` with `(f*, −Kᵀ, y)`. Gap and objective evaluators
/// follow their variables, so they see the original `(x, y)` order.
pub fn swap_primal_dual(problem: &SaddleProblem) -> SaddleProblem {
    let mut swapped = SaddleProblem::new(problem.fstar.clone(), problem.g.clone(), Arc::new(problem.k.neg_transpose()));
    if let Some(gap) = problem.gap.clone() {
        swapped = swapped.with_gap(move |p, d| gap(d, p));
    }
    if let Some(obj) = problem.objective.clone() {
        swapped = swapped.with_objective(move |p, d| obj(d, p));
    }
    swapped
}

/// Closed-form solution `(x̄, ȳ, value)` of `min_{x∈Δ₂} max_{y∈Δ₂} ⟨Kx, y⟩`.
///
/// `x` mixes the columns and `y` the rows. Each player's payoff is a
/// piecewise-linear function of one weight with at most one kink, so it is
/// optimized over the endpoints and the crossing point. Panics unless `K` is 2×2.
pub fn analytic_2x2_game(k: &LinearOperator) -> (Vec<f64>, Vec<f64>, f64) {
    assert!(k.rows() == 2 && k.cols() == 2, "analytic oracle needs a 2x2 matrix");
    let (a, b, c, d) = (k.get(0, 0), k.get(0, 1), k.get(1, 0), k.get(1, 1));
    // x = (s, 1−s): rows give a·s + b(1−s) and c·s + d(1−s).
    let upper = |s: f64| (a * s + b * (1.0 - s)).max(c * s + d * (1.0 - s));
    let sx = best_weight(a - b - c + d, d - b, |s| -upper(s));
    // y = (t, 1−t): columns give a·t + c(1−t) and b·t + d(1−t).
    let lower = |t: f64| (a * t + c * (1.0 - t)).min(b * t + d * (1.0 - t));
    let ty = best_weight(a - c - b + d, d - c, lower);
    (vec![sx, 1.0 - sx], vec![ty, 1.0 - ty], upper(sx))
}

/// Maximizes `score` over `{crossing, 0, 1}`, where the two affine pieces
/// cross at `numerator/denominator`; earlier candidates win ties.
fn best_weight(denominator: f64, numerator: f64, score: impl Fn(f64) -> f64) -> f64 {
    let mut candidates = Vec::with_capacity(3);
    if denominator != 0.0 {
        let s = numerator / denominator;
        if (0.0..=1.0).contains(&s) {
            candidates.push(s);
        }
    }
    candidates.extend([0.0, 1.0]);
    let mut best = candidates[0];
    for &s in &candidates[1..] {
        if score(s) > score(best) {
            best = s;
        }
    }
    best
}

/// Smallest objective value seen by fixed-step and linesearch runs of
/// `budget` iterations each, including `F` at the start.
///
/// Panics if the problem has no objective.
pub fn reference_optimum(problem: &SaddleProblem, x0: &[f64], y0: &[f64], budget: usize) -> f64 {
    let objective = problem.objective.clone().expect("reference_optimum needs an objective");
    let mut best = objective(x0, y0);
    if budget == 0 {
        return best;
    }
    let l = estimate_spectral_norm(&problem.k, DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITER).value;
    let mut rng = SeededRng::from_seed(0);
    let tau0 = init_tau0(&problem.k, y0, default_perturb_scale(y0), 1.5, 1.0, &mut rng)
        .expect("nonzero operator admits a step ratio");
    let algorithms = [
        Algorithm::Grpda(FixedGrpdaConfig { psi: 1.618, tau: 1.0 / l, sigma: 1.0 / l }),
        Algorithm::GrpdaL(GrpdaLConfig::with_tau0(tau0)),
    ];
    for alg in &algorithms {
        let trace = run(problem, alg, x0.to_vec(), y0.to_vec(), &StopCriteria::iterations(budget));
        for row in &trace.rows {
            if let Some(f) = row.objective {
                best = best.min(f);
            }
        }
    }
    best
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Matrix { path: PathBuf, source: MatrixFormatError },
    #[error("{path}: missing header key {key:?}")]
    MissingKey { path: PathBuf, key: &'static str },
    #[error("{path}: bad value for {key:?}: {value:?}")]
    BadValue { path: PathBuf, key: String, value: String },
}

fn header_path(stem: &Path) -> PathBuf {
    stem.with_extension("header")
}

fn matrix_path(stem: &Path) -> PathBuf {
    stem.with_extension("matrix")
}

fn write_instance(stem: &Path, k: &LinearOperator, header: &[(&str, String)]) -> Result<(), InstanceError> {
    let mp = matrix_path(stem);
    let file = fs::File::create(&mp).map_err(|source| InstanceError::Io { path: mp.clone(), source })?;
    k.write_text(io::BufWriter::new(file)).map_err(|source| InstanceError::Io { path: mp, source })?;
    let hp = header_path(stem);
    let text: String = header.iter().map(|(k, v)| format!("{k} {v}\n")).collect();
    fs::write(&hp, text).map_err(|source| InstanceError::Io { path: hp, source })
}

struct Header {
    path: PathBuf,
    entries: Vec<(String, String)>,
}

impl Header {
    fn read(stem: &Path) -> Result<Self, InstanceError> {
        let path = header_path(stem);
        let text = fs::read_to_string(&path).map_err(|source| InstanceError::Io { path: path.clone(), source })?;
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let (k, v) = l.split_once(' ').unwrap_or((l, ""));
                (k.to_string(), v.trim().to_string())
            })
            .collect();
        Ok(Self { path, entries })
    }

    fn raw(&self, key: &'static str) -> Result<&str, InstanceError> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or(InstanceError::MissingKey { path: self.path.clone(), key })
    }

    fn get<T: FromStr>(&self, key: &'static str) -> Result<T, InstanceError> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| self.bad(key, raw))
    }

    fn vector(&self, key: &'static str) -> Result<Vec<f64>, InstanceError> {
        let raw = self.raw(key)?;
        raw.split_whitespace().map(|t| t.parse().map_err(|_| self.bad(key, raw))).collect()
    }

    fn bad(&self, key: &str, value: &str) -> InstanceError {
        InstanceError::BadValue { path: self.path.clone(), key: key.to_string(), value: value.to_string() }
    }
}

fn read_matrix(stem: &Path) -> Result<LinearOperator, InstanceError> {
    let path = matrix_path(stem);
    let file = fs::File::open(&path).map_err(|source| InstanceError::Io { path: path.clone(), source })?;
    LinearOperator::read_text(BufReader::new(file)).map_err(|source| InstanceError::Matrix { path, source })
}

fn join_vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ")
}

impl MatrixGameInstance {
    /// Writes `<stem>.matrix` and `<stem>.header`.
    pub fn save(&self, stem: &Path) -> Result<(), InstanceError> {
        let header = [
            ("family", "matrix_game".to_string()),
            ("variant", self.variant.to_string()),
            ("seed", self.seed.to_string()),
            ("p", self.k.rows().to_string()),
            ("q", self.k.cols().to_string()),
            ("noise", self.noise.as_str().to_string()),
        ];
        write_instance(stem, &self.k, &header)
    }

    pub fn load(stem: &Path) -> Result<Self, InstanceError> {
        let h = Header::read(stem)?;
        let k = read_matrix(stem)?;
        let (p, q): (usize, usize) = (h.get("p")?, h.get("q")?);
        if (p, q) != (k.rows(), k.cols()) {
            return Err(h.bad("p", &format!("{p}x{q} header for a {}x{} matrix", k.rows(), k.cols())));
        }
        Ok(Self { k: Arc::new(k), variant: h.get("variant")?, seed: h.get("seed")?, noise: h.get("noise")? })
    }
}

impl LassoInstance {
    /// Writes `<stem>.matrix` and `<stem>.header`; `b` and `x*` go in the header.
    pub fn save(&self, stem: &Path) -> Result<(), InstanceError> {
        let header = [
            ("family", "lasso".to_string()),
            ("case", self.case.to_string()),
            ("seed", self.seed.to_string()),
            ("p", self.k.rows().to_string()),
            ("q", self.k.cols().to_string()),
            ("s", self.s.to_string()),
            ("v", format!("{:e}", self.v)),
            ("mu", format!("{:e}", self.mu_reg)),
            ("noise", self.noise.as_str().to_string()),
            ("b", join_vector(&self.b)),
            ("xstar", join_vector(&self.xstar)),
        ];
        write_instance(stem, &self.k, &header)
    }

    pub fn load(stem: &Path) -> Result<Self, InstanceError> {
        let h = Header::read(stem)?;
        let k = read_matrix(stem)?;
        let b = h.vector("b")?;
        let xstar = h.vector("xstar")?;
        if b.len() != k.rows() || xstar.len() != k.cols() {
            return Err(h.bad("b", "vector length does not match the matrix"));
        }
        Ok(Self {
            k: Arc::new(k),
            b,
            mu_reg: h.get("mu")?,
            xstar,
            case: h.get("case")?,
            v: h.get("v")?,
            s: h.get("s")?,
            seed: h.get("seed")?,
            noise: h.get("noise")?,
        })
    }
}

/// `½‖b‖²`, the objective at `x = 0`.
pub fn lasso_zero_objective(inst: &LassoInstance) -> f64 {
    0.5 * norm_sq(&inst.b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        let id = LinearOperator::identity(2);
        assert_eq!(matrix_game_gap(&id, &[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(matrix_game_gap(&id, &[1.0, 0.0], &[1.0, 0.0]), 1.0);
        let swap = LinearOperator::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(matrix_game_gap(&swap, &[0.5, 0.5], &[0.5, 0.5]), 0.0);
    }

    #[test]
    #[should_panic(expected = "simplex")]
    fn gap_rejects_infeasible() {
        matrix_game_gap(&LinearOperator::identity(2), &[0.7, 0.7], &[0.5, 0.5]);
    }

    #[test]
    fn analytic_examples() {
        let (x, y, v) = analytic_2x2_game(&LinearOperator::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
        assert_eq!((x, y, v), (vec![0.5, 0.5], vec![0.5, 0.5], 0.5));
        let (x, y, v) = analytic_2x2_game(&LinearOperator::identity(2).scaled(3.0));
        assert_eq!((x, y, v), (vec![0.5, 0.5], vec![0.5, 0.5], 1.5));
        let (_, y, v) = analytic_2x2_game(&LinearOperator::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]));
        assert_eq!(v, 1.0);
        assert_eq!(y, vec![1.0, 0.0]);
    }

    #[test]
    fn correlated_with_zero_v_is_gaussian() {
        let a = gen_lasso(LassoCase::Gaussian, 8, 6, 2, 0.0, 4);
        let b = gen_lasso(LassoCase::Correlated, 8, 6, 2, 0.0, 4);
        assert_eq!(a.k, b.k);
        assert_eq!(a.b, b.b);
    }

    #[test]
    fn lasso_zero_point() {
        let inst = gen_lasso(LassoCase::Gaussian, 10, 7, 3, 0.0, 1);
        assert_eq!(lasso_objective(&inst, &[0.0; 7]), lasso_zero_objective(&inst));
        assert_eq!(inst.xstar.iter().filter(|v| **v != 0.0).count(), 3);
    }

    #[test]
    fn variant_aliases() {
        assert_eq!("iii".parse::<MatrixGameVariant>().unwrap(), MatrixGameVariant::Normal010);
        for v in MatrixGameVariant::ALL {
            assert_eq!(v.as_str().parse::<MatrixGameVariant>().unwrap(), v);
        }
    }
}

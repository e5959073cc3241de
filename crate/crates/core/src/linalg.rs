// SPDX-License-Identifier: Apache-2.0

//! Dense linear operators with instrumented matrix-vector products, spectral
//! norm estimation, seeded random streams and a plain-text matrix format.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// A dense `rows × cols` matrix acting as `K: R^cols -> R^rows`.
///
/// Every call to [`apply`](Self::apply) or [`apply_adjoint`](Self::apply_adjoint)
/// bumps the corresponding counter by one. The counters are atomic so a single
/// operator can be shared between concurrently running solver jobs.
pub struct LinearOperator {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    fwd_count: AtomicU64,
    adj_count: AtomicU64,
}

impl LinearOperator {
    /// Builds an operator from row-major entries.
    ///
    /// Panics if `entries.len() != rows * cols` or a dimension is zero.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Self {
        assert!(rows > 0 && cols > 0, "operator dimensions must be positive");
        assert_eq!(entries.len(), rows * cols, "entry count does not match {rows}x{cols}");
        Self { rows, cols, entries, fwd_count: AtomicU64::new(0), adj_count: AtomicU64::new(0) }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let entries = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), cols, entries)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_row_major(rows, cols, vec![0.0; rows * cols])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut entries = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            entries[i * n + i] = *d;
        }
        Self::from_row_major(n, n, entries)
    }

    /// Matrix with i.i.d. standard normal entries drawn in row-major order.
    pub fn random_normal(rows: usize, cols: usize, rng: &mut SeededRng) -> Self {
        let entries = (0..rows * cols).map(|_| rng.standard_normal()).collect();
        Self::from_row_major(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major view of the entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// `K x`. Panics unless `x.len() == cols`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.fwd_count.fetch_add(1, Ordering::Relaxed);
        self.apply_uninstrumented(x)
    }

    /// `Kᵀ y`. Panics unless `y.len() == rows`.
    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.adj_count.fetch_add(1, Ordering::Relaxed);
        self.apply_adjoint_uninstrumented(y)
    }

    /// `K x` without touching the counters. Used by diagnostics (gap and
    /// objective evaluation) that are not part of an algorithm's cost.
    pub fn apply_uninstrumented(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "apply: expected length {}, got {}", self.cols, x.len());
        self.entries.chunks_exact(self.cols).map(|row| dot(row, x)).collect()
    }

    /// `Kᵀ y` without touching the counters.
    pub fn apply_adjoint_uninstrumented(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "apply_adjoint: expected length {}, got {}", self.rows, y.len());
        let mut out = vec![0.0; self.cols];
        for (row, &yi) in self.entries.chunks_exact(self.cols).zip(y) {
            if yi != 0.0 {
                axpy(yi, row, &mut out);
            }
        }
        out
    }

    pub fn fwd_count(&self) -> u64 {
        self.fwd_count.load(Ordering::Relaxed)
    }

    pub fn adj_count(&self) -> u64 {
        self.adj_count.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.fwd_count.store(0, Ordering::Relaxed);
        self.adj_count.store(0, Ordering::Relaxed);
    }

    /// Explicit transpose with fresh counters.
    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j));
            }
        }
        Self::from_row_major(self.cols, self.rows, entries)
    }

    /// `−Kᵀ`, the coupling operator after exchanging primal and dual roles.
    pub fn neg_transpose(&self) -> Self {
        let mut t = self.transpose();
        t.entries.iter_mut().for_each(|v| *v = -*v);
        t
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_row_major(self.rows, self.cols, self.entries.iter().map(|v| v * factor).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0.0)
    }

    /// Memory held by the dense entries.
    pub fn storage_bytes(&self) -> usize {
        self.entries.len() * std::mem::size_of::<f64>()
    }

    /// Writes the plain-text format: a `"p q"` line followed by `p` rows of
    /// `q` whitespace-separated decimals.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.rows, self.cols)?;
        for row in self.entries.chunks_exact(self.cols) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self, MatrixFormatError> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let (_, header) = lines.next().ok_or(MatrixFormatError::MissingHeader)?;
        let header = header?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse_dim = |s: &str| s.parse::<usize>().ok().filter(|d| *d > 0);
        let (rows, cols) = match dims.as_slice() {
            [p, q] => match (parse_dim(p), parse_dim(q)) {
                (Some(p), Some(q)) => (p, q),
                _ => return Err(MatrixFormatError::BadHeader(header)),
            },
            _ => return Err(MatrixFormatError::BadHeader(header)),
        };
        let mut entries = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (lineno, line) = lines.next().ok_or(MatrixFormatError::MissingRows { expected: rows })?;
            let line = line?;
            let before = entries.len();
            for tok in line.split_whitespace() {
                let v = tok
                    .parse::<f64>()
                    .map_err(|_| MatrixFormatError::BadNumber { line: lineno + 1, token: tok.to_string() })?;
                entries.push(v);
            }
            if entries.len() - before != cols {
                return Err(MatrixFormatError::RowLength { line: lineno + 1, expected: cols });
            }
        }
        Ok(Self::from_row_major(rows, cols, entries))
    }
}

impl Clone for LinearOperator {
    fn clone(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.clone(),
            fwd_count: AtomicU64::new(self.fwd_count()),
            adj_count: AtomicU64::new(self.adj_count()),
        }
    }
}

impl PartialEq for LinearOperator {
    /// Compares shape and entries; counters are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.entries == other.entries
    }
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearOperator")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("fwd_count", &self.fwd_count())
            .field("adj_count", &self.adj_count())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Error)]
pub enum MatrixFormatError {
    #[error("missing \"p q\" header line")]
    MissingHeader,
    #[error("malformed header {0:?}")]
    BadHeader(String),
    #[error("expected {expected} rows")]
    MissingRows { expected: usize },
    #[error("line {line}: expected {expected} entries")]
    RowLength { line: usize, expected: usize },
    #[error("line {line}: cannot parse {token:?}")]
    BadNumber { line: usize, token: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Result of [`estimate_spectral_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNorm {
    pub value: f64,
    pub iterations: usize,
    /// `false` when `max_iter` was exhausted; `value` is then the last estimate.
    pub converged: bool,
}

pub const DEFAULT_NORM_TOL: f64 = 1e-6;
pub const DEFAULT_NORM_MAX_ITER: usize = 1000;

const NORM_PERTURB_SEED: u64 = 0x5eed_0f4b;

/// Estimates `‖K‖₂` by power iteration on `KᵀK`.
///
/// The start vector is the normalized all-ones vector, replaced by a seeded
/// random direction when it lies in the null space of `KᵀK`. Iteration stops
/// once the eigen-residual `‖KᵀKv − ρv‖` drops below `tol·ρ`, where `ρ` is the
/// Rayleigh quotient. Matrix-vector products here do not touch the operator's
/// counters.
///
/// Panics if `K` is zero or `tol <= 0`.
pub fn estimate_spectral_norm(op: &LinearOperator, tol: f64, max_iter: usize) -> SpectralNorm {
    assert!(tol > 0.0, "tol must be positive");
    assert!(!op.is_zero(), "spectral norm estimation needs a nonzero operator");
    let gram = |v: &[f64]| op.apply_adjoint_uninstrumented(&op.apply_uninstrumented(v));

    let n = op.cols();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = gram(&v);
    if norm(&w) == 0.0 {
        let mut rng = SeededRng::new(NORM_PERTURB_SEED, RngAlgorithm::ChaCha8);
        for _ in 0..64 {
            let noise = rng.unit_vector(n);
            v.iter_mut().zip(&noise).for_each(|(vi, ni)| *vi += ni);
            let nv = norm(&v);
            v.iter_mut().for_each(|vi| *vi /= nv);
            w = gram(&v);
            if norm(&w) > 0.0 {
                break;
            }
        }
    }

    let mut rho = dot(&v, &w);
    for it in 1..=max_iter {
        let nw = norm(&w);
        v = w.iter().map(|wi| wi / nw).collect();
        w = gram(&v);
        rho = dot(&v, &w);
        let residual = w.iter().zip(&v).map(|(wi, vi)| (wi - rho * vi).powi(2)).sum::<f64>().sqrt();
        if residual <= tol * rho {
            return SpectralNorm { value: rho.sqrt(), iterations: it, converged: true };
        }
    }
    SpectralNorm { value: rho.max(0.0).sqrt(), iterations: max_iter, converged: false }
}

/// Which generator backs a [`SeededRng`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RngAlgorithm {
    ChaCha8,
    ChaCha20,
}

#[derive(Debug, Clone)]
enum RngCoreImpl {
    ChaCha8(ChaCha8Rng),
    ChaCha20(ChaCha20Rng),
}

/// Deterministic random stream identified by `(seed, algorithm)`.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    algorithm: RngAlgorithm,
    inner: RngCoreImpl,
}

impl SeededRng {
    pub fn new(seed: u64, algorithm: RngAlgorithm) -> Self {
        let inner = match algorithm {
            RngAlgorithm::ChaCha8 => RngCoreImpl::ChaCha8(ChaCha8Rng::seed_from_u64(seed)),
            RngAlgorithm::ChaCha20 => RngCoreImpl::ChaCha20(ChaCha20Rng::seed_from_u64(seed)),
        };
        Self { seed, algorithm, inner }
    }

    /// ChaCha8 stream, the default for instance generation.
    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, RngAlgorithm::ChaCha8)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> RngAlgorithm {
        self.algorithm
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    /// Uniformly distributed direction on the unit sphere of `R^n`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.standard_normal()).collect();
            let nv = norm(&v);
            if nv > 0.0 {
                return v.into_iter().map(|vi| vi / nv).collect();
            }
        }
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        match &mut self.inner {
            RngCoreImpl::ChaCha8(r) => r.next_u32(),
            RngCoreImpl::ChaCha20(r) => r.next_u32(),
        }
    }

    fn next_u64(&mut self) -> u64 {
        match &mut self.inner {
            RngCoreImpl::ChaCha8(r) => r.next_u64(),
            RngCoreImpl::ChaCha20(r) => r.next_u64(),
        }
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        match &mut self.inner {
            RngCoreImpl::ChaCha8(r) => r.fill_bytes(dst),
            RngCoreImpl::ChaCha20(r) => r.fill_bytes(dst),
        }
    }
}

// Small dense vector kernels shared across the crate.

/// `Σ f(aᵢ, bᵢ)` over four interleaved partial sums, combined pairwise.
#[inline]
fn sum4(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| f(*x, *y)).sum();
    let mut acc = [0.0; 4];
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += f(x[k], y[k]);
        }
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum4(a, b, |x, y| x * y)
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum4(a, b, |x, y| (x - y) * (x - y))
}

/// `alpha * a + beta * b`
pub fn lincomb(alpha: f64, a: &[f64], beta: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect()
}

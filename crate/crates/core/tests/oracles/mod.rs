// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference computations, independent of the library code paths.

#![allow(dead_code)]

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Grid scan on `[lo, hi]` followed by golden-section refinement around the
/// best grid point.
pub fn scalar_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const CELLS: usize = 4000;
    let h = (hi - lo) / CELLS as f64;
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..=CELLS {
        let v = f(lo + i as f64 * h);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let a = lo + (best.saturating_sub(1)) as f64 * h;
    let b = (lo + (best + 1) as f64 * h).min(hi);
    golden_section(f, a, b, 1e-13)
}

/// Componentwise prox of a separable `h(y) = Σ hᵢ(yᵢ)`:
/// `argmin_t hᵢ(t) + (t − uᵢ)²/(2λ)` for each coordinate, searched on
/// `[uᵢ − radius, uᵢ + radius]` intersected with `[lo, hi]`.
pub fn separable_prox(
    h: impl Fn(usize, f64) -> f64,
    lambda: f64,
    u: &[f64],
    radius: f64,
    bounds: (f64, f64),
) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(i, &ui)| {
            let lo = (ui - radius).max(bounds.0);
            let hi = (ui + radius).min(bounds.1);
            scalar_min(|t| h(i, t) + (t - ui) * (t - ui) / (2.0 * lambda), lo, hi)
        })
        .collect()
}

/// Projection onto the unit simplex by trying every support set: for a
/// support `S` the KKT point is `zᵢ = uᵢ − θ` on `S` with `θ` fixing the sum;
/// the closest feasible candidate wins.
pub fn simplex_projection_by_enumeration(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    assert!(n <= 16);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let theta = (support.iter().map(|&i| u[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut z = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            z[i] = u[i] - theta;
            if z[i] < -1e-15 {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        let d: f64 = z.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, z));
        }
    }
    best.expect("some support is always feasible").1
}

/// Projection of `u` onto `{y : ⟨a, y⟩ = b}` by eliminating the coordinate with
/// the largest `|aₖ|` and running cyclic exact coordinate descent on the rest.
pub fn hyperplane_projection_by_elimination(a: &[f64], b: f64, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let k = (0..n).max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs())).unwrap();
    let free: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    let complete = |w: &[f64]| {
        let mut y = vec![0.0; n];
        let mut s = b;
        for (idx, &i) in free.iter().enumerate() {
            y[i] = w[idx];
            s -= a[i] * w[idx];
        }
        y[k] = s / a[k];
        y
    };
    let mut w: Vec<f64> = free.iter().map(|&i| u[i]).collect();
    for _ in 0..20_000 {
        for idx in 0..w.len() {
            // Objective is quadratic in w[idx]; minimize exactly.
            let i = free[idx];
            let mut rest = b;
            for (jdx, &j) in free.iter().enumerate() {
                if jdx != idx {
                    rest -= a[j] * w[jdx];
                }
            }
            // y_i = t, y_k = (rest − a_i t)/a_k; d/dt [(t−u_i)² + (y_k − u_k)²] = 0.
            let r = a[i] / a[k];
            let c = rest / a[k];
            w[idx] = (u[i] + r * (c - u[k])) / (1.0 + r * r);
        }
    }
    complete(&w)
}

/// Largest singular value of a dense row-major `p×q` matrix, from cyclic
/// Jacobi diagonalization of `KᵀK`.
pub fn max_singular_value(p: usize, q: usize, entries: &[f64]) -> f64 {
    let mut m = vec![0.0; q * q];
    for i in 0..q {
        for j in 0..q {
            m[i * q + j] = (0..p).map(|r| entries[r * q + i] * entries[r * q + j]).sum();
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..q)
            .flat_map(|i| (0..q).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| m[i * q + j].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for a in 0..q {
            for b in a + 1..q {
                let apq = m[a * q + b];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[b * q + b] - m[a * q + a]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..q {
                    let (mra, mrb) = (m[r * q + a], m[r * q + b]);
                    m[r * q + a] = c * mra - s * mrb;
                    m[r * q + b] = s * mra + c * mrb;
                }
                for r in 0..q {
                    let (mar, mbr) = (m[a * q + r], m[b * q + r]);
                    m[a * q + r] = c * mar - s * mbr;
                    m[b * q + r] = s * mar + c * mbr;
                }
            }
        }
    }
    (0..q).map(|i| m[i * q + i]).fold(0.0, f64::max).sqrt()
}

/// Triple-loop style product `Kx` with explicit index arithmetic.
pub fn naive_apply(p: usize, q: usize, entries: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p];
    for i in 0..p {
        for j in 0..q {
            out[i] += entries[i * q + j] * x[j];
        }
    }
    out
}

/// `min_{x∈Δ₂} max_i (Kx)_i` and `max_{y∈Δ₂} min_j (Kᵀy)_j` on a uniform grid
/// with `n` cells per player.
pub fn grid_2x2_values(k: [[f64; 2]; 2], n: usize) -> (f64, f64) {
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for i in 0..=n {
        let s = i as f64 / n as f64;
        let rows = [k[0][0] * s + k[0][1] * (1.0 - s), k[1][0] * s + k[1][1] * (1.0 - s)];
        upper = upper.min(rows[0].max(rows[1]));
        let cols = [k[0][0] * s + k[1][0] * (1.0 - s), k[0][1] * s + k[1][1] * (1.0 - s)];
        lower = lower.max(cols[0].min(cols[1]));
    }
    (upper, lower)
}

/// Cyclic coordinate descent for `μ‖x‖₁ + ½‖Kx − b‖²` with exact
/// one-dimensional minimization, `sweeps` passes from zero.
pub fn lasso_coordinate_descent(p: usize, q: usize, entries: &[f64], b: &[f64], mu: f64, sweeps: usize) -> Vec<f64> {
    let col = |j: usize| (0..p).map(move |i| entries[i * q + j]);
    let col_sq: Vec<f64> = (0..q).map(|j| col(j).map(|v| v * v).sum()).collect();
    let mut x = vec![0.0; q];
    let mut r: Vec<f64> = b.iter().map(|v| -v).collect();
    for _ in 0..sweeps {
        for j in 0..q {
            if col_sq[j] == 0.0 {
                continue;
            }
            let rho: f64 = col(j).zip(&r).map(|(a, ri)| a * (ri - a * x[j])).sum::<f64>();
            let z = -rho;
            let new = z.signum() * (z.abs() - mu).max(0.0) / col_sq[j];
            let delta = new - x[j];
            if delta != 0.0 {
                for (i, a) in col(j).enumerate() {
                    r[i] += a * delta;
                }
                x[j] = new;
            }
        }
    }
    x
}

pub fn lasso_value(p: usize, q: usize, entries: &[f64], b: &[f64], mu: f64, x: &[f64]) -> f64 {
    let kx = naive_apply(p, q, entries, x);
    let res: f64 = kx.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum();
    mu * x.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * res
}

/// Least-squares line `y ≈ slope·x + intercept` and its `r²`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx, if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) })
}

use grpda::prox::{
    moreau_conjugate, prox_elastic_net, prox_hyperplane_indicator, prox_l1, prox_linear_conjugate,
    prox_quadratic_conjugate, prox_shifted_quadratic, prox_simplex,
};
use grpda::{ProxFn, SeededRng};

type ProxOracle = Box<dyn Fn(f64, &[f64]) -> Vec<f64>>;

/// A shipped proximable function paired with an independent numeric oracle.
pub struct ProxCase {
    pub name: &'static str,
    pub prox: ProxFn,
    pub oracle: ProxOracle,
}

const SEARCH_RADIUS: f64 = 40.0;
const UNBOUNDED: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

fn random_vec(rng: &mut SeededRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(lo, hi)).collect()
}

/// Every shipped function with random parameters of dimension `n`.
pub fn shipped_prox_cases(rng: &mut SeededRng, n: usize) -> Vec<ProxCase> {
    let w = rng.uniform(0.05, 2.0);
    let (e1, e2) = (rng.uniform(0.05, 1.0), rng.uniform(0.1, 2.0));
    let b = random_vec(rng, n, -2.0, 2.0);
    let c = random_vec(rng, n, -2.0, 2.0);
    let mut a = random_vec(rng, n, -2.0, 2.0);
    a[0] += 3.0;
    let beta = rng.uniform(-1.0, 1.0);
    let (b1, b2, b3, c1, a1) = (b.clone(), b.clone(), b.clone(), c.clone(), a.clone());
    let sep = move |h: Box<dyn Fn(usize, f64) -> f64>, bounds: (f64, f64)| -> ProxOracle {
        Box::new(move |lambda, u| separable_prox(&h, lambda, u, SEARCH_RADIUS, bounds))
    };
    vec![
        ProxCase { name: "l1", prox: prox_l1(w), oracle: sep(Box::new(move |_, t| w * t.abs()), UNBOUNDED) },
        ProxCase {
            name: "elastic_net",
            prox: prox_elastic_net(e1, e2),
            oracle: sep(Box::new(move |_, t| e1 * t.abs() + 0.5 * e2 * t * t), UNBOUNDED),
        },
        ProxCase {
            name: "simplex",
            prox: prox_simplex(),
            oracle: Box::new(|_, u| simplex_projection_by_enumeration(u)),
        },
        ProxCase {
            name: "quadratic_conjugate",
            prox: prox_quadratic_conjugate(b.clone()),
            oracle: sep(Box::new(move |i, t| 0.5 * t * t + b1[i] * t), UNBOUNDED),
        },
        ProxCase {
            name: "shifted_quadratic",
            prox: prox_shifted_quadratic(b.clone()),
            oracle: sep(Box::new(move |i, t| 0.5 * (t - b2[i]) * (t - b2[i])), UNBOUNDED),
        },
        ProxCase {
            name: "linear_conjugate",
            prox: prox_linear_conjugate(c.clone()),
            oracle: sep(Box::new(move |i, t| c1[i] * t), UNBOUNDED),
        },
        ProxCase {
            name: "hyperplane_indicator",
            prox: prox_hyperplane_indicator(a.clone(), beta),
            oracle: Box::new(move |_, u| hyperplane_projection_by_elimination(&a1, beta, u)),
        },
        ProxCase {
            name: "conjugate_of_l1",
            prox: moreau_conjugate(prox_l1(w)),
            oracle: sep(Box::new(|_, _| 0.0), (-w, w)),
        },
        ProxCase {
            name: "conjugate_of_quadratic_conjugate",
            prox: moreau_conjugate(prox_quadratic_conjugate(b.clone())),
            oracle: sep(Box::new(move |i, t| 0.5 * (t - b3[i]) * (t - b3[i])), UNBOUNDED),
        },
    ]
}

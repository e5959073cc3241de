// SPDX-License-Identifier: Apache-2.0

mod oracles;

use grpda::linalg::{dist, dist_sq, dot, sub};
use grpda::prox::*;
use grpda::{ExtendedReal, SeededRng};
use proptest::prelude::*;

use oracles::{shipped_prox_cases, simplex_projection_by_enumeration};

fn all_shipped(n: usize, seed: u64) -> Vec<(&'static str, ProxFn)> {
    let mut rng = SeededRng::from_seed(seed);
    shipped_prox_cases(&mut rng, n).into_iter().map(|c| (c.name, c.prox)).collect()
}

#[test]
fn every_shipped_prox_matches_numeric_minimizer() {
    let mut rng = SeededRng::from_seed(2024);
    for round in 0..6 {
        let n = 1 + round % 5;
        for case in shipped_prox_cases(&mut rng, n) {
            for _ in 0..4 {
                let lambda = rng.uniform(0.1, 3.0);
                let u: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
                let got = case.prox.prox(lambda, &u);
                let want = (case.oracle)(lambda, &u);
                assert!(dist(&got, &want) < 1e-6, "{}: {got:?} vs {want:?}", case.name);
            }
        }
    }
}

#[test]
fn l1_against_oracle_at_fixed_lambda() {
    let mut rng = SeededRng::from_seed(5);
    let u: Vec<f64> = (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let got = prox_l1(0.1).prox(2.3, &u);
    let want = oracles::separable_prox(|_, t| 0.1 * t.abs(), 2.3, &u, 5.0, (f64::NEG_INFINITY, f64::INFINITY));
    assert!(dist(&got, &want) < 1e-8);
}

#[test]
fn quadratic_conjugate_oracle_example() {
    let got = prox_quadratic_conjugate(vec![1.0, 0.0]).prox(1.0, &[3.0, 1.0]);
    let want = oracles::separable_prox(
        |i, t| 0.5 * t * t + [1.0, 0.0][i] * t,
        1.0,
        &[3.0, 1.0],
        10.0,
        (f64::NEG_INFINITY, f64::INFINITY),
    );
    assert!(dist(&got, &[1.0, 0.5]) < 1e-15);
    assert!(dist(&got, &want) < 1e-8);
}

#[test]
fn lasso_dual_update_closed_form() {
    let b = vec![0.3, -1.2, 2.0];
    let f = prox_quadratic_conjugate(b.clone());
    let (y_prev, kx) = (vec![1.0, 0.5, -0.25], vec![-2.0, 0.1, 0.7]);
    let bt = 0.37;
    let u: Vec<f64> = y_prev.iter().zip(&kx).map(|(y, k)| y + bt * k).collect();
    let got = f.prox(bt, &u);
    for i in 0..3 {
        let closed = (y_prev[i] + bt * (kx[i] - b[i])) / (1.0 + bt);
        assert!((got[i] - closed).abs() < 1e-15);
    }
}

#[test]
fn simplex_against_enumeration() {
    let mut rng = SeededRng::from_seed(77);
    for _ in 0..200 {
        let u: Vec<f64> = (0..6).map(|_| rng.uniform(-2.0, 2.0)).collect();
        assert!(dist(&project_simplex(&u), &simplex_projection_by_enumeration(&u)) < 1e-12);
    }
}

#[test]
fn double_conjugation_restores_values() {
    let mut rng = SeededRng::from_seed(31);
    for (name, p) in all_shipped(4, 8) {
        let pp = moreau_conjugate(moreau_conjugate(p.clone()));
        for _ in 0..20 {
            let lambda = rng.uniform(0.1, 3.0);
            let u: Vec<f64> = (0..4).map(|_| rng.uniform(-3.0, 3.0)).collect();
            assert!(dist(&p.prox(lambda, &u), &pp.prox(lambda, &u)) < 1e-12, "{name}");
        }
    }
}

#[test]
fn strong_convexity_moduli() {
    assert_eq!(prox_l1(1.0).strong_convexity(), 0.0);
    assert_eq!(prox_quadratic_conjugate(vec![0.0]).strong_convexity(), 1.0);
    assert_eq!(prox_shifted_quadratic(vec![0.0]).strong_convexity(), 1.0);
    assert_eq!(prox_elastic_net(0.5, 2.0).strong_convexity(), 2.0);
    assert_eq!(prox_linear_conjugate(vec![0.0]).strong_convexity(), 0.0);
}

#[test]
fn affine_flags() {
    assert!(prox_quadratic_conjugate(vec![1.0]).affine().is_some());
    assert!(prox_shifted_quadratic(vec![1.0]).affine().is_some());
    assert!(prox_linear_conjugate(vec![1.0]).affine().is_some());
    assert!(prox_hyperplane_indicator(vec![1.0], 0.0).affine().is_some());
    assert!(prox_l1(1.0).affine().is_none());
    assert!(prox_simplex().affine().is_none());
}

fn finite(v: Option<ExtendedReal>) -> Option<f64> {
    v.and_then(ExtendedReal::finite)
}

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn moreau_identity(seed in 0u64..1000, lambda in 0.05f64..5.0, u in vec_strategy(4)) {
        for (name, p) in all_shipped(4, seed) {
            let q = moreau_conjugate(p.clone());
            let a = p.prox(lambda, &u);
            let scaled: Vec<f64> = u.iter().map(|v| v / lambda).collect();
            let b = q.prox(1.0 / lambda, &scaled);
            for i in 0..4 {
                prop_assert!((a[i] + lambda * b[i] - u[i]).abs() < 1e-12, "{}", name);
            }
        }
    }

    #[test]
    fn firm_nonexpansiveness(seed in 0u64..1000, lambda in 0.05f64..5.0, u in vec_strategy(3), v in vec_strategy(3)) {
        for (name, p) in all_shipped(3, seed) {
            let (pu, pv) = (p.prox(lambda, &u), p.prox(lambda, &v));
            let d = sub(&pu, &pv);
            prop_assert!(dot(&d, &d) <= dot(&d, &sub(&u, &v)) + 1e-10, "{}", name);
        }
    }

    #[test]
    fn simplex_output_is_feasible_and_idempotent(u in prop::collection::vec(-10.0f64..10.0, 1..12)) {
        let z = project_simplex(&u);
        prop_assert!(z.iter().all(|v| *v >= 0.0));
        prop_assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(dist(&project_simplex(&z), &z) < 1e-12);
    }

    #[test]
    fn affine_prox_is_affine(seed in 0u64..1000, lambda in 0.05f64..5.0, u1 in vec_strategy(4), u2 in vec_strategy(4), alpha in -2.0f64..2.0) {
        for (name, p) in all_shipped(4, seed) {
            if p.affine().is_none() {
                continue;
            }
            let zero = p.prox(lambda, &[0.0; 4]);
            let lin = |u: &[f64]| sub(&p.prox(lambda, u), &zero);
            let mix: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            let (l1, l2, lm) = (lin(&u1), lin(&u2), lin(&mix));
            for i in 0..4 {
                prop_assert!((lm[i] - (alpha * l1[i] + (1.0 - alpha) * l2[i])).abs() < 1e-12, "{}", name);
            }
            let structured = p.affine().unwrap().apply(lambda, &u1);
            prop_assert!(dist(&structured, &p.prox(lambda, &u1)) < 1e-12, "{}", name);
        }
    }

    #[test]
    fn prox_characterization(seed in 0u64..1000, lambda in 0.05f64..5.0, u in vec_strategy(3), w in vec_strategy(3)) {
        // h(y) ≥ h(z) + ⟨u − z, y − z⟩/λ + (γ/2)‖y − z‖² for z = prox(λ, u) and any y in the domain.
        for (name, p) in all_shipped(3, seed) {
            let z = p.prox(lambda, &u);
            let y = p.prox(1.0, &w);
            let (Some(hz), Some(hy)) = (finite(p.eval(&z)), finite(p.eval(&y))) else { continue };
            let gamma = p.strong_convexity();
            let rhs = hz + dot(&sub(&u, &z), &sub(&y, &z)) / lambda + 0.5 * gamma * dist_sq(&y, &z);
            prop_assert!(hy >= rhs - 1e-9 * (1.0 + hy.abs()), "{}: {} < {}", name, hy, rhs);
        }
    }
}

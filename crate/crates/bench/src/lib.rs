// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the criterion benchmarks.

use grpda::problems::{
    gen_lasso, gen_matrix_game, lasso_as_saddle, lasso_start, matrix_game_as_saddle, matrix_game_start, LassoCase,
    MatrixGameVariant,
};
use grpda::solvers::{default_perturb_scale, init_tau0};
use grpda::{GrpdaLConfig, SaddleProblem, SeededRng};

/// A problem with its starting point and a linesearch configuration.
pub struct Fixture {
    pub problem: SaddleProblem,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub config: GrpdaLConfig,
}

fn configured(problem: SaddleProblem, x0: Vec<f64>, y0: Vec<f64>, psi: f64, mu: f64) -> Fixture {
    let mut rng = SeededRng::from_seed(1);
    let tau0 = init_tau0(&problem.k, &y0, default_perturb_scale(&y0), psi, 1.0, &mut rng)
        .expect("generated operators are nonzero");
    let config = GrpdaLConfig { psi, mu, ..GrpdaLConfig::with_tau0(tau0) };
    Fixture { problem, x0, y0, config }
}

pub fn matrix_game(n: usize, seed: u64) -> Fixture {
    let inst = gen_matrix_game(MatrixGameVariant::Uniform11, n, n, seed);
    let (x0, y0) = matrix_game_start(&inst.k);
    configured(matrix_game_as_saddle(&inst), x0, y0, 1.5, 0.7)
}

/// LASSO with aggressive backtracking, where most iterations take a trial step.
pub fn lasso(p: usize, q: usize, seed: u64) -> Fixture {
    let inst = gen_lasso(LassoCase::Gaussian, p, q, (q / 10).max(1), 0.0, seed);
    let (x0, y0) = lasso_start(&inst);
    configured(lasso_as_saddle(&inst), x0, y0, 1.05, 0.3)
}

// SPDX-License-Identifier: Apache-2.0

//! Golden-ratio primal-dual algorithms with linesearch for
//! `min_x max_y g(x) + ⟨Kx, y⟩ − f*(y)`.
//!
//! ```
//! use grpda::problems::{gen_matrix_game, matrix_game_as_saddle, matrix_game_start, MatrixGameVariant};
//! use grpda::{run, Algorithm, GrpdaLConfig, StopCriteria};
//!
//! let inst = gen_matrix_game(MatrixGameVariant::Uniform11, 20, 20, 7);
//! let problem = matrix_game_as_saddle(&inst);
//! let (x0, y0) = matrix_game_start(&inst.k);
//! let alg = Algorithm::GrpdaL(GrpdaLConfig::with_tau0(0.5));
//! let trace = run(&problem, &alg, x0, y0, &StopCriteria::iterations(200));
//! assert!(trace.rows.last().unwrap().gap.unwrap() < 1e-2);
//! ```

pub mod linalg;
pub mod problems;
pub mod prox;
pub mod solvers;

pub use linalg::{estimate_spectral_norm, LinearOperator, RngAlgorithm, SeededRng, SpectralNorm};
pub use prox::{ExtendedReal, Prox, ProxFn};
pub use solvers::{
    run, AgrpdaLConfig, Algorithm, AlgorithmId, ConfigError, FixedGrpdaConfig, GrpdaLConfig, PdaLConfig, SaddleProblem,
    SolverError, SolverState, StopCriteria, Termination, Trace, TraceRow,
};

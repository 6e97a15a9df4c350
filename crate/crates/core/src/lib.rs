//! Best low-multilinear-rank (Tucker) approximation of dense tensors.
//!
//! The problem is `max ||X x_1 A_1^T ... x_N A_N^T||_F^2` over factors with
//! orthonormal columns. Three block-coordinate schemes are provided:
//!
//! * **HOOI**: each factor becomes the leading left singular vectors of
//!   `G_n = unfold_n(X x_{i != n} A_i^T)`.
//! * **Greedy-HOOI**: among all maximizers of the same subproblem, the one
//!   closest to the current factor (a polar alignment of the leading basis).
//! * **TUCKALS3**: one orthogonal-iteration step `qr(G_n G_n^T A_n)`.
//!
//! Alongside the solvers are the diagnostics used to audit a run: KKT
//! residuals, projector distances, spectral gaps and the per-step bound
//! relating factor movement to objective gain.
//!
//! ```
//! use tucker_hooi::{solve, synthetic, Algorithm, SolverConfig};
//!
//! let x = synthetic::gen_synthetic(&[10, 9, 8], &[2, 2, 2], 0.0, 1).unwrap();
//! let sol = solve(&x, &[2, 2, 2], &SolverConfig::new(Algorithm::Greedy)).unwrap();
//! assert!(sol.model.relative_residual < 1e-10);
//! ```

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod solver;
pub mod subspace;
pub mod synthetic;
pub mod tensor;

#[cfg(test)]
pub(crate) mod testutil;

pub use diagnostics::{
    kkt_residual, nondegeneracy_gaps, projector_distance, subspace_rel_change, KktReport,
    ProjectorDistance,
};
pub use error::{Error, Result};
pub use linalg::{
    kronecker, leading_left_subspace, nuclear_norm, polar_align, qr_orthonormalize, svd,
    OrthonormalFactor, SubspaceResult, SvdResult,
};
pub use matrix::Matrix;
pub use solver::{
    compute_gn, hosvd_init, objective, random_init, solve, solve_from, sweep_greedy, sweep_hooi,
    sweep_tuckals3, Algorithm, FactorSet, Solution, SolveTrace, SolverConfig, StopReason,
    SweepRecord, TraceLevel, TuckerModel,
};
pub use subspace::{greedy_project, key_inequality_residual, uniqueness_report, GreedyResult};
pub use tensor::{fold, inner, mode_multiply, multi_mode_multiply, tucker_reconstruct, unfold, DenseTensor};

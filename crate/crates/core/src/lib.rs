//! Nearest Hurwitz- or Schur-stable matrix pencil.
//!
//! Given `A + xB`, the distance to the closure of the stable pencils equals
//! the minimum over unitary `(Q, Z)` of `||QAZ + xQBZ - T(QAZ + xQBZ)||_F^2`,
//! where `T` keeps the strictly upper triangle, projects each diagonal entry
//! onto the stable scalar set and zeroes the strictly lower triangle. This
//! crate minimizes that objective with a Riemannian trust-region method on
//! `U(n) x U(n)` (or `O(n) x O(n)` for real input).

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod io;
pub mod manifold;
pub mod objective;
pub mod pencil;
pub mod projection;
pub mod trust_region;

pub use error::{Error, Result};
pub use pencil::{
    distance, norm_sq, numerical_rank, triangular_eigenvalues, CMatrix, EigenKind, Field,
    GeneralizedEigenvalue, Pencil, ScalarPencil,
};
pub use projection::{dproject, is_stable_scalar, project, ProjectionResult, StabilityRegion};
pub use manifold::{GroupPair, TangentPair};
pub use objective::{evaluate, triangular_target, ObjectiveEvaluation, TriangularTarget};
pub use trust_region::{
    gradient_check, hessian_check, solve, solve_multistart, Init, SolveOptions, SolveReport, StopReason,
    TraceEntry,
};
pub use generators::{gen_gaussian, gen_grcar, gen_oscillator, truncate_rank};
pub use analysis::{
    jordan_structure, recover_minimizer, regularize_singular, verify_stability, JordanCluster, JordanReport,
    MinimizerResult, StabilityVerdict,
};
pub use experiments::{
    experiment_jordan_stats, experiment_rank_sweep, experiment_size_sweep, ExperimentConfig, ExperimentRow,
    JordanStats,
};
pub use io::{PencilFile, ResultFile};

//! Smallest eigenpair of a symmetric positive definite pencil `(A, M)` by
//! preconditioned Riemannian acceleration on the `B`-sphere, with the
//! baselines it is measured against, a P1 finite element problem generator,
//! a two-level overlapping Schwarz preconditioner and preconditioner-quality
//! diagnostics.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod linalg;
pub mod precond;
pub mod solvers;
pub mod sphere;

pub use error::{Error, Result};
pub use linalg::{
    dense_generalized_eig, euclidean_gradient, rayleigh_quotient, rayleigh_ritz, weighted_inner,
    DenseEig, DenseVector, MatrixPencil, RitzResult, SpdMatrix,
};
pub use precond::Preconditioner;
pub use solvers::{AccelCoefficients, ConvergenceHistory, SolveOutcome, SolverConfig};
pub use sphere::{PairedVector, SpherePoint, TangentVector};

//! Sparse SPD kernels, the Rayleigh quotient, Rayleigh–Ritz and dense oracles.

pub mod cholesky;
pub mod dense;
pub mod lanczos;
pub mod mmio;
pub mod pencil;
pub mod ritz;
pub mod sparse;
pub mod vector;

pub use cholesky::EnvelopeCholesky;
pub use dense::{dense_generalized_eig, dense_pencil_eig, DenseEig};
pub use lanczos::{extremal_pencil_eigs, extremal_pencil_eigs_from, ExtremalEstimate, Operator};
pub use pencil::{euclidean_gradient, rayleigh_quotient, weighted_inner, MatrixPencil};
pub use ritz::{rayleigh_ritz, RitzResult, BASIS_DROP_TOL};
pub use sparse::{CsrMatrix, SpdMatrix};
pub use vector::DenseVector;

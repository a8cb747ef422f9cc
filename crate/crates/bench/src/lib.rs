//! Shared setup for the benchmarks: the unit-square Laplacian with its
//! two-level Schwarz preconditioner and coarse start.

use rap_core::experiment::select_parameters;
use rap_core::fem::{assemble_laplacian_p1, build_mesh_hierarchy, Coefficient};
use rap_core::precond::{build_two_level_overlapping, coarse_eigen_initial, coarse_pencil, SchwarzDecomposition};
use rap_core::solvers::compute_coefficients;
use rap_core::{dense_generalized_eig, AccelCoefficients, MatrixPencil};

pub struct Fixture {
    pub pencil: MatrixPencil,
    pub pc: SchwarzDecomposition,
    pub x0hat: Vec<f64>,
    pub coeffs: AccelCoefficients,
    pub lambda: f64,
}

/// Coarse size 1/4, overlap 1/2, fine size `h`. The reference value is dense,
/// so keep `h ≥ 2⁻⁵`.
pub fn laplacian(h: f64) -> Fixture {
    let hier = build_mesh_hierarchy(0.25, h).unwrap();
    let pencil = assemble_laplacian_p1(&hier.fine, &Coefficient::identity()).unwrap();
    let pc = build_two_level_overlapping(&hier, 0.5, pencil.a()).unwrap();
    let coarse = coarse_pencil(&hier, &pencil).unwrap();
    let x0hat = coarse_eigen_initial(&hier, &coarse, &pc).unwrap().xhat;
    let l2 = dense_generalized_eig(&coarse).unwrap().values[1];
    let s = select_parameters(&pencil, &pc, &x0hat, Some(l2)).unwrap();
    let coeffs = compute_coefficients(s.mu, s.ell).unwrap();
    let lambda = dense_generalized_eig(&pencil).unwrap().values[0];
    Fixture { pencil, pc, x0hat, coeffs, lambda }
}

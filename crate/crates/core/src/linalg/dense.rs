use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::linalg::pencil::MatrixPencil;

/// Full spectrum of a dense symmetric-definite pencil.
#[derive(Clone, Debug)]
pub struct DenseEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// `M`-orthonormal, in the order of `values`.
    pub vectors: Vec<Vec<f64>>,
}

/// Cholesky of `m`, then a symmetric eigensolve of `L⁻¹ A L⁻ᵀ`.
pub fn dense_pencil_eig(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<DenseEig> {
    let n = a.nrows();
    check_dim(n, a.ncols())?;
    check_dim(n, m.nrows())?;
    check_dim(n, m.ncols())?;
    let chol = Cholesky::new(m.clone())
        .ok_or_else(|| Error::Matrix("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv_a = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Matrix("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| Error::Matrix("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &k in &order {
        values.push(eig.eigenvalues[k]);
        let y: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        let x = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::Matrix("singular Cholesky factor".into()))?;
        vectors.push(x.iter().copied().collect());
    }
    Ok(DenseEig { values, vectors })
}

/// Dense oracle for a sparse pencil. Intended for `n` up to a few thousand.
pub fn dense_generalized_eig(p: &MatrixPencil) -> Result<DenseEig> {
    dense_pencil_eig(&p.a().to_dense(), &p.m().to_dense())
}

/// Smallest eigenpair of a small dense pencil; used by Rayleigh–Ritz.
pub(crate) fn smallest_pair(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
    let e = dense_pencil_eig(a, m)?;
    Ok((e.values[0], e.vectors[0].clone()))
}

use std::sync::OnceLock;

use crate::error::{check_dim, Error, Result};
use crate::linalg::cholesky::EnvelopeCholesky;
use crate::linalg::sparse::SpdMatrix;
use crate::linalg::vector::{dot, DenseVector};

/// The pair `(A, M)` of the generalized problem `A u = λ M u`.
#[derive(Debug)]
pub struct MatrixPencil {
    a: SpdMatrix,
    m: SpdMatrix,
    mass_factor: OnceLock<std::result::Result<EnvelopeCholesky, String>>,
}

impl Clone for MatrixPencil {
    fn clone(&self) -> Self {
        Self { a: self.a.clone(), m: self.m.clone(), mass_factor: OnceLock::new() }
    }
}

impl MatrixPencil {
    pub fn new(a: SpdMatrix, m: SpdMatrix) -> Result<Self> {
        check_dim(a.n(), m.n())?;
        Ok(Self { a, m, mass_factor: OnceLock::new() })
    }

    /// Standard problem `A u = λ u`.
    pub fn standard(a: SpdMatrix) -> Self {
        let n = a.n();
        Self { a, m: SpdMatrix::identity(n), mass_factor: OnceLock::new() }
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn a(&self) -> &SpdMatrix {
        &self.a
    }

    pub fn m(&self) -> &SpdMatrix {
        &self.m
    }

    /// Both matrices multiplied by `alpha > 0`; eigenvectors unchanged.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.a.scaled(alpha)?, self.m.scaled(alpha)?)
    }

    /// Factorization of `M`, computed on first use and shared afterwards.
    pub fn mass_factor(&self) -> Result<&EnvelopeCholesky> {
        self.mass_factor
            .get_or_init(|| EnvelopeCholesky::factor(&self.m).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Matrix(e.clone()))
    }
}

/// `f(x) = xᵀAx / xᵀMx`
pub fn rayleigh_quotient(p: &MatrixPencil, x: &[f64]) -> Result<f64> {
    check_dim(p.n(), x.len())?;
    let xm = p.m().quad(x);
    if !(xm > 0.0) {
        return Err(Error::Domain("Rayleigh quotient of the zero vector".into()));
    }
    Ok(p.a().quad(x) / xm)
}

/// `∇f(x) = 2 (Ax − f(x) Mx) / xᵀMx`
pub fn euclidean_gradient(p: &MatrixPencil, x: &[f64]) -> Result<DenseVector> {
    check_dim(p.n(), x.len())?;
    let ax = p.a().mul(x);
    let mx = p.m().mul(x);
    let xm = dot(x, &mx);
    if !(xm > 0.0) {
        return Err(Error::Domain("gradient at the zero vector".into()));
    }
    let f = dot(x, &ax) / xm;
    Ok(gradient_from_products(&ax, &mx, f, xm))
}

pub(crate) fn gradient_from_products(ax: &[f64], mx: &[f64], f: f64, xmx: f64) -> DenseVector {
    let c = 2.0 / xmx;
    ax.iter().zip(mx).map(|(a, m)| c * (a - f * m)).collect()
}

/// `xᵀ W y`, with `W = I` when absent.
pub fn weighted_inner(x: &[f64], y: &[f64], w: Option<&SpdMatrix>) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    match w {
        None => Ok(dot(x, y)),
        Some(w) => {
            check_dim(w.n(), x.len())?;
            Ok(dot(x, &w.mul(y)))
        }
    }
}

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg::dense::smallest_pair;
use crate::linalg::pencil::MatrixPencil;
use crate::linalg::vector::{axpy, combine, dot, norm, scale, DenseVector};

/// Columns whose orthogonalized norm falls below this fraction of the largest
/// input norm are dropped.
pub const BASIS_DROP_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct RitzResult {
    /// Smallest Ritz value, recomputed as the Rayleigh quotient of `vector`.
    pub value: f64,
    /// Coordinates in the supplied basis; dropped columns get 0.
    pub coeffs: Vec<f64>,
    pub vector: DenseVector,
}

/// Smallest Ritz pair of `p` on `span(basis)`.
pub fn rayleigh_ritz(basis: &[&[f64]], p: &MatrixPencil) -> Result<RitzResult> {
    if basis.is_empty() {
        return Err(Error::DegenerateBasis);
    }
    let n = p.n();
    for b in basis {
        check_dim(n, b.len())?;
    }
    let k = basis.len();
    let max_norm = basis.iter().map(|b| norm(b)).fold(0.0, f64::max);
    if !(max_norm > 0.0) || !max_norm.is_finite() {
        return Err(Error::DegenerateBasis);
    }

    // Modified Gram–Schmidt, two passes, keeping the triangular factor so the
    // Ritz coefficients can be mapped back onto the original columns.
    let mut q: Vec<DenseVector> = Vec::with_capacity(k);
    let mut kept: Vec<usize> = Vec::with_capacity(k);
    let mut r = DMatrix::<f64>::zeros(k, k);
    for (j, b) in basis.iter().enumerate() {
        let mut w = b.to_vec();
        for _ in 0..2 {
            for (qi, &col) in q.iter().zip(&kept) {
                let c = dot(qi, &w);
                axpy(-c, qi, &mut w);
                r[(col, j)] += c;
            }
        }
        let nw = norm(&w);
        if nw > BASIS_DROP_TOL * max_norm {
            scale(1.0 / nw, &mut w);
            r[(j, j)] = nw;
            q.push(w);
            kept.push(j);
        }
    }
    let m = q.len();
    let aq: Vec<DenseVector> = q.iter().map(|v| p.a().mul(v)).collect();
    let mq: Vec<DenseVector> = q.iter().map(|v| p.m().mul(v)).collect();
    let mut ah = DMatrix::<f64>::zeros(m, m);
    let mut mh = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let a = 0.5 * (dot(&q[i], &aq[j]) + dot(&q[j], &aq[i]));
            let b = 0.5 * (dot(&q[i], &mq[j]) + dot(&q[j], &mq[i]));
            ah[(i, j)] = a;
            ah[(j, i)] = a;
            mh[(i, j)] = b;
            mh[(j, i)] = b;
        }
    }
    let (_, y) = smallest_pair(&ah, &mh)?;

    // c = R⁻¹ y on the kept columns (upper triangular back substitution).
    let mut coeffs = vec![0.0; k];
    for a in (0..m).rev() {
        let ja = kept[a];
        let mut s = y[a];
        for b in a + 1..m {
            s -= r[(ja, kept[b])] * coeffs[kept[b]];
        }
        coeffs[ja] = s / r[(ja, ja)];
    }
    let vector = combine(&coeffs, basis);
    let ax = p.a().mul(&vector);
    let xm = p.m().quad(&vector);
    if !(xm > 0.0) {
        return Err(Error::DegenerateBasis);
    }
    Ok(RitzResult { value: dot(&vector, &ax) / xm, coeffs, vector })
}

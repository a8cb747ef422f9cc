use crate::error::{check_dim, Error, Result};
use crate::linalg::sparse::SpdMatrix;
use crate::linalg::vector::dot;

/// Envelope (profile) Cholesky factor `S = L Lᵀ`.
///
/// Row `i` of `L` is stored densely from its first structural nonzero up to the
/// diagonal. With lexicographic grid ordering the envelope width is one grid
/// line, which keeps both the factorization and the solves cheap for the
/// structured meshes this crate builds.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(s: &SpdMatrix) -> Result<Self> {
        let n = s.n();
        let mut first = vec![0usize; n];
        for (i, f) in first.iter_mut().enumerate() {
            let (c, _) = s.row(i);
            *f = c.first().copied().unwrap_or(i).min(i);
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut vals = vec![0.0; start[n]];
        for i in 0..n {
            let (c, v) = s.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if j <= i {
                    vals[start[i] + j - first[i]] = a;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = vals.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let row_j = &done[start[j]..start[j] + (j - fj + 1)];
                let s_ij = dot(&row_i[lo - fi..j - fi], &row_j[lo - fj..j - fj]);
                let ljj = row_j[j - fj];
                row_i[j - fi] = (row_i[j - fi] - s_ij) / ljj;
            }
            let off = &row_i[..i - fi];
            let d = row_i[i - fi] - dot(off, off);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Matrix(format!(
                    "matrix is not positive definite (pivot {d:e} at row {i})"
                )));
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(Self { n, first, start, vals })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries, a proxy for solve cost.
    pub fn envelope_size(&self) -> usize {
        self.vals.len()
    }

    /// Overwrites `b` with `S⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let s = dot(&row[..i - fi], &b[fi..i]);
            b[i] = (b[i] - s) / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let xi = b[i] / row[i - fi];
            b[i] = xi;
            for (bk, lik) in b[fi..i].iter_mut().zip(&row[..i - fi]) {
                *bk -= lik * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// `log det S`
    pub fn log_det(&self) -> f64 {
        (0..self.n)
            .map(|i| 2.0 * self.vals[self.start[i + 1] - 1].ln())
            .sum()
    }
}

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};

/// Rectangular compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// explicit zeros produced by the sum are kept out of the pattern.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(i, j, v) in &t {
            if i >= nrows || j >= ncols {
                return Err(Error::Usage(format!(
                    "entry ({i}, {j}) outside a {nrows}x{ncols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Matrix(format!("non-finite entry at ({i}, {j})")));
            }
        }
        t.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut offsets = vec![0usize; nrows + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut k = 0;
        while k < t.len() {
            let (i, j, mut v) = t[k];
            k += 1;
            while k < t.len() && t[k].0 == i && t[k].1 == j {
                v += t[k].2;
                k += 1;
            }
            if v != 0.0 {
                cols.push(j);
                vals.push(v);
                offsets[i + 1] += 1;
            }
        }
        for i in 0..nrows {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self { nrows, ncols, offsets, cols, vals })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            offsets: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    /// `y = S x`
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.offsets[i]..self.offsets[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_into(x, &mut y);
        y
    }

    /// `y = Sᵀ x`
    pub fn mul_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for k in self.offsets[i]..self.offsets[i + 1] {
                y[self.cols[k]] += self.vals[k] * xi;
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Galerkin product `Pᵀ S P` with `self = S` square.
    pub fn galerkin(&self, p: &CsrMatrix) -> Result<CsrMatrix> {
        check_dim(self.nrows, p.nrows)?;
        check_dim(self.nrows, self.ncols)?;
        let mut trip = Vec::new();
        for i in 0..self.nrows {
            let (pi_c, pi_v) = p.row(i);
            if pi_c.is_empty() {
                continue;
            }
            let (a_c, a_v) = self.row(i);
            for (&j, &aij) in a_c.iter().zip(a_v) {
                let (pj_c, pj_v) = p.row(j);
                for (&k, &pik) in pi_c.iter().zip(pi_v) {
                    for (&l, &pjl) in pj_c.iter().zip(pj_v) {
                        trip.push((k, l, pik * aij * pjl));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(p.ncols, p.ncols, trip)
    }
}

/// Symmetric positive definite matrix in CSR form with the full symmetric
/// pattern stored, so a matvec is a plain row sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix {
    csr: CsrMatrix,
}

impl SpdMatrix {
    /// Checks squareness, symmetry (relative 1e-12 against the largest entry)
    /// and a positive diagonal. Definiteness itself is only certified by a
    /// factorization.
    pub fn from_csr(csr: CsrMatrix) -> Result<Self> {
        if csr.nrows != csr.ncols {
            return Err(Error::Matrix(format!(
                "SPD matrix must be square, got {}x{}",
                csr.nrows, csr.ncols
            )));
        }
        let scale = crate::linalg::vector::max_abs(&csr.vals).max(f64::MIN_POSITIVE);
        for (i, j, v) in csr.triplets() {
            let t = csr.get(j, i);
            if (v - t).abs() > 1e-12 * scale {
                return Err(Error::Matrix(format!(
                    "not symmetric: ({i},{j}) = {v} but ({j},{i}) = {t}"
                )));
            }
        }
        for i in 0..csr.nrows {
            let d = csr.get(i, i);
            if d <= 0.0 {
                return Err(Error::Matrix(format!("non-positive diagonal {d} at row {i}")));
            }
        }
        Ok(Self { csr })
    }

    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        Self::from_csr(CsrMatrix::from_triplets(n, n, triplets)?)
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::from_triplets(d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    pub fn identity(n: usize) -> Self {
        Self { csr: CsrMatrix::identity(n) }
    }

    /// Keeps entries with `|v| > drop_tol * max|v|`, then symmetrizes.
    pub fn from_dense(d: &DMatrix<f64>, drop_tol: f64) -> Result<Self> {
        if d.nrows() != d.ncols() {
            return Err(Error::Matrix("dense input must be square".into()));
        }
        let n = d.nrows();
        let cut = drop_tol * d.amax();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = 0.5 * (d[(i, j)] + d[(j, i)]);
                if v.abs() > cut || i == j {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn n(&self) -> usize {
        self.csr.nrows
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.csr
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.csr.get(i, j)
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        self.csr.row(i)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        self.csr.mul_into(x, y)
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        self.csr.mul(x)
    }

    /// `xᵀ S x`
    pub fn quad(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let (c, v) = self.row(i);
            let mut r = 0.0;
            for (&j, &a) in c.iter().zip(v) {
                r += a * x[j];
            }
            s += xi * r;
        }
        s
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::Domain("SPD scaling factor must be positive".into()));
        }
        let mut csr = self.csr.clone();
        for v in csr.vals.iter_mut() {
            *v *= alpha;
        }
        Ok(Self { csr })
    }

    /// Principal submatrix on sorted, distinct `idx`.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; self.n()];
        for (k, &i) in idx.iter().enumerate() {
            if i >= self.n() {
                return Err(Error::Usage(format!("index {i} out of range")));
            }
            local[i] = k;
        }
        let mut t = Vec::new();
        for (k, &i) in idx.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if local[j] != usize::MAX {
                    t.push((k, local[j], a));
                }
            }
        }
        Self::from_triplets(idx.len(), t)
    }

    pub fn galerkin(&self, p: &CsrMatrix) -> Result<Self> {
        Self::from_csr(self.csr.galerkin(p)?)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.csr.to_dense()
    }
}

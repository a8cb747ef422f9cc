//! Preconditioners, given as the action of `B⁻¹`.

use crate::error::{check_dim, Error, Result};
use crate::fem::{subdomain_index_sets, MeshHierarchy};
use crate::linalg::vector::dot;
use crate::linalg::{dense_generalized_eig, CsrMatrix, EnvelopeCholesky, MatrixPencil, SpdMatrix};
use crate::sphere::{paired_normalize, PairedVector};

/// Symmetric positive definite action `r ↦ B⁻¹ r`.
pub trait Preconditioner: Send + Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, r: &[f64], out: &mut [f64]);

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; r.len()];
        self.apply_into(r, &mut out);
        out
    }
}

#[derive(Clone, Debug)]
pub struct Identity {
    n: usize,
}

impl Identity {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
    }
}

/// `B = diag(A)`
#[derive(Clone, Debug)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &SpdMatrix) -> Self {
        Self { inv_diag: a.diagonal().iter().map(|d| 1.0 / d).collect() }
    }
}

impl Preconditioner for Jacobi {
    fn dim(&self) -> usize {
        self.inv_diag.len()
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        for ((o, ri), d) in out.iter_mut().zip(r).zip(&self.inv_diag) {
            *o = ri * d;
        }
    }
}

/// Exact inverse of an assembled SPD matrix.
#[derive(Clone, Debug)]
pub struct ExactInverse {
    factor: EnvelopeCholesky,
}

impl ExactInverse {
    pub fn new(b: &SpdMatrix) -> Result<Self> {
        Ok(Self { factor: EnvelopeCholesky::factor(b)? })
    }
}

impl Preconditioner for ExactInverse {
    fn dim(&self) -> usize {
        self.factor.n()
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
        self.factor.solve_in_place(out);
    }
}

/// `B = M`, reusing the pencil's cached mass factorization.
pub struct MassInverse<'a> {
    factor: &'a EnvelopeCholesky,
}

impl<'a> MassInverse<'a> {
    pub fn new(p: &'a MatrixPencil) -> Result<Self> {
        Ok(Self { factor: p.mass_factor()? })
    }
}

impl Preconditioner for MassInverse<'_> {
    fn dim(&self) -> usize {
        self.factor.n()
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
        self.factor.solve_in_place(out);
    }
}

/// Wraps any closure as a preconditioner.
pub struct FnPreconditioner<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Send + Sync> FnPreconditioner<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Send + Sync> Preconditioner for FnPreconditioner<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        (self.f)(r, out)
    }
}

/// Additive Schwarz `B⁻¹ = R₀ᵀ A₀⁻¹ R₀ + Σᵢ Rᵢᵀ Aᵢ⁻¹ Rᵢ` with exact local and
/// coarse solves.
#[derive(Clone, Debug)]
pub struct SchwarzDecomposition {
    n: usize,
    coarse_interp: Option<CsrMatrix>,
    coarse_matrix: Option<SpdMatrix>,
    coarse_factor: Option<EnvelopeCholesky>,
    subdomain_sets: Vec<Vec<usize>>,
    local_matrices: Vec<SpdMatrix>,
    local_factors: Vec<EnvelopeCholesky>,
}

impl SchwarzDecomposition {
    /// Local matrices are principal submatrices of `a`; the coarse matrix is
    /// the Galerkin product `R₀ A R₀ᵀ`. Index sets must be sorted.
    pub fn new(a: &SpdMatrix, subdomain_sets: Vec<Vec<usize>>, coarse_interp: Option<CsrMatrix>) -> Result<Self> {
        let n = a.n();
        let mut covered = vec![false; n];
        for (k, s) in subdomain_sets.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Usage(format!("subdomain {k} is empty")));
            }
            if s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Usage(format!("subdomain {k} is not sorted and distinct")));
            }
            for &i in s {
                if i >= n {
                    return Err(Error::Usage(format!("subdomain {k} has index {i} >= {n}")));
                }
                covered[i] = true;
            }
        }
        let (coarse_matrix, coarse_factor) = match &coarse_interp {
            Some(p) if p.ncols() > 0 => {
                check_dim(n, p.nrows())?;
                let c = a.galerkin(p)?;
                let f = EnvelopeCholesky::factor(&c)?;
                (Some(c), Some(f))
            }
            _ => (None, None),
        };
        if coarse_matrix.is_none() && covered.iter().any(|c| !c) {
            return Err(Error::Usage("subdomains do not cover every unknown".into()));
        }
        let mut local_matrices = Vec::with_capacity(subdomain_sets.len());
        let mut local_factors = Vec::with_capacity(subdomain_sets.len());
        for s in &subdomain_sets {
            let m = a.principal_submatrix(s)?;
            local_factors.push(EnvelopeCholesky::factor(&m)?);
            local_matrices.push(m);
        }
        Ok(Self {
            n,
            coarse_interp: coarse_interp.filter(|p| p.ncols() > 0),
            coarse_matrix,
            coarse_factor,
            subdomain_sets,
            local_matrices,
            local_factors,
        })
    }

    pub fn subdomain_sets(&self) -> &[Vec<usize>] {
        &self.subdomain_sets
    }

    pub fn coarse_matrix(&self) -> Option<&SpdMatrix> {
        self.coarse_matrix.as_ref()
    }

    pub fn coarse_interp(&self) -> Option<&CsrMatrix> {
        self.coarse_interp.as_ref()
    }

    pub fn local_matrices(&self) -> &[SpdMatrix] {
        &self.local_matrices
    }
}

impl Preconditioner for SchwarzDecomposition {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        assert_eq!(r.len(), self.n);
        match (&self.coarse_interp, &self.coarse_factor) {
            (Some(p), Some(f)) => {
                let mut rc = p.mul_transpose(r);
                f.solve_in_place(&mut rc);
                p.mul_into(&rc, out);
            }
            _ => out.iter_mut().for_each(|o| *o = 0.0),
        }
        let mut buf = Vec::new();
        for (s, f) in self.subdomain_sets.iter().zip(&self.local_factors) {
            buf.clear();
            buf.extend(s.iter().map(|&i| r[i]));
            f.solve_in_place(&mut buf);
            for (&i, v) in s.iter().zip(&buf) {
                out[i] += v;
            }
        }
    }
}

/// Two-level overlapping Schwarz on a mesh hierarchy.
pub fn build_two_level_overlapping(
    hier: &MeshHierarchy,
    overlap_ratio: f64,
    a: &SpdMatrix,
) -> Result<SchwarzDecomposition> {
    check_dim(hier.fine.num_nodes(), a.n())?;
    let sets = subdomain_index_sets(hier, overlap_ratio)?;
    if let Some(k) = sets.iter().position(|s| s.is_empty()) {
        return Err(Error::Usage(format!("subdomain {k} is empty after clipping to the domain")));
    }
    SchwarzDecomposition::new(a, sets, Some(hier.interp.clone()))
}

/// Galerkin coarse pencil `(R₀ A R₀ᵀ, R₀ M R₀ᵀ)`.
pub fn coarse_pencil(hier: &MeshHierarchy, fine: &MatrixPencil) -> Result<MatrixPencil> {
    MatrixPencil::new(fine.a().galerkin(&hier.interp)?, fine.m().galerkin(&hier.interp)?)
}

/// Coarse spaces up to this size are solved densely.
pub const DENSE_COARSE_LIMIT: usize = 1200;

/// Smallest coarse eigenvector `u₀`, lifted as `x̂₀ = R₀ᵀ u₀`, then
/// `x₀ = B⁻¹ x̂₀`, returned `B`-normalized. The sign makes `Σ u₀ > 0`.
pub fn coarse_eigen_initial(
    hier: &MeshHierarchy,
    coarse: &MatrixPencil,
    pc: &dyn Preconditioner,
) -> Result<PairedVector> {
    check_dim(hier.coarse.num_nodes(), coarse.n())?;
    check_dim(hier.fine.num_nodes(), pc.dim())?;
    if coarse.n() == 0 {
        return Err(Error::Usage("the coarse space is empty".into()));
    }
    let mut u0 = if coarse.n() <= DENSE_COARSE_LIMIT {
        dense_generalized_eig(coarse)?.vectors.swap_remove(0)
    } else {
        iterative_coarse_eigenvector(coarse)?
    };
    if u0.iter().sum::<f64>() < 0.0 {
        u0.iter_mut().for_each(|v| *v = -*v);
    }
    let xhat = hier.interp.mul(&u0);
    let x = pc.apply(&xhat);
    let p = PairedVector::new(x, xhat)?;
    if !(dot(&p.x, &p.xhat) > 0.0) {
        return Err(Error::Matrix("preconditioner is not positive on the coarse lift".into()));
    }
    paired_normalize(&p)
}

fn iterative_coarse_eigenvector(coarse: &MatrixPencil) -> Result<Vec<f64>> {
    use crate::solvers::{psd_solve, SolverConfig};
    let pc = ExactInverse::new(coarse.a())?;
    let start = coarse.m().mul(&vec![1.0; coarse.n()]);
    let cfg = SolverConfig { residual_tol: 1e-12, max_iter: 5000, ..SolverConfig::default() };
    let out = psd_solve(coarse, &pc, &start, &cfg)?;
    Ok(out.x)
}

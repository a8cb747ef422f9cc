//! Preconditioner-quality measurements on small problems with an explicit `B`.
//!
//! Everything here is dense and meant for verification at `n` in the
//! hundreds at most.

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dense_pencil_eig, extremal_pencil_eigs, DenseEig, SpdMatrix};
use crate::precond::Preconditioner;

/// Default seed of the sublevel-set sampler.
pub const DEFAULT_SEED: u64 = 42;
/// Radial fractions sampled along each direction.
pub const RADIAL_STEPS: usize = 16;

fn dvec(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn quad(a: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(a * x))
}

/// Dense copies of `A`, `M`, `B` with the spectra of `(A, M)` and `(A, B)`.
#[derive(Clone, Debug)]
pub struct DenseProblem {
    pub a: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Spectrum of `(A, M)`, `M`-orthonormal vectors.
    pub eig: DenseEig,
    /// Spectrum of `(A, B)`.
    pub nu: Vec<f64>,
    a_chol: Cholesky<f64, Dyn>,
    b_chol: Cholesky<f64, Dyn>,
}

impl DenseProblem {
    pub fn new(a: DMatrix<f64>, m: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        check_dim(n, m.nrows())?;
        check_dim(n, b.nrows())?;
        let eig = dense_pencil_eig(&a, &m)?;
        if n < 2 {
            return Err(Error::Usage("diagnostics need n >= 2".into()));
        }
        let nu = dense_pencil_eig(&a, &b)?.values;
        let a_chol = Cholesky::new(a.clone()).ok_or_else(|| Error::Matrix("A is not positive definite".into()))?;
        let b_chol = Cholesky::new(b.clone()).ok_or_else(|| Error::Matrix("B is not positive definite".into()))?;
        Ok(Self { a, m, b, eig, nu, a_chol, b_chol })
    }

    pub fn from_sparse(a: &SpdMatrix, m: &SpdMatrix, b: &SpdMatrix) -> Result<Self> {
        Self::new(a.to_dense(), m.to_dense(), b.to_dense())
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn lambda1(&self) -> f64 {
        self.eig.values[0]
    }

    pub fn lambda2(&self) -> f64 {
        self.eig.values[1]
    }

    pub fn lambdan(&self) -> f64 {
        *self.eig.values.last().expect("nonempty")
    }

    /// `M`-unit eigenvector of `λ₁`.
    pub fn u1(&self) -> &[f64] {
        &self.eig.vectors[0]
    }

    pub fn nu_min(&self) -> f64 {
        self.nu[0]
    }

    pub fn nu_max(&self) -> f64 {
        *self.nu.last().expect("nonempty")
    }

    pub fn kappa_nu(&self) -> f64 {
        self.nu_max() / self.nu_min()
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        let x = dvec(x);
        quad(&self.a, &x) / quad(&self.m, &x)
    }

    /// `f(x) = xᵀAx / xᵀBx`, the Rayleigh quotient of `(A, B)`.
    pub fn f_ab(&self, x: &[f64]) -> f64 {
        let x = dvec(x);
        quad(&self.a, &x) / quad(&self.b, &x)
    }

    fn check_rho_star(&self, rho_star: f64) -> Result<()> {
        let (l1, l2) = (self.lambda1(), self.lambda2());
        if !(rho_star >= l1 * (1.0 - 1e-12) && rho_star < 0.5 * (l1 + l2)) {
            return Err(Error::Domain(format!(
                "level {rho_star} must lie in [λ₁, (λ₁+λ₂)/2) = [{l1}, {})",
                0.5 * (l1 + l2)
            )));
        }
        Ok(())
    }
}

/// `ν_max / ν_min` of `(A, B)` from `iters` Lanczos steps.
pub fn kappa_nu(a: &SpdMatrix, pc: &dyn Preconditioner, iters: usize) -> Result<f64> {
    check_dim(a.n(), pc.dim())?;
    let apply_a = |x: &[f64], y: &mut [f64]| a.mul_into(x, y);
    let apply_b = |x: &[f64], y: &mut [f64]| pc.apply_into(x, y);
    let est = extremal_pencil_eigs(&apply_a, &apply_b, a.n(), iters)?;
    Ok((est.nu_max / est.nu_min).max(1.0))
}

/// Assembles `B` from its inverse action by applying `pc` to unit vectors.
pub fn assemble_preconditioner(pc: &dyn Preconditioner) -> Result<DMatrix<f64>> {
    let n = pc.dim();
    let mut binv = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        pc.apply_into(&e, &mut col);
        e[j] = 0.0;
        binv.column_mut(j).copy_from_slice(&col);
    }
    let binv = (&binv + binv.transpose()) * 0.5;
    let chol = Cholesky::new(binv).ok_or_else(|| Error::Matrix("B⁻¹ is not positive definite".into()))?;
    let b = chol.inverse();
    Ok((&b + b.transpose()) * 0.5)
}

/// `max |vᵀAx| / (‖v‖_A ‖x‖_A)` over `vᵀBx = 0`, in closed form:
/// `cos² = 1 − (xᵀBx)² / (xᵀAx · xᵀBA⁻¹Bx)`.
pub fn per_point_leading_cos(a: &SpdMatrix, b: &SpdMatrix, x: &[f64]) -> Result<f64> {
    check_dim(a.n(), x.len())?;
    check_dim(a.n(), b.n())?;
    let fac = crate::linalg::EnvelopeCholesky::factor(a)?;
    let bx = b.mul(x);
    let z = fac.solve(&bx)?;
    let xbx = crate::linalg::vector::dot(x, &bx);
    let xax = a.quad(x);
    if !(xax > 0.0) {
        return Err(Error::Domain("leading angle at the zero vector".into()));
    }
    Ok(leading_cos_from(xbx, xax, crate::linalg::vector::dot(&bx, &z)))
}

fn leading_cos_from(xbx: f64, xax: f64, bab: f64) -> f64 {
    (1.0 - xbx * xbx / (xax * bab)).clamp(0.0, 1.0).sqrt()
}

impl DenseProblem {
    /// Dense form of [`per_point_leading_cos`].
    pub fn leading_cos(&self, x: &[f64]) -> f64 {
        let x = dvec(x);
        let bx = &self.b * &x;
        let z = self.a_chol.solve(&bx);
        leading_cos_from(x.dot(&bx), quad(&self.a, &x), bx.dot(&z))
    }

    /// Extreme values of `f` over the hyperplane `{v : vᵀc = 0}`.
    pub fn restricted_extremes(&self, c: &[f64]) -> Result<(f64, f64)> {
        let z = complement_basis(&dvec(c));
        let az = z.transpose() * &self.a * &z;
        let mz = z.transpose() * &self.m * &z;
        let e = dense_pencil_eig(&az, &mz)?;
        Ok((e.values[0], *e.values.last().expect("nonempty")))
    }

    /// `uᵀAB⁻¹Au / uᵀAu` for `u = u₁`.
    pub fn nu1(&self) -> f64 {
        let u = dvec(self.u1());
        let au = &self.a * &u;
        au.dot(&self.b_chol.solve(&au)) / u.dot(&au)
    }

    /// `uᵀAu / uᵀBu` for `u = u₁`.
    pub fn sigma(&self) -> f64 {
        self.f_ab(self.u1())
    }

    /// Points of `{f ≤ ρ*}` near `u₁`: along each of `directions` random
    /// great circles through `u₁` the admissible arc is located by scanning
    /// and bisection, then sampled at fractions `k/16`, `k = 1..=16`. `u₁`
    /// itself is always the first sample.
    pub fn sample_sublevel(&self, rho_star: f64, directions: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.check_rho_star(rho_star)?;
        let n = self.n();
        let u = dvec(self.u1()).normalize();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![u.iter().copied().collect::<Vec<f64>>()];
        let point = |d: &DVector<f64>, t: f64| -> DVector<f64> { &u * t.cos() + d * t.sin() };
        let fv = |x: &DVector<f64>| quad(&self.a, x) / quad(&self.m, x);
        for _ in 0..directions {
            let g: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let d = &g - &u * u.dot(&g);
            let dn = d.norm();
            if dn == 0.0 {
                continue;
            }
            let d = d / dn;
            let half_pi = std::f64::consts::FRAC_PI_2;
            let scan = 256;
            let mut lo = 0.0;
            let mut hi = None;
            for k in 1..=scan {
                let t = half_pi * k as f64 / scan as f64;
                if fv(&point(&d, t)) > rho_star {
                    hi = Some(t);
                    break;
                }
                lo = t;
            }
            if let Some(mut hi) = hi {
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if fv(&point(&d, mid)) > rho_star {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            for k in 1..=RADIAL_STEPS {
                let x = point(&d, lo * k as f64 / RADIAL_STEPS as f64);
                if fv(&x) <= rho_star {
                    out.push(x.iter().copied().collect());
                }
            }
        }
        Ok(out)
    }
}

/// Orthonormal basis of the hyperplane orthogonal to `c` (Householder).
fn complement_basis(c: &DVector<f64>) -> DMatrix<f64> {
    let n = c.len();
    let cn = c.norm();
    let mut v = c / cn;
    // Reflect c onto ±e₀; the remaining columns of the reflector span c⊥.
    let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += s;
    let vn2 = v.norm_squared();
    let mut h = DMatrix::<f64>::identity(n, n);
    h -= (&v * v.transpose()) * (2.0 / vn2);
    h.columns(1, n - 1).into_owned()
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct PreconQuality {
    pub kappa_nu: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Largest sampled per-point leading cosine, a lower bound on `cos ϑ`.
    pub cos_theta_est: f64,
    /// Smallest sampled value of the exact inner infimum, an upper bound on `ϱ`.
    pub varrho_est: f64,
    /// Largest sampled `|xᵀAx/xᵀBx − σ|`, a lower bound on `ς`.
    pub varsigma_est: f64,
    pub sigma: f64,
    pub nu1: f64,
    pub rho_star: f64,
    pub sample_count: usize,
    /// `√((ρ* − λ₁)/(λ₂ − λ₁))`
    pub epsilon: f64,
    /// `λ₂ cos ϑ/(λ₂ − λ₁) + ε`
    pub epsilon_star: f64,
}

impl PreconQuality {
    pub const CSV_HEADER: &'static str = "kappa_nu,nu_min,nu_max,cos_theta_est,varrho_est,varsigma_est,sigma,nu1,rho_star,sample_count,epsilon,epsilon_star";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e}",
            self.kappa_nu,
            self.nu_min,
            self.nu_max,
            self.cos_theta_est,
            self.varrho_est,
            self.varsigma_est,
            self.sigma,
            self.nu1,
            self.rho_star,
            self.sample_count,
            self.epsilon,
            self.epsilon_star
        )
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("plain numeric struct")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeadingAngleEstimate {
    pub cos_theta: f64,
    pub sample_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarrhoVarsigma {
    pub varrho: f64,
    pub varsigma: f64,
    pub sigma: f64,
    pub nu1: f64,
}

impl DenseProblem {
    /// All sampled measurements over one point set.
    pub fn quality_from_points(&self, rho_star: f64, points: &[Vec<f64>]) -> Result<PreconQuality> {
        self.check_rho_star(rho_star)?;
        if points.is_empty() {
            return Err(Error::Estimation("no admissible samples".into()));
        }
        let sigma = self.sigma();
        let mut cos_theta: f64 = 0.0;
        let mut varrho = f64::INFINITY;
        let mut varsigma: f64 = 0.0;
        for x in points {
            cos_theta = cos_theta.max(self.leading_cos(x));
            let bx = (&self.b * dvec(x)).iter().copied().collect::<Vec<f64>>();
            varrho = varrho.min(self.restricted_extremes(&bx)?.0);
            varsigma = varsigma.max((self.f_ab(x) - sigma).abs());
        }
        let (l1, l2) = (self.lambda1(), self.lambda2());
        let epsilon = ((rho_star - l1).max(0.0) / (l2 - l1)).sqrt();
        Ok(PreconQuality {
            kappa_nu: self.kappa_nu(),
            nu_min: self.nu_min(),
            nu_max: self.nu_max(),
            cos_theta_est: cos_theta,
            varrho_est: varrho,
            varsigma_est: varsigma,
            sigma,
            nu1: self.nu1(),
            rho_star,
            sample_count: points.len(),
            epsilon,
            epsilon_star: l2 * cos_theta / (l2 - l1) + epsilon,
        })
    }

    pub fn quality(&self, rho_star: f64, directions: usize, seed: u64) -> Result<PreconQuality> {
        let pts = self.sample_sublevel(rho_star, directions, seed)?;
        self.quality_from_points(rho_star, &pts)
    }

    /// Right side of the decomposition bound on `cos ϑ`, with `u₁` scaled to
    /// unit `A`-norm.
    pub fn decomposition_bound(&self, rho_star: f64) -> f64 {
        let u = dvec(self.u1());
        let u = &u / quad(&self.a, &u).sqrt();
        let nu1 = self.nu1();
        let au = &self.a * &u;
        let d = self.b_chol.solve(&au) - &u * nu1;
        let d_a = quad(&self.a, &d).max(0.0).sqrt();
        let (l1, l2) = (self.lambda1(), self.lambda2());
        let ratio = ((1.0 / l1 - 1.0 / rho_star) / (1.0 / l1 - 1.0 / l2)).max(0.0);
        d_a / self.nu_min() + (nu1 / self.nu_min() + self.kappa_nu().sqrt()) * ratio.sqrt()
    }
}

fn problem_of(a: &SpdMatrix, m: &SpdMatrix, b: &SpdMatrix) -> Result<DenseProblem> {
    DenseProblem::from_sparse(a, m, b)
}

/// Sampled lower bound on `cos ϑ` over `{f ≤ ρ*}`.
pub fn leading_angle_estimate(
    a: &SpdMatrix,
    m: &SpdMatrix,
    b: &SpdMatrix,
    rho_star: f64,
    samples: usize,
    seed: u64,
) -> Result<LeadingAngleEstimate> {
    let q = problem_of(a, m, b)?.quality(rho_star, samples, seed)?;
    Ok(LeadingAngleEstimate { cos_theta: q.cos_theta_est, sample_count: q.sample_count })
}

pub fn varrho_varsigma_estimate(
    a: &SpdMatrix,
    m: &SpdMatrix,
    b: &SpdMatrix,
    rho_star: f64,
    samples: usize,
    seed: u64,
) -> Result<VarrhoVarsigma> {
    let q = problem_of(a, m, b)?.quality(rho_star, samples, seed)?;
    Ok(VarrhoVarsigma { varrho: q.varrho_est, varsigma: q.varsigma_est, sigma: q.sigma, nu1: q.nu1 })
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct ConvexityConstants {
    pub mu_b: f64,
    pub ell_b: f64,
    pub c_x: f64,
    pub rho_x: f64,
    /// `L_B/μ_B` when `μ_B > 0`.
    pub kappa_b: Option<f64>,
    /// `μ_B > 0`.
    pub convex: bool,
}

/// Geodesic convexity and smoothness constants of `f` on the `B`-sphere over
/// `{f ≤ ρ_X}`, evaluated literally from the measured quantities.
pub fn convexity_constants(
    q: &PreconQuality,
    lambda1: f64,
    lambda2: f64,
    lambdan: f64,
    rho_x: f64,
) -> Result<ConvexityConstants> {
    if !(rho_x >= lambda1 && rho_x < 0.5 * (lambda1 + lambda2)) {
        return Err(Error::Domain(format!("ρ_X = {rho_x} outside [λ₁, (λ₁+λ₂)/2)")));
    }
    if !(q.varrho_est > rho_x) {
        return Err(Error::Domain(format!(
            "need ϱ > ρ_X, got ϱ = {} and ρ_X = {rho_x}",
            q.varrho_est
        )));
    }
    let delta = (rho_x - lambda1) / lambda1;
    let c_x = 8.0 * q.kappa_nu * rho_x * (delta + delta.sqrt() * q.cos_theta_est);
    let mu_b = 2.0 * q.nu_min * lambda1 / (q.sigma + q.varsigma_est) * (1.0 - rho_x / q.varrho_est) - c_x;
    let ell_b = 2.0 * q.nu_max * rho_x / (q.sigma - q.varsigma_est) * (1.0 - lambda1 / lambdan) + c_x;
    let convex = mu_b > 0.0;
    Ok(ConvexityConstants { mu_b, ell_b, c_x, rho_x, kappa_b: convex.then(|| ell_b / mu_b), convex })
}

/// Second derivative of `f` along the unit-speed `B`-geodesic through `x`
/// with initial direction `v`, by a central difference with step `t`.
/// `x` and `v` are first made `B`-orthonormal; returns `q(v)/‖v‖²_B`.
pub fn geodesic_hessian_fd(p: &DenseProblem, bmat: &DMatrix<f64>, x: &[f64], v: &[f64], t: f64) -> Result<f64> {
    let x = dvec(x);
    let x = &x / quad(bmat, &x).sqrt();
    let v = dvec(v);
    let v0 = quad(bmat, &v);
    let v = &v - &x * x.dot(&(bmat * &v));
    let vn = quad(bmat, &v);
    if !(vn > 1e-20 * v0) {
        return Err(Error::Domain("direction is parallel to the base point".into()));
    }
    let v = v / vn.sqrt();
    let f = |s: f64| -> f64 {
        let g = &x * s.cos() + &v * s.sin();
        quad(&p.a, &g) / quad(&p.m, &g)
    };
    Ok((f(t) - 2.0 * f(0.0) + f(-t)) / (t * t))
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when the inequality holds.
    pub margin: f64,
    pub holds: bool,
}

impl Inequality {
    /// `lhs ≥ rhs` up to `slack` relative to the scale of the two sides.
    fn at_least(lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = lhs - rhs;
        let tol = slack * lhs.abs().max(rhs.abs()).max(1.0);
        Self { lhs, rhs, margin, holds: margin >= -tol }
    }

    fn at_most(lhs: f64, rhs: f64, slack: f64) -> Self {
        let mut s = Self::at_least(rhs, lhs, slack);
        std::mem::swap(&mut s.lhs, &mut s.rhs);
        s
    }
}

/// The four basic inequalities for a point of `{f ≤ ρ*}`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EpicReport {
    /// `|xᵀMu₁|/(‖x‖_M‖u₁‖_M) ≥ 1 − 2(ρ − λ₁)/(λ₂ − λ₁)`
    pub pair_alignment: Inequality,
    /// `(xᵀMu₁)²/(‖x‖²_M‖u₁‖²_M) ≥ (λ₂ − ρ)/(λ₂ − λ₁)`
    pub u1_alignment_m: Inequality,
    /// `(xᵀAu₁)²/(‖x‖²_A‖u₁‖²_A) ≥ (ρ⁻¹ − λ₂⁻¹)/(λ₁⁻¹ − λ₂⁻¹)`
    pub u1_alignment_a: Inequality,
    /// `min f(v) ≥ λ₁ + λ₂ − ρ` over `vᵀMx = 0`
    pub complement_lower: Inequality,
    /// `max f(v) ≤ λ_n` over `vᵀMx = 0`
    pub complement_upper: Inequality,
    /// `rᵀA⁻¹r/xᵀMx ≤ ρ(ρ − λ₁)/λ₁`, `r = Ax − ρMx`
    pub residual: Inequality,
}

impl EpicReport {
    pub fn all_hold(&self) -> bool {
        [
            self.pair_alignment,
            self.u1_alignment_m,
            self.u1_alignment_a,
            self.complement_lower,
            self.complement_upper,
            self.residual,
        ]
        .iter()
        .all(|c| c.holds)
    }
}

/// Relative slack granted to every inequality for rounding.
pub const EPIC_SLACK: f64 = 1e-10;

/// Evaluates the inequalities at `x` with `ρ = f(x)`; `f(x) ≤ ρ*` and
/// `ρ* < (λ₁+λ₂)/2` are required.
pub fn epic_check(p: &DenseProblem, x: &[f64], rho_star: f64) -> Result<EpicReport> {
    p.check_rho_star(rho_star)?;
    let xv = dvec(x);
    let rho = p.f(x);
    if rho > rho_star * (1.0 + 1e-14) {
        return Err(Error::Domain(format!("f(x) = {rho} exceeds the level {rho_star}")));
    }
    let (l1, l2, ln) = (p.lambda1(), p.lambda2(), p.lambdan());
    let u = dvec(p.u1());
    let mx = &p.m * &xv;
    let xm = xv.dot(&mx);
    let um = quad(&p.m, &u);
    let cos_m2 = u.dot(&mx).powi(2) / (xm * um);
    let au = &p.a * &u;
    let xa = quad(&p.a, &xv);
    let cos_a2 = xv.dot(&au).powi(2) / (xa * u.dot(&au));
    let mxs: Vec<f64> = mx.iter().copied().collect();
    let (cmin, cmax) = p.restricted_extremes(&mxs)?;
    let r = &p.a * &xv - &mx * rho;
    let rar = r.dot(&p.a_chol.solve(&r)) / xm;
    Ok(EpicReport {
        pair_alignment: Inequality::at_least(cos_m2.sqrt(), 1.0 - 2.0 * (rho - l1) / (l2 - l1), EPIC_SLACK),
        u1_alignment_m: Inequality::at_least(cos_m2, (l2 - rho) / (l2 - l1), EPIC_SLACK),
        u1_alignment_a: Inequality::at_least(cos_a2, (1.0 / rho - 1.0 / l2) / (1.0 / l1 - 1.0 / l2), EPIC_SLACK),
        complement_lower: Inequality::at_least(cmin, l1 + l2 - rho, EPIC_SLACK),
        complement_upper: Inequality::at_most(cmax, ln, EPIC_SLACK),
        residual: Inequality::at_most(rar, rho * (rho - l1) / l1, EPIC_SLACK),
    })
}

/// Pairwise form: `|x₁ᵀMx₂|/(‖x₁‖_M‖x₂‖_M) ≥ 1 − 2(ρ − λ₁)/(λ₂ − λ₁)` with
/// `ρ = max(f(x₁), f(x₂))`.
pub fn epic_pair_check(p: &DenseProblem, x1: &[f64], x2: &[f64]) -> Inequality {
    let (a, b) = (dvec(x1), dvec(x2));
    let rho = p.f(x1).max(p.f(x2));
    let c = a.dot(&(&p.m * &b)).abs() / (quad(&p.m, &a) * quad(&p.m, &b)).sqrt();
    Inequality::at_least(c, 1.0 - 2.0 * (rho - p.lambda1()) / (p.lambda2() - p.lambda1()), EPIC_SLACK)
}

/// CSV report of a measurement together with the convexity constants.
pub fn report_csv(q: &PreconQuality, c: Option<&ConvexityConstants>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{},mu_b,ell_b,c_x,rho_x", PreconQuality::CSV_HEADER);
    match c {
        Some(c) => {
            let _ = writeln!(s, "{},{:.12e},{:.12e},{:.12e},{:.12e}", q.csv_row(), c.mu_b, c.ell_b, c.c_x, c.rho_x);
        }
        None => {
            let _ = writeln!(s, "{},,,,", q.csv_row());
        }
    }
    s
}

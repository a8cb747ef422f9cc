//! Test oracles shared by the integration tests: random instances, dense
//! helpers built directly on nalgebra, and finite differences.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rap_core::{MatrixPencil, SpdMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// `QᵀDQ` with a random orthogonal `Q` and eigenvalues drawn from `[lo, hi]`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let q: DMatrix<f64> = g.qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.random_range(lo..hi)));
    let s: DMatrix<f64> = &q * d * q.transpose();
    (&s + s.transpose()) * 0.5
}

pub fn to_spd(d: &DMatrix<f64>) -> SpdMatrix {
    SpdMatrix::from_dense(d, 0.0).expect("symmetric positive definite")
}

pub fn pencil(a: &DMatrix<f64>, m: &DMatrix<f64>) -> MatrixPencil {
    MatrixPencil::new(to_spd(a), to_spd(m)).expect("pencil")
}

pub fn random_pencil(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, DMatrix<f64>, MatrixPencil) {
    let a = random_spd(rng, n, 1.0, 10.0);
    let m = random_spd(rng, n, 0.5, 2.0);
    let p = pencil(&a, &m);
    (a, m, p)
}

pub fn dv(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

pub fn rq(a: &DMatrix<f64>, m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let x = dv(x);
    x.dot(&(a * &x)) / x.dot(&(m * &x))
}

/// Generalized eigenvalues through `M^{-1/2} A M^{-1/2}` with the symmetric
/// square root, a different reduction from the library's Cholesky route.
pub fn oracle_eigenvalues(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let e = m.clone().symmetric_eigen();
    let inv_sqrt = &e.eigenvectors
        * DMatrix::from_diagonal(&e.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * e.eigenvectors.transpose();
    let c = &inv_sqrt * a * &inv_sqrt;
    let c = (&c + c.transpose()) * 0.5;
    let mut v: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

/// Eigenvector for the smallest eigenvalue, `M`-normalized.
pub fn oracle_u1(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let e = m.clone().symmetric_eigen();
    let inv_sqrt = &e.eigenvectors
        * DMatrix::from_diagonal(&e.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * e.eigenvectors.transpose();
    let c = &inv_sqrt * a * &inv_sqrt;
    let c = (&c + c.transpose()) * 0.5;
    let ce = c.symmetric_eigen();
    let k = ce.eigenvalues.imin();
    let u = &inv_sqrt * ce.eigenvectors.column(k);
    let s = u.dot(&(m * &u)).sqrt();
    (u / s).iter().copied().collect()
}

pub fn sym_sqrt(b: &DMatrix<f64>) -> DMatrix<f64> {
    let e = b.clone().symmetric_eigen();
    &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues.map(f64::sqrt)) * e.eigenvectors.transpose()
}

/// Central difference of `f` along `d`.
pub fn directional_fd(f: impl Fn(&[f64]) -> f64, x: &[f64], d: &[f64], h: f64) -> f64 {
    let p: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + h * b).collect();
    let q: Vec<f64> = x.iter().zip(d).map(|(a, b)| a - h * b).collect();
    (f(&p) - f(&q)) / (2.0 * h)
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `max (ρ_{m+1} − ρ_m)/|ρ_m|`, computed here rather than by the library.
pub fn max_relative_rise(seq: &[f64]) -> f64 {
    seq.windows(2).map(|w| (w[1] - w[0]) / w[0].abs()).fold(0.0, f64::max)
}

/// `A^{1/2}(I + δE)A^{1/2}`: a preconditioner whose quality is set by `δ`.
pub fn near_a(r: &mut ChaCha8Rng, a: &DMatrix<f64>, delta: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let s = sym_sqrt(a);
    let g = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
    let e = (&g + g.transpose()) * 0.5;
    let e = &e / e.norm();
    let b: DMatrix<f64> = &s * (DMatrix::identity(n, n) + e * delta) * &s;
    (&b + b.transpose()) * 0.5
}

/// Independent rejection sampler for `{f ≤ ρ*}`: random perturbations of
/// `u₁` with random sizes.
pub fn admissible_points(r: &mut ChaCha8Rng, a: &DMatrix<f64>, m: &DMatrix<f64>, rho_star: f64, k: usize) -> Vec<Vec<f64>> {
    let n = a.nrows();
    let u = oracle_u1(a, m);
    let mut out = Vec::new();
    let mut scale = 1.0;
    while out.len() < k {
        let g = gaussian_vec(r, n);
        let t = scale * r.random::<f64>();
        let x: Vec<f64> = u.iter().zip(&g).map(|(a, b)| a + t * b).collect();
        if rq(a, m, &x) <= rho_star {
            out.push(x);
            scale *= 1.05;
        } else {
            scale *= 0.9;
        }
    }
    out
}

/// Random unit-speed tangent direction at `x` on the `B`-sphere.
pub fn tangent(r: &mut ChaCha8Rng, b: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let x = dv(x);
    let v = dv(&gaussian_vec(r, x.len()));
    let bx = b * &x;
    let v = &v - &x * (v.dot(&bx) / x.dot(&bx));
    (v.clone() / v.dot(&(b * &v)).sqrt()).iter().copied().collect()
}

/// Least-squares slope of `log(ρ_m − λ₁)` against `m`.
pub fn log_gap_slope(rho: &[f64], l1: f64, floor: f64) -> f64 {
    let pts: Vec<(f64, f64)> =
        rho.iter().enumerate().filter(|(_, r)| **r - l1 > floor).map(|(m, r)| (m as f64, (r - l1).ln())).collect();
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}

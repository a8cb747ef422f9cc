use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::dense::dense_pencil_eig;
use crate::linalg::vector::{dot, DenseVector};

/// Relative size of the orthogonalized Krylov vector below which the space
/// is treated as invariant.
pub const INVARIANCE_RATIO: f64 = 1e-7;

/// Action `y = Op x` of a symmetric operator.
pub type Operator<'a> = &'a dyn Fn(&[f64], &mut [f64]);

#[derive(Clone, Debug)]
pub struct ExtremalEstimate {
    pub nu_min: f64,
    pub nu_max: f64,
    /// All Ritz values, ascending.
    pub ritz_values: Vec<f64>,
    /// Krylov dimension actually used.
    pub steps: usize,
    /// The Krylov space became invariant before `iters` steps.
    pub breakdown: bool,
}

/// Ritz estimates of the extremal eigenvalues of the pencil `(A, B)`, given
/// only the actions of `A` and `B⁻¹`, from a fixed pseudo-random start.
pub fn extremal_pencil_eigs(
    apply_a: Operator,
    apply_binv: Operator,
    n: usize,
    iters: usize,
) -> Result<ExtremalEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let start: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    extremal_pencil_eigs_from(apply_a, apply_binv, &start, iters)
}

/// Lanczos for `AB⁻¹` in the `B⁻¹` inner product, which has the spectrum
/// of the pencil `(A, B)` and needs only the actions of `A` and `B⁻¹`. Each
/// Lanczos vector `r` is paired with `z = B⁻¹r`, applied afresh every step
/// so the pairs never drift apart. The start is `start_hat = B x₀`. With
/// `Z = B⁻¹R` the Ritz values come from the projected pencil
/// `(ZᵀAZ, RᵀZ) = (ZᵀAZ, ZᵀBZ)`, i.e. Rayleigh–Ritz for `(A, B)` on the
/// Krylov space of `B⁻¹A` from `x₀`, so they lie inside `[ν_min, ν_max]`.
/// Full reorthogonalization.
pub fn extremal_pencil_eigs_from(
    apply_a: Operator,
    apply_binv: Operator,
    start_hat: &[f64],
    iters: usize,
) -> Result<ExtremalEstimate> {
    let n = start_hat.len();
    if iters == 0 || n == 0 {
        return Err(Error::Usage("Lanczos needs a nonempty space and at least one step".into()));
    }
    let mut z = vec![0.0; n];
    apply_binv(start_hat, &mut z);
    let e = dot(&z, start_hat);
    if !(e > 0.0) {
        return Err(Error::Estimation("start vector has no positive B-norm".into()));
    }
    let e = e.sqrt();
    let mut zs: Vec<DenseVector> = vec![z.iter().map(|v| v / e).collect()];
    let mut rs: Vec<DenseVector> = vec![start_hat.iter().map(|v| v / e).collect()];
    let mut azs: Vec<DenseVector> = Vec::new();
    let mut breakdown = false;
    loop {
        let j = azs.len();
        let mut az = vec![0.0; n];
        apply_a(&zs[j], &mut az);
        let mut r = az.clone();
        azs.push(az);
        if azs.len() == iters.min(n) {
            break;
        }
        // Squared B⁻¹-norm of the removed part, for the cancellation test.
        let mut removed = 0.0;
        for pass in 0..2 {
            for (ri, zi) in rs.iter().zip(&zs) {
                let c = dot(&r, zi);
                if pass == 0 {
                    removed += c * c;
                }
                for (a, b) in r.iter_mut().zip(ri) {
                    *a -= c * b;
                }
            }
        }
        let mut z = vec![0.0; n];
        apply_binv(&r, &mut z);
        let b2 = dot(&r, &z);
        // Past this much cancellation the new direction is mostly rounding;
        // the Ritz values are then already accurate to about the square of
        // the ratio.
        if !(b2 > INVARIANCE_RATIO * INVARIANCE_RATIO * (removed + b2.max(0.0))) {
            breakdown = true;
            break;
        }
        let b = b2.sqrt();
        rs.push(r.iter().map(|v| v / b).collect());
        zs.push(z.iter().map(|v| v / b).collect());
    }
    let k = azs.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    let mut g = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let tij = 0.5 * (dot(&zs[i], &azs[j]) + dot(&zs[j], &azs[i]));
            let gij = 0.5 * (dot(&rs[i], &zs[j]) + dot(&rs[j], &zs[i]));
            t[(i, j)] = tij;
            t[(j, i)] = tij;
            g[(i, j)] = gij;
            g[(j, i)] = gij;
        }
    }
    let eig = dense_pencil_eig(&t, &g)?;
    Ok(ExtremalEstimate {
        nu_min: eig.values[0],
        nu_max: eig.values[k - 1],
        ritz_values: eig.values,
        steps: k,
        breakdown,
    })
}

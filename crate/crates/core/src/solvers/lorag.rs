use crate::error::{check_dim, Result};
use crate::linalg::vector::{dot, DenseVector};
use crate::linalg::{rayleigh_ritz, MatrixPencil};
use crate::solvers::{accept_step, stopping_check, AccelCoefficients, ConvergenceHistory, SolverConfig, StopDecision};
use crate::sphere::{exp_map, log_map, project_tangent, SpherePoint, TangentVector};

/// Objective on the unit sphere for the accelerated loop.
pub trait SphereObjective {
    fn value(&self, x: &[f64]) -> f64;

    /// Euclidean gradient; the loop projects it onto the tangent space.
    fn gradient(&self, x: &[f64]) -> DenseVector;

    /// Minimizer of the objective over the unit vectors of `span(basis)`.
    fn subspace_min(&self, basis: &[&[f64]]) -> Result<DenseVector>;
}

/// The Rayleigh quotient of a pencil restricted to the unit sphere.
pub struct RayleighObjective<'a> {
    pub pencil: &'a MatrixPencil,
}

impl SphereObjective for RayleighObjective<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.pencil.a().quad(x) / self.pencil.m().quad(x)
    }

    fn gradient(&self, x: &[f64]) -> DenseVector {
        let ax = self.pencil.a().mul(x);
        let mx = self.pencil.m().mul(x);
        let xmx = dot(x, &mx);
        let f = dot(x, &ax) / xmx;
        crate::linalg::pencil::gradient_from_products(&ax, &mx, f, xmx)
    }

    fn subspace_min(&self, basis: &[&[f64]]) -> Result<DenseVector> {
        Ok(rayleigh_ritz(basis, self.pencil)?.vector)
    }
}

pub fn lorag_solve(
    obj: &dyn SphereObjective,
    coeffs: &AccelCoefficients,
    x0: &SpherePoint,
    cfg: &SolverConfig,
) -> Result<(f64, SpherePoint, ConvergenceHistory)> {
    lorag_solve_observed(obj, coeffs, x0, cfg, &mut |_, _, _| {})
}

/// Locally optimal Riemannian accelerated gradient on the unit sphere.
/// The observer sees `(m + 1, x_{m+1}, v_{m+1})` after every iteration.
pub fn lorag_solve_observed(
    obj: &dyn SphereObjective,
    coeffs: &AccelCoefficients,
    x0: &SpherePoint,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(usize, &SpherePoint, &SpherePoint),
) -> Result<(f64, SpherePoint, ConvergenceHistory)> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let c1 = coeffs.c1();
    let v_weight = (1.0 - coeffs.alpha) / (1.0 + coeffs.beta);
    let g_weight = coeffs.alpha / coeffs.gamma_bar;

    let mut x = x0.clone();
    let mut v = x0.clone();
    let mut fx = obj.value(x.coords());
    let mut hist = ConvergenceHistory { reference_lambda: cfg.reference_lambda, ..Default::default() };
    let push = |hist: &mut ConvergenceHistory, f: f64| {
        hist.rayleigh_values.push(f);
        hist.elapsed_ms.push(start.elapsed().as_secs_f64() * 1e3);
    };
    push(&mut hist, fx);
    let grad_at = |p: &SpherePoint| -> Result<TangentVector> { project_tangent(p, &obj.gradient(p.coords())) };
    let mut converged = stopping_check(fx, cfg, Some(grad_at(&x)?.norm())) == StopDecision::Converged;
    let mut it = 0;
    while !converged && it < cfg.max_iter {
        let y = exp_map(&x, &log_map(&x, &v)?.scaled(c1))?;
        let grad = grad_at(&y)?;
        let to_x = log_map(&y, &x)?;
        let mut xn = obj.subspace_min(&[y.coords(), &grad.dir, &to_x.dir])?;
        if dot(&xn, x.coords()) < 0.0 {
            xn.iter_mut().for_each(|c| *c = -*c);
        }
        check_dim(x.dim(), xn.len())?;
        let xn = SpherePoint::new(xn)?;
        let step = log_map(&y, &v)?.lincomb(v_weight, &grad, -g_weight)?;
        v = exp_map(&y, &step)?;
        let fxn = obj.value(xn.coords());
        if accept_step(fxn, fx) {
            x = xn;
            fx = fxn;
        }
        it += 1;
        push(&mut hist, fx);
        observer(it, &x, &v);
        let gnorm = if cfg.reference_lambda.is_none() { grad_at(&x)?.norm() } else { f64::INFINITY };
        converged = stopping_check(fx, cfg, Some(gnorm)) == StopDecision::Converged;
    }
    hist.iterations = it;
    hist.converged = converged;
    hist.wall_time = start.elapsed();
    Ok((fx, x, hist))
}

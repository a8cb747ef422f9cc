use crate::error::{check_dim, Error, Result};
use crate::linalg::vector::DenseVector;
use crate::linalg::{rayleigh_ritz, MatrixPencil};
use crate::precond::{MassInverse, Preconditioner};
use crate::solvers::{accept_step, AccelCoefficients, PointEval, Recorder, SolveOutcome, SolverConfig, StopDecision, VUpdateForm};
use crate::sphere::{geodesic_combination, normalize_in_place, PairedVector};

/// `B`-norm of `v − ⟨x, v⟩_B x` below which `x` and `v` count as parallel
/// and the step falls back to a plain gradient step.
pub const DEGENERATE_ANGLE_NORM: f64 = 1e-14;

/// Snapshot handed to observers after every iteration.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub iteration: usize,
    /// `x_{m+1}`
    pub x: PairedVector,
    /// `v_{m+1}`
    pub v: PairedVector,
    /// `y_m`
    pub y: PairedVector,
    /// Euclidean gradient at `y_m`.
    pub ghat: DenseVector,
    /// `B⁻¹ ĝ`
    pub g: DenseVector,
    /// Angle from `x_m` to `y_m`.
    pub theta: f64,
    pub rho: f64,
    pub degenerate: bool,
}

pub fn rap_solve(
    p: &MatrixPencil,
    pc: &dyn Preconditioner,
    coeffs: &AccelCoefficients,
    x0hat: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    rap_solve_observed(p, pc, coeffs, x0hat, cfg, &mut |_| {})
}

/// RAP with `B = M`.
pub fn ra_solve(p: &MatrixPencil, coeffs: &AccelCoefficients, x0hat: &[f64], cfg: &SolverConfig) -> Result<SolveOutcome> {
    let pc = MassInverse::new(p)?;
    rap_solve(p, &pc, coeffs, x0hat, cfg)
}

fn breakdown(iteration: usize, reason: impl Into<String>, last: &PairedVector) -> Error {
    Error::Breakdown { iteration, reason: reason.into(), last_iterate: Some(Box::new(last.clone())) }
}

/// Unit direction of the `B`-orthogonal part of `v` against the unit `base`,
/// and the angle from `base` to `v`. `None` when `v ∥ base`.
fn direction_and_angle(base: &PairedVector, v: &PairedVector) -> Option<(PairedVector, f64)> {
    let d = base.binner(v);
    let mut w = v.lincomb(1.0, base, -d);
    let wn = w.bnorm2().max(0.0).sqrt();
    if wn < DEGENERATE_ANGLE_NORM {
        return None;
    }
    w.scale(1.0 / wn);
    // Same as the clamped arccos of d, without its loss of accuracy near 0.
    Some((w, wn.atan2(d)))
}

/// Preconditioned Riemannian acceleration on the `B`-sphere. Every point
/// carries its co-iterate, so `B` is only ever applied through `pc`.
pub fn rap_solve_observed(
    p: &MatrixPencil,
    pc: &dyn Preconditioner,
    coeffs: &AccelCoefficients,
    x0hat: &[f64],
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&IterateState),
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let n = p.n();
    check_dim(n, pc.dim())?;
    check_dim(n, x0hat.len())?;
    let (c1, c2, c3) = (coeffs.c1(), coeffs.c2(), coeffs.c3());

    let mut x = PairedVector::new(pc.apply(x0hat), x0hat.to_vec())?;
    normalize_in_place(&mut x).map_err(|e| breakdown(0, e.to_string(), &x))?;
    let mut v = x.clone();
    let mut rec = Recorder::new(p, cfg);
    let mut ev = PointEval::at(p, &x.x)?;
    let mut converged = rec.record(&ev)? == StopDecision::Converged;
    let mut iterations = 0;

    while !converged && iterations < cfg.max_iter {
        let m = iterations;
        // With x ∥ v the angle is zero and the step reduces to a gradient step.
        let (y, theta, degenerate) = match direction_and_angle(&x, &v) {
            Some((w, angle)) => {
                let theta = c1 * angle;
                let mut y = geodesic_combination(&x, &w, theta);
                normalize_in_place(&mut y).map_err(|e| breakdown(m, e.to_string(), &x))?;
                (y, theta, false)
            }
            None => (x.clone(), 0.0, true),
        };

        let ey = if degenerate { None } else { Some(PointEval::at(p, &y.x)?) };
        let ghat = match &ey {
            Some(e) => e.gradient(),
            None => ev.gradient(),
        };
        let g = PairedVector::new(pc.apply(&ghat), ghat)?;

        // Momentum update.
        let mut q = g.clone();
        q.scale(-c3);
        if !degenerate {
            if let Some((pdir, phi)) = direction_and_angle(&y, &v) {
                let weight = match cfg.v_update {
                    VUpdateForm::Angle => c2 * theta,
                    VUpdateForm::LogMap => (1.0 - coeffs.alpha) / (1.0 + coeffs.beta) * phi,
                };
                q.axpy(weight, &pdir);
            }
        }
        let qn = q.bnorm2();
        if !(qn >= 0.0) || !qn.is_finite() {
            return Err(breakdown(m, format!("search direction has B-norm² {qn:e}"), &x));
        }
        let qn = qn.sqrt();
        v = if qn > 0.0 {
            q.scale(1.0 / qn);
            geodesic_combination(&y, &q, qn)
        } else {
            y.clone()
        };
        normalize_in_place(&mut v).map_err(|e| breakdown(m, e.to_string(), &x))?;

        // Locally optimal step over span{x, y, g}.
        let ritz = if degenerate {
            rayleigh_ritz(&[&x.x, &g.x], p)?
        } else {
            rayleigh_ritz(&[&x.x, &y.x, &g.x], p)?
        };
        let parts: Vec<&PairedVector> = if degenerate { vec![&x, &g] } else { vec![&x, &y, &g] };
        let mut xn = PairedVector::combine(&ritz.coeffs, &parts);
        if xn.binner(&x) < 0.0 {
            xn.negate();
        }
        normalize_in_place(&mut xn).map_err(|e| breakdown(m, e.to_string(), &x))?;
        let evn = PointEval::at(p, &xn.x)?;
        // The subspace contains x, so a larger value can only be rounding;
        // rises of a few ulps are kept so the vector can still improve.
        if accept_step(evn.rho, ev.rho) {
            x = xn;
            ev = evn;
        }
        iterations += 1;
        converged = rec.record(&ev)? == StopDecision::Converged;
        observer(&IterateState {
            iteration: iterations,
            x: x.clone(),
            v: v.clone(),
            y,
            ghat: g.xhat,
            g: g.x,
            theta,
            rho: ev.rho,
            degenerate,
        });
    }

    let lambda = ev.rho;
    let scale = 1.0 / ev.xmx.sqrt();
    let xm = x.x.iter().map(|c| c * scale).collect();
    Ok(SolveOutcome { lambda, x: xm, paired: Some(x), history: rec.finish(iterations, converged) })
}

use crate::error::{check_dim, Result};
use crate::linalg::vector::{dot, scale};
use crate::linalg::{rayleigh_ritz, MatrixPencil};
use crate::precond::{MassInverse, Preconditioner};
use crate::solvers::{accept_step, PointEval, Recorder, SolveOutcome, SolverConfig, StopDecision};

/// Preconditioned steepest descent: Rayleigh–Ritz on `span{x, B⁻¹(Ax − ρMx)}`.
/// The start is `x₀ = B⁻¹ x̂₀`, as for the accelerated solver.
pub fn psd_solve(
    p: &MatrixPencil,
    pc: &dyn Preconditioner,
    x0hat: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_dim(p.n(), pc.dim())?;
    check_dim(p.n(), x0hat.len())?;
    let mut x = pc.apply(x0hat);
    let mut ev = PointEval::at(p, &x)?;
    let s = 1.0 / ev.xmx.sqrt();
    scale(s, &mut x);
    ev.rescale(s);
    let mut rec = Recorder::new(p, cfg);
    let mut converged = rec.record(&ev)? == StopDecision::Converged;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iter {
        let g = pc.apply(&ev.residual());
        let ritz = rayleigh_ritz(&[&x, &g], p)?;
        let mut xn = ritz.vector;
        if dot(&xn, &ev.mx) < 0.0 {
            scale(-1.0, &mut xn);
        }
        let mut evn = PointEval::at(p, &xn)?;
        let s = 1.0 / evn.xmx.sqrt();
        scale(s, &mut xn);
        evn.rescale(s);
        if accept_step(evn.rho, ev.rho) {
            x = xn;
            ev = evn;
        }
        iterations += 1;
        converged = rec.record(&ev)? == StopDecision::Converged;
    }
    Ok(SolveOutcome { lambda: ev.rho, x, paired: None, history: rec.finish(iterations, converged) })
}

/// Steepest descent in the `M` metric, i.e. PSD with `B = M`.
pub fn sd_solve(p: &MatrixPencil, x0hat: &[f64], cfg: &SolverConfig) -> Result<SolveOutcome> {
    let pc = MassInverse::new(p)?;
    psd_solve(p, &pc, x0hat, cfg)
}

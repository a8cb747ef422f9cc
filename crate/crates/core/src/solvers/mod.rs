//! Eigensolvers: the accelerated methods and their steepest-descent baselines.

mod lorag;
mod psd;
mod rap;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::vector::{dot, DenseVector};
use crate::linalg::MatrixPencil;
use crate::sphere::PairedVector;

pub use lorag::{lorag_solve, lorag_solve_observed, RayleighObjective, SphereObjective};
pub use psd::{psd_solve, sd_solve};
pub use rap::{ra_solve, rap_solve, rap_solve_observed, IterateState, DEGENERATE_ANGLE_NORM};

/// Step sizes of the accelerated recurrence for a given `(μ, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AccelCoefficients {
    pub mu: f64,
    pub ell: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_bar: f64,
}

impl AccelCoefficients {
    /// Weight of `v` in the `y` update, `α/(α+β+1)`.
    pub fn c1(&self) -> f64 {
        self.alpha / (self.alpha + self.beta + 1.0)
    }

    /// `(1−α)/α`
    pub fn c2(&self) -> f64 {
        (1.0 - self.alpha) / self.alpha
    }

    /// Gradient step `α/((1+β)γ) = α/γ̄`.
    pub fn c3(&self) -> f64 {
        self.alpha / self.gamma_bar
    }
}

/// `β = 3/(2√κ − 4)`, `α = (√(β² + 4(1+β)/κ) − β)/2`, `γ = αμ/(α+β)`,
/// `γ̄ = (1+β)γ`. Requires `κ = L/μ ≥ 9`.
pub fn compute_coefficients(mu: f64, ell: f64) -> Result<AccelCoefficients> {
    if !(mu > 0.0) || !(ell >= mu) || !ell.is_finite() {
        return Err(Error::Coefficients(format!("need 0 < mu <= L, got mu = {mu}, L = {ell}")));
    }
    let kappa = ell / mu;
    if kappa < 9.0 {
        return Err(Error::Coefficients(format!(
            "the closed-form coefficients need L/mu >= 9, got {kappa}"
        )));
    }
    let beta = 3.0 / (2.0 * kappa.sqrt() - 4.0);
    let alpha = ((beta * beta + 4.0 * (1.0 + beta) / kappa).sqrt() - beta) / 2.0;
    let gamma = alpha * mu / (alpha + beta);
    Ok(AccelCoefficients { mu, ell, kappa, alpha, beta, gamma, gamma_bar: (1.0 + beta) * gamma })
}

/// Which form of the momentum (`v`) update RAP uses. The two agree in exact
/// arithmetic because `y` lies on the geodesic from `x` to `v`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum VUpdateForm {
    /// `((1−α)θ/α)·p`, with `θ` the `x`-to-`y` angle and `p` the unit
    /// direction from `y` towards `v`.
    #[default]
    Angle,
    /// `((1−α)/(1+β))·log_y(v)`.
    LogMap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative eigenvalue tolerance against `reference_lambda`.
    pub tol: f64,
    pub max_iter: usize,
    pub reference_lambda: Option<f64>,
    pub record_residuals: bool,
    /// Used when no reference is known: stop once `‖Ax − ρMx‖_{M⁻¹} ≤
    /// residual_tol·ρ` for `M`-unit `x`. Zero disables it.
    pub residual_tol: f64,
    pub v_update: VUpdateForm,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20000,
            reference_lambda: None,
            record_residuals: false,
            residual_tol: 1e-8,
            v_update: VUpdateForm::Angle,
        }
    }
}

impl SolverConfig {
    pub fn with_reference(reference: f64, tol: f64, max_iter: usize) -> Self {
        Self { tol, max_iter, reference_lambda: Some(reference), ..Self::default() }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) && self.reference_lambda.is_some() {
            return Err(Error::Usage("tolerance must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Usage("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    fn needs_residual(&self) -> bool {
        self.reference_lambda.is_none() && self.residual_tol > 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Converged,
    Continue,
}

/// `ρ − λ_ref ≤ tol·λ_ref` when a reference is known, otherwise the residual
/// criterion of the config.
pub fn stopping_check(rho: f64, cfg: &SolverConfig, residual: Option<f64>) -> StopDecision {
    match (cfg.reference_lambda, residual) {
        (Some(l), _) => {
            if rho - l <= cfg.tol * l {
                StopDecision::Converged
            } else {
                StopDecision::Continue
            }
        }
        (None, Some(r)) if cfg.residual_tol > 0.0 && r <= cfg.residual_tol * rho.abs() => StopDecision::Converged,
        _ => StopDecision::Continue,
    }
}

/// Rise in the Rayleigh quotient, relative, that a new iterate may show and
/// still be accepted. Once `ρ` has converged to rounding, the subspace step
/// keeps improving the vector while `ρ` only jitters in its last bits.
pub const ACCEPT_RISE: f64 = 8.0 * f64::EPSILON;

pub(crate) fn accept_step(new: f64, old: f64) -> bool {
    new <= old + ACCEPT_RISE * old.abs()
}

/// Per-iteration record of a solver run. Entry 0 is the starting point.
#[derive(Clone, Debug, Default)]
pub struct ConvergenceHistory {
    pub rayleigh_values: Vec<f64>,
    pub residual_norms: Option<Vec<f64>>,
    pub elapsed_ms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: Duration,
    pub reference_lambda: Option<f64>,
}

impl ConvergenceHistory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,rayleigh,gap,residual,elapsed_ms\n");
        for (k, rho) in self.rayleigh_values.iter().enumerate() {
            let gap = self.reference_lambda.map(|l| format!("{:.6e}", rho - l)).unwrap_or_default();
            let res = self
                .residual_norms
                .as_ref()
                .and_then(|r| r.get(k))
                .map(|r| format!("{r:.6e}"))
                .unwrap_or_default();
            let _ = writeln!(s, "{k},{rho:.17e},{gap},{res},{:.3}", self.elapsed_ms[k]);
        }
        s
    }

    /// Largest relative increase `(ρ_{m+1} − ρ_m)/|ρ_m|` over the run, 0 when
    /// the sequence never increases.
    pub fn max_relative_increase(&self) -> f64 {
        self.rayleigh_values
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0].abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub lambda: f64,
    /// Final iterate, `M`-normalized.
    pub x: DenseVector,
    /// Final `B`-sphere point with co-iterate, for the methods that carry one.
    pub paired: Option<PairedVector>,
    pub history: ConvergenceHistory,
}

/// Bookkeeping shared by the solver loops.
pub(crate) struct Recorder<'a> {
    p: &'a MatrixPencil,
    cfg: &'a SolverConfig,
    start: Instant,
    hist: ConvergenceHistory,
}

/// Rayleigh quotient, residual and products at one point.
pub(crate) struct PointEval {
    pub rho: f64,
    pub ax: DenseVector,
    pub mx: DenseVector,
    pub xmx: f64,
}

impl PointEval {
    pub fn at(p: &MatrixPencil, x: &[f64]) -> Result<Self> {
        let ax = p.a().mul(x);
        let mx = p.m().mul(x);
        let xmx = dot(x, &mx);
        if !(xmx > 0.0) || !xmx.is_finite() {
            return Err(Error::Domain("iterate has lost its M-norm".into()));
        }
        Ok(Self { rho: dot(x, &ax) / xmx, ax, mx, xmx })
    }

    /// Products of `s·x`.
    pub fn rescale(&mut self, s: f64) {
        crate::linalg::vector::scale(s, &mut self.ax);
        crate::linalg::vector::scale(s, &mut self.mx);
        self.xmx *= s * s;
    }

    /// `Ax − ρMx`
    pub fn residual(&self) -> DenseVector {
        self.ax.iter().zip(&self.mx).map(|(a, m)| a - self.rho * m).collect()
    }

    /// `2(Ax − ρMx)/xᵀMx`
    pub fn gradient(&self) -> DenseVector {
        crate::linalg::pencil::gradient_from_products(&self.ax, &self.mx, self.rho, self.xmx)
    }
}

impl<'a> Recorder<'a> {
    pub fn new(p: &'a MatrixPencil, cfg: &'a SolverConfig) -> Self {
        let hist = ConvergenceHistory {
            residual_norms: cfg.record_residuals.then(Vec::new),
            reference_lambda: cfg.reference_lambda,
            ..ConvergenceHistory::default()
        };
        Self { p, cfg, start: Instant::now(), hist }
    }

    /// Records a point and reports whether the run may stop there.
    pub fn record(&mut self, ev: &PointEval) -> Result<StopDecision> {
        self.hist.rayleigh_values.push(ev.rho);
        self.hist.elapsed_ms.push(self.start.elapsed().as_secs_f64() * 1e3);
        let need_res = self.cfg.needs_residual();
        if self.cfg.record_residuals || need_res {
            let r = ev.residual();
            let scale = 1.0 / ev.xmx.sqrt();
            if let Some(v) = self.hist.residual_norms.as_mut() {
                v.push(crate::linalg::vector::norm(&r) * scale);
            }
            if need_res {
                let mut z = r.clone();
                self.p.mass_factor()?.solve_in_place(&mut z);
                let res = dot(&r, &z).max(0.0).sqrt() * scale;
                return Ok(stopping_check(ev.rho, self.cfg, Some(res)));
            }
        }
        Ok(stopping_check(ev.rho, self.cfg, None))
    }

    pub fn finish(mut self, iterations: usize, converged: bool) -> ConvergenceHistory {
        self.hist.iterations = iterations;
        self.hist.converged = converged;
        self.hist.wall_time = self.start.elapsed();
        self.hist
    }
}

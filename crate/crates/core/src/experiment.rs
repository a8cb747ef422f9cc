//! The unit-square Laplacian benchmark grid: for each fine mesh size and
//! solver, iterations to `ρ − λʰ ≤ tol·λʰ` from the coarse-eigenvector start.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{assemble_laplacian_p1, build_mesh_hierarchy, level_of, Coefficient, MeshHierarchy};
use crate::linalg::vector::{dot, norm, scale};
use crate::linalg::{dense_generalized_eig, extremal_pencil_eigs_from, rayleigh_ritz, MatrixPencil};
use crate::precond::{
    build_two_level_overlapping, coarse_eigen_initial, coarse_pencil, MassInverse, Preconditioner,
    SchwarzDecomposition,
};
use crate::solvers::{compute_coefficients, psd_solve, ra_solve, rap_solve, sd_solve, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SolverKind {
    Rap,
    Psd,
    Ra,
    Sd,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::Rap, SolverKind::Psd, SolverKind::Ra, SolverKind::Sd];

    /// Uses the Schwarz preconditioner rather than `B = M`.
    pub fn is_preconditioned(self) -> bool {
        matches!(self, SolverKind::Rap | SolverKind::Psd)
    }

    pub fn is_accelerated(self) -> bool {
        matches!(self, SolverKind::Rap | SolverKind::Ra)
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Rap => "rap",
            SolverKind::Psd => "psd",
            SolverKind::Ra => "ra",
            SolverKind::Sd => "sd",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rap" => Ok(SolverKind::Rap),
            "psd" => Ok(SolverKind::Psd),
            "ra" => Ok(SolverKind::Ra),
            "sd" => Ok(SolverKind::Sd),
            other => Err(Error::Usage(format!("unknown solver '{other}', expected one of rap, psd, ra, sd"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub solvers: Vec<SolverKind>,
    pub coarse_h: f64,
    pub h_list: Vec<f64>,
    pub overlap: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Recorded with the results; the benchmark itself is deterministic.
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Overrides of the automatic `(μ, L)`.
    pub mu: Option<f64>,
    pub ell: Option<f64>,
    /// Upper bound on concurrently running cells; 0 picks the core count.
    pub workers: usize,
    /// Write measured times into the `seconds` column. Off, the column holds
    /// `-` and the CSV depends only on the spec.
    pub timing: bool,
    /// Cells whose estimated factor storage exceeds this many bytes are
    /// reported as failed instead of being attempted.
    pub memory_limit: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            solvers: SolverKind::ALL.to_vec(),
            coarse_h: 0.25,
            h_list: (3..=7).map(|k| 0.5f64.powi(k)).collect(),
            overlap: 0.5,
            tol: 1e-10,
            max_iter: 20000,
            seed: 42,
            output: None,
            mu: None,
            ell: None,
            workers: 0,
            timing: true,
            memory_limit: 4 << 30,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(Error::Usage("no solver selected".into()));
        }
        if self.h_list.is_empty() {
            return Err(Error::Usage("no fine mesh size given".into()));
        }
        let lc = level_of(self.coarse_h)
            .map_err(|_| Error::Usage(format!("coarse size {} is not a reciprocal power of two", self.coarse_h)))?;
        let pre = self.solvers.iter().any(|s| s.is_preconditioned());
        for &h in &self.h_list {
            let l = level_of(h).map_err(|_| Error::Usage(format!("fine size {h} is not a reciprocal power of two")))?;
            if l < lc || (pre && l == lc) {
                return Err(Error::Usage(format!(
                    "fine size {h} must be smaller than the coarse size {}",
                    self.coarse_h
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::Usage(format!("overlap must lie in [0, 1], got {}", self.overlap)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Usage(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Usage("max-iter must be at least 1".into()));
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0) {
                return Err(Error::Usage(format!("mu must be positive, got {mu}")));
            }
        }
        if let (Some(mu), Some(l)) = (self.mu, self.ell) {
            if l < 9.0 * mu {
                return Err(Error::Usage(format!("L/mu must be at least 9, got {}", l / mu)));
            }
        }
        Ok(())
    }
}

/// Step-size parameters of one accelerated run with the estimates behind them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParameterChoice {
    pub mu: f64,
    pub ell: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambdan: f64,
    pub sigma: f64,
}

/// Lanczos steps behind every estimate of the parameter policy.
pub const POLICY_LANCZOS_STEPS: usize = 10;

/// Automatic `(μ, L)` from the leading terms of the convexity and smoothness
/// constants at `ρ_X = λ₁`:
///
/// `μ = 2ν_min λ₁ (1 − λ₁/λ₂)/σ`, `L = 2ν_max λ₁ (1 − λ₁/λ_n)/σ`,
///
/// with `ν` from Lanczos on `(A, B)`, `λ₁, λ_n` from Lanczos on `(A, M)`,
/// both started at `x₀ = B⁻¹x̂₀`, `σ = f_B(x₀)`, and `λ₂` supplied (the
/// second coarse eigenvalue) or else the second Ritz value. `L` is raised
/// to `9μ` when needed.
pub fn select_parameters(
    p: &MatrixPencil,
    pc: &dyn Preconditioner,
    x0hat: &[f64],
    lambda2: Option<f64>,
) -> Result<ParameterChoice> {
    let apply_a = |x: &[f64], y: &mut [f64]| p.a().mul_into(x, y);
    let apply_b = |x: &[f64], y: &mut [f64]| pc.apply_into(x, y);
    let nu = extremal_pencil_eigs_from(&apply_a, &apply_b, x0hat, POLICY_LANCZOS_STEPS)?;
    let minv = MassInverse::new(p)?;
    let apply_m = |x: &[f64], y: &mut [f64]| minv.apply_into(x, y);
    let lam = extremal_pencil_eigs_from(&apply_a, &apply_m, x0hat, POLICY_LANCZOS_STEPS)?;
    let x0 = pc.apply(x0hat);
    let sigma = p.a().quad(&x0) / dot(&x0, x0hat);
    let lambda1 = lam.nu_min;
    let lambdan = lam.nu_max;
    let lambda2 = match lambda2 {
        Some(l) => l,
        None => *lam
            .ritz_values
            .get(1)
            .ok_or_else(|| Error::Estimation("need two Ritz values to estimate λ₂".into()))?,
    };
    if !(lambda2 > lambda1) {
        return Err(Error::Estimation(format!("estimated λ₂ = {lambda2} does not exceed λ₁ = {lambda1}")));
    }
    let mu = 2.0 * nu.nu_min * lambda1 * (1.0 - lambda1 / lambda2) / sigma;
    let ell = 2.0 * nu.nu_max * lambda1 * (1.0 - lambda1 / lambdan) / sigma;
    Ok(ParameterChoice {
        mu,
        ell: ell.max(9.0 * mu),
        nu_min: nu.nu_min,
        nu_max: nu.nu_max,
        lambda1,
        lambda2,
        lambdan,
        sigma,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ReferenceSource {
    Dense,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceEigenvalue {
    pub lambda: f64,
    pub source: ReferenceSource,
}

/// Largest problem solved densely for the reference value.
pub const DENSE_REFERENCE_LIMIT: usize = 1000;
/// Relative disagreement between the two iterative estimates that aborts a cell.
pub const REFERENCE_AGREEMENT: f64 = 1e-11;

/// `λ₁` of the pencil to benchmark precision: dense up to
/// [`DENSE_REFERENCE_LIMIT`] unknowns, otherwise a long preconditioned
/// steepest descent run cross-checked by `M`-inner Lanczos from its result.
pub fn reference_eigenvalue(
    p: &MatrixPencil,
    pc: &dyn Preconditioner,
    x0hat: &[f64],
) -> Result<ReferenceEigenvalue> {
    if p.n() <= DENSE_REFERENCE_LIMIT {
        let e = dense_generalized_eig(p)?;
        return Ok(ReferenceEigenvalue { lambda: e.values[0], source: ReferenceSource::Dense });
    }
    let (rho, x) = polish_psd(p, pc, x0hat, 1e-13, 2000)?;
    let minv = MassInverse::new(p)?;
    let apply_a = |v: &[f64], y: &mut [f64]| p.a().mul_into(v, y);
    let apply_m = |v: &[f64], y: &mut [f64]| minv.apply_into(v, y);
    let lz = extremal_pencil_eigs_from(&apply_a, &apply_m, &p.m().mul(&x), 20)?;
    if (rho - lz.nu_min).abs() > REFERENCE_AGREEMENT * rho {
        return Err(Error::Estimation(format!(
            "reference estimates disagree: descent {rho:.15e}, Lanczos {:.15e}",
            lz.nu_min
        )));
    }
    Ok(ReferenceEigenvalue { lambda: rho.min(lz.nu_min), source: ReferenceSource::Iterative })
}

/// Preconditioned steepest descent until the relative residual
/// `‖Ax − ρMx‖/(ρ‖Mx‖)` reaches `res_tol` or `ρ` stops decreasing.
fn polish_psd(
    p: &MatrixPencil,
    pc: &dyn Preconditioner,
    x0hat: &[f64],
    res_tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut x = pc.apply(x0hat);
    let mut rho = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..max_iter {
        let ax = p.a().mul(&x);
        let mx = p.m().mul(&x);
        let r_rho = dot(&x, &ax) / dot(&x, &mx);
        if r_rho < rho * (1.0 - 1e-15) {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 5 {
                break;
            }
        }
        rho = rho.min(r_rho);
        let r: Vec<f64> = ax.iter().zip(&mx).map(|(a, m)| a - r_rho * m).collect();
        if norm(&r) <= res_tol * r_rho * norm(&mx) {
            break;
        }
        let g = pc.apply(&r);
        let ritz = rayleigh_ritz(&[&x, &g], p)?;
        if ritz.value <= r_rho {
            x = ritz.vector;
            let s = 1.0 / norm(&x);
            scale(s, &mut x);
        }
    }
    let final_rho = p.a().quad(&x) / p.m().quad(&x);
    Ok((final_rho.min(rho), x))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CellOutcome {
    Finished {
        iterations: usize,
        converged: bool,
        lambda: f64,
        gap: f64,
        seconds: f64,
        params: Option<ParameterChoice>,
    },
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub solver: SolverKind,
    pub h: f64,
    pub coarse_h: f64,
    pub overlap: f64,
    pub reference: Option<ReferenceEigenvalue>,
    pub outcome: CellOutcome,
}

impl CellResult {
    pub fn iterations(&self) -> Option<usize> {
        match self.outcome {
            CellOutcome::Finished { iterations, .. } => Some(iterations),
            CellOutcome::Failed(_) => None,
        }
    }

    pub fn converged(&self) -> bool {
        matches!(self.outcome, CellOutcome::Finished { converged: true, .. })
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.outcome {
            CellOutcome::Finished { lambda, .. } => Some(lambda),
            CellOutcome::Failed(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchResults {
    pub spec: BenchSpec,
    /// Ordered like the `BenchSpec` lists: solvers outer, mesh sizes inner.
    pub cells: Vec<CellResult>,
}

/// Marker for a run that hit the iteration cap.
pub const NOT_CONVERGED: &str = "×";

impl BenchResults {
    pub fn get(&self, solver: SolverKind, h: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.solver == solver && c.h == h)
    }

    pub fn iterations_row(&self, solver: SolverKind) -> Vec<Option<usize>> {
        self.spec.h_list.iter().map(|&h| self.get(solver, h).and_then(CellResult::iterations)).collect()
    }

    pub const CSV_HEADER: &'static str = "solver,h,H,overlap,iters,converged,lambda,gap,seconds";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for c in &self.cells {
            let _ = write!(s, "{},{},{},{},", c.solver, c.h, c.coarse_h, c.overlap);
            match &c.outcome {
                CellOutcome::Finished { iterations, converged, lambda, gap, seconds, .. } => {
                    let secs = if self.spec.timing { format!("{seconds:.3}") } else { "-".into() };
                    let _ = writeln!(s, "{iterations},{converged},{lambda:.15e},{gap:.3e},{secs}");
                }
                CellOutcome::Failed(_) => {
                    let _ = writeln!(s, ",failed,,,");
                }
            }
        }
        s
    }

    /// Iteration counts with solvers as rows and `h` as columns; `×` marks a
    /// run stopped by the cap and `fail` a cell that could not run.
    pub fn to_table(&self) -> String {
        let hs = &self.spec.h_list;
        let head: Vec<String> = hs
            .iter()
            .map(|&h| match level_of(h) {
                Ok(l) => format!("2^-{l}"),
                Err(_) => format!("{h}"),
            })
            .collect();
        let w = head.iter().map(String::len).max().unwrap_or(0).max(6);
        let mut s = format!("{:<6}", "h");
        for hd in &head {
            let _ = write!(s, " {hd:>w$}");
        }
        s.push('\n');
        for solver in &self.spec.solvers {
            let _ = write!(s, "{:<6}", solver.name().to_ascii_uppercase());
            for &h in hs {
                let cell = match self.get(*solver, h).map(|c| &c.outcome) {
                    Some(CellOutcome::Finished { converged: false, .. }) => NOT_CONVERGED.to_string(),
                    Some(CellOutcome::Finished { iterations, .. }) => iterations.to_string(),
                    Some(CellOutcome::Failed(_)) | None => "fail".into(),
                };
                // Pad by characters; the cross is multi-byte.
                let pad = w.saturating_sub(cell.chars().count());
                let _ = write!(s, " {}{cell}", " ".repeat(pad));
            }
            s.push('\n');
        }
        s
    }

    /// Messages of the failed cells.
    pub fn failures(&self) -> Vec<String> {
        self.cells
            .iter()
            .filter_map(|c| match &c.outcome {
                CellOutcome::Failed(m) => Some(format!("{} h={}: {m}", c.solver, c.h)),
                CellOutcome::Finished { .. } => None,
            })
            .collect()
    }
}

/// Everything shared by the cells of one mesh size.
struct Prepared {
    pencil: MatrixPencil,
    schwarz: SchwarzDecomposition,
    x0hat: Vec<f64>,
    lambda2: f64,
    reference: ReferenceEigenvalue,
}

fn prepare(spec: &BenchSpec, h: f64) -> Result<Prepared> {
    let hier: MeshHierarchy = build_mesh_hierarchy(spec.coarse_h, h)?;
    let pencil = assemble_laplacian_p1(&hier.fine, &Coefficient::identity())?;
    let schwarz = build_two_level_overlapping(&hier, spec.overlap, pencil.a())?;
    let coarse = coarse_pencil(&hier, &pencil)?;
    let init = coarse_eigen_initial(&hier, &coarse, &schwarz)?;
    let ce = dense_generalized_eig(&coarse)?;
    let lambda2 = *ce
        .values
        .get(1)
        .ok_or_else(|| Error::Usage("the coarse space needs at least two unknowns".into()))?;
    let reference = reference_eigenvalue(&pencil, &schwarz, &init.xhat)?;
    Ok(Prepared { pencil, schwarz, x0hat: init.xhat, lambda2, reference })
}

/// Bytes of the factors one mesh size needs: the banded mass factor plus
/// the subdomain factors, both bounded by `n·side` entries.
fn estimated_bytes(h: f64) -> Result<usize> {
    let side = (1usize << level_of(h)?) - 1;
    Ok(side.saturating_mul(side).saturating_mul(side).saturating_mul(16))
}

fn run_cell(spec: &BenchSpec, prep: &Prepared, solver: SolverKind) -> Result<CellOutcome> {
    let p = &prep.pencil;
    let cfg = SolverConfig::with_reference(prep.reference.lambda, spec.tol, spec.max_iter);
    let pick = |pc: &dyn Preconditioner| -> Result<ParameterChoice> {
        let mut choice = select_parameters(p, pc, &prep.x0hat, Some(prep.lambda2))?;
        if let Some(mu) = spec.mu {
            choice.mu = mu;
        }
        if let Some(l) = spec.ell {
            choice.ell = l;
        }
        if spec.mu.is_some() && spec.ell.is_none() {
            choice.ell = choice.ell.max(9.0 * choice.mu);
        }
        Ok(choice)
    };
    let (params, start, out) = match solver {
        SolverKind::Rap => {
            let c = pick(&prep.schwarz)?;
            let coeffs = compute_coefficients(c.mu, c.ell)?;
            let t = Instant::now();
            (Some(c), t, rap_solve(p, &prep.schwarz, &coeffs, &prep.x0hat, &cfg)?)
        }
        SolverKind::Ra => {
            let minv = MassInverse::new(p)?;
            let c = pick(&minv)?;
            let coeffs = compute_coefficients(c.mu, c.ell)?;
            let t = Instant::now();
            (Some(c), t, ra_solve(p, &coeffs, &prep.x0hat, &cfg)?)
        }
        SolverKind::Psd => {
            let t = Instant::now();
            (None, t, psd_solve(p, &prep.schwarz, &prep.x0hat, &cfg)?)
        }
        SolverKind::Sd => {
            let t = Instant::now();
            (None, t, sd_solve(p, &prep.x0hat, &cfg)?)
        }
    };
    Ok(CellOutcome::Finished {
        iterations: out.history.iterations,
        converged: out.history.converged,
        lambda: out.lambda,
        gap: out.lambda - prep.reference.lambda,
        seconds: start.elapsed().as_secs_f64(),
        params,
    })
}

fn worker_count(spec: &BenchSpec, jobs: usize) -> usize {
    let w = if spec.workers == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        spec.workers
    };
    w.clamp(1, jobs.max(1))
}

/// Runs `f` over `0..jobs` on at most `workers` threads; results keep job order.
fn pool_map<T: Send>(workers: usize, jobs: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                if j >= jobs {
                    break;
                }
                let r = f(j);
                slots.lock().expect("no worker panics while holding the lock")[j] = Some(r);
            });
        }
    });
    slots.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every job ran")).collect()
}

/// Runs every `(solver, h)` cell of the spec. Cells that cannot run are
/// reported as failed and the rest still run. Writes the CSV to
/// `spec.output` when set.
pub fn run_benchmark(spec: &BenchSpec) -> Result<BenchResults> {
    spec.validate()?;
    let hs = spec.h_list.clone();
    let preps: Vec<std::result::Result<Prepared, String>> = pool_map(worker_count(spec, hs.len()), hs.len(), |i| {
        let h = hs[i];
        match estimated_bytes(h) {
            Ok(b) if b > spec.memory_limit => {
                return Err(format!("mesh h={h} needs about {} MiB of factors", b >> 20));
            }
            Err(e) => return Err(e.to_string()),
            Ok(_) => {}
        }
        prepare(spec, h).map_err(|e| e.to_string())
    });
    let jobs: Vec<(SolverKind, usize)> =
        spec.solvers.iter().flat_map(|&s| (0..hs.len()).map(move |i| (s, i))).collect();
    let cells = pool_map(worker_count(spec, jobs.len()), jobs.len(), |j| {
        let (solver, i) = jobs[j];
        let (reference, outcome) = match &preps[i] {
            Ok(prep) => (
                Some(prep.reference),
                run_cell(spec, prep, solver).unwrap_or_else(|e| CellOutcome::Failed(e.to_string())),
            ),
            Err(m) => (None, CellOutcome::Failed(m.clone())),
        };
        CellResult { solver, h: hs[i], coarse_h: spec.coarse_h, overlap: spec.overlap, reference, outcome }
    });
    let res = BenchResults { spec: spec.clone(), cells };
    if let Some(path) = &spec.output {
        std::fs::write(path, res.to_csv())?;
    }
    Ok(res)
}

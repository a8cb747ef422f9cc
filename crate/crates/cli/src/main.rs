use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rap_core::diagnostics::{assemble_preconditioner, convexity_constants, report_csv, DenseProblem};
use rap_core::experiment::{reference_eigenvalue, run_benchmark, select_parameters, BenchSpec, SolverKind};
use rap_core::fem::{assemble_laplacian_p1, build_mesh_hierarchy, Coefficient, StructuredMesh};
use rap_core::linalg::mmio::{read_matrix_market, write_matrix_market};
use rap_core::precond::{build_two_level_overlapping, Identity, Jacobi, MassInverse};
use rap_core::solvers::{compute_coefficients, psd_solve, ra_solve, rap_solve, sd_solve};
use rap_core::{MatrixPencil, Preconditioner, SolverConfig, SpdMatrix};

#[derive(Parser)]
#[command(name = "rap", version, about = "Preconditioned Riemannian acceleration for SPD eigenproblems")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iteration counts of the solvers on the unit-square Laplacian.
    Bench(BenchArgs),
    /// Smallest eigenpair of a pencil read from Matrix Market files.
    Solve(SolveArgs),
    /// Preconditioner quality measurements on a small Laplacian.
    Diagnose(DiagnoseArgs),
    /// Write the assembled Laplacian pencil as Matrix Market files.
    Mesh(MeshArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PcKind {
    None,
    Jacobi,
    Schwarz2,
}

#[derive(Args)]
struct StepArgs {
    /// Convexity constant; overrides the automatic choice.
    #[arg(long)]
    mu: Option<f64>,
    /// Smoothness constant; overrides the automatic choice.
    #[arg(long = "L")]
    ell: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Coarse mesh size.
    #[arg(long = "H", default_value_t = 0.25)]
    coarse_h: f64,
    /// Fine mesh sizes, comma separated. Defaults to 2^-3 through 2^-7.
    #[arg(long = "h", value_delimiter = ',')]
    h: Vec<f64>,
    /// Append 2^-8 through 2^-10 to the mesh sizes.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 20000)]
    max_iter: usize,
    #[command(flatten)]
    step: StepArgs,
    /// Solvers, comma separated, from rap, psd, ra, sd.
    #[arg(long, value_delimiter = ',', default_value = "rap,psd,ra,sd")]
    solver: Vec<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Also write the CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Concurrent cells; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Leave the seconds column as `-` so the CSV is reproducible byte for byte.
    #[arg(long = "no-timing")]
    no_timing: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Stiffness matrix.
    #[arg(long = "A")]
    a: PathBuf,
    /// Mass matrix; the identity when absent.
    #[arg(long = "M")]
    m: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PcKind::None)]
    pc: PcKind,
    #[arg(long, default_value = "psd")]
    solver: String,
    /// Coarse mesh size for schwarz2; the fine mesh is inferred from the dimension.
    #[arg(long = "H", default_value_t = 0.25)]
    coarse_h: f64,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    /// Relative eigenvalue tolerance, used with --reference.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Stop on `ρ − λ ≤ tol·λ` for this λ, or `auto` to compute it first.
    /// Without it the run stops on the relative residual.
    #[arg(long)]
    reference: Option<String>,
    #[arg(long = "residual-tol", default_value_t = 1e-8)]
    residual_tol: f64,
    #[arg(long = "max-iter", default_value_t = 20000)]
    max_iter: usize,
    #[command(flatten)]
    step: StepArgs,
    /// Perturbs the constant start vector; 0 keeps it constant.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the convergence history CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long = "h", default_value_t = 0.125)]
    h: f64,
    #[arg(long = "H", default_value_t = 0.25)]
    coarse_h: f64,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    #[arg(long, value_enum, default_value_t = PcKind::Schwarz2)]
    pc: PcKind,
    /// Sublevel `ρ* = λ₁ + frac·(λ₂ − λ₁)`, frac in [0, 1/2).
    #[arg(long = "rho-frac", default_value_t = 0.01)]
    rho_frac: f64,
    /// Sampled directions per sublevel set.
    #[arg(long, default_value_t = 32)]
    directions: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long = "h")]
    h: f64,
    /// Directory receiving A.mtx and M.mtx.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Bench(a) => bench(a),
        Command::Solve(a) => solve(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Mesh(a) => mesh(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn parse_solvers(names: &[String]) -> Result<Vec<SolverKind>> {
    let mut out = Vec::new();
    for n in names.iter().filter(|n| !n.trim().is_empty()) {
        let s: SolverKind = n.parse()?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut h_list = if a.h.is_empty() { BenchSpec::default().h_list } else { a.h };
    if a.full {
        for k in 8..=10 {
            let h = 0.5f64.powi(k);
            if !h_list.contains(&h) {
                h_list.push(h);
            }
        }
    }
    let spec = BenchSpec {
        solvers: parse_solvers(&a.solver)?,
        coarse_h: a.coarse_h,
        h_list,
        overlap: a.overlap,
        tol: a.tol,
        max_iter: a.max_iter,
        seed: a.seed,
        output: a.out,
        mu: a.step.mu,
        ell: a.step.ell,
        workers: a.workers,
        timing: !a.no_timing,
        ..BenchSpec::default()
    };
    let res = run_benchmark(&spec)?;
    match a.format {
        Format::Table => print!("{}", res.to_table()),
        Format::Csv => print!("{}", res.to_csv()),
    }
    for f in res.failures() {
        eprintln!("warning: {f}");
    }
    Ok(())
}

/// Level `k` with `n = (2^k − 1)²`.
fn mesh_level_for(n: usize) -> Result<u32> {
    (1..=14)
        .find(|&k| StructuredMesh::new(k).map(|m| m.num_nodes() == n).unwrap_or(false))
        .ok_or_else(|| anyhow!("schwarz2 needs a unit-square mesh pencil, but n = {n} is not (2^k - 1)^2"))
}

fn build_pc(kind: PcKind, p: &MatrixPencil, coarse_h: f64, overlap: f64) -> Result<Box<dyn Preconditioner>> {
    Ok(match kind {
        PcKind::None => Box::new(Identity::new(p.n())),
        PcKind::Jacobi => Box::new(Jacobi::new(p.a())),
        PcKind::Schwarz2 => {
            let fine = StructuredMesh::new(mesh_level_for(p.n())?)?;
            let hier = build_mesh_hierarchy(coarse_h, fine.h())?;
            Box::new(build_two_level_overlapping(&hier, overlap, p.a())?)
        }
    })
}

fn solve(a: SolveArgs) -> Result<()> {
    let kind: SolverKind = a.solver.parse()?;
    let am = read_matrix_market(&a.a).with_context(|| format!("reading {}", a.a.display()))?;
    let mm = match &a.m {
        Some(path) => read_matrix_market(path).with_context(|| format!("reading {}", path.display()))?,
        None => SpdMatrix::identity(am.n()),
    };
    let p = MatrixPencil::new(am, mm)?;
    if !kind.is_preconditioned() && a.pc != PcKind::None {
        bail!("{kind} runs in the mass metric and takes no preconditioner; drop --pc");
    }
    let pc = build_pc(a.pc, &p, a.coarse_h, a.overlap)?;

    let mut start = vec![1.0; p.n()];
    if a.seed != 0 {
        let mut r = ChaCha8Rng::seed_from_u64(a.seed);
        start.iter_mut().for_each(|v| *v += r.random_range(-0.5..0.5));
    }
    let x0hat = p.m().mul(&start);

    let reference = match a.reference.as_deref() {
        None => None,
        Some("auto") => Some(reference_eigenvalue(&p, pc.as_ref(), &x0hat)?.lambda),
        Some(v) => Some(v.parse::<f64>().map_err(|_| anyhow!("--reference takes a number or 'auto', got '{v}'"))?),
    };
    let cfg = SolverConfig {
        tol: a.tol,
        max_iter: a.max_iter,
        reference_lambda: reference,
        residual_tol: a.residual_tol,
        record_residuals: true,
        ..SolverConfig::default()
    };
    let minv = MassInverse::new(&p)?;
    let metric: &dyn Preconditioner = if kind.is_preconditioned() { pc.as_ref() } else { &minv };
    let coeffs = if kind.is_accelerated() {
        let (mu, ell) = match (a.step.mu, a.step.ell) {
            (Some(mu), Some(ell)) => (mu, ell),
            (mu, ell) => {
                let s = select_parameters(&p, metric, &x0hat, None)?;
                let mu = mu.unwrap_or(s.mu);
                (mu, ell.unwrap_or(s.ell.max(9.0 * mu)))
            }
        };
        Some(compute_coefficients(mu, ell)?)
    } else {
        None
    };
    let out = match kind {
        SolverKind::Rap => rap_solve(&p, pc.as_ref(), coeffs.as_ref().unwrap(), &x0hat, &cfg)?,
        SolverKind::Psd => psd_solve(&p, pc.as_ref(), &x0hat, &cfg)?,
        SolverKind::Ra => ra_solve(&p, coeffs.as_ref().unwrap(), &x0hat, &cfg)?,
        SolverKind::Sd => sd_solve(&p, &x0hat, &cfg)?,
    };
    if let Some(path) = &a.out {
        std::fs::write(path, out.history.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    let h = &out.history;
    let residual = h.residual_norms.as_ref().and_then(|r| r.last().copied());
    match a.format {
        Format::Table => {
            println!("solver      {kind}");
            println!("n           {}", p.n());
            println!("lambda      {:.15e}", out.lambda);
            println!("iterations  {}", h.iterations);
            println!("converged   {}", h.converged);
            if let Some(r) = residual {
                println!("residual    {r:.3e}");
            }
            if let Some(c) = &coeffs {
                println!("mu, L       {:.6e}, {:.6e}", c.mu, c.ell);
            }
        }
        Format::Csv => {
            println!("solver,n,iters,converged,lambda,residual");
            let r = residual.map(|r| format!("{r:.6e}")).unwrap_or_default();
            println!("{kind},{},{},{},{:.17e},{r}", p.n(), h.iterations, h.converged, out.lambda);
        }
    }
    if !h.converged {
        eprintln!("warning: stopped at the iteration cap without meeting the criterion");
    }
    Ok(())
}

/// Largest pencil handed to the dense diagnostics.
const DIAGNOSE_LIMIT: usize = 1000;

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    if !(0.0..0.5).contains(&a.rho_frac) {
        bail!("--rho-frac must lie in [0, 0.5), got {}", a.rho_frac);
    }
    let fine = StructuredMesh::from_h(a.h)?;
    if fine.num_nodes() > DIAGNOSE_LIMIT {
        bail!("h = {} gives {} unknowns; diagnose works densely and allows at most {DIAGNOSE_LIMIT}", a.h, fine.num_nodes());
    }
    let p = assemble_laplacian_p1(&fine, &Coefficient::identity())?;
    let pc = build_pc(a.pc, &p, a.coarse_h, a.overlap)?;
    let b = assemble_preconditioner(pc.as_ref())?;
    let prob = DenseProblem::new(p.a().to_dense(), p.m().to_dense(), b)?;
    let rho = prob.lambda1() + a.rho_frac * (prob.lambda2() - prob.lambda1());
    let q = prob.quality(rho, a.directions, a.seed)?;
    let c = convexity_constants(&q, prob.lambda1(), prob.lambda2(), prob.lambdan(), rho).ok();
    let text = match a.format {
        Format::Csv => report_csv(&q, c.as_ref()),
        Format::Table => {
            let mut s = String::new();
            let rows = [
                ("kappa_nu", q.kappa_nu),
                ("nu_min", q.nu_min),
                ("nu_max", q.nu_max),
                ("cos_theta", q.cos_theta_est),
                ("varrho", q.varrho_est),
                ("varsigma", q.varsigma_est),
                ("sigma", q.sigma),
                ("nu1", q.nu1),
                ("rho_star", q.rho_star),
                ("epsilon", q.epsilon),
                ("epsilon_star", q.epsilon_star),
            ];
            for (k, v) in rows {
                let _ = writeln!(s, "{k:<13}{v:.6e}");
            }
            let _ = writeln!(s, "{:<13}{}", "samples", q.sample_count);
            match &c {
                Some(c) => {
                    let _ = writeln!(s, "{:<13}{:.6e}", "mu_b", c.mu_b);
                    let _ = writeln!(s, "{:<13}{:.6e}", "ell_b", c.ell_b);
                }
                None => {
                    let _ = writeln!(s, "convexity constants unavailable at this level");
                }
            }
            s
        }
    };
    print!("{text}");
    if let Some(path) = &a.out {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn mesh(a: MeshArgs) -> Result<()> {
    let m = StructuredMesh::from_h(a.h)?;
    let p = assemble_laplacian_p1(&m, &Coefficient::identity())?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_matrix_market(a.out.join("A.mtx"), p.a())?;
    write_matrix_market(a.out.join("M.mtx"), p.m())?;
    println!("wrote {} unknowns to {}", p.n(), a.out.display());
    Ok(())
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlfem::assembly::interaction_stencil;
use nlfem::experiment::{csv_string, run_solve_with_diagnostics, run_sweep, write_csv, ExperimentConfig, OneOrMany, SweepMode};
use nlfem::mesh::{build_mesh, BoxDomain};
use nlfem::validation::{run_validate, Suite};
use nlfem::KernelParams;

#[derive(Parser)]
#[command(name = "nlfem", version, about = "Nonlocal diffusion FEM with a Gaussian kernel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and report its errors.
    Solve(RunArgs),
    /// Refine in h or delta and report convergence rates.
    Sweep(RunArgs),
    /// Cross-check the closed-form integrals and operators against quadrature.
    Validate {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Describe mesh and kernel sizes without solving.
    Info(RunArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    solution: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    /// Elements per unit length; comma-separated for an h sweep.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Horizon; comma-separated for a delta sweep.
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    cutoff_eps: Option<f64>,
    /// Evaluate every element pair directly instead of via offset tables.
    #[arg(long)]
    no_invariance: bool,
    /// Also time the other assembly path and report the mismatch.
    #[arg(long)]
    compare_assembly: bool,
    /// Compute recovered-gradient errors.
    #[arg(long)]
    recovery: bool,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    cg_tol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    sweep: Option<SweepMode>,
}

fn parse_mode(s: &str) -> Result<SweepMode, String> {
    match s {
        "h" => Ok(SweepMode::H),
        "delta" => Ok(SweepMode::Delta),
        "none" => Ok(SweepMode::None),
        _ => Err(format!("unknown sweep mode {s}")),
    }
}

fn list<T: Clone>(v: &[T]) -> Option<OneOrMany<T>> {
    match v {
        [] => None,
        [x] => Some(OneOrMany::One(x.clone())),
        _ => Some(OneOrMany::Many(v.to_vec())),
    }
}

impl RunArgs {
    fn into_config(self) -> nlfem::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.domain {
            c.domain = v;
        }
        if let Some(v) = self.solution {
            c.solution = v;
        }
        if let Some(v) = self.order {
            c.order = v;
        }
        if let Some(v) = list(&self.n) {
            c.n = v;
        }
        if let Some(v) = list(&self.delta) {
            c.delta = v;
        }
        if let Some(v) = self.s {
            c.s = v;
        }
        if let Some(v) = self.cutoff_eps {
            c.cutoff_eps = v;
        }
        c.no_invariance |= self.no_invariance;
        c.compare_assembly |= self.compare_assembly;
        c.recovery |= self.recovery;
        c.quad_order = self.quad_order.or(c.quad_order);
        if let Some(v) = self.cg_tol {
            c.cg_tol = v;
        }
        c.threads = self.threads.or(c.threads);
        c.out = self.out.or(c.out);
        c.sweep = self.sweep.or(c.sweep);
        Ok(c)
    }
}

fn set_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size thread pool: {e}");
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into())
}

fn solve(config: ExperimentConfig) -> nlfem::Result<ExitCode> {
    let (row, diag) = run_solve_with_diagnostics(&config)?;
    println!("domain {}  solution {}  k={}  N={}  delta={}  s={}", row.domain, row.solution, row.order, row.n, row.delta, row.s);
    println!("dofs {}  nnz {}  cg iterations {}  residual {:.2e}", row.n_dofs, row.nnz, row.cg_iters, diag.cg_residual);
    println!("L2 error {:.6e}  H1 error {:.6e}", row.l2_error, row.h1_error);
    if config.recovery {
        println!(
            "recovered gradient: full {}  interior {}  corrected {}",
            fmt_opt(row.grad_rec_full),
            fmt_opt(row.grad_rec_interior),
            fmt_opt(row.grad_rec_corrected)
        );
    }
    println!("assembly {:.3}s  solve {:.3}s", row.assembly_time_s, row.solve_time_s);
    if let (Some(g), Some(m)) = (row.assembly_time_generic_s, diag.assembly_mismatch) {
        println!("generic assembly {g:.3}s  speedup {:.1}x  max relative mismatch {m:.2e}", g / row.assembly_time_s);
    }
    if let Some(path) = &config.out {
        write_csv(std::slice::from_ref(&row), path)?;
    }
    if !diag.cg_converged {
        eprintln!("CG did not reach the requested tolerance");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(config: ExperimentConfig) -> nlfem::Result<ExitCode> {
    let outcome = run_sweep(&config)?;
    if config.out.is_none() {
        print!("{}", csv_string(&outcome.rows));
    } else {
        for r in &outcome.rows {
            println!(
                "N={:<4} delta={:<10.4e} L2 {:.4e}  H1 {:.4e}  rec {} / {} / {}",
                r.n,
                r.delta,
                r.l2_error,
                r.h1_error,
                fmt_opt(r.grad_rec_full),
                fmt_opt(r.grad_rec_interior),
                fmt_opt(r.grad_rec_corrected)
            );
        }
    }
    let show = |name: &str, rates: &[f64]| {
        if !rates.is_empty() {
            eprintln!("{name:<22} {rates:.3?}");
        }
    };
    show("L2 rates", &outcome.l2_rates);
    show("H1 rates", &outcome.h1_rates);
    show("recovery full rates", &outcome.grad_rec_full_rates);
    show("recovery interior", &outcome.grad_rec_interior_rates);
    show("recovery corrected", &outcome.grad_rec_corrected_rates);
    Ok(ExitCode::SUCCESS)
}

fn info(config: ExperimentConfig) -> nlfem::Result<ExitCode> {
    let domain = BoxDomain::named(&config.domain)?;
    println!("domain {}: dim {}, {} boxes, volume {}", config.domain, domain.dim(), domain.boxes().len(), domain.volume());
    for delta in config.delta.to_vec() {
        let params = KernelParams::with_cutoff(delta, config.s, config.cutoff_eps)?;
        println!("delta {delta}: lambda {:.6e}, cutoff distance {:.6e}", params.lambda, params.cutoff_distance());
        for n in config.n.to_vec() {
            let (mesh, dofmap) = build_mesh(&domain, n, config.order)?;
            let m = interaction_stencil(&params, mesh.spacing);
            println!(
                "  N={n}: {} elements, {} dofs, stencil reach {m} cells ({} offsets)",
                mesh.elements.len(),
                dofmap.n_dofs,
                (2 * m + 1).pow(mesh.dim as u32)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(suite: Suite) -> nlfem::Result<ExitCode> {
    let checks = run_validate(suite)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { suite, threads } => {
            set_threads(threads);
            validate(suite)
        }
        Command::Solve(args) => args.into_config().and_then(|c| {
            set_threads(c.threads);
            solve(c)
        }),
        Command::Sweep(args) => args.into_config().and_then(|c| {
            set_threads(c.threads);
            sweep(c)
        }),
        Command::Info(args) => args.into_config().and_then(info),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

//! Solve and sweep orchestration, CSV output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_load, assemble_operators, Operators};
use crate::error::{Error, Result};
use crate::integrals::KernelParams;
use crate::mesh::{boundary_faces, build_mesh, BoundaryDistance, BoxDomain};
use crate::metrics::{fit_rates, recovery_errors, solution_errors, ManufacturedSolution};
use crate::recovery::RecoveredField;
use crate::sparse::{cg_solve, DEFAULT_CG_TOL};

/// A scalar or a list, as accepted for `n` and `delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            Self::One(v) => vec![v.clone()],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    H,
    Delta,
    None,
}

/// Run configuration. JSON keys match the command-line flag names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: String,
    pub solution: String,
    pub order: usize,
    pub n: OneOrMany<usize>,
    pub delta: OneOrMany<f64>,
    pub s: f64,
    pub cutoff_eps: f64,
    pub no_invariance: bool,
    pub compare_assembly: bool,
    pub recovery: bool,
    pub quad_order: Option<usize>,
    pub cg_tol: f64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    /// Inferred from which list has several entries when absent.
    pub sweep: Option<SweepMode>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            domain: "rect".into(),
            solution: "rect-trig".into(),
            order: 1,
            n: OneOrMany::One(8),
            delta: OneOrMany::One(0.05),
            s: 2.0,
            cutoff_eps: KernelParams::DEFAULT_CUTOFF,
            no_invariance: false,
            compare_assembly: false,
            recovery: false,
            quad_order: None,
            cg_tol: DEFAULT_CG_TOL,
            threads: None,
            out: None,
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn sweep_mode(&self) -> SweepMode {
        self.sweep.unwrap_or(match (self.n.to_vec().len() > 1, self.delta.to_vec().len() > 1) {
            (true, _) => SweepMode::H,
            (false, true) => SweepMode::Delta,
            _ => SweepMode::None,
        })
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order.unwrap_or(self.order + 2)
    }

    /// Single-run configurations in sweep order.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        let ns = self.n.to_vec();
        let deltas = self.delta.to_vec();
        if ns.is_empty() || deltas.is_empty() {
            return Err(Error::InvalidParameter("empty n or delta list".into()));
        }
        check_monotone(&ns.iter().map(|&n| n as f64).collect::<Vec<_>>(), "n")?;
        check_monotone(&deltas, "delta")?;
        let mut out = Vec::new();
        for &delta in &deltas {
            for &n in &ns {
                let mut c = self.clone();
                c.n = OneOrMany::One(n);
                c.delta = OneOrMany::One(delta);
                out.push(c);
            }
        }
        Ok(out)
    }
}

fn check_monotone(v: &[f64], what: &str) -> Result<()> {
    let up = v.windows(2).all(|w| w[0] < w[1]);
    let down = v.windows(2).all(|w| w[0] > w[1]);
    if v.len() > 1 && !up && !down {
        return Err(Error::InvalidParameter(format!("{what} list must be strictly monotone")));
    }
    Ok(())
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub domain: String,
    pub solution: String,
    pub order: usize,
    pub n: usize,
    pub h: f64,
    pub delta: f64,
    pub s: f64,
    pub l2_error: f64,
    pub h1_error: f64,
    pub grad_rec_full: Option<f64>,
    pub grad_rec_interior: Option<f64>,
    pub grad_rec_corrected: Option<f64>,
    pub assembly_time_s: f64,
    pub assembly_time_generic_s: Option<f64>,
    pub solve_time_s: f64,
    pub cg_iters: usize,
    pub n_dofs: usize,
    pub nnz: usize,
}

pub const CSV_COLUMNS: [&str; 18] = [
    "domain",
    "solution",
    "order",
    "N",
    "h",
    "delta",
    "s",
    "l2_error",
    "h1_error",
    "grad_rec_full",
    "grad_rec_interior",
    "grad_rec_corrected",
    "assembly_time_s",
    "assembly_time_generic_s",
    "solve_time_s",
    "cg_iters",
    "n_dofs",
    "nnz",
];

/// Extra diagnostics of a run that are not part of the CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunDiagnostics {
    /// `max |fast − generic| / max |generic|` when both paths ran.
    pub assembly_mismatch: Option<f64>,
    pub cg_residual: f64,
    pub cg_converged: bool,
}

pub fn run_solve(config: &ExperimentConfig) -> Result<ExperimentResult> {
    Ok(run_solve_with_diagnostics(config)?.0)
}

pub fn run_solve_with_diagnostics(config: &ExperimentConfig) -> Result<(ExperimentResult, RunDiagnostics)> {
    let [n] = config.n.to_vec()[..] else {
        return Err(Error::InvalidParameter("run_solve needs a single n".into()));
    };
    let [delta] = config.delta.to_vec()[..] else {
        return Err(Error::InvalidParameter("run_solve needs a single delta".into()));
    };
    let domain = BoxDomain::named(&config.domain)?;
    let sol = ManufacturedSolution::named(&config.solution)?;
    if sol.dim != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), got: sol.dim });
    }
    let params = KernelParams::with_cutoff(delta, config.s, config.cutoff_eps)?;
    let (mesh, dofmap) = build_mesh(&domain, n, config.order)?;
    let faces = boundary_faces(&mesh, &dofmap);
    let mut diag = RunDiagnostics::default();

    let timed = |fast: bool| -> Result<(Operators, f64)> {
        let start = Instant::now();
        let ops = assemble_operators(&mesh, &dofmap, &params, fast)?;
        Ok((ops, start.elapsed().as_secs_f64()))
    };
    let (ops, main_time) = timed(!config.no_invariance)?;
    let (assembly_time_s, assembly_time_generic_s) = if config.compare_assembly {
        let (other, other_time) = timed(config.no_invariance)?;
        let scale = ops.stiffness.max_abs().max(other.stiffness.max_abs());
        let diff = ops
            .stiffness
            .values()
            .iter()
            .zip(other.stiffness.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        diag.assembly_mismatch = Some(diff / scale);
        if config.no_invariance {
            (other_time, Some(main_time))
        } else {
            (main_time, Some(other_time))
        }
    } else if config.no_invariance {
        (main_time, Some(main_time))
    } else {
        (main_time, None)
    };

    let flux = |x: &crate::mesh::Point, nrm: &crate::mesh::Point| sol.flux(x, nrm);
    let load = assemble_load(&mesh, &dofmap, &faces, &ops, &params, &|x| sol.source(x), &flux)?;
    let start = Instant::now();
    let cg = cg_solve(&ops.stiffness, &load, config.cg_tol, 10 * dofmap.n_dofs)?;
    let solve_time_s = start.elapsed().as_secs_f64();
    diag.cg_residual = cg.residual;
    diag.cg_converged = cg.converged;

    let q = config.quad_order();
    let (l2_error, h1_error) = solution_errors(&mesh, &dofmap, &cg.solution, &sol, q);
    let (grad_rec_full, grad_rec_interior, grad_rec_corrected) = if config.recovery {
        let field = RecoveredField::new(&mesh, &dofmap, &cg.solution, params)?.with_flux(&flux);
        let distance = BoundaryDistance::new(&domain)?;
        let (f, i, c) = recovery_errors(&field, &mesh, &sol, &distance, q)?;
        (Some(f), Some(i), Some(c))
    } else {
        (None, None, None)
    };
    let result = ExperimentResult {
        domain: config.domain.clone(),
        solution: config.solution.clone(),
        order: config.order,
        n,
        h: mesh.h,
        delta,
        s: config.s,
        l2_error,
        h1_error,
        grad_rec_full,
        grad_rec_interior,
        grad_rec_corrected,
        assembly_time_s,
        assembly_time_generic_s,
        solve_time_s,
        cg_iters: cg.iterations,
        n_dofs: dofmap.n_dofs,
        nnz: ops.stiffness.nnz(),
    };
    Ok((result, diag))
}

/// Rows of a sweep plus the successive rates of each error column.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub mode: SweepMode,
    pub rows: Vec<ExperimentResult>,
    pub l2_rates: Vec<f64>,
    pub h1_rates: Vec<f64>,
    pub grad_rec_full_rates: Vec<f64>,
    pub grad_rec_interior_rates: Vec<f64>,
    pub grad_rec_corrected_rates: Vec<f64>,
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    let runs = config.expand()?;
    let mode = config.sweep_mode();
    if mode != SweepMode::None && runs.len() < 3 {
        return Err(Error::InvalidParameter(format!("a sweep needs at least 3 steps, got {}", runs.len())));
    }
    let rows = runs.iter().map(run_solve).collect::<Result<Vec<_>>>()?;
    let factor = |i: usize| match mode {
        SweepMode::H => rows[i - 1].h / rows[i].h,
        _ => rows[i - 1].delta / rows[i].delta,
    };
    let rates = |pick: &dyn Fn(&ExperimentResult) -> Option<f64>| -> Result<Vec<f64>> {
        if rows.len() < 2 || mode == SweepMode::None {
            return Ok(Vec::new());
        }
        let vals: Option<Vec<f64>> = rows.iter().map(pick).collect();
        let Some(vals) = vals else { return Ok(Vec::new()) };
        (1..rows.len())
            .map(|i| Ok(fit_rates(&vals[i - 1..=i], factor(i))?[0]))
            .collect()
    };
    let outcome = SweepOutcome {
        mode,
        l2_rates: rates(&|r| Some(r.l2_error))?,
        h1_rates: rates(&|r| Some(r.h1_error))?,
        grad_rec_full_rates: rates(&|r| r.grad_rec_full)?,
        grad_rec_interior_rates: rates(&|r| r.grad_rec_interior)?,
        grad_rec_corrected_rates: rates(&|r| r.grad_rec_corrected)?,
        rows,
    };
    if let Some(path) = &config.out {
        write_csv(&outcome.rows, path)?;
    }
    Ok(outcome)
}

fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

impl ExperimentResult {
    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.domain.clone(),
            self.solution.clone(),
            self.order.to_string(),
            self.n.to_string(),
            sci(self.h),
            sci(self.delta),
            sci(self.s),
            sci(self.l2_error),
            sci(self.h1_error),
            opt(self.grad_rec_full),
            opt(self.grad_rec_interior),
            opt(self.grad_rec_corrected),
            sci(self.assembly_time_s),
            opt(self.assembly_time_generic_s),
            sci(self.solve_time_s),
            self.cg_iters.to_string(),
            self.n_dofs.to_string(),
            self.nnz.to_string(),
        ]
    }
}

pub fn csv_string(results: &[ExperimentResult]) -> String {
    let mut s = CSV_COLUMNS.join(",");
    s.push('\n');
    for r in results {
        s.push_str(&r.csv_fields().join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(results: &[ExperimentResult], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(results))?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<ExperimentResult>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
    if header.split(',').collect::<Vec<_>>() != CSV_COLUMNS {
        return Err(Error::Csv(format!("unexpected header {header:?}")));
    }
    let real = |s: &str| s.parse::<f64>().map_err(|e| Error::Csv(format!("{s:?}: {e}")));
    let int = |s: &str| s.parse::<usize>().map_err(|e| Error::Csv(format!("{s:?}: {e}")));
    let optional = |s: &str| if s.is_empty() { Ok(None) } else { real(s).map(Some) };
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != CSV_COLUMNS.len() {
                return Err(Error::Csv(format!("expected {} fields, got {}", CSV_COLUMNS.len(), f.len())));
            }
            Ok(ExperimentResult {
                domain: f[0].into(),
                solution: f[1].into(),
                order: int(f[2])?,
                n: int(f[3])?,
                h: real(f[4])?,
                delta: real(f[5])?,
                s: real(f[6])?,
                l2_error: real(f[7])?,
                h1_error: real(f[8])?,
                grad_rec_full: optional(f[9])?,
                grad_rec_interior: optional(f[10])?,
                grad_rec_corrected: optional(f[11])?,
                assembly_time_s: real(f[12])?,
                assembly_time_generic_s: optional(f[13])?,
                solve_time_s: real(f[14])?,
                cg_iters: int(f[15])?,
                n_dofs: int(f[16])?,
                nnz: int(f[17])?,
            })
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentResult>> {
    parse_csv(&std::fs::read_to_string(path)?)
}

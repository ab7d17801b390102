//! Recovered gradients with and without the boundary correction at a few
//! points, then the error norms over the domain.
//!
//!     cargo run --release --example gradient_recovery -- [delta]

use nlfem::assembly::{assemble_load, assemble_operators};
use nlfem::mesh::{boundary_faces, build_mesh, BoundaryDistance, BoxDomain};
use nlfem::metrics::{recovery_errors, ManufacturedSolution};
use nlfem::recovery::RecoveredField;
use nlfem::{cg_solve, KernelParams};

fn main() -> nlfem::Result<()> {
    let delta: f64 = std::env::args().nth(1).map(|a| a.parse().expect("delta")).unwrap_or(0.02);
    let domain = BoxDomain::rect();
    let sol = ManufacturedSolution::named("rect-trig")?;
    let params = KernelParams::new(delta, 2.0)?;
    let (mesh, dofmap) = build_mesh(&domain, 32, 2)?;
    let faces = boundary_faces(&mesh, &dofmap);
    let ops = assemble_operators(&mesh, &dofmap, &params, true)?;
    let flux = |x: &[f64; 3], n: &[f64; 3]| sol.flux(x, n);
    let load = assemble_load(&mesh, &dofmap, &faces, &ops, &params, &|x| sol.source(x), &flux)?;
    let u = cg_solve(&ops.stiffness, &load, 1e-10, 10 * dofmap.n_dofs)?.solution;

    let field = RecoveredField::new(&mesh, &dofmap, &u, params)?.with_flux(&flux);
    println!("{:>14} {:>24} {:>24} {:>24}", "x", "exact", "smoothed", "corrected");
    for x in [[0.5, 0.5, 0.0], [0.5, 0.01, 0.0], [0.0, 0.3, 0.0]] {
        let r = field.evaluate(&x);
        let g = sol.gradient(&x);
        let c = r.recovered_gradient();
        println!(
            "({:.2}, {:.2})   ({:>9.5}, {:>9.5})   ({:>9.5}, {:>9.5})   ({:>9.5}, {:>9.5})",
            x[0], x[1], g[0], g[1], r.gradient[0], r.gradient[1], c[0], c[1]
        );
    }
    let distance = BoundaryDistance::new(&domain)?;
    let (full, interior, corrected) = recovery_errors(&field, &mesh, &sol, &distance, 4)?;
    println!("L2 gradient error: smoothed {full:.4e}, away from boundary {interior:.4e}, corrected {corrected:.4e}");
    Ok(())
}

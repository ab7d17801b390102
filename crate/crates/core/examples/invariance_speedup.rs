//! Assembly time with and without cached offset tables on a uniform grid.
//!
//!     cargo run --release --example invariance_speedup -- [N] [order] [delta]

use std::time::Instant;

use nlfem::assembly::assemble_operators;
use nlfem::mesh::{build_mesh, BoxDomain};
use nlfem::KernelParams;

fn main() -> nlfem::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|a| a.parse().expect("N")).unwrap_or(64);
    let order: usize = args.next().map(|a| a.parse().expect("order")).unwrap_or(1);
    let delta: f64 = args.next().map(|a| a.parse().expect("delta")).unwrap_or(0.01);
    let params = KernelParams::new(delta, 2.0)?;
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), n, order)?;

    let start = Instant::now();
    let fast = assemble_operators(&mesh, &dofmap, &params, true)?;
    let t_fast = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let generic = assemble_operators(&mesh, &dofmap, &params, false)?;
    let t_generic = start.elapsed().as_secs_f64();

    let scale = generic.stiffness.max_abs();
    let diff = fast
        .stiffness
        .values()
        .iter()
        .zip(generic.stiffness.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("{} dofs, {} nonzeros", dofmap.n_dofs, fast.stiffness.nnz());
    println!("offset tables {t_fast:.4}s, direct {t_generic:.4}s, speedup {:.1}x", t_generic / t_fast);
    println!("max difference {:.2e} of max entry", diff / scale);
    Ok(())
}

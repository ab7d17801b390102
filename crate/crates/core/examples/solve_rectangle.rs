//! One solve on the unit square with the trigonometric manufactured solution.
//!
//!     cargo run --release --example solve_rectangle -- [N] [order] [delta]

use nlfem::experiment::{run_solve_with_diagnostics, ExperimentConfig, OneOrMany};

fn main() -> nlfem::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|a| a.parse().expect("N")).unwrap_or(32);
    let order: usize = args.next().map(|a| a.parse().expect("order")).unwrap_or(1);
    let delta: f64 = args.next().map(|a| a.parse().expect("delta")).unwrap_or(0.01);
    let config = ExperimentConfig { n: OneOrMany::One(n), order, delta: OneOrMany::One(delta), ..Default::default() };
    let (row, diag) = run_solve_with_diagnostics(&config)?;
    println!("N={n} k={order} delta={delta}: {} dofs, {} nonzeros", row.n_dofs, row.nnz);
    println!("CG: {} iterations, residual {:.2e}", row.cg_iters, diag.cg_residual);
    println!("L2 error {:.4e}, H1 error {:.4e}", row.l2_error, row.h1_error);
    println!("assembly {:.3}s, solve {:.3}s", row.assembly_time_s, row.solve_time_s);
    Ok(())
}

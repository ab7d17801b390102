//! h-refinement on the unit cube with homogeneous Neumann data.
//!
//!     cargo run --release --example cube -- [order] [delta]

use nlfem::experiment::{run_sweep, ExperimentConfig, OneOrMany};

fn main() -> nlfem::Result<()> {
    let mut args = std::env::args().skip(1);
    let order: usize = args.next().map(|a| a.parse().expect("order")).unwrap_or(1);
    let delta: f64 = args.next().map(|a| a.parse().expect("delta")).unwrap_or(1e-4);
    let ns = if order == 1 { vec![4, 8, 16, 32] } else { vec![2, 4, 8, 16] };
    let config = ExperimentConfig {
        domain: "cube".into(),
        solution: "cube-trig".into(),
        order,
        n: OneOrMany::Many(ns),
        delta: OneOrMany::One(delta),
        ..Default::default()
    };
    let sweep = run_sweep(&config)?;
    for r in &sweep.rows {
        println!(
            "N={:<3} dofs {:<6} nnz {:<8} L2 {:.4e}  H1 {:.4e}  assembly {:.2}s",
            r.n, r.n_dofs, r.nnz, r.l2_error, r.h1_error, r.assembly_time_s
        );
    }
    println!("L2 rates {:.3?}", sweep.l2_rates);
    println!("H1 rates {:.3?}", sweep.h1_rates);
    Ok(())
}

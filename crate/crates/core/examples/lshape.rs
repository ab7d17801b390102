//! h-refinement on the L-shaped domain `[0,1]² minus [0.5,1]²`.
//!
//!     cargo run --release --example lshape -- [order] [delta]

use nlfem::experiment::{run_sweep, ExperimentConfig, OneOrMany};

fn main() -> nlfem::Result<()> {
    let mut args = std::env::args().skip(1);
    let order: usize = args.next().map(|a| a.parse().expect("order")).unwrap_or(1);
    let delta: f64 = args.next().map(|a| a.parse().expect("delta")).unwrap_or(1e-4);
    let config = ExperimentConfig {
        domain: "lshape".into(),
        solution: "lshape-mixed".into(),
        order,
        n: OneOrMany::Many(vec![8, 16, 32, 64]),
        delta: OneOrMany::One(delta),
        ..Default::default()
    };
    let sweep = run_sweep(&config)?;
    for r in &sweep.rows {
        println!("N={:<3} dofs {:<6} L2 {:.4e}  H1 {:.4e}", r.n, r.n_dofs, r.l2_error, r.h1_error);
    }
    println!("L2 rates {:.3?}", sweep.l2_rates);
    println!("H1 rates {:.3?}", sweep.h1_rates);
    Ok(())
}

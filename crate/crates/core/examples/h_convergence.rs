//! h-refinement study on the unit square at fixed small horizon.
//!
//! `cargo run --release --example h_convergence -- [order] [delta]`

use nlfem::experiment::{run_sweep, ExperimentConfig, OneOrMany};

fn main() -> nlfem::Result<()> {
    let mut args = std::env::args().skip(1);
    let order: usize = args.next().map(|a| a.parse().expect("order")).unwrap_or(1);
    let delta: f64 = args.next().map(|a| a.parse().expect("delta")).unwrap_or(0.001);
    let ns = if order == 1 { vec![8, 16, 32, 64] } else { vec![4, 8, 16, 32] };
    let config = ExperimentConfig {
        order,
        n: OneOrMany::Many(ns),
        delta: OneOrMany::One(delta),
        ..Default::default()
    };
    let sweep = run_sweep(&config)?;
    println!("{:>5} {:>12} {:>12} {:>8} {:>10}", "N", "L2", "H1", "iters", "assembly");
    for r in &sweep.rows {
        println!("{:>5} {:>12.4e} {:>12.4e} {:>8} {:>9.3}s", r.n, r.l2_error, r.h1_error, r.cg_iters, r.assembly_time_s);
    }
    println!("L2 rates {:.3?}", sweep.l2_rates);
    println!("H1 rates {:.3?}", sweep.h1_rates);
    Ok(())
}

//! δ-refinement at a fixed mesh, optionally with gradient-recovery errors.
//!
//! `cargo run --release --example delta_convergence -- [order] [N] [steps] [--recovery] [--s S]`

use nlfem::experiment::{run_sweep, ExperimentConfig, OneOrMany};

fn main() -> nlfem::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let recovery = args.iter().any(|a| a == "--recovery");
    let s = args
        .iter()
        .position(|a| a == "--s")
        .map(|i| args[i + 1].parse().expect("s"))
        .unwrap_or(2.0);
    let pos: Vec<&String> = args.iter().filter(|a| !a.starts_with("--")).collect();
    let order: usize = pos.first().map(|a| a.parse().expect("order")).unwrap_or(1);
    let n: usize = pos.get(1).map(|a| a.parse().expect("N")).unwrap_or(64);
    let steps: i32 = pos.get(2).map(|a| a.parse().expect("steps")).unwrap_or(4);
    let deltas: Vec<f64> = (0..steps).map(|j| 0.04 * 0.5f64.powi(j)).collect();
    let config = ExperimentConfig {
        order,
        s,
        n: OneOrMany::One(n),
        delta: OneOrMany::Many(deltas),
        recovery,
        ..Default::default()
    };
    let sweep = run_sweep(&config)?;
    println!("{:>10} {:>12} {:>12} {:>12} {:>12} {:>12}", "delta", "L2", "H1", "grad full", "interior", "corrected");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:12.4e}")).unwrap_or_else(|| format!("{:>12}", "-"));
    for r in &sweep.rows {
        println!(
            "{:>10.5} {:>12.4e} {:>12.4e} {} {} {}",
            r.delta,
            r.l2_error,
            r.h1_error,
            opt(r.grad_rec_full),
            opt(r.grad_rec_interior),
            opt(r.grad_rec_corrected)
        );
    }
    println!("L2 rates        {:.3?}", sweep.l2_rates);
    if recovery {
        println!("full rates      {:.3?}", sweep.grad_rec_full_rates);
        println!("interior rates  {:.3?}", sweep.grad_rec_interior_rates);
        println!("corrected rates {:.3?}", sweep.grad_rec_corrected_rates);
    }
    Ok(())
}

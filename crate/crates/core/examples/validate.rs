//! Runs every oracle cross-check and prints one line per check.
//!
//!     cargo run --release --example validate [integrals|assembly|recovery|all]

use nlfem::validation::{run_validate, Suite};

fn main() -> nlfem::Result<()> {
    let suite: Suite = std::env::args().nth(1).as_deref().unwrap_or("all").parse()?;
    let checks = run_validate(suite)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!("{} checks, {failed} failed", checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
    Ok(())
}

//! Closed-form Gaussian integrals next to brute-force quadrature.
//!
//!     cargo run --release --example analytic_integrals

use nlfem::integrals::{double_gauss_poly, erf, int_gauss_poly, phi, phi_shifted};
use nlfem::oracle::{composite_gauss, double_integral_oracle};
use nlfem::Poly1D;

fn main() -> nlfem::Result<()> {
    let lambda = 12.5;
    println!("erf(0.5) = {:.17}", erf(0.5));

    let (a, b) = (-0.2, 0.7);
    for k in [0, 1, 4] {
        let v = phi(a, b, lambda, k)?;
        let q = composite_gauss(&|x| x.powi(k as i32) * (-(lambda * x).powi(2)).exp(), a, b, lambda);
        println!("Φ({a}, {b}, λ, {k})      = {v:.15e}   quadrature {q:.15e}");
    }

    // Centre far outside the interval.
    let v = phi_shifted(0.1, 0.3, 0.9, lambda, 3)?;
    let q = composite_gauss(&|x| x.powi(3) * (-(lambda * (x - 0.9)).powi(2)).exp(), 0.1, 0.3, lambda);
    println!("Φ̄(0.1, 0.3, 0.9, λ, 3) = {v:.15e}   quadrature {q:.15e}");

    let p = Poly1D::new(&[1.0, -2.0, 0.5]);
    let q_poly = Poly1D::new(&[0.0, 1.0]);
    let v = int_gauss_poly(&p, 0.0, 1.0, 0.4, lambda)?;
    let q = composite_gauss(&|x| p.evaluate(x) * (-(lambda * (x - 0.4)).powi(2)).exp(), 0.0, 1.0, lambda);
    println!("I(p, 0, 1, 0.4, λ)     = {v:.15e}   quadrature {q:.15e}");

    let v = double_gauss_poly(&p, &q_poly, lambda, 0.0, 0.25, 0.25, 0.5)?;
    let q = double_integral_oracle(&p, &q_poly, lambda, 0.0, 0.25, 0.25, 0.5)?;
    println!("Ī(p, q) adjacent cells  = {v:.15e}   quadrature {q:.15e}");
    Ok(())
}

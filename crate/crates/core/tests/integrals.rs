use nlfem::integrals::{double_gauss_poly, int_gauss_poly, phi, phi_shifted};
use nlfem::oracle::double_integral_oracle;
use nlfem::Poly1D;
use proptest::prelude::*;

fn poly(max_degree: usize) -> impl Strategy<Value = Poly1D> {
    proptest::collection::vec(-1.0f64..1.0, 1..=max_degree + 1).prop_map(|c| Poly1D::new(&c))
}

fn shifted(p: &Poly1D, t: f64) -> Poly1D {
    // q(x) = p(x - t)
    p.taylor_shift(-t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn double_integral_matches_oracle(p in poly(6), q in poly(6), lambda in 0.5f64..50.0,
                                      a in -1.0f64..1.0, len in 0.01f64..1.0,
                                      ap in -1.0f64..1.0, lenp in 0.01f64..1.0) {
        let v = double_gauss_poly(&p, &q, lambda, a, a + len, ap, ap + lenp).unwrap();
        let o = double_integral_oracle(&p, &q, lambda, a, a + len, ap, ap + lenp).unwrap();
        prop_assert!((v - o).abs() <= 1e-9 * (1.0 + o.abs()), "{v} vs {o}");
    }

    #[test]
    fn phi_is_unshifted_phi_bar(a in -2.0f64..2.0, len in 0.01f64..2.0, lambda in 0.5f64..50.0, k in 0usize..=8) {
        let x = phi(a, a + len, lambda, k).unwrap();
        let y = phi_shifted(a, a + len, 0.0, lambda, k).unwrap();
        prop_assert!((x - y).abs() <= 1e-15 * x.abs());
    }

    #[test]
    fn mass_is_positive_and_scales(a in -3.0f64..3.0, len in 0.01f64..2.0, lambda in 0.5f64..20.0) {
        let b = a + len;
        // Stay clear of underflow.
        prop_assume!(lambda * a.abs().min(b.abs()) < 20.0 || a * b <= 0.0);
        let m = phi(a, b, lambda, 0).unwrap();
        prop_assert!(m > 0.0);
        let scaled = phi(lambda * a, lambda * b, 1.0, 0).unwrap() / lambda;
        prop_assert!((m - scaled).abs() <= 1e-13 * m, "{m} vs {scaled}");
    }

    #[test]
    fn reflection(a in -1.0f64..1.0, len in 0.01f64..1.0, l in -1.5f64..1.5, lambda in 0.5f64..30.0, n in 0usize..=6) {
        let x = phi_shifted(a, a + len, l, lambda, n).unwrap();
        let y = phi_shifted(-a - len, -a, -l, lambda, n).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((x - sign * y).abs() <= 1e-12 * (x.abs() + 1e-300), "{x} vs {y}");
    }

    #[test]
    fn gauss_poly_is_linear(p in poly(6), q in poly(6), c in -3.0f64..3.0,
                            a in -1.0f64..1.0, len in 0.01f64..1.0, l in -1.5f64..1.5, lambda in 0.5f64..30.0) {
        let b = a + len;
        let combo = Poly1D::new(&(0..7).map(|i| p.coeffs().get(i).copied().unwrap_or(0.0)
            + c * q.coeffs().get(i).copied().unwrap_or(0.0)).collect::<Vec<_>>());
        let lhs = int_gauss_poly(&combo, a, b, l, lambda).unwrap();
        let rhs = int_gauss_poly(&p, a, b, l, lambda).unwrap() + c * int_gauss_poly(&q, a, b, l, lambda).unwrap();
        let scale = int_gauss_poly(&Poly1D::constant(1.0), a, b, l, lambda).unwrap() * (1.0 + c.abs()) * 7.0;
        // Subnormal results carry only a few significant bits.
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale + 1e-290);
    }

    #[test]
    fn double_integral_swaps_and_translates(p in poly(4), q in poly(4), lambda in 0.5f64..30.0,
                                            a in -1.0f64..1.0, len in 0.01f64..1.0,
                                            ap in -1.0f64..1.0, lenp in 0.01f64..1.0, t in -2.0f64..2.0) {
        let (b, bp) = (a + len, ap + lenp);
        let v = double_gauss_poly(&p, &q, lambda, a, b, ap, bp).unwrap();
        let swapped = double_gauss_poly(&q, &p, lambda, ap, bp, a, b).unwrap();
        let moved = double_gauss_poly(&shifted(&p, t), &shifted(&q, t), lambda, a + t, b + t, ap + t, bp + t).unwrap();
        let scale = 1.0 + v.abs();
        prop_assert!((v - swapped).abs() <= 1e-12 * scale);
        prop_assert!((v - moved).abs() <= 1e-9 * scale, "{v} vs {moved}");
    }
}

use nlfem::mesh::{build_mesh, BoundaryDistance, BoxDomain, Point};
use nlfem::metrics::{recovery_errors, ManufacturedSolution};
use nlfem::recovery::RecoveredField;
use nlfem::validation::{recovery_oracle_errors, recovery_primitive_errors};
use nlfem::KernelParams;
use rand::{Rng, SeedableRng};

#[test]
fn smoothing_of_unity_is_unity() {
    let params = KernelParams::new(0.05, 2.0).unwrap();
    for (name, n) in [("rect", 8), ("lshape", 8), ("cube", 4)] {
        let (mesh, dofmap) = build_mesh(&BoxDomain::named(name).unwrap(), n, 2).unwrap();
        let ones = vec![1.0; dofmap.n_dofs];
        let field = RecoveredField::new(&mesh, &dofmap, &ones, params).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let domain = BoxDomain::named(name).unwrap();
        let mut tested = 0;
        while tested < 30 {
            let x: Point = [rng.gen(), rng.gen(), if mesh.dim == 3 { rng.gen() } else { 0.0 }];
            if !domain.contains(&x) {
                continue;
            }
            assert!((field.smoothed_value(&x) - 1.0).abs() <= 1e-12, "{name} {x:?}");
            tested += 1;
        }
    }
}

#[test]
fn primitives_and_oracles() {
    let [value, grad, fd, corr] = recovery_primitive_errors(21).unwrap();
    assert!(value <= 1e-12 && grad <= 1e-10 && fd <= 1e-5);
    assert_eq!(corr, 0.0);
    let [w, s, f] = recovery_oracle_errors(22).unwrap();
    assert!(w <= 1e-10 && s <= 1e-8 && f <= 1e-7, "{w} {s} {f}");
}

#[test]
fn face_correction_is_normal_to_its_face() {
    let params = KernelParams::new(0.1, 2.0).unwrap();
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 4, 2).unwrap();
    let c = vec![0.0; dofmap.n_dofs];
    // Flux only through the bottom face.
    let field = RecoveredField::new(&mesh, &dofmap, &c, params)
        .unwrap()
        .with_flux(&|x, n| if n[1] < -0.5 { 1.0 + x[0] } else { 0.0 });
    let mut any = false;
    for x in [[0.3, 0.05, 0.0], [0.0, 0.0, 0.0], [0.9, 0.2, 0.0]] {
        let f = field.correction_f(&x);
        assert!(f[0].abs() <= 1e-14);
        any |= f[1].abs() > 1e-6;
    }
    assert!(any);
}

#[test]
fn linear_field_is_reproduced_away_from_the_boundary() {
    let params = KernelParams::new(0.02, 2.0).unwrap();
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 8, 1).unwrap();
    let c = dofmap.interpolate(|x| 2.0 * x[0] - x[1] + 0.5);
    let field = RecoveredField::new(&mesh, &dofmap, &c, params).unwrap();
    let x = [0.4, 0.6, 0.0];
    let r = field.evaluate(&x);
    assert!((r.value - (0.8 - 0.6 + 0.5)).abs() <= 1e-12);
    assert!((r.gradient[0] - 2.0).abs() <= 1e-9 && (r.gradient[1] + 1.0).abs() <= 1e-9);
}

#[test]
fn interior_norm_never_exceeds_full_norm() {
    let sol = ManufacturedSolution::named("rect-trig").unwrap();
    let domain = BoxDomain::rect();
    let distance = BoundaryDistance::new(&domain).unwrap();
    let (mesh, dofmap) = build_mesh(&domain, 8, 1).unwrap();
    let c = dofmap.interpolate(|x| sol.value(x));
    for delta in [0.1, 0.05] {
        let params = KernelParams::new(delta, 2.0).unwrap();
        let field = RecoveredField::new(&mesh, &dofmap, &c, params).unwrap().with_flux(&|x, n| sol.flux(x, n));
        let (full, interior, corrected) = recovery_errors(&field, &mesh, &sol, &distance, 3).unwrap();
        assert!(interior <= full);
        assert!(corrected < full);
    }
}

#[test]
fn error_norms_are_quadrature_converged() {
    let sol = ManufacturedSolution::named("rect-trig").unwrap();
    let domain = BoxDomain::rect();
    let distance = BoundaryDistance::new(&domain).unwrap();
    let (mesh, dofmap) = build_mesh(&domain, 8, 2).unwrap();
    let c = dofmap.interpolate(|x| sol.value(x));
    let params = KernelParams::new(0.05, 2.0).unwrap();
    let field = RecoveredField::new(&mesh, &dofmap, &c, params).unwrap().with_flux(&|x, n| sol.flux(x, n));
    let a = recovery_errors(&field, &mesh, &sol, &distance, 4).unwrap();
    let b = recovery_errors(&field, &mesh, &sol, &distance, 8).unwrap();
    for (x, y) in [(a.0, b.0), (a.1, b.1), (a.2, b.2)] {
        assert!((x - y).abs() <= 1e-3 * y, "{x} vs {y}");
    }
    let (l2a, h1a) = nlfem::metrics::solution_errors(&mesh, &dofmap, &c, &sol, 4);
    let (l2b, h1b) = nlfem::metrics::solution_errors(&mesh, &dofmap, &c, &sol, 8);
    assert!((l2a - l2b).abs() <= 1e-3 * l2b && (h1a - h1b).abs() <= 1e-3 * h1b);
}

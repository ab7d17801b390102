use nlfem::assembly::{assemble_load, assemble_operators, boundary_load, pair_stiffness_block};
use nlfem::mesh::{boundary_faces, build_mesh, BoxDomain};
use nlfem::oracle::{oracle_boundary_integral, oracle_nonlocal_energy, oracle_pair_blocks, QuadSpec};
use nlfem::KernelParams;
use rand::{Rng, SeedableRng};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn stiffness_and_volume_load_match_quadrature() {
    let params = KernelParams::new(0.2, 2.0).unwrap();
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 2, 1).unwrap();
    let ops = assemble_operators(&mesh, &dofmap, &params, true).unwrap();
    let n = dofmap.n_dofs;
    let ne = mesh.elements.len();
    let inv_d2 = 1.0 / (params.delta * params.delta);
    let cf = params.companion_factor();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    for t in 0..ne {
        let dt = dofmap.element_dofs(t);
        for tp in 0..ne {
            let dtp = dofmap.element_dofs(tp);
            let (same, cross) = oracle_pair_blocks(&mesh, t, tp, &params, QuadSpec::default()).unwrap();
            let analytic = pair_stiffness_block(&mesh, t, tp, &params);
            for k in 0..16 {
                assert!(rel(analytic.same[k], same[k]) < 1e-8);
                assert!(rel(analytic.cross[k], cross[k]) < 1e-8);
            }
            for j in 0..4 {
                for i in 0..4 {
                    a[dt[j] * n + dt[i]] += inv_d2 * same[j * 4 + i];
                    a[dt[j] * n + dtp[i]] += (cf - inv_d2) * cross[j * 4 + i];
                    b[dt[j] * n + dtp[i]] += cf * cross[j * 4 + i];
                }
            }
        }
    }
    for r in 0..n {
        for c in 0..n {
            assert!(rel(ops.stiffness.get(r, c), a[r * n + c]) < 1e-8, "({r},{c})");
            assert!(rel(ops.companion.get(r, c), b[r * n + c]) < 1e-8);
        }
    }
    // f ≡ 1 load and the row-sum identity.
    let faces = boundary_faces(&mesh, &dofmap);
    let load = assemble_load(&mesh, &dofmap, &faces, &ops, &params, &|_| 1.0, &|_, _| 0.0).unwrap();
    let ones = vec![1.0; n];
    let row_sums = ops.stiffness.matvec(&ones).unwrap();
    for r in 0..n {
        let expect: f64 = (0..n).map(|c| b[r * n + c]).sum();
        assert!(rel(load[r], expect) < 1e-8);
        assert!(rel(row_sums[r], load[r]) < 1e-9);
    }
}

#[test]
fn boundary_load_matches_quadrature() {
    let params = KernelParams::new(0.2, 2.0).unwrap();
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 2, 1).unwrap();
    let faces = boundary_faces(&mesh, &dofmap);
    let load = boundary_load(&mesh, &dofmap, &faces, &params, &|_, _| 1.0).unwrap();
    let mut expect = vec![0.0; dofmap.n_dofs];
    for t in 0..mesh.elements.len() {
        for face in &faces {
            let v = oracle_boundary_integral(&mesh, face, t, &params, QuadSpec::default()).unwrap();
            let m = face.local_nodes.len();
            for (j, &dof) in dofmap.element_dofs(t).iter().enumerate() {
                expect[dof] += 2.0 * params.companion_factor() * (0..m).map(|i| v[j * m + i]).sum::<f64>();
            }
        }
    }
    for (l, e) in load.iter().zip(&expect) {
        assert!(rel(*l, *e) < 1e-8, "{l} vs {e}");
    }
}

#[test]
fn energy_identity_and_symmetry() {
    let params = KernelParams::new(0.2, 2.0).unwrap();
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 2, 1).unwrap();
    let a = assemble_operators(&mesh, &dofmap, &params, true).unwrap().stiffness;
    assert!(a.symmetry_defect() <= 1e-12 * a.max_abs());
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..3 {
        let c: Vec<f64> = (0..dofmap.n_dofs).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e = oracle_nonlocal_energy(&mesh, &dofmap, &c, &params, QuadSpec::with_points(48)).unwrap();
        assert!(rel(a.energy(&c).unwrap(), e) < 1e-6);
    }
}

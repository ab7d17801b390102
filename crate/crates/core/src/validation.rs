//! Oracle cross-checks behind the `validate` subcommand.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::assembly::{assemble_load, assemble_operators, boundary_load, pair_stiffness_block};
use crate::error::{Error, Result};
use crate::integrals::{double_gauss_poly, int_gauss_poly, phi, phi_shifted, KernelParams};
use crate::mesh::{boundary_faces, build_mesh, BoxDomain, Point};
use crate::oracle::{
    composite_gauss, double_integral_oracle_scaled, oracle_boundary_integral, oracle_correction, oracle_nonlocal_energy,
    oracle_pair_blocks, oracle_smoothed_value, oracle_weight, QuadSpec,
};
use crate::poly::Poly1D;
use crate::recovery::RecoveredField;
use crate::sparse::SparseSymMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Integrals,
    Assembly,
    Recovery,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integrals" => Ok(Self::Integrals),
            "assembly" => Ok(Self::Assembly),
            "recovery" => Ok(Self::Recovery),
            "all" => Ok(Self::All),
            _ => Err(Error::Unknown { kind: "suite", name: s.into() }),
        }
    }
}

/// Outcome of one check: the worst observed error against its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub bound: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, error: f64, bound: f64) -> Self {
        Self { name: name.into(), error, bound }
    }

    pub fn passed(&self) -> bool {
        self.error <= self.bound
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<44} {:.3e} (bound {:.1e})", self.name, self.error, self.bound)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn random_poly(rng: &mut StdRng, max_degree: usize) -> Poly1D {
    let deg = rng.gen_range(0..=max_degree);
    let c: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Poly1D::new(&c)
}

/// Below this the integrals are treated as underflowed.
const TINY: f64 = 1e-290;

/// `|v - o|` relative to `magnitude`, the integral of the absolute
/// integrand; both-underflowed values agree.
fn rel_to_magnitude(v: f64, o: f64, magnitude: f64) -> f64 {
    if magnitude < TINY {
        return if v.abs() <= TINY { 0.0 } else { f64::INFINITY };
    }
    (v - o).abs() / magnitude.max(o.abs())
}

/// Worst relative errors of `count` random cases of each closed-form
/// integral against composite Gauss quadrature: `[Φ, Φ̄, I, Ī]`.
///
/// Errors are measured against the integral of the absolute integrand, the
/// scale at which a quadrature reference is itself accurate.
pub fn integral_cases(count: usize, seed: u64) -> Result<[f64; 4]> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];
    for case in 0..count {
        let lambda = rng.gen_range(0.5..50.0);
        let a = rng.gen_range(-1.0..1.0);
        let b = a + rng.gen_range(0.01..1.0);
        let l = rng.gen_range(-1.0..1.5);
        let slot = case % 4;
        let err = match slot {
            0 => {
                let k = rng.gen_range(0..=6);
                let f = |x: f64| x.powi(k as i32) * (-(lambda * x).powi(2)).exp();
                let o = composite_gauss(&f, a, b, lambda);
                rel_to_magnitude(phi(a, b, lambda, k)?, o, composite_gauss(&|x| f(x).abs(), a, b, lambda))
            }
            1 => {
                let n = rng.gen_range(0..=6);
                let f = |x: f64| x.powi(n as i32) * (-(lambda * (x - l)).powi(2)).exp();
                let o = composite_gauss(&f, a, b, lambda);
                rel_to_magnitude(phi_shifted(a, b, l, lambda, n)?, o, composite_gauss(&|x| f(x).abs(), a, b, lambda))
            }
            2 => {
                let p = random_poly(&mut rng, 6);
                let f = |x: f64| p.evaluate(x) * (-(lambda * (x - l)).powi(2)).exp();
                let o = composite_gauss(&f, a, b, lambda);
                rel_to_magnitude(int_gauss_poly(&p, a, b, l, lambda)?, o, composite_gauss(&|x| f(x).abs(), a, b, lambda))
            }
            _ => {
                let p = random_poly(&mut rng, 6);
                let q = random_poly(&mut rng, 6);
                let ap = rng.gen_range(-1.0..1.0);
                let bp = ap + rng.gen_range(0.01..1.0);
                let v = double_gauss_poly(&p, &q, lambda, a, b, ap, bp)?;
                let o = double_integral_oracle_scaled(&p, &q, lambda, a, b, ap, bp)?;
                if o.log_factor + o.magnitude.max(TINY).ln() < TINY.ln() {
                    rel_to_magnitude(v, 0.0, 0.0)
                } else {
                    rel_to_magnitude(v * (-o.log_factor).exp(), o.value, o.magnitude)
                }
            }
        };
        worst[slot] = worst[slot].max(err);
    }
    Ok(worst)
}

pub fn run_integrals() -> Result<Vec<Check>> {
    let w = integral_cases(200, 20240611)?;
    Ok(vec![
        Check::new("integrals: moments vs quadrature", w[0], 1e-9),
        Check::new("integrals: shifted moments vs quadrature", w[1], 1e-9),
        Check::new("integrals: gauss-poly vs quadrature", w[2], 1e-9),
        Check::new("integrals: double gauss-poly vs quadrature", w[3], 1e-9),
    ])
}

/// Stiffness, companion and load entries on the 2×2 unit-square mesh
/// against brute-force quadrature: `[stiffness, volume load, boundary load]`.
pub fn assembly_oracle_errors(params: &KernelParams) -> Result<[f64; 3]> {
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 2, 1)?;
    let ops = assemble_operators(&mesh, &dofmap, params, true)?;
    let n = dofmap.n_dofs;
    let nb = mesh.nodes_per_element();
    let inv_d2 = 1.0 / (params.delta * params.delta);
    let cf = params.companion_factor();
    let mut a = vec![0.0; n * n];
    let mut b1 = vec![0.0; n];
    let mut block_err = 0.0f64;
    for t in 0..mesh.elements.len() {
        let dt = dofmap.element_dofs(t);
        for tp in 0..mesh.elements.len() {
            let dtp = dofmap.element_dofs(tp);
            let (same, cross) = oracle_pair_blocks(&mesh, t, tp, params, QuadSpec::default())?;
            let block = pair_stiffness_block(&mesh, t, tp, params);
            for k in 0..nb * nb {
                block_err = block_err.max(rel(block.same[k], same[k])).max(rel(block.cross[k], cross[k]));
            }
            for j in 0..nb {
                for i in 0..nb {
                    a[dt[j] * n + dt[i]] += inv_d2 * same[j * nb + i];
                    a[dt[j] * n + dtp[i]] += (cf - inv_d2) * cross[j * nb + i];
                    b1[dt[j]] += cf * cross[j * nb + i];
                }
            }
        }
    }
    let mut stiff = block_err;
    for r in 0..n {
        for c in 0..n {
            stiff = stiff.max(rel(ops.stiffness.get(r, c), a[r * n + c]));
        }
    }
    let faces = boundary_faces(&mesh, &dofmap);
    let load = assemble_load(&mesh, &dofmap, &faces, &ops, params, &|_| 1.0, &|_, _| 0.0)?;
    let vol = load.iter().zip(&b1).fold(0.0f64, |m, (l, e)| m.max(rel(*l, *e)));

    let bl = boundary_load(&mesh, &dofmap, &faces, params, &|_, _| 1.0)?;
    let mut expect = vec![0.0; n];
    for t in 0..mesh.elements.len() {
        for face in &faces {
            let v = oracle_boundary_integral(&mesh, face, t, params, QuadSpec::default())?;
            let m = face.local_nodes.len();
            for (j, &dof) in dofmap.element_dofs(t).iter().enumerate() {
                expect[dof] += 2.0 * cf * (0..m).map(|i| v[j * m + i]).sum::<f64>();
            }
        }
    }
    let bnd = bl.iter().zip(&expect).fold(0.0f64, |m, (l, e)| m.max(rel(*l, *e)));
    Ok([stiff, vol, bnd])
}

/// `[symmetry, constant annihilation, energy identity]` on the 2×2 mesh.
pub fn structural_errors(params: &KernelParams, samples: usize, seed: u64) -> Result<[f64; 3]> {
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 2, 1)?;
    let ops = assemble_operators(&mesh, &dofmap, params, true)?;
    let a = &ops.stiffness;
    let sym = a.symmetry_defect() / a.max_abs();
    let annihilation = diffusion_annihilation(&ops.stiffness, &ops.companion)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut energy = 0.0f64;
    for _ in 0..samples {
        let c: Vec<f64> = (0..dofmap.n_dofs).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e = oracle_nonlocal_energy(&mesh, &dofmap, &c, params, QuadSpec::with_points(48))?;
        energy = energy.max(rel(a.energy(&c)?, e));
    }
    Ok([sym, annihilation, energy])
}

/// `‖(A − B) 𝟙‖_∞ / ‖A − B‖_∞` where `A − B` is the diffusion part.
pub fn diffusion_annihilation(stiffness: &SparseSymMatrix, companion: &SparseSymMatrix) -> Result<f64> {
    let ones = vec![1.0; stiffness.n()];
    let av = stiffness.matvec(&ones)?;
    let bv = companion.matvec(&ones)?;
    let mut row_norm = 0.0f64;
    for r in 0..stiffness.n() {
        let (ac, avals) = stiffness.row(r);
        let (bc, bvals) = companion.row(r);
        debug_assert_eq!(ac, bc);
        row_norm = row_norm.max(avals.iter().zip(bvals).map(|(x, y)| (x - y).abs()).sum());
    }
    let defect = av.iter().zip(&bv).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(defect / row_norm)
}

/// Relative energy-identity error after scaling one stored value by
/// `1 + perturbation`; a working identity check must flag it.
pub fn mutated_energy_error(params: &KernelParams, perturbation: f64) -> Result<f64> {
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 2, 1)?;
    let a = assemble_operators(&mesh, &dofmap, params, true)?.stiffness;
    let mut vals = a.values().to_vec();
    vals[0] *= 1.0 + perturbation;
    let mutated = SparseSymMatrix::from_csr(a.n(), a.row_ptr().to_vec(), a.cols().to_vec(), vals)?;
    let c = vec![1.0; dofmap.n_dofs];
    let e = oracle_nonlocal_energy(&mesh, &dofmap, &c, params, QuadSpec::with_points(48))?;
    Ok(rel(mutated.energy(&c)?, e))
}

pub fn run_assembly() -> Result<Vec<Check>> {
    let params = KernelParams::new(0.2, 2.0)?;
    let [stiff, vol, bnd] = assembly_oracle_errors(&params)?;
    let [sym, ann, energy] = structural_errors(&params, 3, 11)?;
    let mutated = mutated_energy_error(&params, 1e-3)?;
    Ok(vec![
        Check::new("assembly: stiffness entries vs quadrature", stiff, 1e-8),
        Check::new("assembly: volume load vs quadrature", vol, 1e-8),
        Check::new("assembly: boundary load vs quadrature", bnd, 1e-8),
        Check::new("assembly: symmetry", sym, 1e-12),
        Check::new("assembly: constant annihilation", ann, 1e-10),
        Check::new("assembly: energy identity", energy, 1e-6),
        // Inverted: the corrupted matrix must violate the identity.
        Check::new("assembly: corrupted entry detected", if mutated > 1e-6 { 0.0 } else { 1.0 }, 0.0),
    ])
}

/// Random interior points of the unit square.
fn random_points(rng: &mut StdRng, count: usize, margin: f64) -> Vec<Point> {
    (0..count)
        .map(|_| [rng.gen_range(margin..1.0 - margin), rng.gen_range(margin..1.0 - margin), 0.0])
        .collect()
}

/// `[S(const) − const, |∇S(const)|, gradient vs finite differences,
/// |F| with zero flux]`, worst over random points.
pub fn recovery_primitive_errors(seed: u64) -> Result<[f64; 4]> {
    let params = KernelParams::new(0.1, 2.0)?;
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 8, 2)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let konst = vec![2.5; dofmap.n_dofs];
    let field = RecoveredField::new(&mesh, &dofmap, &konst, params)?;
    let (mut value, mut grad) = (0.0f64, 0.0f64);
    for x in random_points(&mut rng, 50, 0.0) {
        let r = field.evaluate(&x);
        value = value.max((r.value - 2.5).abs());
        grad = grad.max(r.gradient.iter().fold(0.0f64, |m, g| m.max(g.abs())));
    }
    let c: Vec<f64> = (0..dofmap.n_dofs).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let field = RecoveredField::new(&mesh, &dofmap, &c, params)?;
    let step = 1e-5;
    let (mut fd, mut corr) = (0.0f64, 0.0f64);
    for x in random_points(&mut rng, 50, 2e-5) {
        let r = field.evaluate(&x);
        for d in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[d] += step;
            xm[d] -= step;
            let num = (field.smoothed_value(&xp) - field.smoothed_value(&xm)) / (2.0 * step);
            fd = fd.max((num - r.gradient[d]).abs());
        }
        corr = corr.max(r.correction.iter().fold(0.0f64, |m, g| m.max(g.abs())));
    }
    Ok([value, grad, fd, corr])
}

/// Worst relative errors of `w`, `S_δ u_h` and `F_δ` against quadrature on
/// the unit square with `δ = 0.1` and unit flux.
pub fn recovery_oracle_errors(seed: u64) -> Result<[f64; 3]> {
    let params = KernelParams::new(0.1, 2.0)?;
    let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 4, 1)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let c: Vec<f64> = (0..dofmap.n_dofs).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let field = RecoveredField::new(&mesh, &dofmap, &c, params)?.with_flux(&|_, _| 1.0);
    let spec = QuadSpec::with_points(32);
    let mut worst = [0.0f64; 3];
    for x in [[0.13, 0.71, 0.0], [0.02, 0.5, 0.0], [0.95, 0.97, 0.0], [0.3, 0.08, 0.0]] {
        let r = field.evaluate(&x);
        worst[0] = worst[0].max(rel(r.weight, oracle_weight(&mesh, &x, &params, spec)?));
        worst[1] = worst[1].max(rel(r.value, oracle_smoothed_value(&mesh, &dofmap, &c, &x, &params, spec)?));
        let o = oracle_correction(&mesh, field.faces(), field.face_flux(), &x, &params, spec)?;
        let scale = o.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for d in 0..2 {
            worst[2] = worst[2].max((r.correction[d] - o[d]).abs() / scale.max(1e-300));
        }
    }
    Ok(worst)
}

pub fn run_recovery() -> Result<Vec<Check>> {
    let [value, grad, fd, corr] = recovery_primitive_errors(5)?;
    let [w, s, f] = recovery_oracle_errors(9)?;
    Ok(vec![
        Check::new("recovery: smoothing keeps constants", value, 1e-12),
        Check::new("recovery: gradient of constant vanishes", grad, 1e-10),
        Check::new("recovery: gradient vs finite differences", fd, 1e-5),
        Check::new("recovery: zero flux gives zero correction", corr, 0.0),
        Check::new("recovery: weight vs quadrature", w, 1e-10),
        Check::new("recovery: smoothed value vs quadrature", s, 1e-8),
        Check::new("recovery: correction vs quadrature", f, 1e-7),
    ])
}

pub fn run_validate(suite: Suite) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Integrals | Suite::All) {
        out.extend(run_integrals()?);
    }
    if matches!(suite, Suite::Assembly | Suite::All) {
        out.extend(run_assembly()?);
    }
    if matches!(suite, Suite::Recovery | Suite::All) {
        out.extend(run_recovery()?);
    }
    Ok(out)
}

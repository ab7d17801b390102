//! Brute-force quadrature references for the closed-form integrals.
//!
//! Nothing in here touches `integrals`: every value is the plain integrand
//! summed over tensor Gauss–Legendre points, with a refinement check that
//! refuses to answer when two resolutions disagree.

use crate::error::{Error, Result};
use crate::integrals::KernelParams;
use crate::mesh::{BoundaryFace, CartesianMesh, DofMap, Point};
use crate::poly::Poly1D;
use crate::quadrature::{gauss_legendre, gauss_legendre_on};

/// Tensor rule resolution and whether to cross-check against half of it.
#[derive(Clone, Copy, Debug)]
pub struct QuadSpec {
    pub points: usize,
    pub refine: bool,
    pub rel_tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { points: 64, refine: true, rel_tol: 1e-9 }
    }
}

impl QuadSpec {
    pub fn with_points(points: usize) -> Self {
        Self { points, ..Self::default() }
    }

    fn coarse(&self) -> Self {
        Self { points: (self.points / 2).max(1), refine: false, ..*self }
    }

    /// Runs `eval` at this resolution and, if requested, at half of it.
    fn checked<T>(&self, eval: impl Fn(&QuadSpec) -> T, scalars: impl Fn(&T) -> Vec<f64>) -> Result<T> {
        let fine = eval(self);
        if self.refine {
            let coarse = eval(&self.coarse());
            let (f, c) = (scalars(&fine), scalars(&coarse));
            let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in c.iter().zip(&f) {
                if (a - b).abs() > self.rel_tol * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::OracleUntrusted { coarse: *a, fine: *b });
                }
            }
        }
        Ok(fine)
    }
}

/// Composite 20-point Gauss on panels no wider than `0.5 / scale`.
pub fn composite_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, scale: f64) -> f64 {
    composite_panels(a, b, scale, 20).iter().map(|(x, w)| w * f(*x)).sum()
}

fn composite_panels(a: f64, b: f64, scale: f64, pts: usize) -> Vec<(f64, f64)> {
    let width = 0.5 / scale.max(1e-12);
    let panels = (((b - a) / width).ceil() as usize).clamp(1, 20_000);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| gauss_legendre_on(pts, a + p as f64 * h, a + (p + 1) as f64 * h))
        .collect()
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// A double integral stored as `value · e^{log_factor}`, with `magnitude`
/// the same integral of `|p| |q|` under the same factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledIntegral {
    pub value: f64,
    pub magnitude: f64,
    pub log_factor: f64,
}

impl ScaledIntegral {
    pub fn unscaled(&self) -> f64 {
        self.value * self.log_factor.exp()
    }
}

/// `∫_a^b p(x) ∫_{a'}^{b'} e^{-λ²(x-y)²} q(y) dy dx` by nested composite Gauss.
pub fn double_integral_oracle(
    p: &Poly1D,
    q: &Poly1D,
    lambda: f64,
    a: f64,
    b: f64,
    ap: f64,
    bp: f64,
) -> Result<f64> {
    double_integral_oracle_scaled(p, q, lambda, a, b, ap, bp).map(|s| s.unscaled())
}

/// Same integral with `e^{-λ²g²}` factored out, `g` the gap between the
/// intervals, so that well separated pairs stay representable.
///
/// Panel pairs whose kernel stays below `e^{-49}` of that factor are skipped.
pub fn double_integral_oracle_scaled(
    p: &Poly1D,
    q: &Poly1D,
    lambda: f64,
    a: f64,
    b: f64,
    ap: f64,
    bp: f64,
) -> Result<ScaledIntegral> {
    let g = (ap - b).max(a - bp).max(0.0);
    let g2 = g * g;
    let l2 = lambda * lambda;
    // Away from the closest corner the scaled kernel decays like
    // e^{-λ²(t² + 2gt)}; beyond e^{-49} the intervals are cut off.
    let (x_span, y_span) = if g > 0.0 {
        let reach = (g2 + 49.0 / l2).sqrt() - g;
        if ap >= b {
            ([a.max(b - reach), b], [ap, bp.min(ap + reach)])
        } else {
            ([a, b.min(a + reach)], [ap.max(bp - reach), bp])
        }
    } else {
        ([a, b], [ap, bp])
    };
    let width = 0.5 / lambda.max(2.0 * l2 * g);
    let eval = |pts: usize| {
        let split = |[lo, hi]: [f64; 2]| {
            let n = (((hi - lo) / width).ceil() as usize).clamp(1, 20_000);
            let h = (hi - lo) / n as f64;
            (0..n).map(|i| [lo + i as f64 * h, lo + (i + 1) as f64 * h]).collect::<Vec<_>>()
        };
        let xs = split(x_span);
        let ys = split(y_span);
        let (gx, gw) = gauss_legendre(pts);
        let mut total = 0.0;
        let mut magnitude = 0.0;
        for xp in &xs {
            let xr: Vec<(f64, f64)> = map_rule(&gx, &gw, xp[0], xp[1]);
            for yp in &ys {
                let gap = (yp[0] - xp[1]).max(xp[0] - yp[1]).max(0.0);
                if l2 * (gap * gap - g2) > 49.0 {
                    continue;
                }
                let yr = map_rule(&gx, &gw, yp[0], yp[1]);
                for &(x, wx) in &xr {
                    let px = p.evaluate(x);
                    let (mut inner, mut inner_abs) = (0.0, 0.0);
                    for &(y, wy) in &yr {
                        let k = wy * (-l2 * ((x - y) * (x - y) - g2)).exp();
                        let qy = q.evaluate(y);
                        inner += k * qy;
                        inner_abs += k * qy.abs();
                    }
                    total += wx * px * inner;
                    magnitude += wx * px.abs() * inner_abs;
                }
            }
        }
        (total, magnitude)
    };
    let (fine, magnitude) = eval(16);
    let (coarse, _) = eval(10);
    if (fine - coarse).abs() > 1e-11 * (magnitude + fine.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::OracleUntrusted { coarse, fine });
    }
    Ok(ScaledIntegral { value: fine, magnitude, log_factor: -lambda * lambda * g2 })
}

fn map_rule(x: &[f64], w: &[f64], a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(w).map(|(&xi, &wi)| (mid + half * xi, half * wi)).collect()
}

/// Tensor Gauss points on a box.
fn box_rule(intervals: &[[f64; 2]], n: usize) -> Vec<(Point, f64)> {
    let rules: Vec<Vec<(f64, f64)>> = intervals.iter().map(|iv| gauss_legendre_on(n, iv[0], iv[1])).collect();
    let total: usize = n.pow(intervals.len() as u32);
    (0..total)
        .map(|idx| {
            let mut p = [0.0; 3];
            let mut w = 1.0;
            let mut r = idx;
            for (d, rule) in rules.iter().enumerate() {
                let (x, wx) = rule[r % n];
                p[d] = x;
                w *= wx;
                r /= n;
            }
            (p, w)
        })
        .collect()
}

fn dist2(x: &Point, y: &Point) -> f64 {
    (0..3).map(|d| (x[d] - y[d]) * (x[d] - y[d])).sum()
}

/// Which argument the second polynomial factor is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairVariant {
    /// `∫_T ∫_T' R p(x) q(x) dy dx`.
    SameArgument,
    /// `∫_T ∫_T' R p(x) q(y) dy dx`.
    Cross,
}

/// Brute-force `2·dim`-dimensional element-pair integral of a separable
/// integrand. Factors are in global coordinates.
pub fn oracle_pair_integral(
    p_factors: &[Poly1D],
    q_factors: &[Poly1D],
    cell_t: &[[f64; 2]],
    cell_tp: &[[f64; 2]],
    params: &KernelParams,
    variant: PairVariant,
    spec: QuadSpec,
) -> Result<f64> {
    let eval = |s: &QuadSpec| {
        let xs = box_rule(cell_t, s.points);
        let ys = box_rule(cell_tp, s.points);
        let prod = |f: &[Poly1D], x: &Point| f.iter().enumerate().map(|(d, p)| p.evaluate(x[d])).product::<f64>();
        let mut total = 0.0;
        for (x, wx) in &xs {
            let px = prod(p_factors, x);
            let qx = prod(q_factors, x);
            let mut inner = 0.0;
            for (y, wy) in &ys {
                let k = params.kernel(dist2(x, y));
                inner += match variant {
                    PairVariant::SameArgument => wy * k * qx,
                    PairVariant::Cross => wy * k * prod(q_factors, y),
                };
            }
            total += wx * px * inner;
        }
        total
    };
    spec.checked(eval, |v| vec![*v])
}

/// Both element-pair blocks at once: `same[j·n + i] = ∫_T∫_T' R ψ_j(x) ψ_i(x)`
/// (indices local to `T`) and `cross[j·n + i] = ∫_T∫_T' R ψ_j(x) ψ_i'(y)`
/// (`i` local to `T'`).
pub fn oracle_pair_blocks(
    mesh: &CartesianMesh,
    t: usize,
    tp: usize,
    params: &KernelParams,
    spec: QuadSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nb = mesh.nodes_per_element();
    let eval = |s: &QuadSpec| {
        let xs = box_rule(&intervals(mesh, t), s.points);
        let ys = box_rule(&intervals(mesh, tp), s.points);
        let mut ybasis = vec![0.0; nb * ys.len()];
        for (iy, (y, _)) in ys.iter().enumerate() {
            mesh.basis_values(tp, y, &mut ybasis[iy * nb..(iy + 1) * nb]);
        }
        let mut xb = vec![0.0; nb];
        let mut same = vec![0.0; nb * nb];
        let mut cross = vec![0.0; nb * nb];
        let mut v = vec![0.0; nb];
        for (x, wx) in &xs {
            mesh.basis_values(t, x, &mut xb);
            let mut mass = 0.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            for (iy, (y, wy)) in ys.iter().enumerate() {
                let k = wy * params.kernel(dist2(x, y));
                mass += k;
                for (vi, b) in v.iter_mut().zip(&ybasis[iy * nb..(iy + 1) * nb]) {
                    *vi += k * b;
                }
            }
            for j in 0..nb {
                for i in 0..nb {
                    same[j * nb + i] += wx * xb[j] * xb[i] * mass;
                    cross[j * nb + i] += wx * xb[j] * v[i];
                }
            }
        }
        (same, cross)
    };
    spec.checked(eval, |(a, b)| a.iter().chain(b).copied().collect())
}

fn intervals(mesh: &CartesianMesh, e: usize) -> Vec<[f64; 2]> {
    (0..mesh.dim).map(|d| mesh.elements[e].interval(d)).collect()
}

fn field_at(mesh: &CartesianMesh, dofmap: &DofMap, c: &[f64], e: usize, x: &Point, buf: &mut [f64]) -> f64 {
    mesh.basis_values(e, x, buf);
    dofmap.element_dofs(e).iter().zip(buf.iter()).map(|(&g, b)| c[g] * b).sum()
}

/// `E_δ(u_h)² = (1/2δ²) ∬ R (u(x)-u(y))² + ∬ R̄ u(x) u(y)` by tensor
/// quadrature over every element pair.
pub fn oracle_nonlocal_energy(
    mesh: &CartesianMesh,
    dofmap: &DofMap,
    c: &[f64],
    params: &KernelParams,
    spec: QuadSpec,
) -> Result<f64> {
    let nb = mesh.nodes_per_element();
    let eval = |s: &QuadSpec| {
        let mut buf = vec![0.0; nb];
        let pts: Vec<Vec<(Point, f64, f64)>> = (0..mesh.elements.len())
            .map(|e| {
                box_rule(&intervals(mesh, e), s.points)
                    .into_iter()
                    .map(|(x, w)| {
                        let u = field_at(mesh, dofmap, c, e, &x, &mut buf);
                        (x, w, u)
                    })
                    .collect()
            })
            .collect();
        let inv2d2 = 0.5 / (params.delta * params.delta);
        let cf = params.companion_factor();
        let mut total = 0.0;
        for xs in &pts {
            for ys in &pts {
                for (x, wx, ux) in xs {
                    let mut inner = 0.0;
                    for (y, wy, uy) in ys {
                        let k = params.kernel(dist2(x, y));
                        let d = ux - uy;
                        inner += wy * k * (inv2d2 * d * d + cf * ux * uy);
                    }
                    total += wx * inner;
                }
            }
        }
        total
    };
    spec.checked(eval, |v| vec![*v])
}

/// `∫_T ∫_F' R(x, z) ψ_j(x) ψ̃_i(z) dS_z dx` for every local `j` of `T` and
/// trace node `i` of the face, as `out[j·m + i]`.
pub fn oracle_boundary_integral(
    mesh: &CartesianMesh,
    face: &BoundaryFace,
    t: usize,
    params: &KernelParams,
    spec: QuadSpec,
) -> Result<Vec<f64>> {
    let nb = mesh.nodes_per_element();
    let m = face.local_nodes.len();
    let eval = |s: &QuadSpec| {
        let xs = box_rule(&intervals(mesh, t), s.points);
        let zs = face_rule(mesh, face, s.points);
        let mut fb = vec![0.0; nb];
        let ztrace: Vec<Vec<f64>> = zs
            .iter()
            .map(|(z, _)| {
                mesh.basis_values(face.element, z, &mut fb);
                face.local_nodes.iter().map(|&l| fb[l]).collect()
            })
            .collect();
        let mut xb = vec![0.0; nb];
        let mut out = vec![0.0; nb * m];
        let mut v = vec![0.0; m];
        for (x, wx) in &xs {
            mesh.basis_values(t, x, &mut xb);
            v.iter_mut().for_each(|e| *e = 0.0);
            for ((z, wz), tr) in zs.iter().zip(&ztrace) {
                let k = wz * params.kernel(dist2(x, z));
                for (vi, b) in v.iter_mut().zip(tr) {
                    *vi += k * b;
                }
            }
            for j in 0..nb {
                for i in 0..m {
                    out[j * m + i] += wx * xb[j] * v[i];
                }
            }
        }
        out
    };
    spec.checked(eval, |v| v.clone())
}

fn face_rule(mesh: &CartesianMesh, face: &BoundaryFace, n: usize) -> Vec<(Point, f64)> {
    let tangential: Vec<usize> = (0..mesh.dim).filter(|&d| d != face.axis).collect();
    let ivs: Vec<[f64; 2]> = tangential.iter().map(|&d| face.extent[d]).collect();
    box_rule(&ivs, n)
        .into_iter()
        .map(|(p, w)| {
            let mut z = [0.0; 3];
            z[face.axis] = face.level;
            for (i, &d) in tangential.iter().enumerate() {
                z[d] = p[i];
            }
            (z, w)
        })
        .collect()
}

/// `w_δ(x) = ∫_Ω R(x, y) dy`.
pub fn oracle_weight(mesh: &CartesianMesh, x: &Point, params: &KernelParams, spec: QuadSpec) -> Result<f64> {
    let eval = |s: &QuadSpec| {
        (0..mesh.elements.len())
            .map(|e| box_rule(&intervals(mesh, e), s.points).iter().map(|(y, w)| w * params.kernel(dist2(x, y))).sum::<f64>())
            .sum::<f64>()
    };
    spec.checked(eval, |v| vec![*v])
}

/// `S_δ u_h(x)` by quadrature of numerator and denominator.
pub fn oracle_smoothed_value(
    mesh: &CartesianMesh,
    dofmap: &DofMap,
    c: &[f64],
    x: &Point,
    params: &KernelParams,
    spec: QuadSpec,
) -> Result<f64> {
    let nb = mesh.nodes_per_element();
    let eval = |s: &QuadSpec| {
        let mut buf = vec![0.0; nb];
        let (mut num, mut den) = (0.0, 0.0);
        for e in 0..mesh.elements.len() {
            for (y, w) in box_rule(&intervals(mesh, e), s.points) {
                let k = w * params.kernel(dist2(x, &y));
                num += k * field_at(mesh, dofmap, c, e, &y, &mut buf);
                den += k;
            }
        }
        num / den
    };
    spec.checked(eval, |v| vec![*v])
}

/// Correction field `F_δ(x)` from its defining boundary × volume integral,
/// with `g` given by its nodal values along each face.
pub fn oracle_correction(
    mesh: &CartesianMesh,
    faces: &[BoundaryFace],
    face_g: &[Vec<f64>],
    x: &Point,
    params: &KernelParams,
    spec: QuadSpec,
) -> Result<Point> {
    let nb = mesh.nodes_per_element();
    let eval = |s: &QuadSpec| {
        let vol: Vec<(Point, f64)> = (0..mesh.elements.len())
            .flat_map(|e| box_rule(&intervals(mesh, e), s.points))
            .collect();
        let w: f64 = vol.iter().map(|(y, wy)| wy * params.kernel(dist2(x, y))).sum();
        let mut fb = vec![0.0; nb];
        let mut out = [0.0; 3];
        for (face, g) in faces.iter().zip(face_g) {
            let n = face.outward_normal();
            for (z, wz) in face_rule(mesh, face, s.points) {
                mesh.basis_values(face.element, &z, &mut fb);
                let gz: f64 = face.local_nodes.iter().zip(g).map(|(&l, gi)| fb[l] * gi).sum();
                let kz = wz * params.kernel(dist2(x, &z)) * gz;
                if kz == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for (y, wy) in &vol {
                    let dn: f64 = (0..3).map(|d| (y[d] - z[d]) * n[d]).sum();
                    inner += wy * params.kernel(dist2(x, y)) * dn;
                }
                for d in 0..3 {
                    out[d] += kz * inner * n[d];
                }
            }
        }
        for o in out.iter_mut() {
            *o /= w * w;
        }
        out
    };
    spec.checked(eval, |v| v.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{boundary_faces, build_mesh, BoxDomain};

    #[test]
    fn simpson_and_composite_agree_on_gaussian() {
        let f = |x: f64| (-(3.0 * x).powi(2)).exp();
        let a = adaptive_simpson(&f, -1.0, 2.0, 1e-14);
        let b = composite_gauss(&f, -1.0, 2.0, 3.0);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn separable_pair_matches_product_of_1d_oracles() {
        let params = KernelParams::new(0.2, 2.0).unwrap();
        let p = [Poly1D::new(&[1.0, -2.0]), Poly1D::new(&[0.0, 2.0])];
        let q = [Poly1D::new(&[0.0, 2.0]), Poly1D::new(&[2.0, -2.0])];
        let t = [[0.0, 0.5], [0.0, 0.5]];
        let tp = [[0.5, 1.0], [0.0, 0.5]];
        let full = oracle_pair_integral(&p, &q, &t, &tp, &params, PairVariant::Cross, QuadSpec::with_points(24)).unwrap();
        let prod: f64 = (0..2)
            .map(|d| double_integral_oracle(&p[d], &q[d], params.lambda, t[d][0], t[d][1], tp[d][0], tp[d][1]).unwrap())
            .product();
        assert!((full - prod).abs() <= 1e-10 * prod.abs());
    }

    #[test]
    fn zero_polynomial_gives_zero() {
        let params = KernelParams::new(0.2, 2.0).unwrap();
        let z = [Poly1D::zero(), Poly1D::constant(1.0)];
        let one = [Poly1D::constant(1.0), Poly1D::constant(1.0)];
        let cell = [[0.0, 0.5], [0.0, 0.5]];
        let v = oracle_pair_integral(&z, &one, &cell, &cell, &params, PairVariant::SameArgument, QuadSpec::with_points(8));
        assert_eq!(v.unwrap(), 0.0);
    }

    #[test]
    fn constant_energy_is_companion_mass() {
        let params = KernelParams::new(0.2, 2.0).unwrap();
        let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 1, 1).unwrap();
        let ones = vec![1.0; dofmap.n_dofs];
        let e = oracle_nonlocal_energy(&mesh, &dofmap, &ones, &params, QuadSpec::with_points(40)).unwrap();
        let one = [Poly1D::constant(1.0), Poly1D::constant(1.0)];
        let cell = [[0.0, 1.0], [0.0, 1.0]];
        let mass = oracle_pair_integral(&one, &one, &cell, &cell, &params, PairVariant::Cross, QuadSpec::with_points(40)).unwrap();
        assert!((e - params.companion_factor() * mass).abs() <= 1e-12 * e);
        let zeros = vec![0.0; dofmap.n_dofs];
        assert_eq!(oracle_nonlocal_energy(&mesh, &dofmap, &zeros, &params, QuadSpec::with_points(8)).unwrap(), 0.0);
    }

    #[test]
    fn far_face_is_negligible() {
        let params = KernelParams::new(0.01, 2.0).unwrap();
        let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 4, 1).unwrap();
        let faces = boundary_faces(&mesh, &dofmap);
        let far = faces.iter().find(|f| f.axis == 0 && f.sign > 0.0).unwrap();
        let t = mesh.element_at([0, 0, 0]).unwrap();
        let v = oracle_boundary_integral(&mesh, far, t, &params, QuadSpec::with_points(8)).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-300));
    }

    #[test]
    fn refinement_check_rejects_unresolved_integrand() {
        let params = KernelParams::new(0.002, 2.0).unwrap();
        let one = [Poly1D::constant(1.0), Poly1D::constant(1.0)];
        let cell = [[0.0, 1.0], [0.0, 1.0]];
        let r = oracle_pair_integral(&one, &one, &cell, &cell, &params, PairVariant::Cross, QuadSpec::with_points(8));
        assert!(matches!(r, Err(Error::OracleUntrusted { .. })));
    }
}

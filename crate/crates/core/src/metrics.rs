//! Manufactured solutions, error norms and convergence rates.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{element_quadrature, BoundaryDistance, CartesianMesh, DofMap, Point};
use crate::recovery::RecoveredField;

/// Exact solution of `-Δu + u = f` with Neumann data `∂u/∂n = g`.
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedSolution {
    pub name: &'static str,
    pub dim: usize,
    value: fn(&Point) -> f64,
    gradient: fn(&Point) -> Point,
    source: fn(&Point) -> f64,
}

fn trig_value(x: &Point) -> f64 {
    (PI * x[0]).cos() * (PI * x[1]).cos() + x[0] * x[1]
}

fn trig_gradient(x: &Point) -> Point {
    let (c0, s0) = ((PI * x[0]).cos(), (PI * x[0]).sin());
    let (c1, s1) = ((PI * x[1]).cos(), (PI * x[1]).sin());
    [-PI * s0 * c1 + x[1], -PI * c0 * s1 + x[0], 0.0]
}

fn trig_source(x: &Point) -> f64 {
    (1.0 + 2.0 * PI * PI) * (PI * x[0]).cos() * (PI * x[1]).cos() + x[0] * x[1]
}

fn mixed_value(x: &Point) -> f64 {
    x[0] * (PI * x[1]).sin() + x[1] * (PI * x[0]).sin()
}

fn mixed_gradient(x: &Point) -> Point {
    [
        (PI * x[1]).sin() + PI * x[1] * (PI * x[0]).cos(),
        PI * x[0] * (PI * x[1]).cos() + (PI * x[0]).sin(),
        0.0,
    ]
}

fn mixed_source(x: &Point) -> f64 {
    (1.0 + PI * PI) * mixed_value(x)
}

fn cube_value(x: &Point) -> f64 {
    (0..3).map(|d| (PI * x[d]).cos()).product()
}

fn cube_gradient(x: &Point) -> Point {
    let c: Vec<f64> = (0..3).map(|d| (PI * x[d]).cos()).collect();
    let s: Vec<f64> = (0..3).map(|d| (PI * x[d]).sin()).collect();
    [-PI * s[0] * c[1] * c[2], -PI * c[0] * s[1] * c[2], -PI * c[0] * c[1] * s[2]]
}

fn cube_source(x: &Point) -> f64 {
    (1.0 + 3.0 * PI * PI) * cube_value(x)
}

impl ManufacturedSolution {
    pub const NAMES: [&'static str; 3] = ["rect-trig", "lshape-mixed", "cube-trig"];

    pub fn named(name: &str) -> Result<Self> {
        let (dim, value, gradient, source): (usize, fn(&Point) -> f64, fn(&Point) -> Point, fn(&Point) -> f64) =
            match name {
                "rect-trig" => (2, trig_value, trig_gradient, trig_source),
                "lshape-mixed" => (2, mixed_value, mixed_gradient, mixed_source),
                "cube-trig" => (3, cube_value, cube_gradient, cube_source),
                _ => return Err(Error::Unknown { kind: "solution", name: name.into() }),
            };
        let name = Self::NAMES.iter().find(|n| **n == name).unwrap();
        Ok(Self { name, dim, value, gradient, source })
    }

    pub fn value(&self, x: &Point) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &Point) -> Point {
        (self.gradient)(x)
    }

    pub fn source(&self, x: &Point) -> f64 {
        (self.source)(x)
    }

    /// Normal derivative `∇u · n`.
    pub fn flux(&self, x: &Point, normal: &Point) -> f64 {
        let g = self.gradient(x);
        (0..3).map(|d| g[d] * normal[d]).sum()
    }
}

/// Error norms of one run. `h1` is the full norm.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub l2: f64,
    pub h1: f64,
    pub grad_rec_full: Option<f64>,
    pub grad_rec_interior: Option<f64>,
    pub grad_rec_corrected: Option<f64>,
}

/// Per-element sums in parallel, reduced in element order.
fn element_sums(n: usize, f: impl Fn(usize) -> [f64; 3] + Sync + Send) -> [f64; 3] {
    let parts: Vec<[f64; 3]> = (0..n).into_par_iter().map(f).collect();
    parts.iter().fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]])
}

fn element_errors(
    mesh: &CartesianMesh,
    dofmap: &DofMap,
    c: &[f64],
    sol: &ManufacturedSolution,
    quad_order: usize,
    e: usize,
) -> [f64; 3] {
    let nb = mesh.nodes_per_element();
    let mut vals = vec![0.0; nb];
    let mut grads = vec![[0.0; 3]; nb];
    let dofs = dofmap.element_dofs(e);
    let (mut l2, mut semi) = (0.0, 0.0);
    for (x, w) in element_quadrature(mesh, e, quad_order) {
        mesh.basis_values(e, &x, &mut vals);
        mesh.basis_gradients(e, &x, &mut grads);
        let uh: f64 = dofs.iter().zip(&vals).map(|(&g, v)| c[g] * v).sum();
        let exact = sol.gradient(&x);
        let mut gd = 0.0;
        for d in 0..mesh.dim {
            let gh: f64 = dofs.iter().zip(&grads).map(|(&g, v)| c[g] * v[d]).sum();
            gd += (gh - exact[d]).powi(2);
        }
        l2 += w * (uh - sol.value(&x)).powi(2);
        semi += w * gd;
    }
    [l2, semi, 0.0]
}

pub fn l2_error(mesh: &CartesianMesh, dofmap: &DofMap, c: &[f64], sol: &ManufacturedSolution, quad_order: usize) -> f64 {
    element_sums(mesh.elements.len(), |e| element_errors(mesh, dofmap, c, sol, quad_order, e))[0].sqrt()
}

/// Full `H¹` norm of the error.
pub fn h1_error(mesh: &CartesianMesh, dofmap: &DofMap, c: &[f64], sol: &ManufacturedSolution, quad_order: usize) -> f64 {
    let s = element_sums(mesh.elements.len(), |e| element_errors(mesh, dofmap, c, sol, quad_order, e));
    (s[0] + s[1]).sqrt()
}

/// Both norms in one pass: `(l2, h1)`.
pub fn solution_errors(
    mesh: &CartesianMesh,
    dofmap: &DofMap,
    c: &[f64],
    sol: &ManufacturedSolution,
    quad_order: usize,
) -> (f64, f64) {
    let s = element_sums(mesh.elements.len(), |e| element_errors(mesh, dofmap, c, sol, quad_order, e));
    (s[0].sqrt(), (s[0] + s[1]).sqrt())
}

/// `(full, interior, corrected)` recovered-gradient errors
/// `‖∇u − ∇S_δu_h‖` on Ω and on Ω minus the `2δ` boundary band, and
/// `‖∇u − (∇S_δu_h − F_δ)‖` on Ω.
///
/// Elements whose cutoff neighbourhood reaches the boundary get enough
/// Gauss points to resolve the boundary layer of width `δ`.
pub fn recovery_errors(
    field: &RecoveredField,
    mesh: &CartesianMesh,
    sol: &ManufacturedSolution,
    distance: &BoundaryDistance,
    quad_order: usize,
) -> Result<(f64, f64, f64)> {
    let params = field.params();
    let band = 2.0 * params.delta;
    let reach = params.cutoff_distance() + mesh.h;
    let fine = quad_order.max((4.0 * mesh.spacing / params.delta).ceil() as usize).min(48);
    let parts: Vec<Result<[f64; 3]>> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let el = &mesh.elements[e];
            let mut center = [0.0; 3];
            for d in 0..mesh.dim {
                center[d] = 0.5 * (el.lower[d] + el.upper[d]);
            }
            let near = distance.distance(&center)? < reach;
            let n = if near { fine } else { quad_order };
            let mut acc = [0.0; 3];
            for (x, w) in element_quadrature(mesh, e, n) {
                let r = field.evaluate(&x);
                let exact = sol.gradient(&x);
                let rec = r.recovered_gradient();
                let (mut full, mut corr) = (0.0, 0.0);
                for d in 0..mesh.dim {
                    full += (r.gradient[d] - exact[d]).powi(2);
                    corr += (rec[d] - exact[d]).powi(2);
                }
                acc[0] += w * full;
                acc[2] += w * corr;
                if distance.distance(&x)? > band {
                    acc[1] += w * full;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut s = [0.0; 3];
    for p in parts {
        let p = p?;
        for k in 0..3 {
            s[k] += p[k];
        }
    }
    Ok((s[0].sqrt(), s[1].sqrt(), s[2].sqrt()))
}

/// `rate_i = log(e_{i-1} / e_i) / log(factor)`.
pub fn fit_rates(errors: &[f64], factor: f64) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::InvalidParameter("need at least two errors to fit a rate".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidParameter(format!("non-positive error {e}")));
    }
    if !(factor > 0.0 && factor != 1.0) {
        return Err(Error::InvalidParameter(format!("refinement factor {factor}")));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).ln() / factor.ln()).collect())
}

/// Least-squares slope of `log e` against `log x`, the order of `e ~ x^r`.
pub fn fitted_rate(xs: &[f64], errors: &[f64]) -> Result<f64> {
    if xs.len() != errors.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("need matching lists of at least two points".into()));
    }
    if let Some(v) = xs.iter().chain(errors).find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidParameter(format!("non-positive value {v} in rate fit")));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, BoxDomain};

    #[test]
    fn rate_examples() {
        assert!((fit_rates(&[1.0, 0.25], 2.0).unwrap()[0] - 2.0).abs() < 1e-15);
        assert_eq!(fit_rates(&[1.0, 1.0], 2.0).unwrap()[0], 0.0);
        let r = fit_rates(&[5.42e-1, 2.58e-1], 2.0).unwrap()[0];
        assert!((r - 1.07).abs() < 5e-3);
        assert!(fit_rates(&[1.0, 0.0], 2.0).is_err());
        assert!(fit_rates(&[1.0], 2.0).is_err());
    }

    #[test]
    fn least_squares_rate() {
        let xs = [0.04, 0.02, 0.01, 0.005];
        let es: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((fitted_rate(&xs, &es).unwrap() - 1.5).abs() < 1e-12);
        assert!(fitted_rate(&xs[..1], &es[..1]).is_err());
    }

    #[test]
    fn zero_field_norm() {
        let (mesh, dofmap) = build_mesh(&BoxDomain::rect(), 4, 2).unwrap();
        let c = vec![0.0; dofmap.n_dofs];
        let sol = ManufacturedSolution {
            name: "cos",
            dim: 2,
            value: |x| (PI * x[0]).cos() * (PI * x[1]).cos(),
            gradient: |_| [0.0; 3],
            source: |_| 0.0,
        };
        assert!((l2_error(&mesh, &dofmap, &c, &sol, 8) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reproduces_tensor_polynomials() {
        let (mesh, dofmap) = build_mesh(&BoxDomain::lshape(), 2, 2).unwrap();
        let sol = ManufacturedSolution {
            name: "quad",
            dim: 2,
            value: |x| x[0] * x[0] * x[1] - 2.0 * x[1] * x[1],
            gradient: |x| [2.0 * x[0] * x[1], x[0] * x[0] - 4.0 * x[1], 0.0],
            source: |_| 0.0,
        };
        let c = dofmap.interpolate(|x| sol.value(x));
        let (l2, h1) = solution_errors(&mesh, &dofmap, &c, &sol, 4);
        assert!(l2 < 1e-12 && h1 < 1e-12);
    }

    #[test]
    fn manufactured_data_consistent() {
        for name in ManufacturedSolution::NAMES {
            let sol = ManufacturedSolution::named(name).unwrap();
            let eps = 1e-5;
            for k in 0..20 {
                let t = 0.05 + 0.045 * k as f64;
                let x = [t, (0.3 + 0.7 * t) % 0.5, (0.9 - 0.4 * t).abs()];
                let mut lap = 0.0;
                for d in 0..sol.dim {
                    let (mut xp, mut xm) = (x, x);
                    xp[d] += eps;
                    xm[d] -= eps;
                    lap += (sol.gradient(&xp)[d] - sol.gradient(&xm)[d]) / (2.0 * eps);
                }
                assert!((-lap + sol.value(&x) - sol.source(&x)).abs() < 1e-8, "{name}");
            }
        }
        let cube = ManufacturedSolution::named("cube-trig").unwrap();
        assert!(cube.flux(&[1.0, 0.3, 0.6], &[1.0, 0.0, 0.0]).abs() < 1e-15);
        assert!(cube.flux(&[0.2, 0.0, 0.6], &[0.0, -1.0, 0.0]).abs() < 1e-15);
    }
}

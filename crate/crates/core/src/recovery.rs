//! Nonlocal smoothing `S_δ u_h`, its gradient and the boundary correction.
//!
//! At a point `x` every quantity is a sum over nearby elements of products
//! of 1D Gaussian moments, so each evaluation first tabulates, per
//! dimension, the moments of every cell row within the cutoff.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::integrals::{moments, KernelParams, MAX_MOMENT};
use crate::mesh::{boundary_faces, BoundaryFace, CartesianMesh, DofMap, Point};

/// Everything recovered at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointRecovery {
    pub weight: f64,
    pub value: f64,
    pub gradient: Point,
    pub correction: Point,
}

impl PointRecovery {
    /// `∇S_δ u_h − F_δ`.
    pub fn recovered_gradient(&self) -> Point {
        let mut g = self.gradient;
        for (gi, fi) in g.iter_mut().zip(&self.correction) {
            *gi -= fi;
        }
        g
    }
}

/// Moments of one 1D cell against `e^{-λ²(y-x)²}`.
#[derive(Clone, Copy, Debug, Default)]
struct CellMoments {
    /// `∫ e dy`.
    mass: f64,
    /// `∫ (y - x) e dy`.
    first: f64,
    /// `∫ p_i e dy` per local factor.
    basis: [f64; 4],
    /// `∫ (y - x) p_i e dy`.
    basis_first: [f64; 4],
}

/// A discrete solution together with its boundary flux, ready for pointwise
/// recovery.
pub struct RecoveredField<'a> {
    mesh: &'a CartesianMesh,
    dofmap: &'a DofMap,
    coeffs: &'a [f64],
    params: KernelParams,
    faces: Vec<BoundaryFace>,
    face_flux: Vec<Vec<f64>>,
    faces_of: HashMap<usize, Vec<usize>>,
    lo: [i64; 3],
    hi: [i64; 3],
}

impl<'a> RecoveredField<'a> {
    /// Field with zero boundary flux.
    pub fn new(mesh: &'a CartesianMesh, dofmap: &'a DofMap, coeffs: &'a [f64], params: KernelParams) -> Result<Self> {
        if coeffs.len() != dofmap.n_dofs {
            return Err(Error::DimensionMismatch { expected: dofmap.n_dofs, got: coeffs.len() });
        }
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for d in 0..mesh.dim {
            lo[d] = mesh.elements.iter().map(|e| e.cell[d]).min().unwrap_or(0);
            hi[d] = mesh.elements.iter().map(|e| e.cell[d]).max().unwrap_or(0);
        }
        let faces = boundary_faces(mesh, dofmap);
        let face_flux = faces.iter().map(|f| vec![0.0; f.dofs.len()]).collect();
        let mut faces_of: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, f) in faces.iter().enumerate() {
            faces_of.entry(f.element).or_default().push(k);
        }
        Ok(Self { mesh, dofmap, coeffs, params, faces, face_flux, faces_of, lo, hi })
    }

    /// Sets the Neumann data, sampled at the face nodes with each face's
    /// outward normal.
    pub fn with_flux(mut self, flux: &dyn Fn(&Point, &Point) -> f64) -> Self {
        self.face_flux = self
            .faces
            .iter()
            .map(|f| {
                let n = f.outward_normal();
                f.dofs.iter().map(|&g| flux(&self.dofmap.nodes[g], &n)).collect()
            })
            .collect();
        self
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn faces(&self) -> &[BoundaryFace] {
        &self.faces
    }

    /// Nodal flux values on each face, aligned with `faces()`.
    pub fn face_flux(&self) -> &[Vec<f64>] {
        &self.face_flux
    }

    /// Cell index range per dimension whose cells come within the cutoff of `x`.
    fn window(&self, x: &Point) -> [(i64, i64); 3] {
        let reach = self.params.cutoff_distance();
        let nf = self.mesh.n_per_unit as f64;
        let mut w = [(0i64, 0i64); 3];
        for d in 0..self.mesh.dim {
            let a = (((x[d] - reach) * nf).floor() as i64).max(self.lo[d]);
            let b = (((x[d] + reach) * nf).floor() as i64).min(self.hi[d]);
            w[d] = (a, b.max(a));
        }
        w
    }

    fn tabulate(&self, x: &Point, w: &[(i64, i64); 3]) -> [Vec<CellMoments>; 3] {
        let k1 = self.mesh.order + 1;
        let h = self.mesh.spacing;
        let lambda = self.params.lambda;
        let mut out: [Vec<CellMoments>; 3] = Default::default();
        let mut m = [0.0; MAX_MOMENT + 1];
        for d in 0..self.mesh.dim {
            out[d] = (w[d].0..=w[d].1)
                .map(|c| {
                    let a = c as f64 * h;
                    moments(a - x[d], a + h - x[d], lambda, &mut m[..k1 + 1]);
                    let mut cm = CellMoments { mass: m[0], first: m[1], ..Default::default() };
                    for i in 0..k1 {
                        let q = self.mesh.factors[i].taylor_shift(x[d] - a);
                        let cs = q.coeffs();
                        cm.basis[i] = cs.iter().zip(&m).map(|(c, v)| c * v).sum();
                        cm.basis_first[i] = cs.iter().zip(&m[1..]).map(|(c, v)| c * v).sum();
                    }
                    cm
                })
                .collect();
        }
        out
    }

    /// All recovered quantities at `x`.
    pub fn evaluate(&self, x: &Point) -> PointRecovery {
        let mesh = self.mesh;
        let dim = mesh.dim;
        let w = self.window(x);
        let tab = self.tabulate(x, &w);
        let nb = mesh.nodes_per_element();
        let mi: Vec<[usize; 3]> = (0..nb).map(|l| mesh.local_multi_index(l)).collect();

        let mut weight = 0.0;
        let mut value = 0.0;
        let mut first = [0.0; 3];
        let mut num_grad = [0.0; 3];
        let mut flux_mass = [0.0; 3];
        let mut flux_level = [0.0; 3];
        let span = |d: usize| if d < dim { w[d].0..=w[d].1 } else { 0..=0 };
        for c2 in span(2) {
            for c1 in span(1) {
                for c0 in span(0) {
                    let cell = [c0, c1, c2];
                    let Some(e) = mesh.element_at(cell) else { continue };
                    let cm: Vec<&CellMoments> = (0..dim).map(|d| &tab[d][(cell[d] - w[d].0) as usize]).collect();
                    let mass: f64 = cm.iter().map(|c| c.mass).product();
                    weight += mass;
                    for d in 0..dim {
                        first[d] += (0..dim).map(|m| if m == d { cm[m].first } else { cm[m].mass }).product::<f64>();
                    }
                    for (l, &dof) in self.dofmap.element_dofs(e).iter().enumerate() {
                        let ci = self.coeffs[dof];
                        if ci == 0.0 {
                            continue;
                        }
                        let idx = mi[l];
                        value += ci * (0..dim).map(|d| cm[d].basis[idx[d]]).product::<f64>();
                        for d in 0..dim {
                            num_grad[d] += ci
                                * (0..dim)
                                    .map(|m| if m == d { cm[m].basis_first[idx[m]] } else { cm[m].basis[idx[m]] })
                                    .product::<f64>();
                        }
                    }
                    if let Some(fs) = self.faces_of.get(&e) {
                        for &fk in fs {
                            let face = &self.faces[fk];
                            let g = &self.face_flux[fk];
                            let d = face.axis;
                            let z = self.params.lambda * (x[d] - face.level);
                            let decay = (-z * z).exp();
                            if decay == 0.0 {
                                continue;
                            }
                            let mut s = 0.0;
                            for (&ln, gi) in face.local_nodes.iter().zip(g) {
                                let idx = mi[ln];
                                s += gi * (0..dim).filter(|&m| m != d).map(|m| cm[m].basis[idx[m]]).product::<f64>();
                            }
                            flux_mass[d] += decay * s;
                            flux_level[d] += decay * s * (x[d] - face.level);
                        }
                    }
                }
            }
        }
        let two_l2 = 2.0 * self.params.lambda * self.params.lambda;
        let smoothed = value / weight;
        let mut gradient = [0.0; 3];
        let mut correction = [0.0; 3];
        for d in 0..dim {
            gradient[d] = two_l2 * (num_grad[d] - smoothed * first[d]) / weight;
            // ∫_Ω R (y_d - l) dy = first + (x_d - l) w, per face level.
            correction[d] = (flux_mass[d] * first[d] + flux_level[d] * weight) / (weight * weight);
        }
        PointRecovery { weight, value: smoothed, gradient, correction }
    }

    /// `w_δ(x) = ∫_Ω R(x, y) dy`.
    pub fn weight_w(&self, x: &Point) -> f64 {
        self.evaluate(x).weight
    }

    pub fn smoothed_value(&self, x: &Point) -> f64 {
        self.evaluate(x).value
    }

    pub fn smoothed_gradient(&self, x: &Point) -> Point {
        self.evaluate(x).gradient
    }

    pub fn correction_f(&self, x: &Point) -> Point {
        self.evaluate(x).correction
    }

    pub fn recovered_gradient(&self, x: &Point) -> Point {
        self.evaluate(x).recovered_gradient()
    }
}

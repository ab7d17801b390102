//! Uniform Cartesian meshes on unions of axis-aligned boxes.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::poly::{lagrange_factors, Poly1D};
use crate::quadrature::gauss_legendre_on;

/// Points carry three coordinates; entries past the mesh dimension are zero.
pub type Point = [f64; 3];

const GRID_TOL: f64 = 1e-9;

/// Union of axis-aligned boxes with pairwise disjoint interiors.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    dim: usize,
    boxes: Vec<Vec<[f64; 2]>>,
}

impl BoxDomain {
    pub fn new(dim: usize, boxes: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dimension {dim} not in 2..=3")));
        }
        if boxes.is_empty() {
            return Err(Error::InvalidParameter("domain has no boxes".into()));
        }
        for b in &boxes {
            if b.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: b.len() });
            }
            for iv in b {
                if !(iv[0] < iv[1]) {
                    return Err(Error::DegenerateInterval { a: iv[0], b: iv[1] });
                }
            }
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                let overlap = (0..dim).all(|d| {
                    boxes[i][d][0].max(boxes[j][d][0]) < boxes[i][d][1].min(boxes[j][d][1]) - GRID_TOL
                });
                if overlap {
                    return Err(Error::InvalidParameter(format!("boxes {i} and {j} overlap")));
                }
            }
        }
        // Connectivity: boxes touching along a face of positive measure.
        let touching = |i: usize, j: usize| {
            let mut shared_faces = 0;
            for d in 0..dim {
                let lo = boxes[i][d][0].max(boxes[j][d][0]);
                let hi = boxes[i][d][1].min(boxes[j][d][1]);
                if hi < lo - GRID_TOL {
                    return false;
                }
                if (hi - lo).abs() <= GRID_TOL {
                    shared_faces += 1;
                }
            }
            shared_faces == 1
        };
        let mut seen = vec![false; boxes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..boxes.len() {
                if !seen[j] && touching(i, j) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter("domain is not connected".into()));
        }
        Ok(Self { dim, boxes })
    }

    /// `[0,1]²`.
    pub fn rect() -> Self {
        Self { dim: 2, boxes: vec![vec![[0.0, 1.0], [0.0, 1.0]]] }
    }

    /// `[0,1]×[0,0.5] ∪ [0,0.5]×[0.5,1]`.
    pub fn lshape() -> Self {
        Self {
            dim: 2,
            boxes: vec![vec![[0.0, 1.0], [0.0, 0.5]], vec![[0.0, 0.5], [0.5, 1.0]]],
        }
    }

    /// `[0,1]³`.
    pub fn cube() -> Self {
        Self { dim: 3, boxes: vec![vec![[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]]] }
    }

    pub fn named(name: &str) -> Result<Self> {
        match name {
            "rect" => Ok(Self::rect()),
            "lshape" => Ok(Self::lshape()),
            "cube" => Ok(Self::cube()),
            _ => Err(Error::Unknown { kind: "domain", name: name.into() }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[Vec<[f64; 2]>] {
        &self.boxes
    }

    pub fn volume(&self) -> f64 {
        self.boxes
            .iter()
            .map(|b| b.iter().map(|iv| iv[1] - iv[0]).product::<f64>())
            .sum()
    }

    /// Closed-set membership.
    pub fn contains(&self, x: &Point) -> bool {
        self.boxes.iter().any(|b| {
            (0..self.dim).all(|d| x[d] >= b[d][0] - GRID_TOL && x[d] <= b[d][1] + GRID_TOL)
        })
    }

    /// Whether every box corner is a multiple of `1/n`.
    pub fn is_commensurate(&self, n: usize) -> bool {
        let nf = n as f64;
        self.boxes.iter().flatten().flatten().all(|&c| {
            let s = c * nf;
            (s - s.round()).abs() <= GRID_TOL * nf.max(1.0)
        })
    }

    /// Coarsest grid resolution aligned with all box corners.
    pub fn base_resolution(&self) -> Result<usize> {
        (1..=4096)
            .find(|&n| self.is_commensurate(n))
            .ok_or(Error::Incommensurate { n: 4096 })
    }
}

/// One cell of the Cartesian mesh.
#[derive(Clone, Debug)]
pub struct Element {
    /// Integer cell coordinates on the global grid of spacing `1/n_per_unit`.
    pub cell: [i64; 3],
    pub lower: Point,
    pub upper: Point,
}

impl Element {
    pub fn interval(&self, d: usize) -> [f64; 2] {
        [self.lower[d], self.upper[d]]
    }
}

#[derive(Clone, Debug)]
pub struct CartesianMesh {
    pub dim: usize,
    pub order: usize,
    pub n_per_unit: usize,
    /// Cell edge length.
    pub spacing: f64,
    /// Largest cell diagonal.
    pub h: f64,
    pub elements: Vec<Element>,
    /// Lagrange factors on the reference interval `[0, spacing]`, in the
    /// local coordinate `t = x - lower`.
    pub factors: Vec<Poly1D>,
    pub factor_derivatives: Vec<Poly1D>,
    lookup: HashMap<[i64; 3], usize>,
}

impl CartesianMesh {
    pub fn nodes_per_element(&self) -> usize {
        (self.order + 1).pow(self.dim as u32)
    }

    /// Element index at integer cell coordinates, if that cell is in the mesh.
    pub fn element_at(&self, cell: [i64; 3]) -> Option<usize> {
        self.lookup.get(&cell).copied()
    }

    /// Per-dimension local node indices of a local basis index.
    pub fn local_multi_index(&self, local: usize) -> [usize; 3] {
        let k1 = self.order + 1;
        let mut out = [0; 3];
        let mut r = local;
        for o in out.iter_mut().take(self.dim) {
            *o = r % k1;
            r /= k1;
        }
        out
    }

    /// Element containing `x` (ties broken towards the lower cell).
    pub fn locate(&self, x: &Point) -> Option<usize> {
        let nf = self.n_per_unit as f64;
        let mut candidates: Vec<[i64; 3]> = vec![[0; 3]];
        for d in 0..self.dim {
            let s = x[d] * nf;
            let c = s.floor() as i64;
            let on_face = (s - s.round()).abs() < 1e-12;
            let mut next = Vec::new();
            for cand in &candidates {
                let mut a = *cand;
                a[d] = c;
                next.push(a);
                if on_face {
                    let mut b = *cand;
                    b[d] = s.round() as i64 - 1;
                    if b[d] != c {
                        next.push(b);
                    }
                    let mut b2 = *cand;
                    b2[d] = s.round() as i64;
                    if b2[d] != c {
                        next.push(b2);
                    }
                }
            }
            candidates = next;
        }
        candidates.into_iter().find_map(|c| self.element_at(c))
    }

    /// Values of the `(k+1)^dim` local basis functions of element `e` at `x`.
    pub fn basis_values(&self, e: usize, x: &Point, out: &mut [f64]) {
        let el = &self.elements[e];
        let k1 = self.order + 1;
        let mut fv = [[0.0; 4]; 3];
        for d in 0..self.dim {
            let t = x[d] - el.lower[d];
            for m in 0..k1 {
                fv[d][m] = self.factors[m].evaluate(t);
            }
        }
        for (local, o) in out.iter_mut().enumerate().take(self.nodes_per_element()) {
            let mi = self.local_multi_index(local);
            *o = (0..self.dim).map(|d| fv[d][mi[d]]).product();
        }
    }

    /// Gradients of the local basis functions of element `e` at `x`.
    pub fn basis_gradients(&self, e: usize, x: &Point, out: &mut [[f64; 3]]) {
        let el = &self.elements[e];
        let k1 = self.order + 1;
        let mut fv = [[0.0; 4]; 3];
        let mut dv = [[0.0; 4]; 3];
        for d in 0..self.dim {
            let t = x[d] - el.lower[d];
            for m in 0..k1 {
                fv[d][m] = self.factors[m].evaluate(t);
                dv[d][m] = self.factor_derivatives[m].evaluate(t);
            }
        }
        for (local, g) in out.iter_mut().enumerate().take(self.nodes_per_element()) {
            let mi = self.local_multi_index(local);
            *g = [0.0; 3];
            for (gd, slot) in g.iter_mut().enumerate().take(self.dim) {
                *slot = (0..self.dim)
                    .map(|d| if d == gd { dv[d][mi[d]] } else { fv[d][mi[d]] })
                    .product();
            }
        }
    }
}

/// Global numbering of the continuous Lagrange degrees of freedom.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub nodes: Vec<Point>,
    /// Flattened element-to-global tables, `nodes_per_element` entries each.
    element_dofs: Vec<usize>,
    stride: usize,
    pub n_dofs: usize,
}

impl DofMap {
    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.element_dofs[e * self.stride..(e + 1) * self.stride]
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }
}

fn lex_key(c: &[i64; 3]) -> (i64, i64, i64) {
    (c[2], c[1], c[0])
}

pub fn build_mesh(domain: &BoxDomain, n_per_unit: usize, order: usize) -> Result<(CartesianMesh, DofMap)> {
    if n_per_unit == 0 {
        return Err(Error::InvalidParameter("n_per_unit must be at least 1".into()));
    }
    if !domain.is_commensurate(n_per_unit) {
        return Err(Error::Incommensurate { n: n_per_unit });
    }
    let dim = domain.dim();
    let nf = n_per_unit as f64;
    let spacing = 1.0 / nf;
    let factors = lagrange_factors(order, 0.0, spacing)?;
    let factor_derivatives = factors.iter().map(|p| p.derivative()).collect();

    let mut cells: Vec<[i64; 3]> = Vec::new();
    for b in domain.boxes() {
        let mut lo = [0i64; 3];
        let mut hi = [1i64; 3];
        for d in 0..dim {
            lo[d] = (b[d][0] * nf).round() as i64;
            hi[d] = (b[d][1] * nf).round() as i64;
        }
        for c2 in lo[2]..hi[2] {
            for c1 in lo[1]..hi[1] {
                for c0 in lo[0]..hi[0] {
                    cells.push([c0, c1, if dim == 3 { c2 } else { 0 }]);
                }
            }
        }
    }
    cells.sort_by_key(lex_key);
    cells.dedup();

    let elements: Vec<Element> = cells
        .iter()
        .map(|c| {
            let mut lower = [0.0; 3];
            let mut upper = [0.0; 3];
            for d in 0..dim {
                lower[d] = c[d] as f64 / nf;
                upper[d] = (c[d] + 1) as f64 / nf;
            }
            Element { cell: *c, lower, upper }
        })
        .collect();
    let lookup = cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    let k = order as i64;
    let k1 = order + 1;
    let stride = k1.pow(dim as u32);
    let mut lattice: HashMap<[i64; 3], usize> = HashMap::new();
    let mut raw = Vec::with_capacity(cells.len() * stride);
    for c in &cells {
        for local in 0..stride {
            let mut r = local;
            let mut node = [0i64; 3];
            for d in 0..dim {
                node[d] = c[d] * k + (r % k1) as i64;
                r /= k1;
            }
            raw.push(node);
            let next = lattice.len();
            lattice.entry(node).or_insert(next);
        }
    }
    let mut keys: Vec<[i64; 3]> = lattice.keys().copied().collect();
    keys.sort_by_key(lex_key);
    let index: HashMap<[i64; 3], usize> = keys.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let node_h = spacing / order as f64;
    let nodes = keys
        .iter()
        .map(|n| {
            let mut p = [0.0; 3];
            for d in 0..dim {
                // Exact for nodes on cell corners.
                p[d] = if n[d] % k == 0 { (n[d] / k) as f64 / nf } else { n[d] as f64 * node_h };
            }
            p
        })
        .collect();
    let element_dofs = raw.iter().map(|n| index[n]).collect();

    let h = spacing * (dim as f64).sqrt();
    let mesh = CartesianMesh {
        dim,
        order,
        n_per_unit,
        spacing,
        h,
        elements,
        factors,
        factor_derivatives,
        lookup,
    };
    let dofmap = DofMap { nodes, element_dofs, stride, n_dofs: keys.len() };
    Ok((mesh, dofmap))
}

/// A boundary facet of one element.
#[derive(Clone, Debug)]
pub struct BoundaryFace {
    pub element: usize,
    /// Normal axis.
    pub axis: usize,
    /// Coordinate of the face along `axis`.
    pub level: f64,
    /// Per-dimension extent; degenerate `[level, level]` along `axis`.
    pub extent: [[f64; 2]; 3],
    /// `+1` or `-1` along `axis`.
    pub sign: f64,
    /// Local node indices (in the element) lying on the face, lexicographic
    /// over the tangential dimensions.
    pub local_nodes: Vec<usize>,
    pub dofs: Vec<usize>,
}

impl BoundaryFace {
    pub fn outward_normal(&self) -> Point {
        let mut n = [0.0; 3];
        n[self.axis] = self.sign;
        n
    }

    pub fn measure(&self, dim: usize) -> f64 {
        (0..dim).filter(|&d| d != self.axis).map(|d| self.extent[d][1] - self.extent[d][0]).product()
    }

    pub fn center(&self, dim: usize) -> Point {
        let mut c = [0.0; 3];
        for d in 0..dim {
            c[d] = 0.5 * (self.extent[d][0] + self.extent[d][1]);
        }
        c
    }

    /// Euclidean distance from `x` to the face.
    pub fn distance(&self, dim: usize, x: &Point) -> f64 {
        (0..dim)
            .map(|d| {
                let [lo, hi] = self.extent[d];
                let g = if x[d] < lo { lo - x[d] } else if x[d] > hi { x[d] - hi } else { 0.0 };
                g * g
            })
            .sum::<f64>()
            .sqrt()
    }
}

pub fn boundary_faces(mesh: &CartesianMesh, dofmap: &DofMap) -> Vec<BoundaryFace> {
    let dim = mesh.dim;
    let k = mesh.order;
    let mut faces = Vec::new();
    for (e, el) in mesh.elements.iter().enumerate() {
        for axis in 0..dim {
            for side in [0usize, 1] {
                let mut nb = el.cell;
                nb[axis] += if side == 0 { -1 } else { 1 };
                if mesh.element_at(nb).is_some() {
                    continue;
                }
                let level = if side == 0 { el.lower[axis] } else { el.upper[axis] };
                let mut extent = [[0.0; 2]; 3];
                for d in 0..dim {
                    extent[d] = if d == axis { [level, level] } else { el.interval(d) };
                }
                let fixed = if side == 0 { 0 } else { k };
                let local_nodes: Vec<usize> = (0..mesh.nodes_per_element())
                    .filter(|&l| mesh.local_multi_index(l)[axis] == fixed)
                    .collect();
                let dofs = local_nodes.iter().map(|&l| dofmap.element_dofs(e)[l]).collect();
                faces.push(BoundaryFace {
                    element: e,
                    axis,
                    level,
                    extent,
                    sign: if side == 0 { -1.0 } else { 1.0 },
                    local_nodes,
                    dofs,
                });
            }
        }
    }
    faces
}

/// Exact distance to the boundary of a box union.
#[derive(Clone, Debug)]
pub struct BoundaryDistance {
    domain: BoxDomain,
    faces: Vec<BoundaryFace>,
}

impl BoundaryDistance {
    pub fn new(domain: &BoxDomain) -> Result<Self> {
        let n = domain.base_resolution()?;
        let (mesh, dofmap) = build_mesh(domain, n, 1)?;
        Ok(Self { domain: domain.clone(), faces: boundary_faces(&mesh, &dofmap) })
    }

    pub fn distance(&self, x: &Point) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain(x[..self.domain.dim()].to_vec()));
        }
        let dim = self.domain.dim();
        Ok(self.faces.iter().map(|f| f.distance(dim, x)).fold(f64::INFINITY, f64::min))
    }
}

pub fn distance_to_boundary(domain: &BoxDomain, x: &Point) -> Result<f64> {
    BoundaryDistance::new(domain)?.distance(x)
}

/// Tensor Gauss–Legendre points and weights on an element.
pub fn element_quadrature(mesh: &CartesianMesh, e: usize, n_points: usize) -> Vec<(Point, f64)> {
    let el = &mesh.elements[e];
    let rules: Vec<Vec<(f64, f64)>> = (0..mesh.dim)
        .map(|d| gauss_legendre_on(n_points.max(1), el.lower[d], el.upper[d]))
        .collect();
    let total = n_points.max(1).pow(mesh.dim as u32);
    let n = n_points.max(1);
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

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn element_and_dof_counts() {
        let (m, d) = build_mesh(&BoxDomain::rect(), 2, 1).unwrap();
        assert_eq!((m.elements.len(), d.n_dofs), (4, 9));
        let (m, d) = build_mesh(&BoxDomain::lshape(), 4, 1).unwrap();
        assert_eq!((m.elements.len(), d.n_dofs), (12, 21));
        let (m, d) = build_mesh(&BoxDomain::cube(), 2, 2).unwrap();
        assert_eq!((m.elements.len(), d.n_dofs), (8, 125));
    }

    #[test]
    fn lshape_dofs_by_enumeration() {
        // Grid points of the closed L-shape on a lattice of spacing 1/(kN).
        for (n, k) in [(2usize, 1usize), (4, 2), (6, 3)] {
            let m = (n * k) as i64;
            let count = (0..=m)
                .flat_map(|i| (0..=m).map(move |j| (i, j)))
                .filter(|&(i, j)| 2 * j <= m || 2 * i <= m)
                .count();
            let (_, d) = build_mesh(&BoxDomain::lshape(), n, k).unwrap();
            assert_eq!(d.n_dofs, count);
        }
    }

    #[test]
    fn single_box_dof_formula() {
        let dom = BoxDomain::new(2, vec![vec![[0.0, 1.5], [0.0, 0.5]]]).unwrap();
        for k in 1..=3 {
            let (_, d) = build_mesh(&dom, 4, k).unwrap();
            assert_eq!(d.n_dofs, (k * 4 * 3 / 2 + 1) * (k * 4 / 2 + 1));
        }
    }

    #[test]
    fn incommensurate_rejected() {
        assert!(matches!(build_mesh(&BoxDomain::lshape(), 3, 1), Err(Error::Incommensurate { .. })));
        assert!(build_mesh(&BoxDomain::rect(), 0, 1).is_err());
    }

    #[test]
    fn shared_nodes_coincide() {
        let (m, d) = build_mesh(&BoxDomain::lshape(), 4, 2).unwrap();
        let mut referenced = vec![false; d.n_dofs];
        for e in 0..m.elements.len() {
            let el = &m.elements[e];
            for (local, &g) in d.element_dofs(e).iter().enumerate() {
                referenced[g] = true;
                let mi = m.local_multi_index(local);
                for dd in 0..2 {
                    let x = el.lower[dd] + m.spacing * mi[dd] as f64 / 2.0;
                    assert!((d.nodes[g][dd] - x).abs() < 1e-14);
                }
            }
        }
        assert!(referenced.into_iter().all(|r| r));
    }

    #[test]
    fn faces_of_unit_square() {
        let (m, d) = build_mesh(&BoxDomain::rect(), 1, 1).unwrap();
        let faces = boundary_faces(&m, &d);
        assert_eq!(faces.len(), 4);
        let mut normals: Vec<Point> = faces.iter().map(|f| f.outward_normal()).collect();
        normals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(normals, vec![[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]);
    }

    #[test]
    fn lshape_perimeter_and_cube_area() {
        for n in [2, 4, 8] {
            let (m, d) = build_mesh(&BoxDomain::lshape(), n, 1).unwrap();
            let len: f64 = boundary_faces(&m, &d).iter().map(|f| f.measure(2)).sum();
            assert!((len - 4.0).abs() < 1e-12);
        }
        let (m, d) = build_mesh(&BoxDomain::cube(), 2, 1).unwrap();
        let faces = boundary_faces(&m, &d);
        assert_eq!(faces.len(), 24);
        let area: f64 = faces.iter().map(|f| f.measure(3)).sum();
        assert!((area - 6.0).abs() < 1e-12);
    }

    #[test]
    fn normals_point_outward() {
        for (dom, n) in [(BoxDomain::rect(), 3), (BoxDomain::lshape(), 4), (BoxDomain::cube(), 2)] {
            let (m, d) = build_mesh(&dom, n, 1).unwrap();
            for f in boundary_faces(&m, &d) {
                let c = f.center(m.dim);
                let nrm = f.outward_normal();
                let mut out = c;
                let mut inn = c;
                for k in 0..3 {
                    out[k] += 1e-6 * nrm[k];
                    inn[k] -= 1e-6 * nrm[k];
                }
                assert!(!dom.contains(&out));
                assert!(dom.contains(&inn));
            }
        }
    }

    #[test]
    fn face_nodes_lie_on_face() {
        let (m, d) = build_mesh(&BoxDomain::cube(), 2, 2).unwrap();
        for f in boundary_faces(&m, &d) {
            assert_eq!(f.dofs.len(), 9);
            for &g in &f.dofs {
                assert!((d.nodes[g][f.axis] - f.level).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn distances() {
        let dom = BoxDomain::rect();
        assert!((distance_to_boundary(&dom, &[0.5, 0.5, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(distance_to_boundary(&dom, &[1.0, 0.3, 0.0]).unwrap(), 0.0);
        let l = BoxDomain::lshape();
        assert!((distance_to_boundary(&l, &[0.6, 0.4, 0.0]).unwrap() - 0.1).abs() < 1e-14);
        // Near the reentrant corner the nearest boundary point is the corner itself.
        let v = distance_to_boundary(&l, &[0.45, 0.45, 0.0]).unwrap();
        assert!((v - 0.05 * 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            distance_to_boundary(&l, &[0.8, 0.8, 0.0]),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn quadrature_rules() {
        let (m, _) = build_mesh(&BoxDomain::rect(), 1, 1).unwrap();
        let q = element_quadrature(&m, 0, 1);
        assert_eq!(q.len(), 1);
        assert!((q[0].0[0] - 0.5).abs() < 1e-15 && (q[0].0[1] - 0.5).abs() < 1e-15);
        assert!((q[0].1 - 1.0).abs() < 1e-15);
        let q = element_quadrature(&m, 0, 2);
        let v: f64 = q.iter().map(|(p, w)| w * p[0].powi(3)).sum();
        assert!((v - 0.25).abs() <= 1e-15);
        let (m, _) = build_mesh(&BoxDomain::cube(), 3, 1).unwrap();
        for e in [0, 5, 26] {
            let w: f64 = element_quadrature(&m, e, 3).iter().map(|(_, w)| w).sum();
            assert!((w - 1.0 / 27.0).abs() < 1e-15);
        }
    }

    #[test]
    fn locate_finds_containing_element() {
        let (m, _) = build_mesh(&BoxDomain::lshape(), 4, 1).unwrap();
        let e = m.locate(&[0.6, 0.1, 0.0]).unwrap();
        assert_eq!(m.elements[e].cell, [2, 0, 0]);
        assert!(m.locate(&[0.9, 0.9, 0.0]).is_none());
        // On the reentrant face the lower cell exists.
        assert!(m.locate(&[0.6, 0.5, 0.0]).is_some());
    }

    #[test]
    fn bad_domains() {
        assert!(BoxDomain::new(2, vec![vec![[0.0, 1.0], [0.0, 1.0]], vec![[0.5, 1.5], [0.0, 1.0]]]).is_err());
        assert!(BoxDomain::new(2, vec![vec![[0.0, 1.0], [0.0, 1.0]], vec![[2.0, 3.0], [0.0, 1.0]]]).is_err());
        assert!(BoxDomain::named("torus").is_err());
    }

    proptest! {
        #[test]
        fn global_partition_of_unity(order in 1usize..=3, pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 100)) {
            let dom = BoxDomain::lshape();
            let (m, _) = build_mesh(&dom, 4, order).unwrap();
            let mut vals = vec![0.0; m.nodes_per_element()];
            for (u, v) in pts {
                let x = [u, v * 0.5, 0.0];
                let e = m.locate(&x).unwrap();
                m.basis_values(e, &x, &mut vals);
                prop_assert!((vals.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }
}

//! Stiffness and load assembly from separable closed-form integrals.
//!
//! Every element-pair entry factors into per-dimension double integrals, so a
//! pair costs `dim` small tables. On a uniform grid those tables depend only
//! on the integer cell offset and are computed once up front.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrals::{double_gauss_local, gauss_poly_unchecked, KernelParams};
use crate::mesh::{BoundaryFace, CartesianMesh, DofMap, Point};
use crate::poly::Poly1D;
use crate::sparse::SparseSymMatrix;

/// Largest per-dimension cell offset whose pairs are kept.
pub fn interaction_stencil(params: &KernelParams, h: f64) -> usize {
    (params.cutoff_distance() / h).ceil() as usize
}

/// Per-dimension double integrals of one pair of 1D cells, indexed
/// `[j * (k+1) + i]` with `j` a factor of the first cell and `i` of the second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellPairFactors {
    /// `Ī(p_j p_i, 1)`: both factors live on the first cell.
    pub same: [f64; 16],
    /// `Ī(p_j, p_i')`.
    pub cross: [f64; 16],
}

/// Both factor tables for cells `[0, len]` and `[offset, offset + len_p]`,
/// given the reference factors on each cell in its own local coordinate.
pub fn cell_pair_factors(factors: &[Poly1D], lambda: f64, len: f64, offset: f64, len_p: f64) -> CellPairFactors {
    let k1 = factors.len();
    let one = Poly1D::constant(1.0);
    let mut out = CellPairFactors { same: [0.0; 16], cross: [0.0; 16] };
    let shifted: Vec<Poly1D> = factors.iter().map(|p| p.taylor_shift(-offset)).collect();
    for j in 0..k1 {
        for i in 0..k1 {
            out.cross[j * k1 + i] = double_gauss_local(&factors[j], &shifted[i], lambda, len, offset, offset + len_p);
            out.same[j * k1 + i] = if i < j {
                out.same[i * k1 + j]
            } else {
                double_gauss_local(&(factors[j] * factors[i]), &one, lambda, len, offset, offset + len_p)
            };
        }
    }
    out
}

/// The two tensor-product blocks of an element pair, `nb × nb` row-major
/// with the row index local to the first element.
#[derive(Clone, Debug, PartialEq)]
pub struct PairBlock {
    pub nodes: usize,
    pub same: Vec<f64>,
    pub cross: Vec<f64>,
}

impl PairBlock {
    /// Contribution to the stiffness entry `(j, i)`: the same-argument part
    /// belongs to the first element's own column `i`, the cross part to the
    /// second element's column `i`.
    pub fn stiffness_parts(&self, params: &KernelParams, j: usize, i: usize) -> (f64, f64) {
        let inv_d2 = 1.0 / (params.delta * params.delta);
        let k = j * self.nodes + i;
        (inv_d2 * self.same[k], (params.companion_factor() - inv_d2) * self.cross[k])
    }
}

/// Local multi-indices of the element basis.
fn multi_indices(mesh: &CartesianMesh) -> Vec<[usize; 3]> {
    (0..mesh.nodes_per_element()).map(|l| mesh.local_multi_index(l)).collect()
}

fn generic_factors(mesh: &CartesianMesh, t: usize, tp: usize, params: &KernelParams) -> [CellPairFactors; 3] {
    let (a, b) = (&mesh.elements[t], &mesh.elements[tp]);
    let mut out = [CellPairFactors { same: [0.0; 16], cross: [0.0; 16] }; 3];
    for d in 0..mesh.dim {
        out[d] = cell_pair_factors(
            &mesh.factors,
            params.lambda,
            a.upper[d] - a.lower[d],
            b.lower[d] - a.lower[d],
            b.upper[d] - b.lower[d],
        );
    }
    out
}

/// Both blocks of the pair `(t, tp)` by direct evaluation.
pub fn pair_stiffness_block(mesh: &CartesianMesh, t: usize, tp: usize, params: &KernelParams) -> PairBlock {
    let f = generic_factors(mesh, t, tp, params);
    let mi = multi_indices(mesh);
    let nb = mi.len();
    let k1 = mesh.order + 1;
    let mut block = PairBlock { nodes: nb, same: vec![0.0; nb * nb], cross: vec![0.0; nb * nb] };
    for j in 0..nb {
        for i in 0..nb {
            let (mut s, mut c) = (1.0, 1.0);
            for d in 0..mesh.dim {
                let k = mi[j][d] * k1 + mi[i][d];
                s *= f[d].same[k];
                c *= f[d].cross[k];
            }
            block.same[j * nb + i] = s;
            block.cross[j * nb + i] = c;
        }
    }
    block
}

/// 1D pair factors for every integer offset `|m| ≤ reach` on a uniform grid.
#[derive(Clone, Debug)]
pub struct InvariantTable {
    pub reach: usize,
    pub spacing: f64,
    pub order: usize,
    entries: Vec<CellPairFactors>,
}

impl InvariantTable {
    pub fn at(&self, m: i64) -> &CellPairFactors {
        &self.entries[(m + self.reach as i64) as usize]
    }
}

pub fn build_invariant_tables(h: f64, params: &KernelParams, order: usize) -> Result<InvariantTable> {
    let factors = crate::poly::lagrange_factors(order, 0.0, h)?;
    let reach = interaction_stencil(params, h);
    let entries = (-(reach as i64)..=reach as i64)
        .into_par_iter()
        .map(|m| cell_pair_factors(&factors, params.lambda, h, m as f64 * h, h))
        .collect();
    Ok(InvariantTable { reach, spacing: h, order, entries })
}

/// Dense index over the bounding box of the mesh cells.
struct CellGrid {
    lo: [i64; 3],
    extent: [i64; 3],
    index: Vec<usize>,
}

impl CellGrid {
    fn new(mesh: &CartesianMesh) -> Self {
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for d in 0..mesh.dim {
            lo[d] = mesh.elements.iter().map(|e| e.cell[d]).min().unwrap_or(0);
            hi[d] = mesh.elements.iter().map(|e| e.cell[d]).max().unwrap_or(0);
        }
        let extent = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1];
        let mut index = vec![usize::MAX; (extent[0] * extent[1] * extent[2]) as usize];
        let mut grid = Self { lo, extent, index: Vec::new() };
        for (e, el) in mesh.elements.iter().enumerate() {
            index[grid.flat(el.cell).unwrap()] = e;
        }
        grid.index = index;
        grid
    }

    fn flat(&self, c: [i64; 3]) -> Option<usize> {
        let mut f = 0i64;
        for d in (0..3).rev() {
            let r = c[d] - self.lo[d];
            if r < 0 || r >= self.extent[d] {
                return None;
            }
            f = f * self.extent[d] + r;
        }
        Some(f as usize)
    }

    fn get(&self, c: [i64; 3]) -> Option<usize> {
        self.flat(c).map(|f| self.index[f]).filter(|&e| e != usize::MAX)
    }

    /// Elements within per-dimension offset `reach` of `cell`, lexicographic
    /// with the last dimension slowest.
    fn neighbours(&self, dim: usize, cell: [i64; 3], reach: usize, out: &mut Vec<(usize, [i64; 3])>) {
        out.clear();
        let r = reach as i64;
        let span = |d: usize| if d < dim { -r..=r } else { 0..=0 };
        for m2 in span(2) {
            for m1 in span(1) {
                for m0 in span(0) {
                    let m = [m0, m1, m2];
                    let c = [cell[0] + m0, cell[1] + m1, cell[2] + m2];
                    if let Some(e) = self.get(c) {
                        out.push((e, m));
                    }
                }
            }
        }
    }
}

/// Stiffness matrix and the companion matrix `B` with `B_ji = (1/s²) ∬ R ψ_j(x) ψ_i(y)`,
/// which maps nodal source values to the volume load.
#[derive(Clone, Debug)]
pub struct Operators {
    pub stiffness: SparseSymMatrix,
    pub companion: SparseSymMatrix,
}

/// Thread-local scratch: a stamp array for deduplication and a dof → local
/// column map.
struct Scratch {
    stamp: Vec<u32>,
    generation: u32,
    position: Vec<u32>,
    nbrs: Vec<(usize, [i64; 3])>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self { stamp: vec![0; n], generation: 0, position: vec![0; n], nbrs: Vec::new() }
    }

    fn next_generation(&mut self) -> u32 {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        self.generation
    }
}

struct ElementBlock {
    cols: Vec<usize>,
    stiffness: Vec<f64>,
    companion: Vec<f64>,
}

struct Context<'a> {
    mesh: &'a CartesianMesh,
    dofmap: &'a DofMap,
    params: &'a KernelParams,
    grid: CellGrid,
    reach: usize,
    table: Option<InvariantTable>,
    mi: Vec<[usize; 3]>,
}

impl Context<'_> {
    /// Sorted distinct dofs of every element in `nbrs`.
    fn columns(&self, nbrs: &[(usize, [i64; 3])], scratch: &mut Scratch) -> Vec<usize> {
        let g = scratch.next_generation();
        let mut cols = Vec::new();
        for &(e, _) in nbrs {
            for &dof in self.dofmap.element_dofs(e) {
                if scratch.stamp[dof] != g {
                    scratch.stamp[dof] = g;
                    cols.push(dof);
                }
            }
        }
        cols.sort_unstable();
        cols
    }

    fn element_block(&self, t: usize, scratch: &mut Scratch) -> ElementBlock {
        let mesh = self.mesh;
        let dim = mesh.dim;
        let k1 = mesh.order + 1;
        let nb = self.mi.len();
        let mut nbrs = std::mem::take(&mut scratch.nbrs);
        self.grid.neighbours(dim, mesh.elements[t].cell, self.reach, &mut nbrs);
        let cols = self.columns(&nbrs, scratch);
        for (k, &c) in cols.iter().enumerate() {
            scratch.position[c] = k as u32;
        }
        let width = cols.len();
        let mut cross = vec![0.0; nb * width];
        let mut same = vec![0.0; nb * nb];
        let mut local_pos = vec![0usize; nb];
        for &(tp, m) in &nbrs {
            let generic;
            let f: [&CellPairFactors; 3] = match &self.table {
                Some(tab) => [tab.at(m[0]), tab.at(m[1]), tab.at(m[2])],
                None => {
                    generic = generic_factors(mesh, t, tp, self.params);
                    [&generic[0], &generic[1], &generic[2]]
                }
            };
            for (slot, &dof) in local_pos.iter_mut().zip(self.dofmap.element_dofs(tp)) {
                *slot = scratch.position[dof] as usize;
            }
            for j in 0..nb {
                let mj = self.mi[j];
                let row = &mut cross[j * width..(j + 1) * width];
                let srow = &mut same[j * nb..(j + 1) * nb];
                for i in 0..nb {
                    let mii = self.mi[i];
                    let (mut s, mut c) = (1.0, 1.0);
                    for d in 0..dim {
                        let k = mj[d] * k1 + mii[d];
                        s *= f[d].same[k];
                        c *= f[d].cross[k];
                    }
                    row[local_pos[i]] += c;
                    srow[i] += s;
                }
            }
        }
        scratch.nbrs = nbrs;

        let inv_d2 = 1.0 / (self.params.delta * self.params.delta);
        let cf = self.params.companion_factor();
        let mut stiffness: Vec<f64> = cross.iter().map(|c| (cf - inv_d2) * c).collect();
        let companion: Vec<f64> = cross.iter().map(|c| cf * c).collect();
        let own = self.dofmap.element_dofs(t);
        for j in 0..nb {
            for i in 0..nb {
                let col = scratch.position[own[i]] as usize;
                stiffness[j * width + col] += inv_d2 * same[j * nb + i];
            }
        }
        ElementBlock { cols, stiffness, companion }
    }

    /// Row `r` columns: union of the columns of every element touching `r`.
    fn row_columns(&self, elements: &[usize], scratch: &mut Scratch) -> Vec<usize> {
        let mut nbrs = Vec::new();
        let mut all = std::mem::take(&mut scratch.nbrs);
        all.clear();
        for &t in elements {
            self.grid.neighbours(self.mesh.dim, self.mesh.elements[t].cell, self.reach, &mut nbrs);
            all.extend_from_slice(&nbrs);
        }
        let cols = self.columns(&all, scratch);
        scratch.nbrs = all;
        cols
    }
}

/// Elements per parallel batch; bounds the memory held before scattering.
const BATCH: usize = 256;

/// Assembles the stiffness and companion matrices. With `use_invariance`
/// the 1D factors come from a table indexed by cell offset; otherwise each
/// pair is integrated on its actual cells.
pub fn assemble_operators(
    mesh: &CartesianMesh,
    dofmap: &DofMap,
    params: &KernelParams,
    use_invariance: bool,
) -> Result<Operators> {
    let reach = interaction_stencil(params, mesh.spacing);
    let table = if use_invariance { Some(build_invariant_tables(mesh.spacing, params, mesh.order)?) } else { None };
    let ctx = Context { mesh, dofmap, params, grid: CellGrid::new(mesh), reach, table, mi: multi_indices(mesh) };
    let n = dofmap.n_dofs;

    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in 0..mesh.elements.len() {
        for &dof in dofmap.element_dofs(e) {
            touching[dof].push(e);
        }
    }
    let rows: Vec<Vec<usize>> = touching
        .par_iter()
        .map_init(|| Scratch::new(n), |s, els| ctx.row_columns(els, s))
        .collect();
    let nnz: usize = rows.iter().map(Vec::len).sum();
    if nnz > 400_000_000 {
        return Err(Error::InvalidParameter(format!("{nnz} stored entries exceed the sparse size guard")));
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut cols = Vec::with_capacity(nnz);
    for r in &rows {
        cols.extend_from_slice(r);
        row_ptr.push(cols.len());
    }
    drop(rows);
    let mut a_vals = vec![0.0; nnz];
    let mut b_vals = vec![0.0; nnz];

    let ne = mesh.elements.len();
    for start in (0..ne).step_by(BATCH) {
        let blocks: Vec<ElementBlock> = (start..(start + BATCH).min(ne))
            .into_par_iter()
            .map_init(|| Scratch::new(n), |s, t| ctx.element_block(t, s))
            .collect();
        for (t, block) in (start..).zip(&blocks) {
            let width = block.cols.len();
            for (j, &r) in dofmap.element_dofs(t).iter().enumerate() {
                let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
                let row_cols = &cols[lo..hi];
                let mut p = 0;
                for (k, &c) in block.cols.iter().enumerate() {
                    while row_cols[p] != c {
                        p += 1;
                    }
                    a_vals[lo + p] += block.stiffness[j * width + k];
                    b_vals[lo + p] += block.companion[j * width + k];
                }
            }
        }
    }
    Ok(Operators {
        stiffness: SparseSymMatrix::from_parts_unchecked(n, row_ptr.clone(), cols.clone(), a_vals),
        companion: SparseSymMatrix::from_parts_unchecked(n, row_ptr, cols, b_vals),
    })
}

pub fn assemble_stiffness(
    mesh: &CartesianMesh,
    dofmap: &DofMap,
    params: &KernelParams,
    use_invariance: bool,
) -> Result<SparseSymMatrix> {
    Ok(assemble_operators(mesh, dofmap, params, use_invariance)?.stiffness)
}

/// Volume load `B f` from nodal source values.
pub fn volume_load(ops: &Operators, source_nodal: &[f64]) -> Result<Vec<f64>> {
    ops.companion.matvec(source_nodal)
}

/// Boundary load `2 (1/s²) ∫_Ω ψ_j(x) ∫_∂Ω R(x, z) g(z) dS_z dx` with `g`
/// replaced by its nodal interpolant on each face. `flux(z, n)` is evaluated
/// at face nodes with that face's outward normal.
pub fn boundary_load(
    mesh: &CartesianMesh,
    dofmap: &DofMap,
    faces: &[BoundaryFace],
    params: &KernelParams,
    flux: &(dyn Fn(&Point, &Point) -> f64 + Sync),
) -> Result<Vec<f64>> {
    let dim = mesh.dim;
    let k1 = mesh.order + 1;
    let h = mesh.spacing;
    let reach = interaction_stencil(params, h);
    let table = build_invariant_tables(h, params, mesh.order)?;
    let grid = CellGrid::new(mesh);
    let mi = multi_indices(mesh);
    let nb = mi.len();

    let mut faces_of: Vec<Vec<usize>> = vec![Vec::new(); mesh.elements.len()];
    for (k, f) in faces.iter().enumerate() {
        faces_of[f.element].push(k);
    }
    let face_g: Vec<Vec<f64>> = faces
        .iter()
        .map(|f| {
            let n = f.outward_normal();
            f.dofs.iter().map(|&g| flux(&dofmap.nodes[g], &n)).collect()
        })
        .collect();

    let scale = 2.0 * params.companion_factor();
    let local: Vec<Vec<f64>> = (0..mesh.elements.len())
        .into_par_iter()
        .map_init(Vec::new, |nbrs, t| {
            let el = &mesh.elements[t];
            grid.neighbours(dim, el.cell, reach, nbrs);
            let mut out = vec![0.0; nb];
            for &(tp, m) in nbrs.iter() {
                for &fk in &faces_of[tp] {
                    let face = &faces[fk];
                    let g = &face_g[fk];
                    if g.iter().all(|v| *v == 0.0) {
                        continue;
                    }
                    let d = face.axis;
                    let normal: Vec<f64> = (0..k1)
                        .map(|jd| gauss_poly_unchecked(&mesh.factors[jd], 0.0, h, face.level - el.lower[d], params.lambda))
                        .collect();
                    for (j, o) in out.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for (&ln, gi) in face.local_nodes.iter().zip(g) {
                            let li = mi[ln];
                            let mut v = normal[mi[j][d]];
                            for mm in (0..dim).filter(|&mm| mm != d) {
                                v *= table.at(m[mm]).cross[mi[j][mm] * k1 + li[mm]];
                            }
                            acc += gi * v;
                        }
                        *o += scale * acc;
                    }
                }
            }
            out
        })
        .collect();
    let mut load = vec![0.0; dofmap.n_dofs];
    for (t, vals) in local.iter().enumerate() {
        for (&dof, v) in dofmap.element_dofs(t).iter().zip(vals) {
            load[dof] += v;
        }
    }
    Ok(load)
}

/// Full right-hand side: volume term from nodal `source` plus the boundary
/// flux term.
pub fn assemble_load(
    mesh: &CartesianMesh,
    dofmap: &DofMap,
    faces: &[BoundaryFace],
    ops: &Operators,
    params: &KernelParams,
    source: &(dyn Fn(&Point) -> f64 + Sync),
    flux: &(dyn Fn(&Point, &Point) -> f64 + Sync),
) -> Result<Vec<f64>> {
    let nodal = dofmap.interpolate(source);
    let mut load = volume_load(ops, &nodal)?;
    let b = boundary_load(mesh, dofmap, faces, params, flux)?;
    load.iter_mut().zip(&b).for_each(|(l, v)| *l += v);
    Ok(load)
}

//! CSR storage and Jacobi-preconditioned conjugate gradients.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Symmetric matrix in compressed sparse row form. Both triangles are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymMatrix {
    /// Validates that every row has strictly increasing in-range columns.
    pub fn from_csr(n: usize, row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<f64>) -> Result<Self> {
        if row_ptr.len() != n + 1 || row_ptr[0] != 0 || *row_ptr.last().unwrap() != cols.len() {
            return Err(Error::InvalidParameter("malformed row offsets".into()));
        }
        if cols.len() != vals.len() {
            return Err(Error::DimensionMismatch { expected: cols.len(), got: vals.len() });
        }
        for r in 0..n {
            let row = &cols[row_ptr[r]..row_ptr[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.last().is_some_and(|&c| c >= n) {
                return Err(Error::InvalidParameter(format!("row {r} columns not strictly increasing")));
            }
        }
        Ok(Self { n, row_ptr, cols, vals })
    }

    pub(crate) fn from_parts_unchecked(n: usize, row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<f64>) -> Self {
        Self { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_matrix(&vec![1.0; n])
    }

    pub fn diagonal_matrix(d: &[f64]) -> Self {
        let n = d.len();
        Self { n, row_ptr: (0..=n).collect(), cols: (0..n).collect(), vals: d.to_vec() }
    }

    /// Keeps the exactly nonzero entries of a dense row-major matrix.
    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: dense.len() });
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = dense[r * n + c];
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { n, row_ptr, cols, vals })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.cols[range.clone()], &self.vals[range])
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max |a_ij - a_ji|`, with a missing transpose entry counted as zero.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).fold(0.0f64, |m, (&c, &v)| m.max((v - self.get(c, r)).abs()))
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d[r * self.n + c] = v;
            }
        }
        d
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().with_min_len(256).enumerate().for_each(|(r, yr)| {
            let (cols, vals) = self.row(r);
            *yr = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        });
    }

    /// Quadratic form `xᵀ A x`.
    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        Ok(dot(x, &self.matvec(x)?))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Recomputed `‖A c − f‖₂ / ‖f‖₂` at exit.
    pub residual: f64,
    pub converged: bool,
    /// `‖r_k‖₂ / ‖f‖₂` per iteration, starting with the initial residual.
    pub history: Vec<f64>,
    /// Preconditioned residual `√(r_kᵀ D⁻¹ r_k)`, relative to the initial one.
    pub preconditioned_history: Vec<f64>,
}

pub const DEFAULT_CG_TOL: f64 = 1e-10;

/// Jacobi-preconditioned CG from a zero initial guess. Stops when the
/// recursively updated residual drops below `rel_tol · ‖f‖₂`.
pub fn cg_solve(a: &SparseSymMatrix, f: &[f64], rel_tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = a.n();
    if f.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.len() });
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidParameter(format!("cg tolerance {rel_tol} not in (0, 1)")));
    }
    let diag = a.diagonal();
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
        return Err(Error::NonPositiveDiagonal { row, value });
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();

    let fnorm = norm(f);
    let mut x = vec![0.0; n];
    if fnorm == 0.0 {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            residual: 0.0,
            converged: true,
            history: vec![0.0],
            preconditioned_history: vec![0.0],
        });
    }
    let mut r = f.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let rz0 = rz;
    let mut history = vec![1.0];
    let mut preconditioned_history = vec![1.0];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        iterations += 1;
        let rel = norm(&r) / fnorm;
        history.push(rel);
        z.par_iter_mut().zip(&r).zip(&inv_diag).for_each(|((zi, ri), di)| *zi = ri * di);
        let rz_new = dot(&r, &z);
        preconditioned_history.push((rz_new / rz0).sqrt());
        if rel <= rel_tol {
            converged = true;
            break;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    let ax = a.matvec(&x)?;
    let residual = norm(&ax.iter().zip(f).map(|(u, v)| u - v).collect::<Vec<_>>()) / fnorm;
    Ok(CgOutcome { solution: x, iterations, residual, converged, history, preconditioned_history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal_matvec() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(SparseSymMatrix::identity(3).matvec(&x).unwrap(), x);
        let two = SparseSymMatrix::diagonal_matrix(&[2.0; 3]);
        assert_eq!(two.matvec(&x).unwrap(), vec![2.0, -4.0, 7.0]);
        assert!(matches!(two.matvec(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn cg_trivial_systems() {
        let f = vec![0.3, -1.0, 2.0, 5.0];
        let out = cg_solve(&SparseSymMatrix::identity(4), &f, 1e-12, 40).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.solution, f);
        let d = [1.0, 4.0, 0.5, 10.0];
        let out = cg_solve(&SparseSymMatrix::diagonal_matrix(&d), &f, 1e-12, 40).unwrap();
        for i in 0..4 {
            assert!((out.solution[i] - f[i] / d[i]).abs() <= 1e-12 * (f[i] / d[i]).abs());
        }
    }

    #[test]
    fn rejects_non_positive_diagonal() {
        let a = SparseSymMatrix::diagonal_matrix(&[1.0, 0.0]);
        assert!(matches!(cg_solve(&a, &[1.0, 1.0], 1e-10, 10), Err(Error::NonPositiveDiagonal { row: 1, .. })));
    }

    #[test]
    fn csr_validation() {
        assert!(SparseSymMatrix::from_csr(2, vec![0, 2, 3], vec![1, 0, 1], vec![1.0; 3]).is_err());
        assert!(SparseSymMatrix::from_csr(2, vec![0, 1, 2], vec![0, 1], vec![1.0; 2]).is_ok());
    }
}

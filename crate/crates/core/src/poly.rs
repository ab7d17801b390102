//! Dense univariate polynomials and the 1D Lagrange factors of tensor-product
//! elements.
//!
//! Polynomials live inline in a fixed-size buffer so the integral recursions
//! can shuffle them around without touching the allocator.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

const CAPACITY: usize = 16;

/// `coeffs()[n]` multiplies `x^n`.
#[derive(Clone, Copy)]
pub struct Poly1D {
    len: usize,
    c: [f64; CAPACITY],
}

impl Poly1D {
    /// Largest representable degree.
    pub const MAX_DEGREE: usize = CAPACITY - 1;

    pub const fn zero() -> Self {
        Self {
            len: 0,
            c: [0.0; CAPACITY],
        }
    }

    pub fn constant(v: f64) -> Self {
        Self::new(&[v])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(&[0.0, 1.0])
    }

    /// Panics if more than `MAX_DEGREE + 1` coefficients are given.
    pub fn new(coeffs: &[f64]) -> Self {
        assert!(
            coeffs.len() <= CAPACITY,
            "polynomial degree {} exceeds {}",
            coeffs.len().saturating_sub(1),
            Self::MAX_DEGREE
        );
        let mut p = Self::zero();
        p.c[..coeffs.len()].copy_from_slice(coeffs);
        p.len = coeffs.len();
        p
    }

    /// Builds `scale * Π (x - r)` over the given roots.
    pub fn from_roots(roots: &[f64], scale: f64) -> Self {
        let mut p = Self::constant(scale);
        for &r in roots {
            p = p * Self::new(&[-r, 1.0]);
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.len]
    }

    /// Degree implied by the stored length; trailing zeros count.
    pub fn degree(&self) -> usize {
        self.len.saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|&v| v == 0.0)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.coeffs().iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.len <= 1 {
            return Self::zero();
        }
        let mut d = Self::zero();
        d.len = self.len - 1;
        for n in 1..self.len {
            d.c[n - 1] = self.c[n] * n as f64;
        }
        d
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        if self.len == 0 {
            return Self::zero();
        }
        assert!(self.len < CAPACITY, "antiderivative exceeds maximum degree");
        let mut p = Self::zero();
        p.len = self.len + 1;
        for n in 0..self.len {
            p.c[n + 1] = self.c[n] / (n + 1) as f64;
        }
        p
    }

    /// Returns `q` with `q(t) = p(t + shift)`, by repeated synthetic division.
    pub fn taylor_shift(&self, shift: f64) -> Self {
        let mut q = *self;
        if shift == 0.0 {
            return q;
        }
        let n = q.len;
        for i in 0..n {
            for j in (i..n - 1).rev() {
                q.c[j] += shift * q.c[j + 1];
            }
        }
        q
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut q = *self;
        q.c[..q.len].iter_mut().for_each(|c| *c *= s);
        q
    }
}

impl Default for Poly1D {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for Poly1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Poly1D").field(&self.coeffs()).finish()
    }
}

impl PartialEq for Poly1D {
    fn eq(&self, other: &Self) -> bool {
        let n = self.len.max(other.len);
        (0..n).all(|i| self.c[i] == other.c[i])
    }
}

impl Add for Poly1D {
    type Output = Poly1D;
    fn add(self, rhs: Poly1D) -> Poly1D {
        let mut out = self;
        out.len = self.len.max(rhs.len);
        for i in 0..rhs.len {
            out.c[i] += rhs.c[i];
        }
        out
    }
}

impl Neg for Poly1D {
    type Output = Poly1D;
    fn neg(self) -> Poly1D {
        self.scale(-1.0)
    }
}

impl Sub for Poly1D {
    type Output = Poly1D;
    fn sub(self, rhs: Poly1D) -> Poly1D {
        self + (-rhs)
    }
}

impl Mul for Poly1D {
    type Output = Poly1D;
    fn mul(self, rhs: Poly1D) -> Poly1D {
        if self.len == 0 || rhs.len == 0 {
            return Poly1D::zero();
        }
        let len = self.len + rhs.len - 1;
        assert!(len <= CAPACITY, "product exceeds maximum degree");
        let mut out = Poly1D::zero();
        out.len = len;
        for i in 0..self.len {
            for j in 0..rhs.len {
                out.c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        out
    }
}

pub fn evaluate(p: &Poly1D, x: f64) -> f64 {
    p.evaluate(x)
}

pub fn multiply(p: &Poly1D, q: &Poly1D) -> Poly1D {
    *p * *q
}

pub fn derivative(p: &Poly1D) -> Poly1D {
    p.derivative()
}

pub fn antiderivative(p: &Poly1D) -> Poly1D {
    p.antiderivative()
}

pub fn taylor_shift(p: &Poly1D, l: f64) -> Poly1D {
    p.taylor_shift(l)
}

/// Nodal Lagrange factors of `order` on equispaced nodes of `[a, b]`.
///
/// Factor `m` is one at `a + (b - a) m / order` and zero at the other nodes.
pub fn lagrange_factors(order: usize, a: f64, b: f64) -> Result<Vec<Poly1D>> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "element order {order} not in 1..=3"
        )));
    }
    if !(a < b) {
        return Err(Error::DegenerateInterval { a, b });
    }
    let nodes: Vec<f64> = (0..=order)
        .map(|j| a + (b - a) * j as f64 / order as f64)
        .collect();
    let factors = (0..=order)
        .map(|m| {
            let others: Vec<f64> = (0..=order).filter(|&j| j != m).map(|j| nodes[j]).collect();
            let denom: f64 = others.iter().map(|&r| nodes[m] - r).product();
            Poly1D::from_roots(&others, 1.0 / denom)
        })
        .collect();
    Ok(factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `Σ |c_k| |x|^k`, the rounding scale of a monomial-basis evaluation.
    fn abs_bound(p: &Poly1D, x: f64) -> f64 {
        p.coeffs().iter().rev().fold(0.0, |acc, c| acc * x.abs() + c.abs()).max(1.0)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(Poly1D::new(&[-1.0, 0.0, 1.0]).evaluate(1.0), 0.0);
        assert_eq!(Poly1D::zero().evaluate(7.0), 0.0);
        assert_eq!(Poly1D::new(&[1.0, 2.0, 3.0]).evaluate(2.0), 17.0);
    }

    #[test]
    fn multiply_examples() {
        let p = Poly1D::new(&[1.0, 1.0]) * Poly1D::new(&[-1.0, 1.0]);
        assert_eq!(p, Poly1D::new(&[-1.0, 0.0, 1.0]));
        let q = Poly1D::new(&[3.0, -2.0, 5.0]);
        assert_eq!(q * Poly1D::constant(1.0), q);
        assert!((q * Poly1D::zero()).is_zero());
        assert_eq!((q * Poly1D::new(&[0.0, 1.0])).degree(), 3);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(Poly1D::new(&[0.0, 0.0, 0.0, 1.0]).derivative(), Poly1D::new(&[0.0, 0.0, 3.0]));
        assert!(Poly1D::constant(5.0).derivative().is_zero());
        assert_eq!(Poly1D::new(&[0.0, 1.0, 1.0]).derivative(), Poly1D::new(&[1.0, 2.0]));
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(Poly1D::new(&[0.0, 2.0]).antiderivative(), Poly1D::new(&[0.0, 0.0, 1.0]));
        assert!(Poly1D::zero().antiderivative().is_zero());
        assert_eq!(
            Poly1D::new(&[0.0, 0.0, 3.0]).antiderivative(),
            Poly1D::new(&[0.0, 0.0, 0.0, 1.0])
        );
    }

    #[test]
    fn taylor_shift_examples() {
        let p = Poly1D::new(&[0.0, 0.0, 1.0]);
        assert_eq!(p.taylor_shift(1.0), Poly1D::new(&[1.0, 2.0, 1.0]));
        let q = Poly1D::new(&[0.3, -1.2, 0.7, 2.0]);
        assert_eq!(q.taylor_shift(0.0), q);
        let r = Poly1D::new(&[0.0, -1.0, 0.0, 1.0]);
        let shifted = r.taylor_shift(2.0);
        assert!((shifted.evaluate(0.5) - r.evaluate(2.5)).abs() <= 1e-13);
    }

    #[test]
    fn lagrange_examples() {
        let f = lagrange_factors(1, 0.0, 1.0).unwrap();
        assert_eq!(f[0], Poly1D::new(&[1.0, -1.0]));
        assert_eq!(f[1], Poly1D::new(&[0.0, 1.0]));
        let f2 = lagrange_factors(2, 0.0, 1.0).unwrap();
        assert!((f2[1].evaluate(0.5) - 1.0).abs() < 1e-15);
        let f3 = lagrange_factors(3, 0.0, 1.0).unwrap();
        let sum: f64 = f3.iter().map(|p| p.evaluate(0.37)).sum();
        assert!((sum - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn lagrange_rejects_bad_input() {
        assert!(matches!(
            lagrange_factors(1, 1.0, 1.0),
            Err(Error::DegenerateInterval { .. })
        ));
        assert!(lagrange_factors(2, 2.0, 1.0).is_err());
        assert!(lagrange_factors(4, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn nodal_property(order in 1usize..=3, a in -3.0f64..3.0, len in 0.01f64..2.0) {
            let b = a + len;
            let f = lagrange_factors(order, a, b).unwrap();
            for (m, p) in f.iter().enumerate() {
                for j in 0..=order {
                    let node = a + len * j as f64 / order as f64;
                    let expected = if m == j { 1.0 } else { 0.0 };
                    prop_assert!((p.evaluate(node) - expected).abs() <= 1e-13 * abs_bound(p, node));
                }
            }
        }

        #[test]
        fn partition_of_unity(order in 1usize..=3, a in -3.0f64..3.0, len in 0.01f64..2.0,
                              ts in proptest::collection::vec(0.0f64..1.0, 100)) {
            let f = lagrange_factors(order, a, a + len).unwrap();
            for t in ts {
                let x = a + t * len;
                let sum: f64 = f.iter().map(|p| p.evaluate(x)).sum();
                let bound: f64 = f.iter().map(|p| abs_bound(p, x)).sum();
                prop_assert!((sum - 1.0).abs() <= 1e-13 * bound);
            }
        }

        #[test]
        fn shift_composition(coeffs in proptest::collection::vec(-2.0f64..2.0, 1..=8),
                             s1 in -1.5f64..1.5, s2 in -1.5f64..1.5) {
            let p = Poly1D::new(&coeffs);
            let lhs = p.taylor_shift(s1).taylor_shift(s2);
            let rhs = p.taylor_shift(s1 + s2);
            let scale = rhs.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
            for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-12 * scale.max(1.0));
            }
        }

        #[test]
        fn derivative_undoes_antiderivative(coeffs in proptest::collection::vec(-5.0f64..5.0, 1..=9)) {
            let p = Poly1D::new(&coeffs);
            let back = p.derivative().antiderivative();
            let mut expected = p;
            expected.c[0] = 0.0;
            for (x, y) in back.coeffs().iter().zip(expected.coeffs()) {
                prop_assert!(close(*x, *y, 1e-15));
            }
        }
    }
}

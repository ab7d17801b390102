//! Closed-form Gaussian–polynomial integrals.
//!
//! Everything the assembly needs reduces to the moments
//! `Φ(a, b, λ, k) = ∫_a^b x^k e^{-λ²x²} dx`. The polynomial-weighted integral
//! `I` Taylor-shifts its polynomial onto the Gaussian centre and contracts the
//! coefficients against moments; the coupled double integral `Ī` is peeled
//! apart by integration by parts until the inner polynomial is exhausted.


use crate::error::{Error, Result};
use crate::poly::Poly1D;

/// Highest moment order `phi` accepts.
pub const MAX_MOMENT: usize = 16;

/// Cap on the number of integration-by-parts levels in `double_gauss_poly`.
pub const MAX_RECURSION_DEPTH: usize = 12;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Gaussian kernel parameters: horizon `delta`, shape `s`, and the derived
/// rate `lambda = s / (2 delta)` so that the kernel reads `exp(-lambda² |x-y|²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    pub delta: f64,
    pub s: f64,
    pub lambda: f64,
    pub cutoff_eps: f64,
}

impl KernelParams {
    pub const DEFAULT_CUTOFF: f64 = 1e-16;

    pub fn new(delta: f64, s: f64) -> Result<Self> {
        Self::with_cutoff(delta, s, Self::DEFAULT_CUTOFF)
    }

    pub fn with_cutoff(delta: f64, s: f64, cutoff_eps: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
        }
        if !(cutoff_eps > 0.0 && cutoff_eps <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cutoff_eps must lie in (0, 1], got {cutoff_eps}"
            )));
        }
        Ok(Self {
            delta,
            s,
            lambda: s / (2.0 * delta),
            cutoff_eps,
        })
    }

    /// Distance beyond which the kernel drops below `cutoff_eps`.
    pub fn cutoff_distance(&self) -> f64 {
        (1.0 / self.cutoff_eps).ln().max(0.0).sqrt() / self.lambda
    }

    /// `exp(-lambda² r²)`.
    pub fn kernel(&self, r2: f64) -> f64 {
        (-self.lambda * self.lambda * r2).exp()
    }

    /// Companion kernel factor `1 / s²` (normalisation constants dropped).
    pub fn companion_factor(&self) -> f64 {
        1.0 / (self.s * self.s)
    }
}

/// `exp(-x²)` with the square split so the rounding of `x*x` does not leak
/// into the tail.
fn exp_neg_sq(x: f64) -> f64 {
    let hi = f64::from_bits(x.to_bits() & 0xffff_ffff_f800_0000);
    let lo = x - hi;
    (-hi * hi).exp() * (-lo * (x + hi)).exp()
}

// Positive-term series erf(x) = 2/√π e^{-x²} Σ 2^n x^{2n+1} / (2n+1)!!.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > 1e-17 * sum {
        term *= 2.0 * x2 / (2.0 * n + 3.0);
        sum += term;
        n += 1.0;
    }
    FRAC_2_SQRT_PI * exp_neg_sq(x) * sum
}

// Lentz evaluation of the continued fraction for erfc, x > 0.
fn erfc_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..2000 {
        let a = n as f64 * 0.5;
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    exp_neg_sq(x) / (SQRT_PI * f)
}

const SERIES_LIMIT: f64 = 1.5;

/// Gauss error function. Odd by construction; saturates beyond |x| = 6.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    let v = if ax > 6.0 {
        1.0
    } else if ax < SERIES_LIMIT {
        erf_series(ax)
    } else {
        1.0 - erfc_cf(ax)
    };
    v.copysign(x)
}

/// Complementary error function with relative accuracy in the upper tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x > 27.3 {
        0.0
    } else if x < SERIES_LIMIT {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// `erf(y) - erf(x)`, routed through `erfc` when both arguments sit in the
/// same tail.
pub fn erf_diff(x: f64, y: f64) -> f64 {
    if x >= 0.5 && y >= 0.5 {
        erfc(x) - erfc(y)
    } else if x <= -0.5 && y <= -0.5 {
        erfc(-y) - erfc(-x)
    } else {
        erf(y) - erf(x)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")))
    }
}

/// Fills `out[k] = Φ(a, b, λ, k)` for `k < out.len()`.
///
/// Within one Gaussian width of the origin the alternating series in `λ²x²`
/// is used, since the upward recursion amplifies round-off there.
pub(crate) fn moments(a: f64, b: f64, lambda: f64, out: &mut [f64]) {
    let l2 = lambda * lambda;
    let reach = lambda * a.abs().max(b.abs());
    if reach <= 1.0 {
        moments_series(a, b, l2, out);
        return;
    }
    let kmax = out.len();
    if kmax == 0 {
        return;
    }
    let ea = exp_neg_sq(lambda * a);
    let eb = exp_neg_sq(lambda * b);
    let inv2l2 = 0.5 / l2;
    out[0] = 0.5 * SQRT_PI / lambda * erf_diff(lambda * a, lambda * b);
    if kmax > 1 {
        // ea - eb = -ea * expm1(-λ²(b-a)(b+a)); factoring out the larger endpoint
        // keeps the exponent non-positive.
        let diff = if a.abs() <= b.abs() {
            -ea * (-l2 * (b - a) * (b + a)).exp_m1()
        } else {
            eb * (-l2 * (a - b) * (a + b)).exp_m1()
        };
        out[1] = inv2l2 * diff;
    }
    let (mut pa, mut pb) = (a, b);
    for k in 2..kmax {
        out[k] = inv2l2 * (pa * ea - pb * eb) + (k - 1) as f64 * inv2l2 * out[k - 2];
        pa *= a;
        pb *= b;
    }
}

fn moments_series(a: f64, b: f64, l2: f64, out: &mut [f64]) {
    let kmax = out.len();
    let mut pa = a;
    let mut pb = b;
    for (k, slot) in out.iter_mut().enumerate().take(kmax) {
        // Σ_n (-λ²)^n / n! (b^{m} - a^{m}) / m with m = k + 2n + 1
        let (mut ta, mut tb) = (pa, pb);
        let mut coef = 1.0;
        let mut sum = 0.0;
        let mut n = 0usize;
        loop {
            let m = (k + 2 * n + 1) as f64;
            let term = coef * (tb - ta) / m;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() || n > 200 {
                break;
            }
            n += 1;
            coef *= -l2 / n as f64;
            ta *= a * a;
            tb *= b * b;
        }
        *slot = sum;
        pa *= a;
        pb *= b;
    }
}

/// `Φ(a, b, λ, k) = ∫_a^b x^k e^{-λ²x²} dx`.
pub fn phi(a: f64, b: f64, lambda: f64, k: usize) -> Result<f64> {
    phi_shifted(a, b, 0.0, lambda, k)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Φ̄(a, b, l, λ, n) = ∫_a^b x^n e^{-λ²(x-l)²} dx`.
///
/// Re-expanded about `l` when the centre lies in `[a, b]`, otherwise about
/// the endpoint nearest to it: expanding about a centre outside the interval
/// cancels badly whenever `x^n` is small where the mass sits.
pub fn phi_shifted(a: f64, b: f64, l: f64, lambda: f64, n: usize) -> Result<f64> {
    check_lambda(lambda)?;
    if n > MAX_MOMENT {
        return Err(Error::MomentOrder { k: n, max: MAX_MOMENT });
    }
    let mut m = [0.0; MAX_MOMENT + 1];
    let c = l.clamp(a.min(b), a.max(b));
    if c == l {
        moments(a - l, b - l, lambda, &mut m[..=n]);
    } else if b >= a {
        one_sided_moments(a, b, l, lambda, &mut m[..=n]);
    } else {
        one_sided_moments(b, a, l, lambda, &mut m[..=n]);
        m.iter_mut().for_each(|v| *v = -*v);
    }
    Ok((0..=n)
        .map(|k| binomial(n, k) * c.powi((n - k) as i32) * m[k])
        .sum())
}

/// `out[k] = ∫_a^b (x-c)^k e^{-λ²(x-l)²} dx` for `l` outside `[a, b]`, with
/// `c` the endpoint nearest to `l`.
pub(crate) fn one_sided_moments(a: f64, b: f64, l: f64, lambda: f64, out: &mut [f64]) {
    let len = b - a;
    if l > b {
        left_of_centre_moments(len, l - b, lambda, out);
    } else {
        // Reflect x - a -> -(x - a) so the centre sits to the right.
        left_of_centre_moments(len, a - l, lambda, out);
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
}

/// `out[k] = ∫_{-len}^0 u^k e^{-λ²(u-d)²} du` for `d ≥ 0`.
fn left_of_centre_moments(len: f64, d: f64, lambda: f64, out: &mut [f64]) {
    let l2 = lambda * lambda;
    if l2 * len * (len + 2.0 * d) <= 1.0 {
        short_interval_moments(len, d, l2, out);
        return;
    }
    // Half line up to 0 minus half line up to -len; the second is expanded
    // about -len, where every term carries the same sign.
    let kmax = out.len();
    let mut near = [0.0; MAX_MOMENT + 1];
    let mut far = [0.0; MAX_MOMENT + 1];
    half_line_moments(d, lambda, &mut near[..kmax]);
    half_line_moments(d + len, lambda, &mut far[..kmax]);
    for (k, slot) in out.iter_mut().enumerate() {
        let tail: f64 = (0..=k).map(|j| binomial(k, j) * (-len).powi((k - j) as i32) * far[j]).sum();
        *slot = near[k] - tail;
    }
}

/// Power series of `e^{-λ²(u-d)²}` in `u`, integrated termwise over
/// `[-len, 0]`; used when the exponent varies by at most one over the interval.
fn short_interval_moments(len: f64, d: f64, l2: f64, out: &mut [f64]) {
    let beta = 2.0 * l2 * d;
    let scale = exp_neg_sq(l2.sqrt() * d);
    // e^{βu - λ²u²} = Σ c_j u^j with (j+1) c_{j+1} = β c_j - 2λ² c_{j-1}.
    let mut coef = [0.0f64; 64];
    coef[0] = 1.0;
    coef[1] = beta;
    for j in 1..63 {
        coef[j + 1] = (beta * coef[j] - 2.0 * l2 * coef[j - 1]) / (j + 1) as f64;
    }
    for (k, slot) in out.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut pow = (-len).powi(k as i32 + 1);
        for (j, c) in coef.iter().enumerate() {
            // ∫_{-len}^0 u^m du = -(-len)^{m+1} / (m+1)
            let term = -c * pow / (k + j + 1) as f64;
            sum += term;
            if j > 4 && term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            pow *= -len;
        }
        *slot = scale * sum;
    }
}

/// `out[k] = ∫_{-∞}^0 v^k e^{-λ²(v-d)²} dv` for `d ≥ 0`, from the repeated
/// erfc integrals `iⁿerfc(λd)`.
fn half_line_moments(d: f64, lambda: f64, out: &mut [f64]) {
    let z = lambda * d;
    let decay = exp_neg_sq(z);
    if decay == 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut scaled = [0.0; MAX_MOMENT + 1];
    scaled_repeated_erfc(z, &mut scaled[..out.len()]);
    // ∫_0^∞ s^k e^{-(s+z)²} ds = (√π/2) k! iᵏerfc(z)
    let mut fact = 1.0;
    let mut inv_pow = 1.0 / lambda;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
            inv_pow /= -lambda;
        }
        *slot = 0.5 * SQRT_PI * fact * inv_pow * decay * scaled[k];
    }
}

const FORWARD_LIMIT: f64 = 0.55;

/// `out[n] = e^{z²} iⁿerfc(z)` for `z ≥ 0`, by backward recursion of
/// `i^{n-2} = 2n iⁿ + 2z i^{n-1}` normalised with `e^{z²} i^{-1}erfc(z) = 2/√π`.
fn scaled_repeated_erfc(z: f64, out: &mut [f64]) {
    if z < FORWARD_LIMIT {
        // Forward recursion is stable for small z, where the backward sweep
        // barely couples the even and odd chains.
        let (mut lower, mut mid) = (FRAC_2_SQRT_PI, erfc(z) * (z * z).exp());
        for (n, slot) in out.iter_mut().enumerate() {
            if n > 0 {
                let next = (lower - 2.0 * z * mid) / (2 * n) as f64;
                lower = mid;
                mid = next;
            }
            *slot = mid;
        }
        return;
    }
    let start = out.len() + if z < 4.0 { 600 } else { 60 };
    let (mut hi, mut mid) = (0.0f64, 1e-300f64);
    let mut tail = [0.0; MAX_MOMENT + 1];
    // After the step for n the pair holds (i^{n-1}, i^{n-2}).
    for n in (1..=start).rev() {
        let lower = 2.0 * n as f64 * hi + 2.0 * z * mid;
        hi = mid;
        mid = lower;
        if n >= 1 && n - 1 < out.len() {
            tail[n - 1] = hi;
        }
        if mid > 1e250 {
            hi *= 1e-250;
            mid *= 1e-250;
            tail.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    let norm = FRAC_2_SQRT_PI / mid;
    for (slot, t) in out.iter_mut().zip(&tail) {
        *slot = t * norm;
    }
}

/// Contracts the coefficients of `p` (expanded about the Gaussian centre)
/// against a moment table.
#[inline]
fn contract(p: &Poly1D, m: &[f64]) -> f64 {
    p.coeffs().iter().zip(m).map(|(c, v)| c * v).sum()
}

/// `∫_lo^hi p(x) e^{-λ²(x-l)²} dx`, without argument checks.
pub(crate) fn gauss_poly_unchecked(p: &Poly1D, lo: f64, hi: f64, l: f64, lambda: f64) -> f64 {
    if p.coeffs().is_empty() {
        return 0.0;
    }
    let mut m = [0.0; MAX_MOMENT + 1];
    let n = p.coeffs().len();
    if (lo..=hi).contains(&l) || hi < lo {
        moments(lo - l, hi - l, lambda, &mut m[..n]);
        return contract(&p.taylor_shift(l), &m[..n]);
    }
    let c = l.clamp(lo, hi);
    one_sided_moments(lo, hi, l, lambda, &mut m[..n]);
    contract(&p.taylor_shift(c), &m[..n])
}

/// `I(p, a, b, l, λ) = ∫_a^b p(x) e^{-λ²(x-l)²} dx`.
pub fn int_gauss_poly(p: &Poly1D, a: f64, b: f64, l: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_degree(p.degree())?;
    Ok(gauss_poly_unchecked(p, a, b, l, lambda))
}

fn check_degree(deg: usize) -> Result<()> {
    if deg > MAX_MOMENT {
        Err(Error::MomentOrder { k: deg, max: MAX_MOMENT })
    } else {
        Ok(())
    }
}

/// `Ī(p, q, λ, a, b, a', b') = ∫_a^b p(x) ∫_{a'}^{b'} e^{-λ²(x-y)²} q(y) dy dx`.
pub fn double_gauss_poly(
    p: &Poly1D,
    q: &Poly1D,
    lambda: f64,
    a: f64,
    b: f64,
    ap: f64,
    bp: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    if q.degree() + 1 > MAX_RECURSION_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "inner polynomial degree {} exceeds recursion cap",
            q.degree()
        )));
    }
    if p.degree() + q.degree() + 1 > Poly1D::MAX_DEGREE.min(MAX_MOMENT) {
        return Err(Error::MomentOrder {
            k: p.degree() + q.degree() + 1,
            max: Poly1D::MAX_DEGREE.min(MAX_MOMENT),
        });
    }
    // Work in a frame anchored at `a`; the kernel only sees differences.
    let p_loc = p.taylor_shift(a);
    let q_loc = q.taylor_shift(a);
    Ok(double_gauss_local(&p_loc, &q_loc, lambda, b - a, ap - a, bp - a))
}

/// `Ī` in a frame where the outer interval is `[0, len]` and the inner one is
/// `[y0, y1]`; both polynomials are expressed in that frame.
///
/// Integration by parts with the antiderivative `P` of `p` (chosen with
/// `P(0) = 0`):
///
/// `Ī(p, q) = P(len) I(q; y, len) + q(y1) I(P; x, y1) - q(y0) I(P; x, y0) - Ī(P, q')`
pub(crate) fn double_gauss_local(
    p: &Poly1D,
    q: &Poly1D,
    lambda: f64,
    len: f64,
    y0: f64,
    y1: f64,
) -> f64 {
    if q.is_zero() || p.is_zero() {
        return 0.0;
    }
    let n = p.coeffs().len() + q.coeffs().len();
    let mut m_y = [0.0; MAX_MOMENT + 1];
    let mut m_hi = [0.0; MAX_MOMENT + 1];
    let mut m_lo = [0.0; MAX_MOMENT + 1];
    moments(y0 - len, y1 - len, lambda, &mut m_y[..n]);
    moments(-y1, len - y1, lambda, &mut m_hi[..n]);
    moments(-y0, len - y0, lambda, &mut m_lo[..n]);

    let mut total = 0.0;
    let mut sign = 1.0;
    let mut cp = *p;
    let mut cq = *q;
    while !cq.is_zero() {
        let big_p = cp.antiderivative();
        let t = big_p.evaluate(len) * contract(&cq.taylor_shift(len), &m_y)
            + cq.evaluate(y1) * contract(&big_p.taylor_shift(y1), &m_hi)
            - cq.evaluate(y0) * contract(&big_p.taylor_shift(y0), &m_lo);
        total += sign * t;
        sign = -sign;
        cp = big_p;
        cq = cq.derivative();
    }
    total
}

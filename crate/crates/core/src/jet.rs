//! Truncated bivariate Taylor arithmetic of order 4.
//!
//! A [`Taylor4`] holds the Taylor coefficients of a smooth function of two
//! variables around an expansion point, up to total degree 4. Seeding the
//! two variables as jets and running an expression through ordinary
//! arithmetic produces every mixed partial derivative of the result exactly
//! (up to roundoff), which is what the curvature pipeline needs: fourth
//! derivatives of the immersion feed second derivatives of the mean
//! curvature and the Laplacian of |A|^2 without any finite differencing.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Truncation order of the jet arithmetic.
pub const MAX_ORDER: usize = 4;

/// Number of stored coefficients: multi-indices (a,b) with a+b <= 4.
pub const N_COEFFS: usize = 15;

/// Coefficient index of the multi-index (a, b), ordered by total degree,
/// then by ascending b. (0,0)=0, (1,0)=1, (0,1)=2, (2,0)=3, ...
#[inline]
pub const fn coeff_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Degree lookup per flat index.
const DEG: [(usize, usize); N_COEFFS] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

/// A domain fault raised by non-smooth or undefined operations on jets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetFault {
    DivisionByZero,
    LogNonPositive,
    SqrtNonPositive,
    FractionalPowNonPositiveBase,
    AbsAtZero,
}

impl fmt::Display for JetFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            JetFault::DivisionByZero => "division by zero",
            JetFault::LogNonPositive => "log of non-positive argument",
            JetFault::SqrtNonPositive => "sqrt of non-positive argument",
            JetFault::FractionalPowNonPositiveBase => {
                "fractional power of non-positive base"
            }
            JetFault::AbsAtZero => "abs is not differentiable at zero argument",
        };
        f.write_str(msg)
    }
}

/// Order-4 truncated Taylor expansion in two variables.
#[derive(Clone, Copy, PartialEq)]
pub struct Taylor4 {
    c: [f64; N_COEFFS],
}

impl fmt::Debug for Taylor4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Taylor4({:?})", self.c)
    }
}

impl Taylor4 {
    pub const fn zero() -> Self {
        Taylor4 { c: [0.0; N_COEFFS] }
    }

    pub fn constant(x: f64) -> Self {
        let mut c = [0.0; N_COEFFS];
        c[0] = x;
        Taylor4 { c }
    }

    /// Jet of the first variable around `u0`.
    pub fn variable_u(u0: f64) -> Self {
        let mut c = [0.0; N_COEFFS];
        c[0] = u0;
        c[coeff_index(1, 0)] = 1.0;
        Taylor4 { c }
    }

    /// Jet of the second variable around `v0`.
    pub fn variable_v(v0: f64) -> Self {
        let mut c = [0.0; N_COEFFS];
        c[0] = v0;
        c[coeff_index(0, 1)] = 1.0;
        Taylor4 { c }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of the multi-index (a, b).
    #[inline]
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        self.c[coeff_index(a, b)]
    }

    /// Partial derivative d^{a+b} f / du^a dv^b at the expansion point.
    #[inline]
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        self.c[coeff_index(a, b)] * FACT[a] * FACT[b]
    }

    /// Jet of df/du (coefficients valid one order lower).
    pub fn d_du(&self) -> Self {
        let mut out = Taylor4::zero();
        for (i, &(a, b)) in DEG.iter().enumerate() {
            if a + 1 + b <= MAX_ORDER {
                out.c[i] = (a + 1) as f64 * self.c[coeff_index(a + 1, b)];
            }
        }
        out
    }

    /// Jet of df/dv.
    pub fn d_dv(&self) -> Self {
        let mut out = Taylor4::zero();
        for (i, &(a, b)) in DEG.iter().enumerate() {
            if a + b + 1 <= MAX_ORDER {
                out.c[i] = (b + 1) as f64 * self.c[coeff_index(a, b + 1)];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x *= s;
        }
        Taylor4 { c }
    }

    fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    /// Truncated product.
    pub fn mul_trunc(&self, rhs: &Taylor4) -> Taylor4 {
        let mut out = Taylor4::zero();
        for (i, &(a1, b1)) in DEG.iter().enumerate() {
            let x = self.c[i];
            if x == 0.0 {
                continue;
            }
            for (j, &(a2, b2)) in DEG.iter().enumerate() {
                if a1 + a2 + b1 + b2 > MAX_ORDER {
                    continue;
                }
                out.c[coeff_index(a1 + a2, b1 + b2)] += x * rhs.c[j];
            }
        }
        out
    }

    /// Composition with a univariate smooth map: `d[k]` must hold
    /// f^(k)(self.value()) / k! for k = 0..=4.
    fn compose(&self, d: &[f64; 5]) -> Taylor4 {
        // Horner scheme in the zero-constant part h = self - value.
        let mut h = *self;
        h.c[0] = 0.0;
        let mut acc = Taylor4::constant(d[4]);
        for k in (0..4).rev() {
            acc = acc.mul_trunc(&h);
            acc.c[0] += d[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Taylor4, JetFault> {
        let x = self.c[0];
        if x == 0.0 || !x.is_finite() {
            return Err(JetFault::DivisionByZero);
        }
        let inv = 1.0 / x;
        let mut d = [0.0; 5];
        let mut p = inv;
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = if k % 2 == 0 { p } else { -p };
            p *= inv;
        }
        Ok(self.compose(&d))
    }

    pub fn sqrt(&self) -> Result<Taylor4, JetFault> {
        if self.c[0] <= 0.0 {
            return Err(JetFault::SqrtNonPositive);
        }
        self.powf_unchecked(0.5)
    }

    pub fn exp(&self) -> Taylor4 {
        let e = self.c[0].exp();
        let d = [e, e, e / 2.0, e / 6.0, e / 24.0];
        self.compose(&d)
    }

    pub fn ln(&self) -> Result<Taylor4, JetFault> {
        let x = self.c[0];
        if x <= 0.0 {
            return Err(JetFault::LogNonPositive);
        }
        let inv = 1.0 / x;
        let d = [
            x.ln(),
            inv,
            -inv * inv / 2.0,
            inv * inv * inv / 3.0,
            -inv * inv * inv * inv / 4.0,
        ];
        Ok(self.compose(&d))
    }

    pub fn sin(&self) -> Taylor4 {
        let (s, c) = self.c[0].sin_cos();
        let d = [s, c, -s / 2.0, -c / 6.0, s / 24.0];
        self.compose(&d)
    }

    pub fn cos(&self) -> Taylor4 {
        let (s, c) = self.c[0].sin_cos();
        let d = [c, -s, -c / 2.0, s / 6.0, c / 24.0];
        self.compose(&d)
    }

    /// |self|; rejected where the argument vanishes (kink).
    pub fn abs(&self) -> Result<Taylor4, JetFault> {
        if self.c[0] == 0.0 {
            return Err(JetFault::AbsAtZero);
        }
        Ok(if self.c[0] > 0.0 { *self } else { -*self })
    }

    /// Integer power via binary exponentiation; valid for any base.
    pub fn powi(&self, n: i32) -> Result<Taylor4, JetFault> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut result = Taylor4::constant(1.0);
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_trunc(&base);
            }
            base = base.mul_trunc(&base);
            e >>= 1;
        }
        Ok(result)
    }

    fn powf_unchecked(&self, e: f64) -> Result<Taylor4, JetFault> {
        let x = self.c[0];
        let mut d = [0.0; 5];
        let mut coef = 1.0;
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = coef * x.powf(e - k as f64);
            coef *= (e - k as f64) / (k as f64 + 1.0);
        }
        let out = self.compose(&d);
        if !out.is_finite() {
            return Err(JetFault::FractionalPowNonPositiveBase);
        }
        Ok(out)
    }

    /// Real power. Integer exponents work for any base; fractional
    /// exponents require a strictly positive base.
    pub fn powf(&self, e: f64) -> Result<Taylor4, JetFault> {
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            return self.powi(e as i32);
        }
        if self.c[0] <= 0.0 {
            return Err(JetFault::FractionalPowNonPositiveBase);
        }
        self.powf_unchecked(e)
    }
}

impl Add for Taylor4 {
    type Output = Taylor4;
    fn add(self, rhs: Taylor4) -> Taylor4 {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(rhs.c.iter()) {
            *x += y;
        }
        Taylor4 { c }
    }
}

impl Sub for Taylor4 {
    type Output = Taylor4;
    fn sub(self, rhs: Taylor4) -> Taylor4 {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(rhs.c.iter()) {
            *x -= y;
        }
        Taylor4 { c }
    }
}

impl Mul for Taylor4 {
    type Output = Taylor4;
    fn mul(self, rhs: Taylor4) -> Taylor4 {
        Taylor4::mul_trunc(&self, &rhs)
    }
}

impl Neg for Taylor4 {
    type Output = Taylor4;
    fn neg(self) -> Taylor4 {
        self.scale(-1.0)
    }
}

impl Div for Taylor4 {
    type Output = Taylor4;
    /// Panics on a zero denominator; use [`Taylor4::recip`] for checked division.
    fn div(self, rhs: Taylor4) -> Taylor4 {
        self.mul_trunc(&rhs.recip().expect("jet division by zero"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())),
            "{a} vs {b}"
        );
    }

    #[test]
    fn polynomial_partials_are_exact() {
        // f(u,v) = 3u^4 - 2u^2v^2 + 5uv^3 - v + 7
        let f = |u: f64, v: f64| {
            3.0 * u.powi(4) - 2.0 * u * u * v * v + 5.0 * u * v.powi(3) - v + 7.0
        };
        let (u0, v0) = (1.3, -0.7);
        let u = Taylor4::variable_u(u0);
        let v = Taylor4::variable_v(v0);
        let jet = u.powi(4).unwrap().scale(3.0) - (u * u * v * v).scale(2.0)
            + (u * v.powi(3).unwrap()).scale(5.0)
            - v
            + Taylor4::constant(7.0);
        assert_close(jet.value(), f(u0, v0), 1e-14);
        // hand-differentiated checks
        assert_close(jet.partial(1, 0), 12.0 * u0.powi(3) - 4.0 * u0 * v0 * v0 + 5.0 * v0.powi(3), 1e-13);
        assert_close(jet.partial(0, 1), -4.0 * u0 * u0 * v0 + 15.0 * u0 * v0 * v0 - 1.0, 1e-13);
        assert_close(jet.partial(2, 0), 36.0 * u0 * u0 - 4.0 * v0 * v0, 1e-13);
        assert_close(jet.partial(1, 1), -8.0 * u0 * v0 + 15.0 * v0 * v0, 1e-13);
        assert_close(jet.partial(2, 2), -8.0, 1e-13);
        assert_close(jet.partial(4, 0), 72.0, 1e-13);
        assert_close(jet.partial(1, 3), 30.0, 1e-13);
        assert_close(jet.partial(0, 4), 0.0, 1e-13);
    }

    #[test]
    fn trig_identity_jet() {
        let u = Taylor4::variable_u(0.9);
        let v = Taylor4::variable_v(-0.4);
        let s = (u * v).sin();
        let c = (u * v).cos();
        let one = s * s + c * c;
        assert_close(one.value(), 1.0, 1e-15);
        for (a, b) in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 1), (2, 2), (0, 4)] {
            assert!(one.partial(a, b).abs() < 1e-12, "({a},{b}) -> {}", one.partial(a, b));
        }
    }

    #[test]
    fn exp_log_round_trip() {
        let u = Taylor4::variable_u(0.6);
        let v = Taylor4::variable_v(1.1);
        let g = u * u + v + Taylor4::constant(0.5);
        let back = g.ln().unwrap().exp();
        for i in 0..N_COEFFS {
            assert_close(back.c[i], g.c[i], 1e-13);
        }
    }

    #[test]
    fn division_matches_product_inverse() {
        let u = Taylor4::variable_u(0.3);
        let v = Taylor4::variable_v(0.2);
        let a = u * u * v + Taylor4::constant(1.0);
        let b = v * v - u + Taylor4::constant(2.0);
        let q = a / b;
        let reconstructed = q * b;
        for i in 0..N_COEFFS {
            assert_close(reconstructed.c[i], a.c[i], 1e-13);
        }
    }

    #[test]
    fn fractional_power_derivatives() {
        // d/du (u^0.3) = 0.3 u^{-0.7} etc.
        let u0 = 1.7;
        let u = Taylor4::variable_u(u0);
        let p = u.powf(0.3).unwrap();
        assert_close(p.partial(1, 0), 0.3 * u0.powf(-0.7), 1e-13);
        assert_close(p.partial(2, 0), 0.3 * -0.7 * u0.powf(-1.7), 1e-13);
        assert_close(
            p.partial(4, 0),
            0.3 * -0.7 * -1.7 * -2.7 * u0.powf(-3.7),
            1e-12,
        );
    }

    #[test]
    fn domain_faults_are_reported() {
        let z = Taylor4::variable_u(0.0);
        assert_eq!(z.ln(), Err(JetFault::LogNonPositive));
        assert_eq!(z.sqrt(), Err(JetFault::SqrtNonPositive));
        assert_eq!(z.abs(), Err(JetFault::AbsAtZero));
        assert_eq!(z.recip(), Err(JetFault::DivisionByZero));
        assert_eq!(
            Taylor4::constant(-2.0).powf(0.5),
            Err(JetFault::FractionalPowNonPositiveBase)
        );
        // integer powers of negative bases are fine
        let m = Taylor4::variable_u(-2.0);
        assert_close(m.powi(3).unwrap().value(), -8.0, 1e-15);
        assert_close(m.powi(-2).unwrap().value(), 0.25, 1e-15);
    }

    #[test]
    fn derivative_shift_consistency() {
        let u = Taylor4::variable_u(0.8);
        let v = Taylor4::variable_v(0.15);
        let f = (u * v).sin() + u.powi(3).unwrap();
        let fu = f.d_du();
        assert_close(fu.value(), f.partial(1, 0), 1e-14);
        assert_close(fu.partial(1, 0), f.partial(2, 0), 1e-14);
        assert_close(fu.partial(1, 1), f.partial(2, 1), 1e-14);
        assert_close(fu.partial(0, 2), f.partial(1, 2), 1e-14);
    }
}

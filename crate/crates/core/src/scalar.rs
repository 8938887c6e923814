//! Scalars for cochain computations.
//!
//! [`Cyc`] is an exact element `a + b·ζ_d` of ℚ(ζ_d) for `d ∈ {1,2,3,4,6}`,
//! where every such field has degree at most two. [`FloatField`] works in
//! `Complex<f64>` with a relative rank threshold and accepts any `d`.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Operations needed by elimination, determinants and the volume formulas.
pub trait Field: Clone + Send + Sync {
    type S: Clone + fmt::Debug + PartialEq + Send + Sync;

    fn d(&self) -> usize;
    fn zero(&self) -> Self::S;
    fn one(&self) -> Self::S;
    fn from_i64(&self, v: i64) -> Self::S;
    /// `e^{2πi j/d}`.
    fn root(&self, j: i64) -> Self::S;
    fn add(&self, x: &Self::S, y: &Self::S) -> Self::S;
    fn sub(&self, x: &Self::S, y: &Self::S) -> Self::S;
    fn mul(&self, x: &Self::S, y: &Self::S) -> Self::S;
    fn neg(&self, x: &Self::S) -> Self::S;
    fn inv(&self, x: &Self::S) -> Self::S;
    fn conj(&self, x: &Self::S) -> Self::S;
    /// Zero test; `scale` is a magnitude typical of the surrounding data.
    fn is_zero(&self, x: &Self::S, scale: f64) -> bool;
    fn magnitude(&self, x: &Self::S) -> f64;
    fn to_c64(&self, x: &Self::S) -> Complex64;
    fn is_exact(&self) -> bool;
    /// `|x|²` as an exact rational when the field is exact.
    fn abs_sq_exact(&self, x: &Self::S) -> Option<BigRational>;
    fn render(&self, x: &Self::S) -> String;

    fn div(&self, x: &Self::S, y: &Self::S) -> Self::S {
        self.mul(x, &self.inv(y))
    }
    fn mul_i64(&self, x: &Self::S, k: i64) -> Self::S {
        self.mul(x, &self.from_i64(k))
    }
    fn from_ratio(&self, p: i64, q: i64) -> Self::S {
        self.div(&self.from_i64(p), &self.from_i64(q))
    }
}

/// Exact element `a + b·ζ` of ℚ(ζ_d).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyc {
    pub a: BigRational,
    pub b: BigRational,
}

impl fmt::Debug for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}ζ)", self.a, self.b)
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// ℚ(ζ_d) for `d ∈ {1,2,3,4,6}` with `ζ² = s·ζ + t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactField {
    d: usize,
    quadratic: bool,
    s: i64,
    t: i64,
}

impl ExactField {
    pub fn new(d: usize) -> Option<Self> {
        let (quadratic, s, t) = match d {
            1 | 2 => (false, 0, 0),
            3 => (true, -1, -1),
            4 => (true, 0, -1),
            6 => (true, 1, -1),
            _ => return None,
        };
        Some(Self { d, quadratic, s, t })
    }

    pub fn supports(d: usize) -> bool {
        matches!(d, 1 | 2 | 3 | 4 | 6)
    }

    pub fn rational(&self, q: BigRational) -> Cyc {
        Cyc { a: q, b: BigRational::zero() }
    }

    /// ζ_d itself (or −1 for `d = 2`).
    fn generator(&self) -> Cyc {
        match self.d {
            1 => self.rational(rat(1)),
            2 => self.rational(rat(-1)),
            _ => Cyc { a: BigRational::zero(), b: rat(1) },
        }
    }

    pub fn norm(&self, x: &Cyc) -> BigRational {
        let p = self.mul(x, &self.conj(x));
        p.a
    }

    /// Whether both coordinates are integers, i.e. `x ∈ ℤ[ζ_d]`
    /// (or `x ∈ ℤ` for `d ≤ 2`).
    pub fn is_integral(&self, x: &Cyc) -> bool {
        x.a.is_integer() && x.b.is_integer()
    }

    /// Coordinate-wise nearest integral element, the quotient step of
    /// Euclidean division in ℤ, ℤ[i] and ℤ[ζ₃].
    pub fn round(&self, x: &Cyc) -> Cyc {
        Cyc { a: x.a.round(), b: x.b.round() }
    }

    /// Square roots of rationals are tracked by their square; this tests
    /// whether a non-negative rational is a perfect square in ℚ.
    pub fn is_rational_square(q: &BigRational) -> bool {
        if q.is_negative() {
            return false;
        }
        let n = q.numer();
        let d = q.denom();
        let sn = n.sqrt();
        let sd = d.sqrt();
        &(&sn * &sn) == n && &(&sd * &sd) == d
    }

    /// Sign of the imaginary part (`d ≥ 3`), exact since `Im ζ_d > 0`.
    pub fn imag_sign(&self, x: &Cyc) -> i32 {
        if !self.quadratic {
            0
        } else if x.b.is_positive() {
            1
        } else if x.b.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Whether `x` is real (for `d ≤ 2` always).
    pub fn is_real(&self, x: &Cyc) -> bool {
        x.b.is_zero()
    }

    /// Whether `x` is purely imaginary: `x + conj(x) = 0`.
    pub fn is_imaginary(&self, x: &Cyc) -> bool {
        self.add(x, &self.conj(x)) == self.zero()
    }
}

impl Field for ExactField {
    type S = Cyc;

    fn d(&self) -> usize {
        self.d
    }
    fn zero(&self) -> Cyc {
        Cyc { a: BigRational::zero(), b: BigRational::zero() }
    }
    fn one(&self) -> Cyc {
        self.rational(rat(1))
    }
    fn from_i64(&self, v: i64) -> Cyc {
        self.rational(rat(v))
    }
    fn root(&self, j: i64) -> Cyc {
        let j = j.rem_euclid(self.d as i64);
        let g = self.generator();
        let mut x = self.one();
        for _ in 0..j {
            x = self.mul(&x, &g);
        }
        x
    }
    fn add(&self, x: &Cyc, y: &Cyc) -> Cyc {
        Cyc { a: &x.a + &y.a, b: &x.b + &y.b }
    }
    fn sub(&self, x: &Cyc, y: &Cyc) -> Cyc {
        Cyc { a: &x.a - &y.a, b: &x.b - &y.b }
    }
    fn mul(&self, x: &Cyc, y: &Cyc) -> Cyc {
        if !self.quadratic {
            return self.rational(&x.a * &y.a);
        }
        let bb = &x.b * &y.b;
        Cyc {
            a: &x.a * &y.a + &bb * rat(self.t),
            b: &x.a * &y.b + &x.b * &y.a + bb * rat(self.s),
        }
    }
    fn neg(&self, x: &Cyc) -> Cyc {
        Cyc { a: -&x.a, b: -&x.b }
    }
    fn inv(&self, x: &Cyc) -> Cyc {
        assert!(!x.a.is_zero() || !x.b.is_zero(), "inverse of zero");
        let c = self.conj(x);
        let n = self.mul(x, &c).a;
        Cyc { a: &c.a / &n, b: &c.b / &n }
    }
    fn conj(&self, x: &Cyc) -> Cyc {
        if !self.quadratic {
            return x.clone();
        }
        // conj(ζ) = s − ζ
        Cyc { a: &x.a + &x.b * rat(self.s), b: -&x.b }
    }
    fn is_zero(&self, x: &Cyc, _scale: f64) -> bool {
        x.a.is_zero() && x.b.is_zero()
    }
    fn magnitude(&self, x: &Cyc) -> f64 {
        self.to_c64(x).norm()
    }
    fn to_c64(&self, x: &Cyc) -> Complex64 {
        let a = x.a.to_f64().unwrap_or(f64::NAN);
        let b = x.b.to_f64().unwrap_or(f64::NAN);
        let z = match self.d {
            1 | 2 => Complex64::new(0.0, 0.0),
            d => Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64),
        };
        Complex64::new(a, 0.0) + z * b
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn abs_sq_exact(&self, x: &Cyc) -> Option<BigRational> {
        Some(self.norm(x))
    }
    fn render(&self, x: &Cyc) -> String {
        render_cyc(x, self.d)
    }
}

/// `a + b·ζ_d` as text, e.g. `1/2`, `-3*z6`, `1 + 2*z3`.
pub fn render_cyc(x: &Cyc, d: usize) -> String {
    let sym = format!("z{d}");
    if x.b.is_zero() || d <= 2 {
        return x.a.to_string();
    }
    let bpart = if x.b == rat(1) {
        sym.clone()
    } else if x.b == rat(-1) {
        format!("-{sym}")
    } else {
        format!("{}*{sym}", x.b)
    };
    if x.a.is_zero() {
        bpart
    } else if x.b.is_negative() {
        format!("{} - {}", x.a, bpart.trim_start_matches('-'))
    } else {
        format!("{} + {}", x.a, bpart)
    }
}

/// Floating point scalars with a relative zero threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatField {
    d: usize,
    pub tol: f64,
}

pub const DEFAULT_EPS_LIN: f64 = 1e-8;

impl FloatField {
    pub fn new(d: usize, tol: f64) -> Self {
        Self { d, tol }
    }
}

impl Field for FloatField {
    type S = Complex64;

    fn d(&self) -> usize {
        self.d
    }
    fn zero(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn one(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(&self, v: i64) -> Complex64 {
        Complex64::new(v as f64, 0.0)
    }
    fn root(&self, j: i64) -> Complex64 {
        let j = j.rem_euclid(self.d as i64);
        root_c64(self.d, j)
    }
    fn add(&self, x: &Complex64, y: &Complex64) -> Complex64 {
        x + y
    }
    fn sub(&self, x: &Complex64, y: &Complex64) -> Complex64 {
        x - y
    }
    fn mul(&self, x: &Complex64, y: &Complex64) -> Complex64 {
        x * y
    }
    fn neg(&self, x: &Complex64) -> Complex64 {
        -x
    }
    fn inv(&self, x: &Complex64) -> Complex64 {
        x.inv()
    }
    fn conj(&self, x: &Complex64) -> Complex64 {
        x.conj()
    }
    fn is_zero(&self, x: &Complex64, scale: f64) -> bool {
        x.norm() <= self.tol * scale.max(1e-300)
    }
    fn magnitude(&self, x: &Complex64) -> f64 {
        x.norm()
    }
    fn to_c64(&self, x: &Complex64) -> Complex64 {
        *x
    }
    fn is_exact(&self) -> bool {
        false
    }
    fn abs_sq_exact(&self, _x: &Complex64) -> Option<BigRational> {
        None
    }
    fn render(&self, x: &Complex64) -> String {
        if x.im == 0.0 {
            format!("{:.12e}", x.re)
        } else {
            format!("{:.12e}{:+.12e}i", x.re, x.im)
        }
    }
}

/// `e^{2πi j/d}` with exact values at the quarter turns.
pub fn root_c64(d: usize, j: i64) -> Complex64 {
    let j = j.rem_euclid(d as i64);
    if (4 * j) % d as i64 == 0 {
        match 4 * j / d as i64 {
            0 => return Complex64::new(1.0, 0.0),
            1 => return Complex64::new(0.0, 1.0),
            2 => return Complex64::new(-1.0, 0.0),
            _ => return Complex64::new(0.0, -1.0),
        }
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / d as f64)
}

/// `|1 − ζ_d^k|²`, an integer for `d ∈ {2,3,4,6}`.
pub fn one_minus_zeta_sq(d: usize, k: i64) -> BigRational {
    let f = ExactField::new(d).expect("supported d");
    let x = f.sub(&f.one(), &f.root(k));
    f.norm(&x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_have_order_d() {
        for d in [1usize, 2, 3, 4, 6] {
            let f = ExactField::new(d).unwrap();
            let z = f.root(1);
            let mut p = f.one();
            for k in 1..=d {
                p = f.mul(&p, &z);
                assert_eq!(p == f.one(), k == d, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn exact_matches_float() {
        for d in [3usize, 4, 6] {
            let f = ExactField::new(d).unwrap();
            for j in 0..d as i64 {
                let e = f.to_c64(&f.root(j));
                let c = root_c64(d, j);
                assert!((e - c).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_and_conjugate() {
        let f = ExactField::new(6).unwrap();
        let x = Cyc { a: rat(3), b: BigRational::new(BigInt::from(-2), BigInt::from(5)) };
        let y = f.inv(&x);
        assert_eq!(f.mul(&x, &y), f.one());
        let c = f.to_c64(&f.conj(&x));
        assert!((c - f.to_c64(&x).conj()).norm() < 1e-12);
        assert!(f.is_real(&f.mul(&x, &f.conj(&x))));
    }

    #[test]
    fn one_minus_zeta_norms() {
        assert_eq!(one_minus_zeta_sq(2, 1), rat(4));
        assert_eq!(one_minus_zeta_sq(3, 1), rat(3));
        assert_eq!(one_minus_zeta_sq(4, 1), rat(2));
        assert_eq!(one_minus_zeta_sq(6, 1), rat(1));
        assert_eq!(one_minus_zeta_sq(6, 5), rat(1));
    }

    #[test]
    fn perfect_squares() {
        assert!(ExactField::is_rational_square(&BigRational::new(BigInt::from(9), BigInt::from(4))));
        assert!(!ExactField::is_rational_square(&rat(3)));
        assert!(!ExactField::is_rational_square(&rat(-4)));
    }

    #[test]
    fn rendering() {
        let f = ExactField::new(3).unwrap();
        assert_eq!(f.render(&f.root(1)), "z3");
        assert_eq!(f.render(&f.root(2)), "-1 - z3");
        assert_eq!(f.render(&f.from_ratio(1, 2)), "1/2");
    }

    #[test]
    fn unsupported_d() {
        assert!(ExactField::new(5).is_none());
    }
}

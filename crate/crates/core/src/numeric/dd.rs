//! Double-double ("double-width") arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! roughly 32 significant digits. Only the operations the lab needs are
//! provided: the four basic operations, square root, `exp`, `ln` and
//! reduction modulo one (for oscillatory phases).

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

pub const LN_2: DoubleDouble = DoubleDouble::new(0.6931471805599453, 2.3190468138462996e-17);
pub const PI: DoubleDouble = DoubleDouble::new(3.141592653589793, 1.2246467991473532e-16);

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble::new(0.0, 0.0);
    pub const ONE: DoubleDouble = DoubleDouble::new(1.0, 0.0);

    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub const fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    /// Exact conversion for integers below 2^106.
    pub fn from_u128(v: u128) -> Self {
        let hi = v as f64;
        let rest = v as i128 - hi as i128;
        Self::renorm(hi, rest as f64)
    }

    /// Exact product of two doubles.
    pub fn product(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Self { hi: p, lo: e }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::renorm(p, e + self.lo * b)
    }

    /// Multiplication by an exact power of two.
    pub fn scale_pow2(self, exp: i32) -> Self {
        let f = 2f64.powi(exp);
        Self { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn square(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let s = self.hi.sqrt();
        let sq = Self::product(s, s);
        let corr = (self - sq).hi / (2.0 * s);
        Self::renorm(s, corr)
    }

    pub fn floor(self) -> Self {
        let fh = self.hi.floor();
        if fh == self.hi {
            Self::renorm(fh, self.lo.floor())
        } else {
            Self::from_f64(fh)
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(self) -> f64 {
        let f = (self - self.floor()).to_f64();
        if f >= 1.0 {
            f - 1.0
        } else if f < 0.0 {
            f + 1.0
        } else {
            f
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        let k = (self.hi / LN_2.hi).round();
        let r = (self - LN_2.mul_f64(k)).scale_pow2(-10);
        // expm1(r) by Taylor series; |r| < 4e-4 so 10 terms reach 1e-40.
        let mut term = r;
        let mut sum = r;
        for i in 2..=10 {
            term = term * r;
            term = term / Self::from_f64(i as f64);
            sum = sum + term;
        }
        // expm1(2r) = expm1(r) * (2 + expm1(r)), applied ten times.
        for _ in 0..10 {
            sum = sum * (sum + Self::from_f64(2.0));
        }
        (sum + Self::ONE).scale_pow2(k as i32)
    }

    pub fn ln(self) -> Self {
        assert!(self.hi > 0.0, "ln of non-positive double-double");
        let y = Self::from_f64(self.hi.ln());
        // One Newton step on exp(y) = x doubles the number of correct digits.
        y + self * (-y).exp() - Self::ONE
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::renorm(s, e + f)
    }
}

impl Add<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        Self::renorm(s, e + self.lo)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        Self::renorm(p, e)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self::new(q1, q2) + q3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_product_and_sum() {
        let a = 1.0 + f64::EPSILON;
        let p = DoubleDouble::product(a, a);
        assert_eq!(p.hi, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(p.lo, f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn sqrt_two_squares_back() {
        let two = DoubleDouble::from_f64(2.0);
        let r = two.sqrt();
        let back = r * r - two;
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn ln_of_e_and_two() {
        let two = DoubleDouble::from_f64(2.0);
        let l = two.ln() - LN_2;
        assert!(l.to_f64().abs() < 1e-31);
        let e = DoubleDouble::ONE.exp();
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let err = e - DoubleDouble::new(2.718281828459045, 1.4456468917292502e-16);
        assert!(err.to_f64().abs() < 1e-30);
    }

    #[test]
    fn ln_large_argument_relative_accuracy() {
        // ln(2^45) = 45 ln 2
        let x = DoubleDouble::from_f64(2f64.powi(45));
        let err = x.ln() - LN_2.mul_f64(45.0);
        assert!(err.to_f64().abs() < 1e-29);
    }

    #[test]
    fn fract_of_large_values() {
        let x = DoubleDouble::new(1e10, 0.25);
        assert_eq!(x.fract(), 0.25);
        let y = DoubleDouble::new(-3.0, -0.25);
        assert!((y.fract() - 0.75).abs() < 1e-16);
        let big = DoubleDouble::from_u128(12_345_678_901_234_567_891);
        assert_eq!(big.fract(), 0.0);
    }

    #[test]
    fn division_round_trip() {
        let a = DoubleDouble::from_f64(1.0);
        let three = DoubleDouble::from_f64(3.0);
        let q = a / three;
        let back = q * three - a;
        assert!(back.to_f64().abs() < 1e-31);
    }
}

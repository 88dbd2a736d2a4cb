//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! carrying about 106 significant bits.
//!
//! Only the operations needed by the Thaler orbit engine are provided.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Relative rounding bound used when propagating certified errors.
pub const DD_EPS: f64 = 1.0 / (1u128 << 100) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
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

const LN2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
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

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Self::from_f64(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Self::from_f64(b).mul_f64(q2);
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }

    fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Self {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// `e^x`, accurate to a few units of 2^-104 relative.
    pub fn exp(self) -> Self {
        if self.hi < -745.2 {
            return Self::ZERO;
        }
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2.mul_f64(k);
        // e^r = (e^{r/512})^{512}; expm1 by Taylor, then doubling via s -> 2s + s^2.
        let r = r.ldexp(-9);
        let mut s = r;
        let mut term = r;
        for i in 2..=14 {
            term = (term * r).div_f64(i as f64);
            s = s + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..9 {
            s = s.mul_f64(2.0) + s * s;
        }
        let one_plus = s + Self::ONE;
        // Split the power of two to stay clear of overflow in powi.
        let k = k as i32;
        let half = k / 2;
        one_plus.ldexp(half).ldexp(k - half)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
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
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
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
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: DoubleDouble, b: DoubleDouble, rel: f64) -> bool {
        ((a - b).to_f64() / b.to_f64()).abs() < rel
    }

    #[test]
    fn one_third_roundtrip() {
        let third = DoubleDouble::ONE.div_f64(3.0);
        let back = third.mul_f64(3.0);
        assert!((back - DoubleDouble::ONE).to_f64().abs() < 1e-31);
        let t2 = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        assert!((third - t2).to_f64().abs() < 1e-32);
    }

    #[test]
    fn exp_reference_values() {
        // e and e^{-20} to 32 digits (computed independently with 60-digit arithmetic),
        // each written as a double-double.
        let e = DoubleDouble::new(std::f64::consts::E, 1.445_646_891_729_250_2e-16);
        assert!(close(DoubleDouble::ONE.exp(), e, 1e-30));
        let e20 = DoubleDouble::from_f64(-20.0).exp();
        let expect = DoubleDouble::new(2.061_153_622_438_558e-9, -4.197_557_675_950_54e-26);
        assert!(close(e20, expect, 1e-29), "{e20:?}");
    }

    #[test]
    fn exp_is_a_homomorphism() {
        for &(a, b) in &[(0.3, 0.7), (-1.25, -3.5), (-30.0, 2.0), (10.5, -7.25)] {
            let x = DoubleDouble::from_f64(a).div_f64(3.0);
            let y = DoubleDouble::from_f64(b).div_f64(7.0);
            let lhs = (x + y).exp();
            let rhs = x.exp() * y.exp();
            assert!(close(lhs, rhs, 1e-30), "{a} {b}");
        }
        assert_eq!(DoubleDouble::from_f64(-800.0).exp(), DoubleDouble::ZERO);
    }
}

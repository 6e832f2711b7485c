//! Double-double arithmetic for reference products.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! roughly 106 bits of significand. Only the operations the brute-force
//! oracles need are provided.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
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

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// `1 - p` held exactly for any `p` in `[0, 1]`.
    pub fn one_minus(p: f64) -> Self {
        let (hi, lo) = two_sum(1.0, -p);
        Self { hi, lo }
    }

    /// `self^n` by repeated squaring.
    pub fn powu(self, mut n: u64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
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
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

/// `1 - Π(1 - p_i)` evaluated as an explicit product in double-double.
///
/// Deliberately shares no code with the log-space engine.
pub fn brute_force_product<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    let survival = probs
        .into_iter()
        .fold(DoubleDouble::ONE, |acc, p| acc * DoubleDouble::one_minus(p));
    (DoubleDouble::ONE - survival).to_f64()
}

/// `1 - Π(1 - p_i)^{n_i}` with integer exponents.
pub fn brute_force_powers<I: IntoIterator<Item = (f64, u64)>>(terms: I) -> f64 {
    let survival = terms.into_iter().fold(DoubleDouble::ONE, |acc, (p, n)| {
        acc * DoubleDouble::one_minus(p).powu(n)
    });
    (DoubleDouble::ONE - survival).to_f64()
}

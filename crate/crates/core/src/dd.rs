//! Minimal double-double arithmetic for the intermediate-|z| Airy series.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
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

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Division by a small exact integer-valued divisor.
    pub fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let p = q1 * d;
        let perr = q1.mul_add(d, -p);
        let r = ((self.hi - p) - perr + self.lo) / d;
        let (hi, lo) = quick_two_sum(q1, r);
        Dd { hi, lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub fn from_c64(z: Complex64) -> Self {
        CDd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    pub fn from_dd(re: Dd) -> Self {
        CDd { re, im: Dd::default() }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn div_f64(self, d: f64) -> Self {
        CDd { re: self.re.div_f64(d), im: self.im.div_f64(d) }
    }

    pub fn scale(self, s: Dd) -> Self {
        CDd { re: self.re * s, im: self.im * s }
    }

    pub fn norm1(self) -> f64 {
        self.re.hi.abs() + self.im.hi.abs()
    }
}

impl Add for CDd {
    type Output = CDd;
    fn add(self, o: CDd) -> CDd {
        CDd { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for CDd {
    type Output = CDd;
    fn sub(self, o: CDd) -> CDd {
        CDd { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for CDd {
    type Output = CDd;
    fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_is_accurate_beyond_f64() {
        let third = Dd::from_f64(1.0).div_f64(3.0);
        let back = third * Dd::from_f64(3.0) - Dd::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn complex_product_matches_f64() {
        let a = CDd::from_c64(Complex64::new(1.5, -0.25));
        let b = CDd::from_c64(Complex64::new(-2.0, 3.0));
        let p = (a * b).to_c64();
        assert!((p - Complex64::new(1.5, -0.25) * Complex64::new(-2.0, 3.0)).norm() < 1e-15);
    }
}

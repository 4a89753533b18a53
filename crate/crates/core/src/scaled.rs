//! Complex numbers carried as `mant · exp(log)` so that Airy products and
//! ratios spanning thousands of orders of magnitude stay representable.

use std::ops::{Div, Mul};

use num_complex::Complex64;
use serde::Serialize;

/// Largest exponent for which `exp` is still finite in `f64`.
pub const EXP_OVERFLOW: f64 = 709.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogC {
    pub mant: Complex64,
    pub log: f64,
}

impl LogC {
    pub const ZERO: LogC = LogC { mant: Complex64::new(0.0, 0.0), log: 0.0 };

    pub fn new(mant: Complex64, log: f64) -> Self {
        LogC { mant, log }.renorm()
    }

    pub fn from_c64(z: Complex64) -> Self {
        LogC { mant: z, log: 0.0 }.renorm()
    }

    /// `exp(w)` for complex `w`, kept in scaled form.
    pub fn exp(w: Complex64) -> Self {
        LogC { mant: Complex64::from_polar(1.0, w.im), log: w.re }
    }

    fn renorm(self) -> Self {
        let a = self.mant.norm();
        if a == 0.0 || !a.is_finite() {
            return if a == 0.0 { LogC::ZERO } else { self };
        }
        let k = a.ln();
        if k.abs() < 64.0 {
            return self;
        }
        LogC { mant: self.mant / a, log: self.log + k }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    /// `ln|value|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mant.norm().ln() + self.log
        }
    }

    pub fn abs(&self) -> f64 {
        self.mant.norm() * self.log.exp()
    }

    /// Plain value; may overflow to infinity or underflow to zero.
    pub fn value(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        if self.log > EXP_OVERFLOW {
            let e = (self.log - EXP_OVERFLOW).exp();
            return self.mant * EXP_OVERFLOW.exp() * e;
        }
        self.mant * self.log.exp()
    }

    /// Value times `exp(-shift)`, evaluated without intermediate overflow.
    pub fn value_shifted(&self, shift: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.mant * (self.log - shift).exp()
    }

    pub fn overflows(&self) -> bool {
        !self.is_zero() && self.ln_abs() > EXP_OVERFLOW
    }

    pub fn scale(self, s: Complex64) -> Self {
        LogC { mant: self.mant * s, log: self.log }.renorm()
    }

    pub fn add(self, o: LogC) -> LogC {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let m = self.log.max(o.log);
        let mant = self.mant * (self.log - m).exp() + o.mant * (o.log - m).exp();
        LogC { mant, log: m }.renorm()
    }

    pub fn sub(self, o: LogC) -> LogC {
        self.add(o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn recip(self) -> LogC {
        LogC { mant: self.mant.inv(), log: -self.log }
    }
}

impl Mul for LogC {
    type Output = LogC;
    fn mul(self, o: LogC) -> LogC {
        LogC { mant: self.mant * o.mant, log: self.log + o.log }.renorm()
    }
}

impl Div for LogC {
    type Output = LogC;
    fn div(self, o: LogC) -> LogC {
        LogC { mant: self.mant / o.mant, log: self.log - o.log }.renorm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_product_and_ratio_survive() {
        let a = LogC::exp(Complex64::new(2000.0, 0.3));
        let b = LogC::exp(Complex64::new(-1990.0, -0.3));
        let p = (a * b).value();
        assert!((p - Complex64::new(10f64.exp(), 0.0)).norm() < 1e-9 * 10f64.exp());
        let q = (a / a).value();
        assert!((q - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn sum_aligns_exponents() {
        let a = LogC::new(Complex64::new(1.0, 0.0), 800.0);
        let b = LogC::new(Complex64::new(1.0, 0.0), 800.0);
        assert!(((a.add(b)).ln_abs() - (800.0 + 2f64.ln())).abs() < 1e-12);
    }
}

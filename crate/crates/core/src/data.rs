//! Seeded synthetic initial data satisfying the no-slip moment conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::field::ModeField;
use crate::quad::{cheb_interp, composite_c, gl16, uniform_breaks};
use crate::C64;

/// Anything that can be sampled as initial vorticity on `[-1, 1]`.
pub trait Profile: Sync {
    fn eval(&self, y: f64) -> C64;
    /// Interval outside which the profile vanishes.
    fn support(&self) -> (f64, f64);
    /// Smallest length scale of the profile, used to size quadrature panels.
    fn feature_scale(&self) -> f64 {
        0.05
    }
    /// Distance from the support to the walls when the profile is smooth
    /// (at least `C³`) on the whole line; `None` otherwise.
    fn interior_gap(&self) -> Option<f64> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataClass {
    /// Supported in `[-1+δ₀, 1-δ₀]`.
    Separated { delta0: f64 },
    /// `H¹` on the line, vanishing linearly at the walls.
    H1Boundary,
    /// Nonzero up to the walls.
    L2Boundary,
}

/// `ω_in(y) = b(y) q(y)` with an envelope `b` and a complex polynomial `q`.
#[derive(Clone, Debug, Serialize)]
pub struct InitialData {
    pub class: DataClass,
    pub alpha: f64,
    /// Coefficients of `q` in powers of `y / h`.
    pub coeffs: Vec<C64>,
    half_width: f64,
}

const POLY_DEGREE: usize = 3;
const BUMP_POWER: i32 = 4;

impl InitialData {
    pub fn generate(class: DataClass, alpha: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs: Vec<C64> = (0..=POLY_DEGREE)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        coeffs[0] += C64::new(1.0, 0.0);
        let half_width = match class {
            DataClass::Separated { delta0 } => 1.0 - delta0,
            _ => 1.0,
        };
        // Two extra coefficients are fixed by the moment conditions.
        coeffs.push(C64::new(0.0, 0.0));
        coeffs.push(C64::new(0.0, 0.0));
        let mut d = InitialData { class, alpha, coeffs, half_width };
        d.project();
        d
    }

    fn envelope(&self, s: f64) -> (f64, f64) {
        match self.class {
            DataClass::Separated { .. } => {
                let u = 1.0 - s * s;
                (u.powi(BUMP_POWER), -2.0 * s * BUMP_POWER as f64 * u.powi(BUMP_POWER - 1))
            }
            DataClass::H1Boundary => (1.0 - s * s, -2.0 * s),
            DataClass::L2Boundary => (1.0, 0.0),
        }
    }

    fn basis(&self, s: f64, k: usize) -> f64 {
        let deg = self.coeffs.len() - 2;
        // The projection directions are `1` and `s`, stored after the random part.
        match k {
            k if k < deg => s.powi(k as i32),
            k if k == deg => 1.0,
            _ => s,
        }
    }

    fn moments_of<F: Fn(f64) -> C64>(&self, f: F) -> [C64; 2] {
        let h = self.half_width;
        let br = uniform_breaks(-h, h, 8);
        let a = self.alpha;
        [
            composite_c(gl16(), &br, |y| f(y) * (a * y).exp()),
            composite_c(gl16(), &br, |y| f(y) * (-a * y).exp()),
        ]
    }

    fn project(&mut self) {
        let deg = self.coeffs.len() - 2;
        let h = self.half_width;
        let rhs = self.moments_of(|y| self.eval(y));
        let m0 = self.moments_of(|y| C64::new(self.envelope(y / h).0 * self.basis(y / h, deg), 0.0));
        let m1 = self.moments_of(|y| C64::new(self.envelope(y / h).0 * self.basis(y / h, deg + 1), 0.0));
        let det = m0[0] * m1[1] - m1[0] * m0[1];
        let d0 = -(rhs[0] * m1[1] - m1[0] * rhs[1]) / det;
        let d1 = -(m0[0] * rhs[1] - rhs[0] * m0[1]) / det;
        self.coeffs[deg] += d0;
        self.coeffs[deg + 1] += d1;
    }

    fn poly(&self, s: f64) -> (C64, C64) {
        let mut q = C64::new(0.0, 0.0);
        let mut dq = C64::new(0.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            let b = self.basis(s, k);
            let db = match k {
                k if k < self.coeffs.len() - 2 => {
                    if k == 0 {
                        0.0
                    } else {
                        k as f64 * s.powi(k as i32 - 1)
                    }
                }
                k if k == self.coeffs.len() - 2 => 0.0,
                _ => 1.0,
            };
            q += c * b;
            dq += c * db;
        }
        (q, dq)
    }

    /// `∂_y ω_in`.
    pub fn eval_dy(&self, y: f64) -> C64 {
        let h = self.half_width;
        if y.abs() > h {
            return C64::new(0.0, 0.0);
        }
        let s = y / h;
        let (b, db) = self.envelope(s);
        let (q, dq) = self.poly(s);
        (q * db + dq * b) / h
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn l2_norm(&self) -> f64 {
        self.quad_norm(|y| self.eval(y).norm_sqr()).sqrt()
    }

    pub fn dy_l2_norm(&self) -> f64 {
        self.quad_norm(|y| self.eval_dy(y).norm_sqr()).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.quad_norm(|y| self.eval(y).norm())
    }

    fn quad_norm<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let h = self.half_width;
        composite_c(gl16(), &uniform_breaks(-h, h, 16), |y| C64::new(f(y), 0.0)).re
    }

    /// `∫ e^{±αy} ω_in dy`, both signs.
    pub fn moments(&self) -> [C64; 2] {
        self.moments_of(|y| self.eval(y))
    }
}

impl Profile for InitialData {
    fn eval(&self, y: f64) -> C64 {
        let h = self.half_width;
        if y.abs() > h {
            return C64::new(0.0, 0.0);
        }
        let s = y / h;
        self.poly(s).0 * self.envelope(s).0
    }

    fn support(&self) -> (f64, f64) {
        (-self.half_width, self.half_width)
    }

    fn feature_scale(&self) -> f64 {
        0.1 * self.half_width
    }

    fn interior_gap(&self) -> Option<f64> {
        match self.class {
            DataClass::Separated { delta0 } => Some(delta0),
            _ => None,
        }
    }
}

impl Profile for ModeField {
    fn eval(&self, y: f64) -> C64 {
        if !(-1.0..=1.0).contains(&y) {
            return C64::new(0.0, 0.0);
        }
        cheb_interp(&self.values, y)
    }

    fn support(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    fn feature_scale(&self) -> f64 {
        4.0 / self.values.len() as f64
    }
}

/// Gaussian `e^{-y²/(2σ²)}` on the whole line, for free-evolution tests.
#[derive(Clone, Copy, Debug)]
pub struct Gaussian {
    pub sigma: f64,
}

impl Gaussian {
    /// Closed-form transform `∫ e^{-iηy} ω dy`.
    pub fn transform(&self, eta: f64) -> C64 {
        let s = self.sigma;
        C64::new((2.0 * std::f64::consts::PI).sqrt() * s * (-0.5 * s * s * eta * eta).exp(), 0.0)
    }
}

impl Profile for Gaussian {
    fn eval(&self, y: f64) -> C64 {
        C64::new((-0.5 * y * y / (self.sigma * self.sigma)).exp(), 0.0)
    }

    fn support(&self) -> (f64, f64) {
        (-10.0 * self.sigma, 10.0 * self.sigma)
    }

    fn feature_scale(&self) -> f64 {
        0.5 * self.sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_kills_moments() {
        for class in [DataClass::Separated { delta0: 0.5 }, DataClass::H1Boundary, DataClass::L2Boundary] {
            for alpha in [1.0, 2.0] {
                let d = InitialData::generate(class, alpha, 7);
                let m = d.moments();
                let scale = d.l1_norm();
                assert!(m[0].norm() < 1e-13 * scale && m[1].norm() < 1e-13 * scale, "{class:?} {m:?}");
            }
        }
    }

    #[test]
    fn separated_data_has_compact_support() {
        let d = InitialData::generate(DataClass::Separated { delta0: 0.5 }, 1.0, 3);
        assert_eq!(d.eval(0.51), C64::new(0.0, 0.0));
        assert!(d.eval(0.49).norm() < 1e-6);
        assert!(d.eval(0.0).norm() > 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let d = InitialData::generate(DataClass::H1Boundary, 1.0, 11);
        let h = 1e-6;
        for y in [-0.7, 0.1, 0.55] {
            let fd = (d.eval(y + h) - d.eval(y - h)) / (2.0 * h);
            assert!((fd - d.eval_dy(y)).norm() < 1e-7);
        }
    }

    #[test]
    fn seed_determines_data() {
        let a = InitialData::generate(DataClass::L2Boundary, 1.0, 5);
        let b = InitialData::generate(DataClass::L2Boundary, 1.0, 5);
        assert_eq!(a.coeffs, b.coeffs);
    }
}

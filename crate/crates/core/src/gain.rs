//! Power-gain inequalities for the Airy envelope `e^{±φ(R)}`,
//! `φ(R) = (2/3) Re((R_r + iR_i)^{3/2} e^{iπ/4})`, as measurable ratios.
//!
//! Each check returns `⟨Z⟩^{3/4} e^{∓φ(Z)} ∫ ⟨R⟩^{-1/4} e^{±φ(R)} dR_r`, the
//! left side over the right side without the implicit constant.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::airy::pow_3_2;
use crate::quad::gl16;
use crate::C64;

/// Recorded bound on every ratio over the test grids (measured maximum 1.77).
pub const GAIN_CONSTANT: f64 = 2.0;

/// Integration limits of one inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Limits {
    /// `∫_a^{Z_r}`.
    FromTo(f64),
    /// `∫_{Z_r}^b`.
    UpTo(f64),
    /// `∫_{Z_r}^∞`.
    ToInfinity,
    /// `∫_{-∞}^{Z_r}`.
    FromMinusInfinity,
}

/// One inequality: imaginary part of the Langer variable, exponent sign and limits.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GainInequality {
    pub r_i: f64,
    pub sign: f64,
    pub limits: Limits,
}

fn phi(r_r: f64, r_i: f64) -> f64 {
    (2.0 / 3.0) * (pow_3_2(C64::new(r_r, r_i)) * C64::from_polar(1.0, PI / 4.0)).re
}

fn bracket(r_r: f64, r_i: f64) -> f64 {
    (1.0 + r_r * r_r + r_i * r_i).sqrt()
}

/// Log-scaled integral `∫_a^b ⟨R⟩^{-1/4} e^{s(φ(R) − φ_ref)} dR_r`.
fn scaled_integral(a: f64, b: f64, r_i: f64, s: f64, phi_ref: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = 0.25;
    let panels = ((b - a) / h).ceil() as usize;
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * w;
            gl16().integrate(lo, lo + w, |r| bracket(r, r_i).powf(-0.25) * (s * (phi(r, r_i) - phi_ref)).exp())
        })
        .sum()
}

/// Where `s(φ(R) − φ(Z))` drops below `-60` going away from `Z_r` in direction `dir`.
fn decay_end(z_r: f64, r_i: f64, s: f64, dir: f64) -> f64 {
    let target = phi(z_r, r_i);
    let mut step = 1.0;
    let mut r = z_r;
    while s * (phi(r, r_i) - target) > -60.0 {
        r += dir * step;
        step *= 1.5;
    }
    r
}

impl GainInequality {
    pub fn ratio(&self, z_r: f64) -> f64 {
        let (ri, s) = (self.r_i, self.sign);
        let pz = phi(z_r, ri);
        let integral = match self.limits {
            Limits::FromTo(a) => scaled_integral(a, z_r, ri, s, pz),
            Limits::UpTo(b) => scaled_integral(z_r, b, ri, s, pz),
            Limits::ToInfinity => scaled_integral(z_r, decay_end(z_r, ri, s, 1.0), ri, s, pz),
            Limits::FromMinusInfinity => scaled_integral(decay_end(z_r, ri, s, -1.0), z_r, ri, s, pz),
        };
        bracket(z_r, ri).powf(0.75) * integral
    }
}

/// Largest ratio over a grid of `Z_r` values.
#[derive(Clone, Debug, Serialize)]
pub struct GainReport {
    pub label: String,
    pub inequality: GainInequality,
    pub max_ratio: f64,
    pub argmax: f64,
    pub points: usize,
}

pub fn gain_scan(label: &str, ineq: GainInequality, z: &[f64]) -> GainReport {
    let r: Vec<f64> = z.par_iter().map(|&zr| ineq.ratio(zr)).collect();
    let (k, &m) = r.iter().enumerate().fold((0, &f64::NEG_INFINITY), |acc, (k, v)| if *v > *acc.1 { (k, v) } else { acc });
    GainReport { label: label.to_string(), inequality: ineq, max_ratio: m, argmax: z.get(k).copied().unwrap_or(0.0), points: z.len() }
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// The four near-spectrum inequalities at `R_i = δ`, `Z_r ∈ [-z_max, z_max]`.
pub fn low_mode_suite(delta: f64, z_max: f64, n: usize) -> Vec<GainReport> {
    let pos = grid(0.0, z_max, n);
    let neg = grid(-z_max, 0.0, n);
    let ri = delta;
    vec![
        gain_scan("low/1", GainInequality { r_i: ri, sign: 1.0, limits: Limits::FromTo(0.0) }, &pos),
        gain_scan("low/2", GainInequality { r_i: ri, sign: 1.0, limits: Limits::UpTo(0.0) }, &neg),
        gain_scan("low/3", GainInequality { r_i: ri, sign: -1.0, limits: Limits::ToInfinity }, &pos),
        gain_scan("low/4", GainInequality { r_i: ri, sign: -1.0, limits: Limits::FromMinusInfinity }, &neg),
    ]
}

/// The high-mode set at `R_i = -κ(α²ν)^{2/3}`.
pub fn high_mode_suite(kappa: f64, alpha: f64, nu: f64, z_max: f64, n: usize) -> Vec<GainReport> {
    let ri = -kappa * (alpha * alpha * nu).powf(2.0 / 3.0);
    let pos = grid(0.0, z_max, n);
    let neg = grid(-z_max, 0.0, n);
    vec![
        gain_scan("high/5", GainInequality { r_i: ri, sign: 1.0, limits: Limits::FromTo(0.0) }, &pos),
        gain_scan("high/6", GainInequality { r_i: ri, sign: -1.0, limits: Limits::UpTo(0.0) }, &neg),
        gain_scan("high/7", GainInequality { r_i: ri, sign: -1.0, limits: Limits::ToInfinity }, &pos),
        gain_scan("high/8", GainInequality { r_i: ri, sign: 1.0, limits: Limits::FromMinusInfinity }, &neg),
    ]
}

/// The connection-zone set for `c` on the half-line through `|c_r| ≥ 200` with
/// slope `tan θ`, on the `Z_r` range reached by `z ∈ [-1, 1]`. That range
/// lies entirely on one side of zero, which selects two of the four bounds.
pub fn connection_suite(alpha: f64, nu: f64, delta: f64, tan_theta: f64, c_r: f64, n: usize) -> Vec<GainReport> {
    let eps = (nu / alpha).cbrt();
    let ri = delta + tan_theta * (c_r.abs() - 200.0).max(0.0) / eps;
    let lo = (-1.0 - c_r) / eps;
    let hi = (1.0 - c_r) / eps;
    let span = grid(lo, hi, n);
    if c_r >= 0.0 {
        vec![
            gain_scan("connection/2", GainInequality { r_i: ri, sign: 1.0, limits: Limits::UpTo(hi) }, &span),
            gain_scan("connection/4", GainInequality { r_i: ri, sign: -1.0, limits: Limits::FromMinusInfinity }, &span),
        ]
    } else {
        vec![
            gain_scan("connection/1", GainInequality { r_i: ri, sign: 1.0, limits: Limits::FromTo(lo) }, &span),
            gain_scan("connection/3", GainInequality { r_i: ri, sign: -1.0, limits: Limits::ToInfinity }, &span),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_tends_to_the_laplace_constant() {
        // ∫^Z e^{φ} ≈ e^{φ(Z)}/φ'(Z) with φ' ≈ Z^{1/2}/√2 for large Z.
        let g = GainInequality { r_i: 0.01, sign: 1.0, limits: Limits::FromTo(0.0) };
        let r = g.ratio(400.0);
        assert!((r - std::f64::consts::SQRT_2).abs() < 0.05, "{r}");
    }

    #[test]
    fn low_mode_ratios_are_bounded() {
        for delta in [0.001, 0.01] {
            for rep in low_mode_suite(delta, 30.0, 241) {
                assert!(rep.max_ratio.is_finite() && rep.max_ratio < GAIN_CONSTANT, "{} {}", rep.label, rep.max_ratio);
            }
        }
    }

    #[test]
    fn high_mode_ratios_are_bounded() {
        for (alpha, nu) in [(1.0, 1.0), (10.0, 0.01), (30.0, 0.01)] {
            for rep in high_mode_suite(0.1, alpha, nu, 30.0, 121) {
                assert!(rep.max_ratio < GAIN_CONSTANT, "{} {}", rep.label, rep.max_ratio);
            }
        }
    }

    #[test]
    fn connection_ratios_are_bounded() {
        for (nu, c_r) in [(1e-3, 200.0), (1e-3, -500.0), (1e-4, 9000.0)] {
            for rep in connection_suite(1.0, nu, 0.05, 0.0099, c_r, 61) {
                assert!(rep.max_ratio < GAIN_CONSTANT, "{} {}", rep.label, rep.max_ratio);
            }
        }
    }
}

//! Whole-line free evolution `∂_t ω + iαyω = ν(∂_yy - α²)ω`, in Fourier
//! variables on an η grid and in physical space by its explicit kernel.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::data::Profile;
use crate::error::{Error, Result};
use crate::quad::{gl16, GlRule};
use crate::C64;

/// Fraction of grid nodes at each end that must carry negligible mass.
const EDGE_FRACTION: f64 = 0.01;
const EDGE_TOL: f64 = 1e-8;

/// One mode on a uniform, symmetric η grid.
#[derive(Clone, Debug, Serialize)]
pub struct LineField {
    pub alpha: f64,
    pub eta_max: f64,
    pub values: Vec<C64>,
}

impl LineField {
    pub fn new(alpha: f64, eta_max: f64, values: Vec<C64>) -> Result<Self> {
        if values.len() < 2 || !(eta_max > 0.0) {
            return Err(Error::InvalidParameter("η grid needs N ≥ 2 and η_max > 0".into()));
        }
        Ok(LineField { alpha, eta_max, values })
    }

    /// Transform `ω̂(η) = ∫ e^{-iηy} ω(y) dy` of a profile, by panel quadrature.
    pub fn from_profile(profile: &dyn Profile, alpha: f64, eta_max: f64, n: usize) -> Result<Self> {
        let (a, b) = profile.support();
        let h = profile.feature_scale().min(2.0 / eta_max.max(1e-300));
        let panels = ((b - a) / h).ceil().max(1.0) as usize;
        let (ys, ws) = crate::quad::composite_nodes(gl16(), &crate::quad::uniform_breaks(a, b, panels));
        let fy: Vec<C64> = ys.iter().zip(&ws).map(|(&y, &w)| profile.eval(y) * w).collect();
        let mut f = LineField { alpha, eta_max, values: vec![C64::new(0.0, 0.0); n.max(2)] };
        for k in 0..f.values.len() {
            let eta = f.eta(k);
            f.values[k] = ys.iter().zip(&fy).map(|(&y, &v)| v * C64::from_polar(1.0, -eta * y)).sum();
        }
        f.check_decay()?;
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn d_eta(&self) -> f64 {
        2.0 * self.eta_max / (self.values.len() - 1) as f64
    }

    pub fn eta(&self, k: usize) -> f64 {
        -self.eta_max + k as f64 * self.d_eta()
    }

    /// Errors when the outermost nodes carry more than `1e-8` of the peak.
    pub fn check_decay(&self) -> Result<()> {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(());
        }
        let m = ((self.len() as f64 * EDGE_FRACTION).ceil() as usize).max(1);
        let edge = self.values[..m]
            .iter()
            .chain(&self.values[self.len() - m..])
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if edge > EDGE_TOL * peak {
            return Err(Error::TruncatedSpectrum { ratio: edge / peak });
        }
        Ok(())
    }

    /// `‖ω‖_{L²_y}` by Plancherel.
    pub fn l2_norm(&self) -> f64 {
        (self.d_eta() / (2.0 * PI) * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `‖⟨∂_y⟩^{-s} ω‖_{L²_y}`.
    pub fn h_minus_s_norm(&self, s: f64) -> f64 {
        let sum: f64 = (0..self.len())
            .map(|k| self.values[k].norm_sqr() * (1.0 + self.eta(k).powi(2)).powf(-s))
            .sum();
        (self.d_eta() / (2.0 * PI) * sum).sqrt()
    }

    /// Inverse transform at arbitrary `y` by direct quadrature; returns `(ω, ∂_y ω)`.
    pub fn to_physical(&self, ys: &[f64]) -> Vec<(C64, C64)> {
        let scale = self.d_eta() / (2.0 * PI);
        ys.iter()
            .map(|&y| {
                let mut v = C64::new(0.0, 0.0);
                let mut dv = C64::new(0.0, 0.0);
                for (k, &w) in self.values.iter().enumerate() {
                    let eta = self.eta(k);
                    let e = w * C64::from_polar(1.0, eta * y);
                    v += e;
                    dv += e * C64::new(0.0, eta);
                }
                (v * scale, dv * scale)
            })
            .collect()
    }

    /// `ω̂(η + s)` on the same grid, by band-limited interpolation through a
    /// uniform periodic y grid of period `2π/Δη`.
    fn shifted(&self, s: f64) -> Vec<C64> {
        let n = self.len();
        let de = self.d_eta();
        let dy = 2.0 * PI / (n as f64 * de);
        let y0 = -0.5 * n as f64 * dy;
        let mut planner = FftPlanner::<f64>::new();
        // ω(y_j) up to the factor 1/N absorbed at the end.
        let mut buf: Vec<C64> = (0..n).map(|k| self.values[k] * C64::from_polar(1.0, k as f64 * de * y0)).collect();
        planner.plan_fft_inverse(n).process(&mut buf);
        for (j, v) in buf.iter_mut().enumerate() {
            let y = y0 + j as f64 * dy;
            *v *= C64::from_polar(1.0, -s * y);
        }
        planner.plan_fft_forward(n).process(&mut buf);
        let inv_n = 1.0 / n as f64;
        (0..n)
            .map(|k| buf[k] * C64::from_polar(inv_n, -(k as f64) * de * y0))
            .collect()
    }
}

/// Closed form of `ν(α²t + ∫₀ᵗ |η + α(t-τ)|² dτ)`.
pub fn free_exponent(alpha: f64, eta: f64, nu: f64, t: f64) -> f64 {
    nu * (alpha * alpha * t + eta * eta * t + alpha * eta * t * t + alpha * alpha * t.powi(3) / 3.0)
}

/// `ω̂(t, η) = ω̂_in(η + αt) e^{-ν(α²t + ∫₀ᵗ|η+α(t-τ)|²dτ)}`.
pub fn evolve_free(init: &LineField, nu: f64, t: f64) -> Result<LineField> {
    if !(t >= 0.0) || !(nu >= 0.0) {
        return Err(Error::InvalidParameter(format!("need t ≥ 0 and ν ≥ 0, got t = {t}, ν = {nu}")));
    }
    if t == 0.0 {
        return Ok(init.clone());
    }
    let shift = init.alpha * t;
    if shift > init.eta_max {
        return Err(Error::TruncatedSpectrum { ratio: shift / init.eta_max });
    }
    let mut values = init.shifted(shift);
    for (k, v) in values.iter_mut().enumerate() {
        *v *= (-free_exponent(init.alpha, init.eta(k), nu, t)).exp();
    }
    let out = LineField { values, ..init.clone() };
    out.check_decay()?;
    Ok(out)
}

/// `û = (-∂_y, iα)(α² - ∂_yy)^{-1} ω̂` on the η grid.
pub fn free_velocity(field: &LineField) -> (LineField, LineField) {
    let a = field.alpha;
    let mut u1 = field.clone();
    let mut u2 = field.clone();
    for k in 0..field.len() {
        let eta = field.eta(k);
        let inv = 1.0 / (a * a + eta * eta);
        u1.values[k] = field.values[k] * C64::new(0.0, -eta * inv);
        u2.values[k] = field.values[k] * C64::new(0.0, a * inv);
    }
    (u1, u2)
}

/// `t ↦ exp(-α²νt - να²t³/12)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayEnvelope {
    pub alpha: f64,
    pub nu: f64,
}

impl DecayEnvelope {
    pub fn value(&self, t: f64) -> f64 {
        let a2 = self.alpha * self.alpha;
        (-a2 * self.nu * t * (1.0 + t * t / 12.0)).exp()
    }
}

/// Physical-space free evolution of a profile by the explicit kernel
/// `e^{-iαt(y+y')/2} (4πνt)^{-1/2} e^{-(y-y')²/(4νt)}`, valid for data with jumps.
pub struct PhysicalFree<'a> {
    pub profile: &'a dyn Profile,
    pub alpha: f64,
    pub nu: f64,
    rule: &'a GlRule,
}

impl<'a> PhysicalFree<'a> {
    pub fn new(profile: &'a dyn Profile, alpha: f64, nu: f64) -> Self {
        PhysicalFree { profile, alpha, nu, rule: gl16() }
    }

    /// `(ω_f(t, y), ∂_y ω_f(t, y))`.
    pub fn value(&self, t: f64, y: f64) -> (C64, C64) {
        let (a, b) = self.profile.support();
        let alpha = self.alpha;
        let s = self.nu * t;
        if s == 0.0 {
            let v = self.profile.eval(y) * C64::from_polar(1.0, -alpha * t * y);
            // Only the value is meaningful for inviscid transport of rough data.
            return (v, C64::new(0.0, 0.0));
        }
        let sigma = (2.0 * s).sqrt();
        let lo = a.max(y - 10.0 * sigma);
        let hi = b.min(y + 10.0 * sigma);
        if lo >= hi {
            return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        }
        let mut h = (2.0 * sigma).min(2.0 * self.profile.feature_scale());
        if alpha * t > 0.0 {
            h = h.min(4.0 * PI / (alpha * t));
        }
        let panels = ((hi - lo) / h).ceil().max(1.0) as usize;
        let norm = (4.0 * PI * s).sqrt().recip() * DecayEnvelope { alpha, nu: self.nu }.value(t);
        let mut v = C64::new(0.0, 0.0);
        let mut dv = C64::new(0.0, 0.0);
        let width = (hi - lo) / panels as f64;
        for p in 0..panels {
            let pa = lo + p as f64 * width;
            for (yp, w) in self.rule.map(pa, pa + width) {
                let d = y - yp;
                let k = self.profile.eval(yp)
                    * C64::from_polar(w * (-d * d / (4.0 * s)).exp(), -0.5 * alpha * t * (y + yp));
                v += k;
                dv += k * C64::new(-d / (2.0 * s), -0.5 * alpha * t);
            }
        }
        (v * norm, dv * norm)
    }
}

/// `g(t) = ∫_{-1}^{1} e^{λt ± αy} ω_f(t,y) dy` and `dg/dt` from the equation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentSample {
    pub t: f64,
    pub g: C64,
    pub dg: C64,
}

/// Boundary moments from physical-space samples `(y, w, ω, ∂_yω)` over
/// `[-1, 1]` plus the wall values `(ω, ∂_yω)` at `y = -1` and `y = 1`.
#[allow(clippy::too_many_arguments)]
fn moment_from_samples(
    alpha: f64,
    nu: f64,
    lambda: f64,
    sign: f64,
    t: f64,
    interior: &[(f64, f64, C64)],
    walls: [(C64, C64); 2],
) -> MomentSample {
    let mut g = C64::new(0.0, 0.0);
    let mut shear = C64::new(0.0, 0.0);
    for &(y, w, v) in interior {
        let e = (sign * alpha * y).exp() * w;
        g += v * e;
        shear += v * e * C64::new(0.0, -alpha * y);
    }
    // ∫ e^{±αy}(ω'' - α²ω) = [e^{±αy}(ω' ∓ αω)] from -1 to 1.
    let bdry = |y: f64, (v, dv): (C64, C64)| (sign * alpha * y).exp() * (dv - v * (sign * alpha));
    let visc = (bdry(1.0, walls[1]) - bdry(-1.0, walls[0])) * nu;
    let el = (lambda * t).exp();
    MomentSample { t, g: g * el, dg: (g * lambda + shear + visc) * el }
}

fn moment_nodes(panels: usize) -> (Vec<f64>, Vec<f64>) {
    crate::quad::composite_nodes(gl16(), &crate::quad::uniform_breaks(-1.0, 1.0, panels))
}

/// Boundary moments of an η-grid time series.
pub fn boundary_moment(series: &[(f64, LineField)], nu: f64, lambda: f64, sign: f64) -> Result<Vec<MomentSample>> {
    series
        .iter()
        .map(|(t, f)| {
            f.check_decay()?;
            let panels = ((f.eta_max / 4.0).ceil() as usize).max(8);
            let (ys, ws) = moment_nodes(panels);
            let phys = f.to_physical(&ys);
            let interior: Vec<(f64, f64, C64)> = ys.iter().zip(&ws).zip(&phys).map(|((&y, &w), p)| (y, w, p.0)).collect();
            let wall = f.to_physical(&[-1.0, 1.0]);
            Ok(moment_from_samples(f.alpha, nu, lambda, sign, *t, &interior, [wall[0], wall[1]]))
        })
        .collect()
}

/// Boundary moments via the physical kernel, for data the η grid cannot hold.
pub fn boundary_moment_physical(free: &PhysicalFree<'_>, lambda: f64, times: &[f64], sign: f64) -> Vec<MomentSample> {
    times
        .iter()
        .map(|&t| {
            let osc = free.alpha * t / PI;
            let sig = (2.0 * free.nu * t).sqrt().max(1e-300);
            let panels = (osc.max(2.0 / sig.min(1.0)).max(16.0).ceil() as usize).min(4096);
            let (ys, ws) = moment_nodes(panels);
            let interior: Vec<(f64, f64, C64)> = ys.iter().zip(&ws).map(|(&y, &w)| (y, w, free.value(t, y).0)).collect();
            let walls = [free.value(t, -1.0), free.value(t, 1.0)];
            moment_from_samples(free.alpha, free.nu, lambda, sign, t, &interior, walls)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Gaussian;

    fn gaussian_field(alpha: f64, eta_max: f64, n: usize) -> LineField {
        let g = Gaussian { sigma: 1.0 / 2f64.sqrt() };
        let mut f = LineField { alpha, eta_max, values: vec![C64::new(0.0, 0.0); n] };
        for k in 0..n {
            f.values[k] = g.transform(f.eta(k));
        }
        f
    }

    #[test]
    fn transform_of_gaussian_matches_closed_form() {
        let g = Gaussian { sigma: 0.7 };
        let f = LineField::from_profile(&g, 1.0, 12.0, 241).unwrap();
        for k in (0..241).step_by(20) {
            assert!((f.values[k] - g.transform(f.eta(k))).norm() < 1e-12);
        }
    }

    #[test]
    fn inviscid_evolution_is_pure_transport() {
        // ω̂_in = √π e^{-η²/4} for σ = 1/√2.
        let f = gaussian_field(1.0, 20.0, 401);
        let out = evolve_free(&f, 0.0, 3.0).unwrap();
        for k in 0..out.len() {
            let eta = out.eta(k);
            let want = PI.sqrt() * (-(eta + 3.0).powi(2) / 4.0).exp();
            assert!((out.values[k] - want).norm() < 1e-12, "η = {eta}");
        }
    }

    #[test]
    fn non_grid_shift_is_transport_too() {
        let f = gaussian_field(1.0, 20.0, 400);
        let out = evolve_free(&f, 0.0, 2.345).unwrap();
        for k in 0..out.len() {
            let want = PI.sqrt() * (-(out.eta(k) + 2.345).powi(2) / 4.0).exp();
            assert!((out.values[k] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn semigroup_property() {
        let f = gaussian_field(1.0, 30.0, 512);
        let nu = 1e-3;
        let a = evolve_free(&evolve_free(&f, nu, 1.3).unwrap(), nu, 2.1).unwrap();
        let b = evolve_free(&f, nu, 3.4).unwrap();
        let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.values.iter().map(|y| y.norm_sqr()).sum();
        assert!((num / den).sqrt() < 1e-12);
    }

    #[test]
    fn shift_off_grid_is_an_error() {
        let f = gaussian_field(1.0, 10.0, 201);
        assert!(evolve_free(&f, 0.0, 8.0).is_err());
    }

    #[test]
    fn physical_kernel_agrees_with_eta_route() {
        let g = Gaussian { sigma: 0.3 };
        let (alpha, nu, t) = (1.0, 1e-2, 2.0);
        let f = LineField::from_profile(&g, alpha, 40.0, 801).unwrap();
        let ev = evolve_free(&f, nu, t).unwrap();
        let pf = PhysicalFree::new(&g, alpha, nu);
        let ys = [-0.8, -0.1, 0.0, 0.45, 0.9];
        for (y, (v, dv)) in ys.iter().zip(ev.to_physical(&ys)) {
            let (p, dp) = pf.value(t, *y);
            assert!((p - v).norm() < 1e-10, "y = {y}: {p} vs {v}");
            assert!((dp - dv).norm() < 1e-9, "y = {y}: {dp} vs {dv}");
        }
    }

    #[test]
    fn moment_derivative_matches_finite_difference() {
        let g = Gaussian { sigma: 0.25 };
        let (alpha, nu, lambda) = (1.0, 1e-2, 0.1);
        let pf = PhysicalFree::new(&g, alpha, nu);
        let h = 1e-4;
        for sign in [1.0, -1.0] {
            let s = boundary_moment_physical(&pf, lambda, &[1.0 - h, 1.0, 1.0 + h], sign);
            let fd = (s[2].g - s[0].g) / (2.0 * h);
            assert!((fd - s[1].dg).norm() < 1e-6 * s[1].dg.norm().max(1.0), "{fd} vs {}", s[1].dg);
        }
    }

    #[test]
    fn envelope_dominates_l2_decay() {
        let f = gaussian_field(1.0, 40.0, 801);
        let nu = 1e-3;
        let env = DecayEnvelope { alpha: 1.0, nu };
        for t in [1.0, 5.0, 10.0, 20.0] {
            let ev = evolve_free(&f, nu, t).unwrap();
            assert!(ev.l2_norm() <= env.value(t) * f.l2_norm() * (1.0 + 1e-12));
        }
    }
}

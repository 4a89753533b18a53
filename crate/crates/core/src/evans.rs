//! Evans function `D(α, c)`, its lower-bound surrogate, zero-freeness scans
//! and Romanov's sufficient criterion.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::airy::a0;
use crate::error::{Error, Result};
use crate::resolvent::{boundary_matrix, BoundaryMatrix, LangerMap, QuadParams};
use crate::{LogC, C64};

/// `∫_{-1}^{1} e^{s α w} H_k(W) dw` with `s = weight_sign`, `k = airy_kind`,
/// checked against a twice-refined grid.
pub fn h_boundary_integral(alpha: f64, nu: f64, c: C64, weight_sign: f64, airy_kind: f64, params: &QuadParams) -> Result<LogC> {
    let map = LangerMap::new(alpha, nu, c)?;
    let pick = |m: &BoundaryMatrix| match (weight_sign > 0.0, airy_kind > 0.0) {
        (true, false) => m.m11,
        (true, true) => m.m12,
        (false, false) => m.m21,
        (false, true) => m.m22,
    };
    let coarse = pick(&boundary_matrix(&map, params));
    let fine = pick(&boundary_matrix(&map, &params.refined(2.0)));
    let err = (fine.sub(coarse)).abs_rel(fine);
    if err > 1e-8 {
        return Err(Error::Quadrature { nodes: 0, error: err, context: format!("boundary integral at c = {c} did not converge under refinement") });
    }
    Ok(fine)
}

trait RelErr {
    fn abs_rel(self, reference: LogC) -> f64;
}

impl RelErr for LogC {
    fn abs_rel(self, reference: LogC) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        (self.ln_abs() - reference.ln_abs()).exp()
    }
}

/// The four boundary integrals and the determinant at one `c`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EvansSample {
    pub alpha: f64,
    pub c: C64,
    /// `∫ e^{αw} H₊`.
    pub i_pp: LogC,
    /// `∫ e^{αw} H₋`.
    pub i_pm: LogC,
    /// `∫ e^{-αw} H₊`.
    pub i_mp: LogC,
    /// `∫ e^{-αw} H₋`.
    pub i_mm: LogC,
    /// `I₊₋ I₋₊ - I₊₊ I₋₋`.
    pub det: LogC,
    /// `ln(|I₋₋| |I₊₊|)`.
    pub ln_lower_surrogate: f64,
}

impl EvansSample {
    pub fn from_matrix(alpha: f64, c: C64, m: &BoundaryMatrix) -> Self {
        EvansSample {
            alpha,
            c,
            i_pp: m.m12,
            i_pm: m.m11,
            i_mp: m.m22,
            i_mm: m.m21,
            det: m.det(),
            ln_lower_surrogate: m.lower_surrogate_ln(),
        }
    }

    /// `ln(|D| / lower_surrogate)`.
    pub fn ln_ratio(&self) -> f64 {
        self.det.ln_abs() - self.ln_lower_surrogate
    }
}

pub fn evans_det(alpha: f64, nu: f64, c: C64, params: &QuadParams) -> Result<EvansSample> {
    let map = LangerMap::new(alpha, nu, c)?;
    Ok(EvansSample::from_matrix(alpha, c, &boundary_matrix(&map, params)))
}

/// `ln(|I| ⟨αε⟩ / (ε e^α |A₀(ζ)|))` for the two integrals with lower
/// bounds in terms of `A₀`: `I₊₊` with `ζ = (-1 + c_r)/ε + iδ` and `I₋₋`
/// with `ζ = (-1 - c_r)/ε + iδ`. `high_mode` drops the `⟨αε⟩` factor.
pub fn a0_bound_ratios(s: &EvansSample, nu: f64, delta: f64, high_mode: bool) -> Result<(f64, f64)> {
    let alpha = s.alpha;
    let eps = (nu / alpha).cbrt();
    let bracket = if high_mode { 0.0 } else { (1.0 + (alpha * eps).powi(2)).sqrt().ln() };
    let pre = eps.ln() + alpha - bracket;
    let zp = C64::new((-1.0 + s.c.re) / eps, delta);
    let zm = C64::new((-1.0 - s.c.re) / eps, delta);
    let lp = a0(zp)?.value.ln_abs();
    let lm = a0(zm)?.value.ln_abs();
    Ok((s.i_pp.ln_abs() - pre - lp, s.i_mm.ln_abs() - pre - lm))
}

/// Rectangle `[-c_r_max, c_r_max] × [c_i_min, c_i_max]` in the `c` plane.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanRegion {
    pub c_r_max: f64,
    pub c_i_min: f64,
    pub c_i_max: f64,
    pub n_r: usize,
    pub n_i: usize,
}

impl ScanRegion {
    /// `|c_r| ≤ 3`, `c_i ∈ [-αν - δε, 1]`.
    pub fn zero_free(alpha: f64, nu: f64, delta: f64) -> Self {
        let eps = (nu / alpha).cbrt();
        ScanRegion { c_r_max: 3.0, c_i_min: -alpha * nu - delta * eps, c_i_max: 1.0, n_r: 121, n_i: 21 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub alpha: f64,
    pub nu: f64,
    pub region: ScanRegion,
    /// Smallest `ln|D|` on the grid and where it occurs.
    pub min_ln_abs_det: f64,
    pub argmin: C64,
    /// Smallest `ln(|D|/lower_surrogate)` on the grid and where it occurs.
    pub min_ln_ratio: f64,
    pub argmin_ratio: C64,
    pub winding: i64,
    /// Samples on the rectangle boundary after refinement.
    pub boundary_samples: usize,
    pub samples: Vec<EvansSample>,
}

/// Total change of `arg D` along the segment `a → b`, bisecting until every
/// step changes the argument by less than `π/4` and agrees with its midpoint.
fn arg_increment(alpha: f64, nu: f64, a: C64, b: C64, params: &QuadParams, count: &mut usize) -> Result<f64> {
    let dir = (b - a) / (b - a).norm();
    let h = 1e-6;
    let unit = |c: C64| -> Result<C64> {
        let d = evans_det(alpha, nu, c, params)?.det;
        if d.is_zero() {
            return Err(Error::DeterminantUnderflow { c, ln_abs: f64::NEG_INFINITY });
        }
        Ok(d.mant / d.mant.norm())
    };
    // Phase and its rate along the edge.
    let eval = |c: C64, count: &mut usize| -> Result<(C64, f64)> {
        let u = unit(c)?;
        let rate = (unit(c + dir * h)? / unit(c - dir * h)?).arg() / (2.0 * h);
        *count += 3;
        Ok((u, rate))
    };
    let mut stack = vec![(a, b, eval(a, count)?, eval(b, count)?, 0u32)];
    let mut total = 0.0;
    while let Some((p, q, (dp, rp), (dq, rq), depth)) = stack.pop() {
        let len = (q - p).norm();
        let step = (dq / dp).arg();
        let m = (p + q) * 0.5;
        let em = eval(m, count)?;
        // A phase that is close to linear can wrap by whole turns between all
        // three samples; the local rates catch that.
        let (s1, s2) = ((em.0 / dp).arg(), (dq / em.0).arg());
        let predicted = (rp + 4.0 * em.1 + rq) / 6.0 * len;
        if step.abs() < PI / 4.0
            && (s1 + s2 - step).abs() < 1e-6
            && rp.abs().max(rq.abs()).max(em.1.abs()) * len < PI / 2.0
            && (predicted - step).abs() < PI / 8.0
        {
            total += step;
            continue;
        }
        if depth > 40 {
            return Err(Error::Quadrature { nodes: *count, error: step, context: format!("argument of D jumps near c = {p}") });
        }
        // Push the right half first so the left half is processed first.
        stack.push((m, q, em, (dq, rq), depth + 1));
        stack.push((p, m, (dp, rp), em, depth + 1));
    }
    Ok(total)
}

/// Minimum of `|D|` on a grid and the winding number of `D` around the
/// rectangle boundary.
pub fn zero_free_scan(alpha: f64, nu: f64, region: ScanRegion, params: &QuadParams) -> Result<ScanReport> {
    let r = region;
    let grid: Vec<C64> = (0..r.n_i)
        .flat_map(|j| {
            (0..r.n_r).map(move |i| {
                C64::new(
                    -r.c_r_max + 2.0 * r.c_r_max * i as f64 / (r.n_r - 1) as f64,
                    r.c_i_min + (r.c_i_max - r.c_i_min) * j as f64 / (r.n_i - 1) as f64,
                )
            })
        })
        .collect();
    let samples: Vec<EvansSample> = grid.par_iter().map(|&c| evans_det(alpha, nu, c, params)).collect::<Result<_>>()?;
    let (mut min_ln, mut argmin) = (f64::INFINITY, C64::new(0.0, 0.0));
    let (mut min_ratio, mut argmin_ratio) = (f64::INFINITY, C64::new(0.0, 0.0));
    for s in &samples {
        if s.det.ln_abs() < min_ln {
            min_ln = s.det.ln_abs();
            argmin = s.c;
        }
        if s.ln_ratio() < min_ratio {
            min_ratio = s.ln_ratio();
            argmin_ratio = s.c;
        }
    }
    let corners = [
        C64::new(-r.c_r_max, r.c_i_min),
        C64::new(r.c_r_max, r.c_i_min),
        C64::new(r.c_r_max, r.c_i_max),
        C64::new(-r.c_r_max, r.c_i_max),
    ];
    // Split each edge into coarse pieces so the bisection starts from a sensible grid.
    let mut pieces = Vec::new();
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let n = if k % 2 == 0 { r.n_r } else { r.n_i };
        for i in 0..n - 1 {
            pieces.push((a + (b - a) * (i as f64 / (n - 1) as f64), a + (b - a) * ((i + 1) as f64 / (n - 1) as f64)));
        }
    }
    let incs: Vec<(f64, usize)> = pieces
        .par_iter()
        .map(|&(a, b)| {
            let mut count = 0;
            arg_increment(alpha, nu, a, b, params, &mut count).map(|v| (v, count))
        })
        .collect::<Result<_>>()?;
    let total: f64 = incs.iter().map(|x| x.0).sum();
    let boundary_samples = incs.iter().map(|x| x.1).sum();
    Ok(ScanReport {
        alpha,
        nu,
        region,
        min_ln_abs_det: min_ln,
        argmin,
        min_ln_ratio: min_ratio,
        argmin_ratio,
        winding: (total / (2.0 * PI)).round() as i64,
        boundary_samples,
        samples,
    })
}

/// `a(δ) = -max_{z_i ≤ δ} Re A₀'(z)/A₀(z)`. `A₀'/A₀` is analytic where
/// `A₀ ≠ 0`, so the maximum over the half-plane is taken on its edge
/// `z_i = δ`, scanned over `|z_r| ≤ 60` and refined around the best node.
pub fn romanov_a(delta: f64) -> Result<f64> {
    let f = |x: f64| -> Result<f64> { Ok(a0(C64::new(x, delta))?.log_derivative().re) };
    let n = 2401;
    let xs: Vec<f64> = (0..n).map(|i| -60.0 + 120.0 * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let (k, _) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    // Golden-section refinement on the bracketing cell.
    let (mut lo, mut hi) = (xs[k.saturating_sub(1)], xs[(k + 1).min(n - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..80 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let a = -f1.max(f2).max(vals[k]);
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("a(δ) = {a} ≤ 0 for δ = {delta}: δ exceeds the zero-free strip of A₀")));
    }
    Ok(a)
}

/// `F(α, β) = (e^{2β}+1)/2 · (1 - (α/β) tanh β / tanh α)/(1 - (α/β)²)`,
/// returned as `F e^{-2β}` to stay finite.
pub fn romanov_f_scaled(alpha: f64, beta: f64) -> f64 {
    let g = |alpha: f64| {
        let r = alpha / beta;
        (1.0 - r * beta.tanh() / alpha.tanh()) / (1.0 - r * r)
    };
    // The removable singularity at α = β is bridged by averaging its neighbours.
    let h = 1e-5 * beta;
    let g = if (alpha - beta).abs() < h { 0.5 * (g(beta - h) + g(beta + h)) } else { g(alpha) };
    0.5 * (1.0 + (-2.0 * beta).exp()) * g
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RomanovReport {
    pub alpha: f64,
    pub nu: f64,
    pub delta: f64,
    pub q: f64,
    pub a: f64,
    /// `F(α, a/ε) e^{-2a/ε}`.
    pub f_scaled: f64,
    /// Right-hand side of the goal inequality, times `e^{-2a/ε}`.
    pub rhs_scaled: f64,
    pub passes: bool,
    /// `max_t ln|u(C⋆_j, t)| + a t` over `t ∈ [0, 2/ε]`, `j = 1, 2` (≤ 0 when the bound holds).
    pub u_bound_excess: f64,
    /// `ln|u(C⋆_j, 2/ε)| + 2a/ε`, `j = 1, 2`.
    pub u_end_excess: [f64; 2],
}

/// `ln|u(z, t)| = ln|A₀(z + t)| - ln|A₀(z)|`.
pub fn ln_abs_u(z: C64, t: f64) -> Result<f64> {
    Ok(a0(z + t)?.value.ln_abs() - a0(z)?.value.ln_abs())
}

/// Romanov's sufficient condition for the Evans lower bound on the line
/// `c_i = -αν - δε`, checked at `c_r = c_r_probe` for the `u` bounds.
pub fn romanov_criterion(alpha: f64, nu: f64, delta: f64, q: f64, c_r_probe: f64) -> Result<RomanovReport> {
    let a = romanov_a(delta)?;
    let eps = (nu / alpha).cbrt();
    let beta = a / eps;
    let f_scaled = romanov_f_scaled(alpha, beta);
    let e2b = (-2.0 * beta).exp();
    let k = q / (4.0 * (1.0 + q));
    let rhs_scaled = e2b + k * (alpha.exp() / alpha.sinh() * e2b + 1.0 / (alpha.exp() * alpha.sinh()));
    let stars = [C64::new((-1.0 - c_r_probe) / eps, delta), C64::new((-1.0 + c_r_probe) / eps, delta)];
    let t_end = 2.0 / eps;
    let mut excess = f64::NEG_INFINITY;
    let mut end = [0.0; 2];
    for (j, &z) in stars.iter().enumerate() {
        for i in 0..=400 {
            let t = t_end * i as f64 / 400.0;
            excess = excess.max(ln_abs_u(z, t)? + a * t);
        }
        end[j] = ln_abs_u(z, t_end)? + 2.0 * beta;
    }
    Ok(RomanovReport { alpha, nu, delta, q, a, f_scaled, rhs_scaled, passes: f_scaled > rhs_scaled, u_bound_excess: excess, u_end_excess: end })
}

/// Low-mode lower bound `e^{2β}/(2(K+1)) - 1/(2(K-1))` for `F(Kβ, β)`, times `e^{-2β}`.
pub fn low_mode_bound_scaled(k: f64, beta: f64) -> f64 {
    1.0 / (2.0 * (k + 1.0)) - (-2.0 * beta).exp() / (2.0 * (k - 1.0))
}

/// Largest `δ` on a grid for which `A₀` has no zeros in `z_i ≤ δ`, judged by
/// the winding number of `A₀` around rectangles `[-R, R] × [-R, δ]`.
pub fn calibrate_delta0(deltas: &[f64], radius: f64) -> Result<f64> {
    let mut best = 0.0;
    for &d in deltas {
        let corners = [C64::new(-radius, -radius), C64::new(radius, -radius), C64::new(radius, d), C64::new(-radius, d)];
        let mut total = 0.0;
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            let n = 4000;
            let mut prev = a0(a)?.value.mant;
            for i in 1..=n {
                let z = a + (b - a) * (i as f64 / n as f64);
                let v = a0(z)?.value.mant;
                total += (v / prev).arg();
                prev = v;
            }
        }
        if (total / (2.0 * PI)).round() as i64 == 0 {
            best = d;
        } else {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_integral_converges_under_refinement() {
        let (alpha, nu, delta): (f64, f64, f64) = (1.0, 1e-3, 0.05);
        let eps = (nu / alpha).cbrt();
        let c = C64::new(0.0, -(alpha * nu + delta * eps));
        for (s, k) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let coarse = h_boundary_integral(alpha, nu, c, s, k, &QuadParams::default()).unwrap();
            let fine = h_boundary_integral(alpha, nu, c, s, k, &QuadParams::default().refined(10.0)).unwrap();
            assert!(fine.sub(coarse).abs_rel(fine) < 1e-6);
        }
    }

    #[test]
    fn determinant_matches_matrix_entries() {
        let s = evans_det(1.0, 1e-3, C64::new(0.4, -0.01), &QuadParams::default()).unwrap();
        let d = (s.i_pm * s.i_mp).sub(s.i_pp * s.i_mm);
        assert!(d.sub(s.det).abs_rel(s.det) < 1e-14);
    }

    #[test]
    fn reflection_maps_integrals_into_each_other() {
        // I₊₊(c_r + ic_i) = conj(I₋₋(-c_r + ic_i)).
        let p = QuadParams::default();
        for cr in [0.3, 0.9, 1.7] {
            let a = evans_det(2.0, 1e-4, C64::new(cr, -0.02), &p).unwrap();
            let b = evans_det(2.0, 1e-4, C64::new(-cr, -0.02), &p).unwrap();
            let (x, y) = (a.i_pp, b.i_mm);
            assert!((x.ln_abs() - y.ln_abs()).abs() < 1e-8);
            assert!(((x.mant / x.mant.norm()) - (y.mant / y.mant.norm()).conj()).norm() < 1e-8);
        }
    }

    #[test]
    fn romanov_f_has_the_stated_monotonicity() {
        for beta in [3.0, 5.0, 10.0] {
            let f: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|&a| romanov_f_scaled(a, beta)).collect();
            assert!(f[0] > f[1] && f[1] > f[2]);
        }
        let a = 2.0;
        assert!(romanov_f_scaled(a, 4.0) * (8.0f64).exp() < romanov_f_scaled(a, 5.0) * (10.0f64).exp());
    }
    #[test]
    fn arg_increment_tracks_fast_linear_phase() {
        let (alpha, nu) = (1.0, 1e-4);
        let p = QuadParams::default();
        let (a, b) = (C64::new(-0.5, 0.2), C64::new(0.0, 0.2));
        let mut count = 0;
        let adaptive = arg_increment(alpha, nu, a, b, &p, &mut count).unwrap();
        let n = 2000;
        let phase: Vec<C64> = (0..=n)
            .into_par_iter()
            .map(|k| {
                let d = evans_det(alpha, nu, a + (b - a) * (k as f64 / n as f64), &p).unwrap().det;
                d.mant / d.mant.norm()
            })
            .collect();
        let dense: f64 = phase.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
        assert!(dense.abs() > 20.0 * PI);
        assert!((adaptive - dense).abs() < 1e-6, "{adaptive} vs {dense}");
    }

    #[test]
    fn scan_finds_no_zeros_at_moderate_viscosity() {
        let (alpha, nu) = (1.0, 1e-3);
        let mut region = ScanRegion::zero_free(alpha, nu, 0.05);
        region.n_r = 25;
        region.n_i = 5;
        let rep = zero_free_scan(alpha, nu, region, &QuadParams::default()).unwrap();
        assert_eq!(rep.winding, 0);
        assert!(rep.min_ln_ratio > -0.1, "{}", rep.min_ln_ratio);
    }

    #[test]
    fn determinant_is_continuous() {
        let p = QuadParams::default();
        for c in [C64::new(0.2, -0.02), C64::new(-1.1, 0.3), C64::new(2.5, 0.8)] {
            let a = evans_det(1.0, 1e-3, c, &p).unwrap().det;
            let b = evans_det(1.0, 1e-3, c + C64::new(1e-7, 1e-7), &p).unwrap().det;
            assert!(b.sub(a).abs_rel(a) < 1e-4);
        }
    }
}

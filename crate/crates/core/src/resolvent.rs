//! Resolvent at a single spectral parameter `c`: whole-line Green's function,
//! boundary functionals `Φ±`, corrector coefficients `a, b` and kernels `K±`.
//!
//! Everything is carried in [`LogC`] form. The Airy factors in the Langer
//! variable span hundreds of orders of magnitude at realistic `ν`, and only
//! their products are of moderate size.

use std::f64::consts::PI;

use serde::Serialize;

use crate::airy::{h_minus_log, h_plus_log, ln_abs_proxy, rot_minus, rot_plus};
use crate::data::Profile;
use crate::error::{Error, Result};
use crate::quad::gl16;
use crate::{LogC, C64};

/// Langer variable `Y(y) = (y - c - iαν)/ε`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LangerMap {
    pub alpha: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub c: C64,
}

impl LangerMap {
    pub fn new(alpha: f64, nu: f64, c: C64) -> Result<Self> {
        if !(alpha > 0.0) || !(nu > 0.0) {
            return Err(Error::InvalidParameter(format!("need α > 0 and ν > 0, got α = {alpha}, ν = {nu}")));
        }
        Ok(LangerMap { alpha, nu, epsilon: (nu / alpha).cbrt(), c })
    }

    pub fn y(&self, y: f64) -> C64 {
        (C64::new(y, -self.alpha * self.nu) - self.c) / self.epsilon
    }

    /// `2π/(αε²)`, the Green's function normalization fixed by the Wronskian.
    pub fn green_prefactor(&self) -> f64 {
        2.0 * PI / (self.alpha * self.epsilon * self.epsilon)
    }

    /// Local length scale of the homogeneous solutions.
    fn local_scale(&self, y: f64) -> f64 {
        self.epsilon / self.y(y).norm().sqrt().max(1.0)
    }
}

/// Panel sizing: width `≤ ρ·ε/max(1, √|Y|)` and `≤ h_max`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadParams {
    pub rho: f64,
    pub h_max: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams { rho: 4.0, h_max: 0.05 }
    }
}

impl QuadParams {
    pub fn refined(&self, factor: f64) -> Self {
        QuadParams { rho: self.rho / factor, h_max: self.h_max / factor }
    }
}

/// Log-magnitude margin below which Airy contributions are dropped.
const NEGLIGIBLE_LN: f64 = 50.0;

/// Which panels get Airy values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Coverage {
    All,
    /// Only panels where some `e^{±αw} H±(W)` is within `e^{-50}` of its maximum.
    WallWindows,
}

fn ln_h_proxies(map: &LangerMap, y: f64) -> (f64, f64) {
    let yy = map.y(y);
    (ln_abs_proxy(rot_minus() * yy), ln_abs_proxy(rot_plus() * yy))
}

/// Gauss panels on `[-1, 1]` adapted to one `c`, with `H±(Y)` at every node
/// of the active panels and zero elsewhere.
pub(crate) struct PanelSweep {
    pub breaks: Vec<f64>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub hm: Vec<LogC>,
    pub hp: Vec<LogC>,
}

/// Cumulative integrals at nodes and at breaks.
pub(crate) struct Cumulative {
    pub nodes: Vec<LogC>,
    pub breaks: Vec<LogC>,
}

impl Cumulative {
    pub fn total_forward(&self) -> LogC {
        *self.breaks.last().expect("non-empty")
    }

    pub fn total_backward(&self) -> LogC {
        self.breaks[0]
    }
}

fn panel_max_log(f: &[LogC]) -> f64 {
    f.iter().filter(|v| !v.is_zero()).map(|v| v.log).fold(f64::NEG_INFINITY, f64::max)
}

impl PanelSweep {
    pub fn new(map: &LangerMap, params: &QuadParams, extra_breaks: &[f64], coverage: Coverage) -> Self {
        let mut fixed: Vec<f64> = extra_breaks.iter().copied().filter(|b| b.abs() < 1.0).collect();
        fixed.push(1.0);
        fixed.sort_by(f64::total_cmp);
        fixed.dedup();
        let mut breaks = vec![-1.0];
        let mut x = -1.0;
        for &stop in &fixed {
            while x < stop {
                let h = (params.rho * map.local_scale(x)).min(params.h_max);
                // Look ahead once so the width never exceeds the scale at the panel's far end.
                let h = h.min((params.rho * map.local_scale((x + h).min(stop))).min(params.h_max) * 1.5);
                x = if x + h >= stop - 1e-3 * h { stop } else { x + h };
                breaks.push(x);
            }
        }
        let rule = gl16();
        let n = breaks.len() - 1;
        let active = match coverage {
            Coverage::All => vec![true; n],
            Coverage::WallWindows => {
                let a = map.alpha;
                let prox: Vec<[f64; 4]> = breaks
                    .iter()
                    .map(|&b| {
                        let (pm, pp) = ln_h_proxies(map, b);
                        [a * b + pm, -a * b + pm, a * b + pp, -a * b + pp]
                    })
                    .collect();
                let mut top = [f64::NEG_INFINITY; 4];
                for p in &prox {
                    for k in 0..4 {
                        top[k] = top[k].max(p[k]);
                    }
                }
                (0..n)
                    .map(|i| (0..4).any(|k| prox[i][k].max(prox[i + 1][k]) >= top[k] - NEGLIGIBLE_LN))
                    .collect()
            }
        };
        let mut y = Vec::with_capacity(n * rule.len());
        let mut w = Vec::with_capacity(n * rule.len());
        let mut hm = Vec::with_capacity(n * rule.len());
        let mut hp = Vec::with_capacity(n * rule.len());
        for (p, on) in breaks.windows(2).zip(&active) {
            for (xi, wi) in rule.map(p[0], p[1]) {
                y.push(xi);
                w.push(wi);
                if *on {
                    let yy = map.y(xi);
                    hm.push(h_minus_log(yy).0);
                    hp.push(h_plus_log(yy).0);
                } else {
                    hm.push(LogC::ZERO);
                    hp.push(LogC::ZERO);
                }
            }
        }
        PanelSweep { breaks, y, w, hm, hp }
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    /// `∫_{-1}^{y} f` at every node and break.
    pub fn forward(&self, f: &[LogC]) -> Cumulative {
        let rule = gl16();
        let q = rule.len();
        let mut nodes = vec![LogC::ZERO; f.len()];
        let mut breaks = vec![LogC::ZERO; self.breaks.len()];
        let mut acc = LogC::ZERO;
        for p in 0..self.panels() {
            let half = 0.5 * (self.breaks[p + 1] - self.breaks[p]);
            let fp = &f[p * q..(p + 1) * q];
            let lmax = panel_max_log(fp);
            if lmax.is_finite() {
                let g: Vec<C64> = fp.iter().map(|v| v.value_shifted(lmax)).collect();
                for j in 0..q {
                    let s: C64 = (0..q).map(|k| g[k] * rule.cum[j][k]).sum();
                    nodes[p * q + j] = acc.add(LogC::new(s * half, lmax));
                }
                let tot: C64 = (0..q).map(|k| g[k] * rule.weights[k]).sum();
                acc = acc.add(LogC::new(tot * half, lmax));
            } else {
                for j in 0..q {
                    nodes[p * q + j] = acc;
                }
            }
            breaks[p + 1] = acc;
        }
        Cumulative { nodes, breaks }
    }

    /// `∫_{y}^{1} f` at every node and break.
    pub fn backward(&self, f: &[LogC]) -> Cumulative {
        let rule = gl16();
        let q = rule.len();
        let mut nodes = vec![LogC::ZERO; f.len()];
        let mut breaks = vec![LogC::ZERO; self.breaks.len()];
        let mut acc = LogC::ZERO;
        for p in (0..self.panels()).rev() {
            let half = 0.5 * (self.breaks[p + 1] - self.breaks[p]);
            let fp = &f[p * q..(p + 1) * q];
            let lmax = panel_max_log(fp);
            if lmax.is_finite() {
                let g: Vec<C64> = fp.iter().map(|v| v.value_shifted(lmax)).collect();
                for j in 0..q {
                    // Symmetric nodes: ∫_{x_j}^{1} ℓ_k = cum[q-1-j][q-1-k].
                    let s: C64 = (0..q).map(|k| g[k] * rule.cum[q - 1 - j][q - 1 - k]).sum();
                    nodes[p * q + j] = acc.add(LogC::new(s * half, lmax));
                }
                let tot: C64 = (0..q).map(|k| g[k] * rule.weights[k]).sum();
                acc = acc.add(LogC::new(tot * half, lmax));
            } else {
                for j in 0..q {
                    nodes[p * q + j] = acc;
                }
            }
            breaks[p] = acc;
        }
        Cumulative { nodes, breaks }
    }

    fn weighted(&self, h: &[LogC], sign: f64, alpha: f64) -> Vec<LogC> {
        h.iter()
            .zip(&self.y)
            .map(|(v, &y)| if v.is_zero() { LogC::ZERO } else { LogC { mant: v.mant, log: v.log + sign * alpha * y } })
            .collect()
    }
}

/// The matrix `[[M11, M12], [M21, M22]]` of the boundary conditions, with
/// `M_{1·} = ∫e^{αw}H_·`, `M_{2·} = ∫e^{-αw}H_·` and columns `H₋, H₊`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryMatrix {
    pub m11: LogC,
    pub m12: LogC,
    pub m21: LogC,
    pub m22: LogC,
}

impl BoundaryMatrix {
    pub fn det(&self) -> LogC {
        (self.m11 * self.m22).sub(self.m12 * self.m21)
    }

    /// `ln(|M21|·|M12|)`, the dominant product of the determinant.
    pub fn lower_surrogate_ln(&self) -> f64 {
        self.m21.ln_abs() + self.m12.ln_abs()
    }
}

/// Exponentially weighted `H±` with their cumulative integrals.
pub(crate) struct Moments {
    /// `T±₋(y) = ∫_y^1 e^{±αr} H₋`.
    pub tm: [Cumulative; 2],
    /// `T±₊(y) = ∫_{-1}^y e^{±αr} H₊`.
    pub tp: [Cumulative; 2],
}

impl Moments {
    pub fn new(sweep: &PanelSweep, alpha: f64) -> Self {
        let tm = [sweep.backward(&sweep.weighted(&sweep.hm, 1.0, alpha)), sweep.backward(&sweep.weighted(&sweep.hm, -1.0, alpha))];
        let tp = [sweep.forward(&sweep.weighted(&sweep.hp, 1.0, alpha)), sweep.forward(&sweep.weighted(&sweep.hp, -1.0, alpha))];
        Moments { tm, tp }
    }

    pub fn matrix(&self) -> BoundaryMatrix {
        BoundaryMatrix {
            m11: self.tm[0].total_backward(),
            m12: self.tp[0].total_forward(),
            m21: self.tm[1].total_backward(),
            m22: self.tp[1].total_forward(),
        }
    }
}

/// Boundary matrix at `c` on an adapted panel grid.
pub fn boundary_matrix(map: &LangerMap, params: &QuadParams) -> BoundaryMatrix {
    let sweep = PanelSweep::new(map, params, &[], Coverage::WallWindows);
    Moments::new(&sweep, map.alpha).matrix()
}

/// Solution of the boundary system at one `c`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CorrectorCoeffs {
    pub c: C64,
    pub a: LogC,
    pub b: LogC,
    /// `Φ± = (α/2π) ∫ e^{±αy} R_f dy`.
    pub phi_plus: LogC,
    pub phi_minus: LogC,
    pub det: LogC,
    pub matrix: BoundaryMatrix,
}

/// `ln|D|` below which the determinant counts as numerically zero, relative
/// to the dominant product.
const DET_FLOOR: f64 = -644.0;

pub(crate) struct CorrectorDetail {
    pub coeffs: CorrectorCoeffs,
    #[cfg_attr(not(test), allow(dead_code))]
    pub sweep: PanelSweep,
    /// `F± = ∫ e^{±αy} R_f`.
    #[cfg_attr(not(test), allow(dead_code))]
    pub f: [LogC; 2],
}

fn support_breaks(profile: &dyn Profile) -> [f64; 2] {
    let (a, b) = profile.support();
    [a.max(-1.0), b.min(1.0)]
}

/// Distance from `c` to the segment `[a, b]`.
fn distance_to_segment(c: C64, a: f64, b: f64) -> f64 {
    C64::new(c.re - c.re.clamp(a, b), c.im).norm()
}

/// Whether `F±` may be taken from the outer expansion: the neglected
/// `(ε/d)⁶` term and the wall layers seen from the support are both below ~1e-8.
fn far_field(profile: &dyn Profile, map: &LangerMap) -> bool {
    let Some(gap) = profile.interior_gap() else {
        return false;
    };
    let (a, b) = profile.support();
    let eps = map.epsilon;
    let d = distance_to_segment(map.c, a, b);
    (eps / d).powi(3) <= 1e-4 && (d / eps).sqrt() * gap / eps >= 65.0
}

/// `F± ≈ ∫ ω (e^{±αz}/D)(1 + ν(∓2iα²/D² - 2α²/D³))`, `D = iα(z - c)`:
/// the first two terms of the adjoint outer expansion.
fn far_field_f(profile: &dyn Profile, map: &LangerMap) -> [LogC; 2] {
    let (a, b) = profile.support();
    let panels = ((b - a) / profile.feature_scale()).ceil().max(1.0) as usize;
    let (zs, ws) = crate::quad::composite_nodes(gl16(), &crate::quad::uniform_breaks(a, b, panels));
    let (al, nu) = (map.alpha, map.nu);
    let i = C64::new(0.0, 1.0);
    let mut f = [C64::new(0.0, 0.0); 2];
    for (&z, &w) in zs.iter().zip(&ws) {
        let om = profile.eval(z) * w;
        let d = i * al * (z - map.c);
        let d2 = d * d;
        for (s, sg) in [(0usize, 1.0), (1, -1.0)] {
            let corr = C64::new(1.0, 0.0) + nu * (-sg * 2.0 * i * al * al / d2 - 2.0 * al * al / (d2 * d));
            f[s] += om * (sg * al * z).exp() / d * corr;
        }
    }
    [LogC::from_c64(f[0]), LogC::from_c64(f[1])]
}

pub(crate) fn solve_detail(profile: &dyn Profile, map: &LangerMap, params: &QuadParams) -> Result<CorrectorDetail> {
    if far_field(profile, map) {
        let sweep = PanelSweep::new(map, params, &[], Coverage::WallWindows);
        let mat = Moments::new(&sweep, map.alpha).matrix();
        let f = far_field_f(profile, map);
        return finish(map, mat, f, sweep);
    }
    solve_near(profile, map, params)
}

pub(crate) fn solve_near(profile: &dyn Profile, map: &LangerMap, params: &QuadParams) -> Result<CorrectorDetail> {
    let sb = support_breaks(profile);
    let sweep = PanelSweep::new(map, params, &sb, Coverage::All);
    let mom = Moments::new(&sweep, map.alpha);
    let mat = mom.matrix();
    let k = map.green_prefactor();
    let mut f = [LogC::ZERO; 2];
    for (i, &y) in sweep.y.iter().enumerate() {
        if y < sb[0] || y > sb[1] {
            continue;
        }
        let om = profile.eval(y);
        if om == C64::new(0.0, 0.0) {
            continue;
        }
        for s in 0..2 {
            let psi = (sweep.hp[i] * mom.tm[s].nodes[i]).add(sweep.hm[i] * mom.tp[s].nodes[i]);
            f[s] = f[s].add(psi.scale(om * (k * sweep.w[i])));
        }
    }
    finish(map, mat, f, sweep)
}

fn finish(map: &LangerMap, mat: BoundaryMatrix, f: [LogC; 2], sweep: PanelSweep) -> Result<CorrectorDetail> {
    let det = mat.det();
    if det.is_zero() || det.ln_abs() - mat.lower_surrogate_ln() < DET_FLOOR {
        return Err(Error::DeterminantUnderflow { c: map.c, ln_abs: det.ln_abs() });
    }
    let inv = det.recip();
    let a = (mat.m12 * f[1]).sub(mat.m22 * f[0]) * inv;
    let b = (mat.m21 * f[0]).sub(mat.m11 * f[1]) * inv;
    let phi = map.alpha / (2.0 * PI);
    let coeffs = CorrectorCoeffs {
        c: map.c,
        a,
        b,
        phi_plus: f[0].scale(C64::new(phi, 0.0)),
        phi_minus: f[1].scale(C64::new(phi, 0.0)),
        det,
        matrix: mat,
    };
    Ok(CorrectorDetail { coeffs, sweep, f })
}

/// `a(c)`, `b(c)` and `Φ±(c)` for the given data.
pub fn corrector_coeffs(profile: &dyn Profile, map: &LangerMap, params: &QuadParams) -> Result<CorrectorCoeffs> {
    Ok(solve_detail(profile, map, params)?.coeffs)
}

/// `(Φ₊, Φ₋)`.
pub fn phi_pm(profile: &dyn Profile, map: &LangerMap, params: &QuadParams) -> Result<(LogC, LogC)> {
    let d = solve_detail(profile, map, params)?;
    Ok((d.coeffs.phi_plus, d.coeffs.phi_minus))
}

/// `H₋(Y(y))`, `H₊(Y(y))` at each `y`.
pub fn h_pair(map: &LangerMap, ys: &[f64]) -> Vec<(LogC, LogC)> {
    ys.iter()
        .map(|&y| {
            let yy = map.y(y);
            (h_minus_log(yy).0, h_plus_log(yy).0)
        })
        .collect()
}

/// `R_b(y) = a H₋(Y) + b H₊(Y)`, i.e. `Δ_α φ_b` in the Laplace variable.
/// Nodes where both terms are below `e^{-50}` of the largest are set to zero.
pub fn corrector_resolvent(coeffs: &CorrectorCoeffs, map: &LangerMap, ys: &[f64]) -> Vec<LogC> {
    let (la, lb) = (coeffs.a.ln_abs(), coeffs.b.ln_abs());
    let prox: Vec<f64> = ys
        .iter()
        .map(|&y| {
            let (pm, pp) = ln_h_proxies(map, y);
            (la + pm).max(lb + pp)
        })
        .collect();
    let top = prox.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ys.iter()
        .zip(&prox)
        .map(|(&y, &p)| {
            if p < top - NEGLIGIBLE_LN {
                return LogC::ZERO;
            }
            let yy = map.y(y);
            (coeffs.a * h_minus_log(yy).0).add(coeffs.b * h_plus_log(yy).0)
        })
        .collect()
}

/// `K₊ = (-M22 H₋ + M21 H₊)/D` and `K₋ = (M12 H₋ - M11 H₊)/D`, so that
/// `a H₋ + b H₊ = K₊ F₊ + K₋ F₋`.
pub fn kernel_k(matrix: &BoundaryMatrix, map: &LangerMap, ys: &[f64]) -> Vec<(LogC, LogC)> {
    let inv = matrix.det().recip();
    h_pair(map, ys)
        .into_iter()
        .map(|(hm, hp)| {
            let kp = (matrix.m21 * hp).sub(matrix.m22 * hm) * inv;
            let km = (matrix.m12 * hm).sub(matrix.m11 * hp) * inv;
            (kp, km)
        })
        .collect()
}

/// Whole-line free resolvent `R_f(y, c) = ∫ G(y, z; c) ω_in(z) dz` at each `y`.
pub fn free_resolvent(profile: &dyn Profile, map: &LangerMap, params: &QuadParams, ys: &[f64]) -> Vec<LogC> {
    let sb = support_breaks(profile);
    let mut extra: Vec<f64> = sb.to_vec();
    extra.extend(ys.iter().copied().filter(|y| y.abs() < 1.0));
    let sweep = PanelSweep::new(map, params, &extra, Coverage::All);
    let om: Vec<LogC> = sweep.y.iter().map(|&y| LogC::from_c64(profile.eval(y))).collect();
    let fp: Vec<LogC> = sweep.hp.iter().zip(&om).map(|(h, o)| *h * *o).collect();
    let fm: Vec<LogC> = sweep.hm.iter().zip(&om).map(|(h, o)| *h * *o).collect();
    let sp = sweep.forward(&fp);
    let sm = sweep.backward(&fm);
    let k = C64::new(map.green_prefactor(), 0.0);
    ys.iter()
        .map(|&y| {
            let j = sweep.breaks.partition_point(|&b| b < y).min(sweep.breaks.len() - 1);
            let yy = map.y(y);
            (h_minus_log(yy).0 * sp.breaks[j]).add(h_plus_log(yy).0 * sm.breaks[j]).scale(k)
        })
        .collect()
}

/// `Ψ±(z) = ∫ e^{±αy} G(y, z) dy` at each `z`, so that `F± = ∫ Ψ± ω_in`.
/// Returned as the two pieces `[k H₊(Z) T±₋(z), k H₋(Z) T±₊(z)]` per sign.
pub fn psi_pieces(map: &LangerMap, params: &QuadParams, zs: &[f64]) -> Vec<[[LogC; 2]; 2]> {
    let extra: Vec<f64> = zs.iter().copied().filter(|z| z.abs() < 1.0).collect();
    let sweep = PanelSweep::new(map, params, &extra, Coverage::All);
    let mom = Moments::new(&sweep, map.alpha);
    let k = C64::new(map.green_prefactor(), 0.0);
    zs.iter()
        .map(|&z| {
            let j = sweep.breaks.partition_point(|&b| b < z).min(sweep.breaks.len() - 1);
            let zz = map.y(z);
            let (hm, hp) = (h_minus_log(zz).0, h_plus_log(zz).0);
            let piece = |s: usize| [(hp * mom.tm[s].breaks[j]).scale(k), (hm * mom.tp[s].breaks[j]).scale(k)];
            [piece(0), piece(1)]
        })
        .collect()
}

/// The two terms of each of `K₊`, `K₋` at every `y`:
/// `[[-M22 H₋/D, M21 H₊/D], [M12 H₋/D, -M11 H₊/D]]`.
pub fn kernel_k_pieces(matrix: &BoundaryMatrix, map: &LangerMap, ys: &[f64]) -> Vec<[[LogC; 2]; 2]> {
    let inv = matrix.det().recip();
    let neg = C64::new(-1.0, 0.0);
    h_pair(map, ys)
        .into_iter()
        .map(|(hm, hp)| {
            [
                [(matrix.m22 * hm * inv).scale(neg), matrix.m21 * hp * inv],
                [matrix.m12 * hm * inv, (matrix.m11 * hp * inv).scale(neg)],
            ]
        })
        .collect()
}

//! Bromwich quadrature of the boundary corrector
//! `ω_b(t, y) = (α/2π) ∫_Γ e^{-iαct} (a H₋(Y) + b H₊(Y)) dc`
//! and the equivalent kernel route `ω_b(t, y) = Σ_j ∫ K_j(t, y, z) ω_in(z) dz`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::contour::ContourSpec;
use crate::data::Profile;
use crate::error::{Error, Result};
use crate::free::{boundary_moment_physical, PhysicalFree};
use crate::resolvent::{corrector_coeffs, corrector_resolvent, kernel_k_pieces, psi_pieces, solve_detail, LangerMap, QuadParams};
use crate::scaled::EXP_OVERFLOW;
use crate::{LogC, C64};

/// `R_b` at the output nodes for one contour node, stored as `e^{ln_scale} · values`.
struct NodeSample {
    c: C64,
    w: C64,
    ln_scale: f64,
    values: Vec<C64>,
}

fn normalize(v: &[LogC]) -> (f64, Vec<C64>) {
    let top = v.iter().filter(|x| !x.is_zero()).map(|x| x.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return (0.0, vec![C64::new(0.0, 0.0); v.len()]);
    }
    (top, v.iter().map(|x| x.value_shifted(top)).collect())
}

/// Diagnostics recorded while sampling a contour.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct RunStats {
    pub nodes: usize,
    /// `min ln(|D| / (|M21||M12|))` over the contour.
    pub min_ln_det_ratio: f64,
}

/// The corrector resolvent sampled on a contour, ready for any `t ≥ t_min`.
pub struct CorrectorRun {
    pub alpha: f64,
    pub nu: f64,
    pub ys: Vec<f64>,
    pub contour: ContourSpec,
    pub stats: RunStats,
    samples: Vec<NodeSample>,
}

impl CorrectorRun {
    pub fn new(profile: &dyn Profile, alpha: f64, nu: f64, contour: ContourSpec, ys: &[f64], params: &QuadParams) -> Result<Self> {
        let pts: Vec<(C64, C64)> = contour.iter().map(|(c, w, _)| (c, w)).collect();
        let out: Vec<(NodeSample, f64)> = pts
            .par_iter()
            .map(|&(c, w)| {
                let map = LangerMap::new(alpha, nu, c)?;
                let coeffs = solve_detail(profile, &map, params)?.coeffs;
                let (ln_scale, values) = normalize(&corrector_resolvent(&coeffs, &map, ys));
                let ratio = coeffs.det.ln_abs() - coeffs.matrix.lower_surrogate_ln();
                Ok((NodeSample { c, w, ln_scale, values }, ratio))
            })
            .collect::<Result<_>>()?;
        let min_ln_det_ratio = out.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        let stats = RunStats { nodes: out.len(), min_ln_det_ratio };
        let samples = out.into_iter().map(|x| x.0).collect();
        Ok(CorrectorRun { alpha, nu, ys: ys.to_vec(), contour, stats, samples })
    }

    /// `ω_b(t, y)` at the stored output nodes.
    pub fn omega_b(&self, t: f64) -> Result<Vec<C64>> {
        self.contour.check_time(t)?;
        let pre = self.alpha / (2.0 * PI);
        let mut out = vec![C64::new(0.0, 0.0); self.ys.len()];
        for s in &self.samples {
            let e = C64::new(s.ln_scale + self.alpha * s.c.im * t, -self.alpha * s.c.re * t);
            if e.re < -745.0 {
                continue;
            }
            if e.re > EXP_OVERFLOW {
                return Err(Error::Quadrature { nodes: self.samples.len(), error: e.re, context: format!("e^{{-iαct}}R_b overflows at c = {}", s.c) });
            }
            let f = s.w * e.exp() * pre;
            for (o, v) in out.iter_mut().zip(&s.values) {
                *o += f * v;
            }
        }
        Ok(out)
    }

    /// `ω_b` at several times, evaluated in parallel.
    pub fn omega_b_many(&self, times: &[f64]) -> Result<Vec<Vec<C64>>> {
        times.par_iter().map(|&t| self.omega_b(t)).collect()
    }
}

/// The eight time-domain kernels on a `(y, z)` grid, indexed
/// `j = 4·s + 2·a + b` with `s` the sign of `Φ±`, `a` the `H₋/H₊` term of
/// `K±(y)` and `b` the `H₊T₋ / H₋T₊` term of `Ψ±(z)`.
pub struct KernelSet {
    pub t: f64,
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
    pub k: Vec<DMatrix<C64>>,
}

impl KernelSet {
    /// `Σ_j ∫ K_j(t, y, z) ω(z) dz` with quadrature weights `wz` on the z grid.
    pub fn apply(&self, omega: &[C64], wz: &[f64]) -> Vec<C64> {
        let v = nalgebra::DVector::from_iterator(self.zs.len(), omega.iter().zip(wz).map(|(o, w)| o * w));
        let mut out = nalgebra::DVector::zeros(self.ys.len());
        for k in &self.k {
            out += k * &v;
        }
        out.iter().copied().collect()
    }

    /// `sup_y Σ_z |η(y) K_j(y, z)| w_z` and `sup_z Σ_y |η(y) K_j(y, z)| w_y` for kernel `j`.
    pub fn schur_norms(&self, j: usize, eta: impl Fn(f64) -> f64, wy: &[f64], wz: &[f64]) -> (f64, f64) {
        let k = &self.k[j];
        let mut rows = 0.0f64;
        for (i, &y) in self.ys.iter().enumerate() {
            let e = eta(y);
            rows = rows.max((0..self.zs.len()).map(|l| e * k[(i, l)].norm() * wz[l]).sum());
        }
        let mut cols = 0.0f64;
        for l in 0..self.zs.len() {
            cols = cols.max(self.ys.iter().enumerate().map(|(i, &y)| eta(y) * k[(i, l)].norm() * wy[i]).sum());
        }
        (rows, cols)
    }
}

/// Build `K_1 … K_8` at time `t` by summing rank-one contour contributions.
pub fn kernels_k1_to_k8(alpha: f64, nu: f64, contour: &ContourSpec, t: f64, ys: &[f64], zs: &[f64], params: &QuadParams) -> Result<KernelSet> {
    contour.check_time(t)?;
    let pts: Vec<(C64, C64)> = contour.iter().map(|(c, w, _)| (c, w)).collect();
    let pre = alpha / (2.0 * PI);
    // Per node: the y factors, z factors and their scalar weights.
    type Factors = ([Vec<C64>; 4], [Vec<C64>; 4], [C64; 8]);
    let per_node: Vec<Factors> = pts
        .par_iter()
        .map(|&(c, w)| {
            let map = LangerMap::new(alpha, nu, c)?;
            let mat = crate::resolvent::boundary_matrix(&map, params);
            let det = mat.det();
            if det.is_zero() || det.ln_abs() - mat.lower_surrogate_ln() < -644.0 {
                return Err(Error::DeterminantUnderflow { c, ln_abs: det.ln_abs() });
            }
            let ky = kernel_k_pieces(&mat, &map, ys);
            let pz = psi_pieces(&map, params, zs);
            let mut yv: [Vec<C64>; 4] = Default::default();
            let mut zv: [Vec<C64>; 4] = Default::default();
            let mut ys_ln = [0.0; 4];
            let mut zs_ln = [0.0; 4];
            for s in 0..2 {
                for a in 0..2 {
                    let col: Vec<LogC> = ky.iter().map(|p| p[s][a]).collect();
                    (ys_ln[2 * s + a], yv[2 * s + a]) = normalize(&col);
                    let col: Vec<LogC> = pz.iter().map(|p| p[s][a]).collect();
                    (zs_ln[2 * s + a], zv[2 * s + a]) = normalize(&col);
                }
            }
            let phase = -C64::new(0.0, 1.0) * alpha * c * t;
            let mut f = [C64::new(0.0, 0.0); 8];
            for s in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let e = phase + ys_ln[2 * s + a] + zs_ln[2 * s + b];
                        if e.re > EXP_OVERFLOW {
                            return Err(Error::Quadrature { nodes: pts.len(), error: e.re, context: format!("kernel term overflows at c = {c}") });
                        }
                        f[4 * s + 2 * a + b] = if e.re < -745.0 { C64::new(0.0, 0.0) } else { w * e.exp() * pre };
                    }
                }
            }
            Ok((yv, zv, f))
        })
        .collect::<Result<_>>()?;
    let n = per_node.len();
    let mut k = Vec::with_capacity(8);
    for s in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                let j = 4 * s + 2 * a + b;
                let u = DMatrix::from_fn(ys.len(), n, |i, m| per_node[m].0[2 * s + a][i] * per_node[m].2[j]);
                let v = DMatrix::from_fn(n, zs.len(), |m, l| per_node[m].1[2 * s + b][l]);
                k.push(u * v);
            }
        }
    }
    Ok(KernelSet { t, ys: ys.to_vec(), zs: zs.to_vec(), k })
}

/// Both sides of the Laplace–Plancherel identity on the line `c_i = -λ/α`:
/// `∫|Φ±(c_r + ic_i)|² dc_r` and `(α/2π) ∫₀^∞ |g±(t)|² dt`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PlancherelCheck {
    pub sign: f64,
    pub laplace_side: f64,
    pub time_side: f64,
}

impl PlancherelCheck {
    pub fn rel_error(&self) -> f64 {
        (self.laplace_side - self.time_side).abs() / self.time_side.abs().max(f64::MIN_POSITIVE)
    }
}

/// Compare `Φ±` from the resolvent against the time-domain boundary moments.
/// `c_r` is integrated over `[-c_max, c_max]`, `t` over `[0, t_max]`.
pub fn plancherel_check(profile: &dyn Profile, alpha: f64, nu: f64, lambda: f64, c_max: f64, t_max: f64, params: &QuadParams) -> Result<[PlancherelCheck; 2]> {
    let ci = -lambda / alpha;
    let eps = (nu / alpha).cbrt();
    // Panels of width ε/4 near the Euler spectrum, growing geometrically outside it.
    let mut breaks = vec![0.0];
    let mut x: f64 = 0.0;
    while x < c_max {
        let h = if x < 1.0 { eps / 4.0 } else { (eps / 4.0).max(0.1 * (x - 1.0)) };
        x = (x + h).min(c_max);
        breaks.push(x);
    }
    let mut cr: Vec<(f64, f64)> = Vec::new();
    for p in breaks.windows(2) {
        for (x, w) in crate::quad::gl16().map(p[0], p[1]) {
            cr.push((x, w));
            cr.push((-x, w));
        }
    }
    let phis: Vec<(f64, LogC, LogC)> = cr
        .par_iter()
        .map(|&(x, w)| {
            let map = LangerMap::new(alpha, nu, C64::new(x, ci))?;
            let co = corrector_coeffs(profile, &map, params)?;
            Ok((w, co.phi_plus, co.phi_minus))
        })
        .collect::<Result<_>>()?;
    let lap = [phis.iter().map(|p| p.0 * p.1.abs().powi(2)).sum::<f64>(), phis.iter().map(|p| p.0 * p.2.abs().powi(2)).sum::<f64>()];
    // Time side on panels of one oscillation period.
    let free = PhysicalFree::new(profile, alpha, nu);
    let tp = ((alpha * t_max / PI).ceil() as usize).max(16);
    let (ts, wt) = crate::quad::composite_nodes(crate::quad::gl16(), &crate::quad::uniform_breaks(0.0, t_max, tp));
    let mut out = [PlancherelCheck { sign: 1.0, laplace_side: 0.0, time_side: 0.0 }; 2];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        let g: Vec<f64> = ts
            .par_chunks(64)
            .flat_map_iter(|chunk| boundary_moment_physical(&free, lambda, chunk, sign).into_iter().map(|m| m.g.norm_sqr()))
            .collect();
        let time_side = alpha / (2.0 * PI) * g.iter().zip(&wt).map(|(g, w)| g * w).sum::<f64>();
        out[k] = PlancherelCheck { sign, laplace_side: lap[k], time_side };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{build_contour, ContourShape};
    use crate::data::{DataClass, InitialData};
    use crate::free::PhysicalFree;
    use crate::quad::{composite_nodes, gl16, uniform_breaks};

    fn wall_grid(n: usize) -> (Vec<f64>, Vec<f64>) {
        composite_nodes(gl16(), &uniform_breaks(-1.0, 1.0, n))
    }

    #[test]
    fn zero_data_gives_zero_corrector() {
        struct Zero;
        impl Profile for Zero {
            fn eval(&self, _: f64) -> C64 {
                C64::new(0.0, 0.0)
            }
            fn support(&self) -> (f64, f64) {
                (-0.5, 0.5)
            }
        }
        let k = build_contour(1.0, 1e-2, ContourShape::steep(), 0.05, 1.0, 2.0).unwrap();
        let run = CorrectorRun::new(&Zero, 1.0, 1e-2, k, &[-0.9, 0.0, 0.9], &QuadParams::default()).unwrap();
        assert!(run.omega_b(1.5).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn total_solution_has_vanishing_moments() {
        // ∫ e^{±αy} (ω_f + ω_b) dy = 0 at every t.
        let (alpha, nu) = (1.0, 1e-2);
        let data = InitialData::generate(DataClass::Separated { delta0: 0.5 }, alpha, 1);
        let (ys, ws) = wall_grid(64);
        let k = build_contour(alpha, nu, ContourShape::steep(), 0.05, 1.0, 10.0).unwrap();
        let run = CorrectorRun::new(&data, alpha, nu, k, &ys, &QuadParams::default()).unwrap();
        let free = PhysicalFree::new(&data, alpha, nu);
        let scale = data.l2_norm();
        for t in [1.0, 4.0, 10.0] {
            let wb = run.omega_b(t).unwrap();
            for sign in [1.0, -1.0] {
                let m: C64 = ys.iter().zip(&ws).zip(&wb).map(|((&y, &w), &b)| (free.value(t, y).0 + b) * (sign * alpha * y).exp() * w).sum();
                let mf: C64 = ys.iter().zip(&ws).map(|(&y, &w)| free.value(t, y).0 * (sign * alpha * y).exp() * w).sum();
                assert!(m.norm() < 1e-6 * scale, "t = {t}, sign {sign}: {m} (free part {mf})");
            }
        }
    }

    #[test]
    fn contour_independence() {
        let (alpha, nu) = (1.0, 1e-2);
        let data = InitialData::generate(DataClass::Separated { delta0: 0.5 }, alpha, 2);
        let ys = [-0.99, -0.9, -0.6, 0.0, 0.7, 0.95];
        let p = QuadParams::default();
        let a = CorrectorRun::new(&data, alpha, nu, build_contour(alpha, nu, ContourShape::steep(), 0.05, 1.0, 2.0).unwrap(), &ys, &p).unwrap();
        let b = CorrectorRun::new(&data, alpha, nu, build_contour(alpha, nu, ContourShape::Connected { slope: 1.0 / 101.0 }, 0.05, 1.0, 2.0).unwrap(), &ys, &p)
            .unwrap();
        for t in [1.0, 2.0] {
            let (wa, wb) = (a.omega_b(t).unwrap(), b.omega_b(t).unwrap());
            let top = wa.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (x, y) in wa.iter().zip(&wb) {
                assert!((x - y).norm() < 1e-6 * top, "t = {t}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn kernel_route_matches_direct_route() {
        let (alpha, nu) = (1.0, 1e-2);
        let data = InitialData::generate(DataClass::Separated { delta0: 0.5 }, alpha, 3);
        let ys = [-0.97, -0.8, 0.3, 0.9];
        let eps = (nu / alpha).cbrt();
        let (zs, wz) = composite_nodes(gl16(), &uniform_breaks(-0.5, 0.5, (1.0 / (eps / 4.0)).ceil() as usize));
        let p = QuadParams::default();
        let k = build_contour(alpha, nu, ContourShape::steep(), 0.05, 2.0, 2.0).unwrap();
        let direct = CorrectorRun::new(&data, alpha, nu, k.clone(), &ys, &p).unwrap().omega_b(2.0).unwrap();
        let ks = kernels_k1_to_k8(alpha, nu, &k, 2.0, &ys, &zs, &p).unwrap();
        let om: Vec<C64> = zs.iter().map(|&z| data.eval(z)).collect();
        let via = ks.apply(&om, &wz);
        let top = direct.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in direct.iter().zip(&via) {
            assert!((x - y).norm() < 1e-6 * top, "{x} vs {y}");
        }
    }

    #[test]
    fn plancherel_identity() {
        let (alpha, nu) = (1.0, 1e-2);
        let data = InitialData::generate(DataClass::Separated { delta0: 0.5 }, alpha, 4);
        let lambda = crate::weights::RateSpec::default().lambda(alpha, nu);
        let t_max = 20.0 * (nu).powf(-1.0 / 3.0);
        for chk in plancherel_check(&data, alpha, nu, lambda, 200.0, t_max, &QuadParams::default()).unwrap() {
            assert!(chk.rel_error() < 1e-4, "{chk:?}");
        }
    }
}

//! Direct solver for one mode of the linearized channel problem
//! `∂_t ω + iαy ω = ν(∂_yy − α²)ω`, `∫ e^{±αy} ω dy = 0`.
//!
//! Vorticity lives on Chebyshev–Lobatto nodes. The two wall values are
//! eliminated through the moment constraints, leaving a linear ODE for the
//! interior values that is advanced with an L-stable SDIRK2 scheme.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{GridKind, ModeField, YGrid};
use crate::quad::{cheb_coeffs, cheb_diff};
use crate::weights::epsilon;
use crate::C64;

const GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
/// Relative Chebyshev tail of `ψ` above which a field counts as under-resolved.
pub const PSI_TAIL_TOL: f64 = 1e-6;

/// Semi-discrete operator on the interior nodes.
pub struct ChannelOperator {
    pub alpha: f64,
    pub nu: f64,
    pub grid: Arc<YGrid>,
    /// `dω_I/dt = A ω_I`.
    a: DMatrix<C64>,
    /// Wall values `(ω_0, ω_N) = E ω_I`.
    elim: DMatrix<C64>,
}

impl ChannelOperator {
    pub fn new(alpha: f64, nu: f64, n: usize) -> Result<Self> {
        if n < 64 {
            return Err(Error::InvalidParameter(format!("channel grid needs N ≥ 64, got {n}")));
        }
        let grid = YGrid::chebyshev(n);
        let y = &grid.nodes;
        let d = cheb_diff(n);
        let dm = DMatrix::from_fn(n + 1, n + 1, |i, j| d[i][j]);
        let d2 = &dm * &dm;
        let l = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            let mut v = C64::new(nu * d2[(i, j)], 0.0);
            if i == j {
                v -= C64::new(nu * alpha * alpha, alpha * y[i]);
            }
            v
        });
        let c = DMatrix::from_fn(2, n + 1, |s, j| {
            let sign = if s == 0 { 1.0 } else { -1.0 };
            C64::new(grid.weights[j] * (sign * alpha * y[j]).exp(), 0.0)
        });
        let cb = DMatrix::from_fn(2, 2, |s, k| c[(s, if k == 0 { 0 } else { n })]);
        let ci = c.columns(1, n - 1).into_owned();
        let cb_inv = cb.try_inverse().ok_or(Error::LinearSolve { condition: f64::INFINITY })?;
        let elim = -(cb_inv * ci);
        let l_ii = l.view((1, 1), (n - 1, n - 1)).into_owned();
        let mut l_ib = DMatrix::zeros(n - 1, 2);
        l_ib.set_column(0, &l.view((1, 0), (n - 1, 1)).column(0));
        l_ib.set_column(1, &l.view((1, n), (n - 1, 1)).column(0));
        let a = l_ii + l_ib * &elim;
        Ok(ChannelOperator { alpha, nu, grid, a, elim })
    }

    /// Smallest `N` with at least eight nodes inside `ε` of each wall.
    pub fn min_resolution(alpha: f64, nu: f64) -> usize {
        let eps = epsilon(alpha, nu);
        let mut n = 64;
        while YGrid::chebyshev(n).nodes_near_wall(eps) < 8 {
            n += 16;
        }
        n
    }

    pub fn n(&self) -> usize {
        self.grid.len() - 1
    }

    fn interior(&self, field: &ModeField) -> DVector<C64> {
        DVector::from_iterator(self.n() - 1, field.values[1..self.n()].iter().copied())
    }

    fn assemble(&self, interior: &DVector<C64>) -> ModeField {
        let wall = &self.elim * interior;
        let mut values = Vec::with_capacity(self.n() + 1);
        values.push(wall[0]);
        values.extend(interior.iter().copied());
        values.push(wall[1]);
        ModeField::new(self.alpha, self.grid.clone(), values)
    }

    /// Largest stable step for the accuracy rule `dt ≤ 0.1·min(1/α, ε)`.
    pub fn default_dt(&self) -> f64 {
        0.1 * (1.0 / self.alpha).min(epsilon(self.alpha, self.nu))
    }

    pub fn stepper(&self, dt: f64) -> Result<Stepper<'_>> {
        let m = DMatrix::identity(self.n() - 1, self.n() - 1) - &self.a * C64::new(GAMMA * dt, 0.0);
        let m_inv = m.clone().try_inverse().ok_or(Error::LinearSolve { condition: f64::INFINITY })?;
        Ok(Stepper { op: self, dt, m_inv })
    }
}

/// Current time, step and vorticity.
#[derive(Clone, Debug)]
pub struct StepperState {
    pub omega: ModeField,
    pub t: f64,
    pub dt: f64,
}

/// SDIRK2 with a cached inverse of `I − γ dt A`.
pub struct Stepper<'a> {
    op: &'a ChannelOperator,
    dt: f64,
    m_inv: DMatrix<C64>,
}

impl Stepper<'_> {
    fn advance(&self, w: &DVector<C64>) -> DVector<C64> {
        let y1 = &self.m_inv * w;
        // k1 = (y1 − w)/(γ dt); the second stage solves for the stiffly accurate update.
        let rhs = w + (&y1 - w) * C64::new((1.0 - GAMMA) / GAMMA, 0.0);
        &self.m_inv * rhs
    }

    pub fn step(&self, state: &StepperState) -> StepperState {
        let w = self.advance(&self.op.interior(&state.omega));
        StepperState { omega: self.op.assemble(&w), t: state.t + self.dt, dt: self.dt }
    }

    /// The one-step map on interior values.
    pub fn update_matrix(&self) -> DMatrix<C64> {
        let k = (1.0 - GAMMA) / GAMMA;
        let id = DMatrix::<C64>::identity(self.m_inv.nrows(), self.m_inv.ncols());
        &self.m_inv * (&id * C64::new(1.0 - k, 0.0) + &self.m_inv * C64::new(k, 0.0))
    }

    /// Values at `times` (ascending, `≥ 0`), landing on each time with a
    /// shortened final step when needed.
    fn sample(&self, init: &DVector<C64>, times: &[f64]) -> Result<Vec<DVector<C64>>> {
        let mut w = init.clone();
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            let steps = ((target - t) / self.dt - 1e-9).ceil().max(0.0) as usize;
            let full = ((target - t) / self.dt + 1e-9).floor() as usize;
            for _ in 0..full.min(steps) {
                w = self.advance(&w);
            }
            t += full.min(steps) as f64 * self.dt;
            if target - t > 1e-12 * target.max(1.0) {
                let last = self.op.stepper(target - t)?;
                w = last.advance(&w);
            }
            t = target;
            out.push(w.clone());
        }
        Ok(out)
    }
}

/// Direct-solver settings.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChannelConfig {
    pub n: usize,
    pub dt: f64,
    /// Combine runs at `dt` and `dt/2` as `(4·fine − coarse)/3`.
    pub richardson: bool,
}

impl ChannelConfig {
    pub fn for_mode(alpha: f64, nu: f64) -> Self {
        let n = ChannelOperator::min_resolution(alpha, nu).max(256);
        let dt = 0.1 * (1.0 / alpha).min(epsilon(alpha, nu));
        ChannelConfig { n, dt, richardson: true }
    }
}

/// Chebyshev tail of the Dirichlet streamfunction relative to its norm.
pub fn psi_tail(omega: &ModeField) -> Result<f64> {
    let psi = dirichlet_stream(omega)?;
    let c = cheb_coeffs(&psi);
    let n = c.len();
    let total: f64 = c.iter().map(|v| v.norm()).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let tail: f64 = c[n - n / 10..].iter().map(|v| v.norm()).sum();
    Ok(tail / total)
}

/// Solve the channel problem from `init` (sampled on the operator's grid) and
/// return the field at each requested time.
pub fn solve(op: &ChannelOperator, init: &ModeField, times: &[f64], cfg: &ChannelConfig) -> Result<Vec<ModeField>> {
    let tail = psi_tail(init)?;
    if tail > PSI_TAIL_TOL {
        return Err(Error::UnderResolved { tail, suggested_n: 2 * op.n() });
    }
    let w0 = op.interior(init);
    let coarse = op.stepper(cfg.dt)?.sample(&w0, times)?;
    let out: Vec<DVector<C64>> = if cfg.richardson {
        let fine = op.stepper(0.5 * cfg.dt)?.sample(&w0, times)?;
        fine.iter().zip(&coarse).map(|(f, c)| (f * C64::new(4.0, 0.0) - c) / C64::new(3.0, 0.0)).collect()
    } else {
        coarse
    };
    out.iter().map(|w| {
        let f = op.assemble(w);
        let tail = psi_tail(&f)?;
        if tail > PSI_TAIL_TOL {
            return Err(Error::UnderResolved { tail, suggested_n: 2 * op.n() });
        }
        Ok(f)
    })
    .collect()
}

fn dirichlet_stream(omega: &ModeField) -> Result<Vec<C64>> {
    if omega.grid.kind != GridKind::ChebyshevLobatto {
        return Err(Error::InvalidParameter("Biot–Savart needs a Chebyshev–Lobatto grid".into()));
    }
    let n = omega.grid.len() - 1;
    let a2 = omega.alpha * omega.alpha;
    let d = cheb_diff(n);
    let dm = DMatrix::from_fn(n + 1, n + 1, |i, j| d[i][j]);
    let d2 = &dm * &dm;
    // (α² − ∂_yy) φ = ω on the interior, φ(±1) = 0.
    let m = DMatrix::from_fn(n - 1, n - 1, |i, j| {
        let v = -d2[(i + 1, j + 1)];
        if i == j {
            v + a2
        } else {
            v
        }
    });
    let rhs = DVector::from_iterator(n - 1, omega.values[1..n].iter().map(|v| *v));
    let lu = m.map(|v| C64::new(v, 0.0)).lu();
    let sol = lu.solve(&rhs).ok_or(Error::LinearSolve { condition: f64::INFINITY })?;
    let mut psi = vec![C64::new(0.0, 0.0); n + 1];
    psi[1..n].copy_from_slice(sol.as_slice());
    Ok(psi)
}

/// Velocity `(−∂_yφ, iαφ)` with `(α² − ∂_yy)φ = ω`, `φ(±1) = 0`.
pub fn biot_savart_channel(omega: &ModeField) -> Result<(ModeField, ModeField)> {
    let phi = dirichlet_stream(omega)?;
    let n = omega.grid.len() - 1;
    let d = cheb_diff(n);
    let u1 = (0..=n).map(|i| -(0..=n).map(|j| phi[j] * d[i][j]).sum::<C64>()).collect();
    let u2 = phi.iter().map(|p| p * C64::new(0.0, omega.alpha)).collect();
    Ok((ModeField::new(omega.alpha, omega.grid.clone(), u1), ModeField::new(omega.alpha, omega.grid.clone(), u2)))
}

/// Largest eigenvalue modulus of the one-step map.
pub fn update_spectral_radius(op: &ChannelOperator, dt: f64) -> Result<f64> {
    let s = op.stepper(dt)?.update_matrix();
    let eig = s.schur().eigenvalues().ok_or(Error::LinearSolve { condition: f64::INFINITY })?;
    Ok(eig.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

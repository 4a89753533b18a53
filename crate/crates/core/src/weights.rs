//! Boundary-layer weights, the decay rate λ, weighted norms and the
//! least-squares fits used to turn decay claims into numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ModeField;

/// Default small constant in the exponential outer branch of every weight.
pub const C_STAR: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    /// `η_{ε,p}`: three-region weight for separated data.
    EtaP,
    /// `η*_{ε,p}`: the L² variant; for `p = ∞` it carries the logarithmic correction.
    EtaStarP,
    /// `η̃_ε`: the `t ≥ 1` weight for data touching the boundary.
    EtaTilde,
    /// `η̃_ε^in`: the initial-layer weight, vanishing at the walls.
    EtaTildeIn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub family: WeightFamily,
    /// `p ∈ [1, ∞]`; `f64::INFINITY` for the sup-norm weight.
    pub p: f64,
    pub epsilon: f64,
    pub c_star: f64,
}

impl WeightSpec {
    pub fn new(family: WeightFamily, p: f64, epsilon: f64) -> Self {
        WeightSpec { family, p, epsilon, c_star: C_STAR }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::InvalidParameter(format!("weight exponent p = {} < 1", self.p)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("ε = {} must be positive", self.epsilon)));
        }
        Ok(())
    }

    /// Whether the family has a distinct innermost region `d ≤ ε^{3/2}`.
    fn has_inner_region(&self) -> bool {
        !matches!(self.family, WeightFamily::EtaTildeIn)
    }
}

fn outer(c_star: f64, d: f64, eps: f64) -> f64 {
    (c_star * (d / eps).powf(1.5)).exp()
}

/// Distance to the nearer wall.
pub fn wall_distance(y: f64) -> f64 {
    (1.0 - y).min(1.0 + y).max(0.0)
}

/// Value of the weight at `y ∈ [-1, 1]`.
pub fn eval_weight(spec: &WeightSpec, y: f64) -> Result<f64> {
    spec.validate()?;
    if !(-1.0..=1.0).contains(&y) {
        return Err(Error::InvalidParameter(format!("y = {y} outside [-1, 1]")));
    }
    Ok(weight_unchecked(spec, wall_distance(y)))
}

pub(crate) fn weight_unchecked(spec: &WeightSpec, d: f64) -> f64 {
    let eps = spec.epsilon;
    let inv_p = if spec.p.is_infinite() { 0.0 } else { 1.0 / spec.p };
    let e32 = eps.powf(1.5);
    match spec.family {
        WeightFamily::EtaP => {
            if d <= e32 {
                eps.powf(1.5 - 1.5 * inv_p)
            } else if d <= eps {
                (d * d / eps.powf(1.5 + inv_p)).max(d.powf(1.0 - inv_p))
            } else {
                eps.powf(0.5 - inv_p) * outer(spec.c_star, d, eps)
            }
        }
        WeightFamily::EtaStarP => {
            let base = if d <= e32 {
                eps.powf(1.5 - 1.5 * inv_p)
            } else if d <= eps {
                d.powf(1.0 - inv_p)
            } else {
                eps.powf(1.0 - inv_p) * outer(spec.c_star, d, eps)
            };
            if spec.p.is_infinite() && d <= eps {
                let l = (d.max(f64::MIN_POSITIVE) / eps).ln();
                base / (1.0 + l * l).sqrt()
            } else {
                base
            }
        }
        WeightFamily::EtaTilde => {
            if d <= e32 {
                e32
            } else if d <= eps {
                (d / eps).powi(3)
            } else {
                outer(spec.c_star, d, eps)
            }
        }
        WeightFamily::EtaTildeIn => {
            if d <= eps {
                (d / eps).powi(3)
            } else {
                outer(spec.c_star, d, eps)
            }
        }
    }
}

/// `‖η ω‖_{L^p_y}` by the field's quadrature; `p = ∞` is the nodal maximum.
pub fn weighted_lp_norm(field: &ModeField, spec: &WeightSpec, p: f64) -> Result<f64> {
    spec.validate()?;
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("norm exponent p = {p} < 1")));
    }
    if spec.has_inner_region() && spec.epsilon.powf(1.5) < 1.0 {
        let n = field.grid.nodes_near_wall(spec.epsilon.powf(1.5));
        if n < 4 {
            return Err(Error::WeightUnderResolved { nodes: n });
        }
    }
    let g = &field.grid;
    let vals = g.nodes.iter().zip(&field.values).map(|(&y, v)| weight_unchecked(spec, wall_distance(y)) * v.norm());
    if p.is_infinite() {
        return Ok(vals.fold(0.0, f64::max));
    }
    let s: f64 = vals.zip(&g.weights).map(|(a, w)| w * a.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// Decay rate `λ = (1-κ)α²ν + δα^{2/3}ν^{1/3}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    pub kappa: f64,
    pub delta: f64,
}

impl Default for RateSpec {
    fn default() -> Self {
        RateSpec { kappa: 0.1, delta: 0.05 }
    }
}

impl RateSpec {
    pub fn lambda(&self, alpha: f64, nu: f64) -> f64 {
        (1.0 - self.kappa) * alpha * alpha * nu + self.delta * alpha.powf(2.0 / 3.0) * nu.powf(1.0 / 3.0)
    }
}

/// `ε = α^{-1/3} ν^{1/3}`.
pub fn epsilon(alpha: f64, nu: f64) -> f64 {
    (nu / alpha).cbrt()
}

/// Slope, intercept and RMS residual of an ordinary least-squares line.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = (x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, res)
}

const MIN_FIT_SAMPLES: usize = 8;

fn check_samples(times: &[f64], values: &[f64], need_positive_t: bool) -> Result<()> {
    let good = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **v > 0.0 && v.is_finite() && (!need_positive_t || **t > 0.0))
        .count();
    if good < MIN_FIT_SAMPLES || good != values.len() || times.len() != values.len() {
        return Err(Error::BadSamples { need: MIN_FIT_SAMPLES, got: good });
    }
    Ok(())
}

/// Exponential rate fit: `values ≈ C e^{-rate·t}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateFit {
    pub rate: f64,
    pub residual: f64,
}

pub fn fit_exp_rate(times: &[f64], values: &[f64]) -> Result<RateFit> {
    check_samples(times, values, false)?;
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, _, residual) = least_squares(times, &ly);
    Ok(RateFit { rate: -slope, residual })
}

/// Log-log slope of `values` against `times`.
pub fn fit_power_slope(times: &[f64], values: &[f64]) -> Result<f64> {
    check_samples(times, values, true)?;
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    Ok(least_squares(&lx, &ly).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_rate() {
        let t: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        let fit = fit_exp_rate(&t, &v).unwrap();
        assert!((fit.rate - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bracket_power_slope() {
        let t: Vec<f64> = crate::quad::geometric_grid(50.0, 500.0, 16);
        let v: Vec<f64> = t.iter().map(|t| 1.0 / (1.0 + t * t)).collect();
        assert!((fit_power_slope(&t, &v).unwrap() + 2.0).abs() < 0.01);
    }

    #[test]
    fn too_few_or_nonpositive_samples_rejected() {
        assert!(fit_exp_rate(&[0.0, 1.0], &[1.0, 0.5]).is_err());
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let mut v = vec![1.0; 10];
        v[3] = 0.0;
        assert!(fit_exp_rate(&t, &v).is_err());
    }

    #[test]
    fn lambda_matches_definition() {
        let r = RateSpec::default();
        let l = r.lambda(2.0, 1e-3);
        assert!((l - (0.9 * 4.0 * 1e-3 + 0.05 * 2f64.powf(2.0 / 3.0) * 0.1)).abs() < 1e-15);
    }
}

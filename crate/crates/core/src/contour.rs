//! Quadrature contours in the spectral `c` plane for the inverse Laplace
//! integral `ω_b(t) = (α/2π) ∫ e^{-iαct} R_b(c) dc`, oriented with `c_r` increasing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gl16;
use crate::weights::RateSpec;
use crate::C64;

/// `|e^{-iαct}|` below this is dropped when truncating tails.
pub const TAIL_TOL: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentLabel {
    /// `c_r ∈ [-1, 1]` just below the Euler spectrum.
    E,
    Straight,
    CoPlus,
    CoMinus,
    TailPlus,
    TailMinus,
    /// Straight line used for the initial layer.
    Initial,
}

#[derive(Clone, Debug, Serialize)]
pub struct Segment {
    pub label: SegmentLabel,
    pub nodes: Vec<C64>,
    /// Quadrature weights including the direction `dc`.
    pub weights: Vec<C64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContourSpec {
    pub segments: Vec<Segment>,
    /// Height `-λ/α` of a straight contour, when that is the shape.
    pub lambda_shift: Option<f64>,
    /// Smallest time for which the truncated tails are accurate.
    pub t_min: f64,
    pub t_max: f64,
}

impl ContourSpec {
    pub fn len(&self) -> usize {
        self.segments.iter().map(|s| s.nodes.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(c, dc weight, label)` over all segments in order.
    pub fn iter(&self) -> impl Iterator<Item = (C64, C64, SegmentLabel)> + '_ {
        self.segments
            .iter()
            .flat_map(|s| s.nodes.iter().zip(&s.weights).map(move |(&c, &w)| (c, w, s.label)))
    }

    pub fn nodes(&self) -> Vec<C64> {
        self.iter().map(|x| x.0).collect()
    }

    pub fn weights(&self) -> Vec<C64> {
        self.iter().map(|x| x.1).collect()
    }

    /// Errors when `t` lies outside the range the contour was built for.
    pub fn check_time(&self, t: f64) -> Result<()> {
        if t < self.t_min * (1.0 - 1e-12) {
            return Err(Error::TimeTooSmall { t, t_min: self.t_min });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContourShape {
    /// Flat at `c_i0 = -αν - δε` for `|c_r| ≤ turn`, then straight tails at
    /// angle `angle` below the horizontal. Angles below `π/6` keep the
    /// whole-line resolvent bounded on the tails.
    Steep { angle: f64, turn: f64 },
    /// `Γ_E`, flat connection pieces to `|c_r| = 200`, then pieces of slope
    /// `slope < 1/100` out to where the exponential factor is negligible.
    Connected { slope: f64 },
    /// Horizontal line at `c_i` over `|c_r| ≤ half_width`.
    Straight { c_i: f64, half_width: f64 },
}

impl ContourShape {
    pub fn steep() -> Self {
        ContourShape::Steep { angle: PI / 8.0, turn: 1.25 }
    }
}

/// Time range a contour is built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRegime {
    /// `t ≥ 1`.
    Late,
    /// `t < 1`.
    Early,
    /// Straight line at `c_i = -λ/α`, giving `e^{-λt}` decay directly.
    Decay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YRegion {
    Core,
    Away,
}

/// The contour family prescribed for a time regime and `y` region.
pub fn regime_shape(alpha: f64, nu: f64, rate: &RateSpec, regime: TimeRegime, region: YRegion) -> ContourShape {
    let eps = (nu / alpha).cbrt();
    let half_width = 200.0;
    match (regime, region) {
        (TimeRegime::Decay, _) => ContourShape::Straight { c_i: -rate.lambda(alpha, nu) / alpha, half_width },
        (_, YRegion::Away) => ContourShape::Straight { c_i: -alpha * nu - rate.delta * eps, half_width },
        (TimeRegime::Early, YRegion::Core) => {
            ContourShape::Straight { c_i: -(1.0 - rate.kappa) * alpha * nu - rate.delta * eps, half_width }
        }
        (TimeRegime::Late, YRegion::Core) => ContourShape::Connected { slope: 1.0 / 101.0 },
    }
}

struct Sizing {
    alpha: f64,
    eps: f64,
    t_max: f64,
}

impl Sizing {
    /// Panel width at `c`: resolves `R_b` (scale `ε` near the Euler
    /// spectrum, growing with distance) and two periods of `e^{-iαc_r t}` at
    /// the largest time for which `|e^{-iαct}|` is not negligible.
    fn width(&self, c: C64) -> f64 {
        let dist = C64::new(c.re - c.re.clamp(-1.0, 1.0), c.im).norm();
        let resolve = (self.eps / 3.0).max(0.15 * dist);
        let t_eff = if c.im < 0.0 { self.t_max.min(-TAIL_TOL.ln() / (self.alpha * -c.im)) } else { self.t_max };
        if t_eff > 0.0 {
            resolve.min(4.0 * PI / (self.alpha * t_eff))
        } else {
            resolve
        }
    }

    /// Gauss panels along the straight path from `a` to `b`.
    fn path(&self, a: C64, b: C64, label: SegmentLabel) -> Segment {
        let len = (b - a).norm();
        let dir = (b - a) / len;
        let mut breaks = vec![0.0];
        let mut s = 0.0;
        while s < len {
            let h = self.width(a + dir * s).min(self.width(a + dir * (s + self.width(a + dir * s)).min(len)) * 1.5);
            s = if s + h >= len - 1e-9 * len { len } else { s + h };
            breaks.push(s);
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in breaks.windows(2) {
            for (x, w) in gl16().map(p[0], p[1]) {
                nodes.push(a + dir * x);
                weights.push(dir * w);
            }
        }
        Segment { label, nodes, weights }
    }
}

/// Contour for times in `[t_min, t_max]`.
pub fn build_contour(alpha: f64, nu: f64, shape: ContourShape, delta: f64, t_min: f64, t_max: f64) -> Result<ContourSpec> {
    if !(alpha > 0.0) || !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("need α > 0 and ν > 0, got α = {alpha}, ν = {nu}")));
    }
    if !(t_max >= t_min) {
        return Err(Error::InvalidParameter(format!("t_max = {t_max} < t_min = {t_min}")));
    }
    let eps = (nu / alpha).cbrt();
    let sz = Sizing { alpha, eps, t_max };
    let ci0 = -alpha * nu - delta * eps;
    // Depth |c_i| beyond which |e^{-iαct}| < TAIL_TOL for all t ≥ t_min.
    let depth = |t: f64| -TAIL_TOL.ln() / (alpha * t);
    let c = |re: f64, im: f64| C64::new(re, im);
    let mut segments = Vec::new();
    let mut lambda_shift = None;
    match shape {
        ContourShape::Steep { angle, turn } => {
            if !(t_min > 0.0) {
                return Err(Error::TimeTooSmall { t: t_min, t_min: f64::MIN_POSITIVE });
            }
            if !(angle > 0.0 && angle < PI / 6.0) || turn <= 1.0 {
                return Err(Error::InvalidParameter(format!("steep contour needs 0 < angle < π/6 and turn > 1, got {angle}, {turn}")));
            }
            let s_max = (depth(t_min) + ci0).max(0.0) / angle.sin() + 1.0;
            let down_r = C64::from_polar(1.0, -angle);
            let down_l = C64::from_polar(1.0, PI + angle);
            segments.push(sz.path(c(-turn, ci0) + down_l * s_max, c(-turn, ci0), SegmentLabel::TailMinus));
            segments.push(sz.path(c(-turn, ci0), c(-1.0, ci0), SegmentLabel::CoMinus));
            segments.push(sz.path(c(-1.0, ci0), c(1.0, ci0), SegmentLabel::E));
            segments.push(sz.path(c(1.0, ci0), c(turn, ci0), SegmentLabel::CoPlus));
            segments.push(sz.path(c(turn, ci0), c(turn, ci0) + down_r * s_max, SegmentLabel::TailPlus));
        }
        ContourShape::Connected { slope } => {
            if !(t_min > 0.0) {
                return Err(Error::TimeTooSmall { t: t_min, t_min: f64::MIN_POSITIVE });
            }
            if !(slope > 0.0 && slope < 0.01) {
                return Err(Error::InvalidParameter(format!("connection slope {slope} must lie in (0, 1/100)")));
            }
            let r1 = 200.0;
            let r2 = (r1 + (depth(t_min) + ci0).max(0.0) / slope).max(-1000.0 * (nu / alpha).ln());
            let ci2 = ci0 - slope * (r2 - r1);
            segments.push(sz.path(c(-r2, ci2), c(-r1, ci0), SegmentLabel::TailMinus));
            segments.push(sz.path(c(-r1, ci0), c(-1.0, ci0), SegmentLabel::CoMinus));
            segments.push(sz.path(c(-1.0, ci0), c(1.0, ci0), SegmentLabel::E));
            segments.push(sz.path(c(1.0, ci0), c(r1, ci0), SegmentLabel::CoPlus));
            segments.push(sz.path(c(r1, ci0), c(r2, ci2), SegmentLabel::TailPlus));
        }
        ContourShape::Straight { c_i, half_width } => {
            if !(half_width > 1.0) {
                return Err(Error::InvalidParameter(format!("straight contour half width {half_width} must exceed 1")));
            }
            lambda_shift = Some(c_i);
            segments.push(sz.path(c(-half_width, c_i), c(half_width, c_i), SegmentLabel::Straight));
        }
    }
    Ok(ContourSpec { segments, lambda_shift, t_min, t_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steep_contour_is_connected_and_ordered() {
        let k = build_contour(1.0, 1e-3, ContourShape::steep(), 0.05, 0.5, 50.0).unwrap();
        let labels: Vec<SegmentLabel> = k.segments.iter().map(|s| s.label).collect();
        assert_eq!(labels, [SegmentLabel::TailMinus, SegmentLabel::CoMinus, SegmentLabel::E, SegmentLabel::CoPlus, SegmentLabel::TailPlus]);
        // Total dc equals the chord from the first to the last endpoint.
        let total: C64 = k.weights().iter().sum();
        let first = k.segments[0].nodes[0];
        let last = *k.segments[4].nodes.last().unwrap();
        assert!((total - (last - first)).norm() < 1e-3 * (last - first).norm());
        // Tails reach the truncation depth.
        assert!((1.0 * last.im * 0.5).exp() < 1e-15);
    }

    #[test]
    fn straight_contour_integrates_a_polynomial() {
        let k = build_contour(2.0, 1e-4, ContourShape::Straight { c_i: -0.1, half_width: 5.0 }, 0.05, 1.0, 1.0).unwrap();
        let s: C64 = k.iter().map(|(c, w, _)| c * c * w).sum();
        let a = C64::new(-5.0, -0.1);
        let b = C64::new(5.0, -0.1);
        assert!((s - (b * b * b - a * a * a) / 3.0).norm() < 1e-10);
        assert_eq!(k.lambda_shift, Some(-0.1));
    }

    #[test]
    fn connected_contour_respects_slope_and_extent() {
        let k = build_contour(1.0, 1e-2, ContourShape::Connected { slope: 1.0 / 101.0 }, 0.05, 1.0, 2.0).unwrap();
        let tail = &k.segments[4];
        let (a, b) = (tail.nodes[0], *tail.nodes.last().unwrap());
        assert!(((a.im - b.im) / (b.re - a.re)).abs() < 0.01);
        assert!(b.re >= -1000.0 * (1e-2f64).ln() - 1.0);
    }

    #[test]
    fn steep_angle_outside_range_is_rejected() {
        assert!(build_contour(1.0, 1e-3, ContourShape::Steep { angle: PI / 4.0, turn: 1.2 }, 0.05, 1.0, 2.0).is_err());
        assert!(build_contour(1.0, 1e-3, ContourShape::steep(), 0.05, 0.0, 2.0).is_err());
    }
}

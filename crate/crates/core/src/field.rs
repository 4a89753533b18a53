//! Per-mode vorticity samples on a y-grid in `[-1, 1]`.

use std::sync::Arc;

use serde::Serialize;

use crate::quad::{chebyshev_lobatto, clenshaw_curtis, composite_nodes, GlRule};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GridKind {
    ChebyshevLobatto,
    Panels,
}

/// Quadrature grid on `[-1, 1]`.
#[derive(Clone, Debug, Serialize)]
pub struct YGrid {
    pub kind: GridKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl YGrid {
    /// `N + 1` Chebyshev–Lobatto nodes with Clenshaw–Curtis weights.
    pub fn chebyshev(n: usize) -> Arc<Self> {
        Arc::new(YGrid { kind: GridKind::ChebyshevLobatto, nodes: chebyshev_lobatto(n), weights: clenshaw_curtis(n) })
    }

    /// Composite Gauss–Legendre grid over the given breakpoints.
    pub fn panels(rule: &GlRule, breaks: &[f64]) -> Arc<Self> {
        let (nodes, weights) = composite_nodes(rule, breaks);
        Arc::new(YGrid { kind: GridKind::Panels, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes within `d` of either wall, the smaller of the two.
    pub fn nodes_near_wall(&self, d: f64) -> usize {
        let lo = self.nodes.iter().filter(|&&y| y + 1.0 <= d).count();
        let hi = self.nodes.iter().filter(|&&y| 1.0 - y <= d).count();
        lo.min(hi)
    }
}

/// One x-Fourier mode of the vorticity.
#[derive(Clone, Debug)]
pub struct ModeField {
    pub alpha: f64,
    pub grid: Arc<YGrid>,
    pub values: Vec<C64>,
}

impl ModeField {
    pub fn new(alpha: f64, grid: Arc<YGrid>, values: Vec<C64>) -> Self {
        assert_eq!(grid.len(), values.len(), "values must match the grid");
        ModeField { alpha, grid, values }
    }

    pub fn zeros(alpha: f64, grid: Arc<YGrid>) -> Self {
        let n = grid.len();
        ModeField { alpha, grid, values: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_fn<F: Fn(f64) -> C64>(alpha: f64, grid: Arc<YGrid>, f: F) -> Self {
        let values = grid.nodes.iter().map(|&y| f(y)).collect();
        ModeField { alpha, grid, values }
    }

    pub fn integrate(&self, g: impl Fn(f64) -> C64) -> C64 {
        self.grid.nodes.iter().zip(&self.grid.weights).zip(&self.values).map(|((&y, &w), &v)| g(y) * v * w).sum()
    }

    /// `∫ e^{±αy} ω dy`.
    pub fn moment(&self, sign: f64) -> C64 {
        let a = self.alpha;
        self.integrate(|y| C64::new((sign * a * y).exp(), 0.0))
    }

    pub fn l2_norm(&self) -> f64 {
        self.grid.weights.iter().zip(&self.values).map(|(w, v)| w * v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.grid.weights.iter().zip(&self.values).map(|(w, v)| w * v.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖` on a shared grid.
    pub fn rel_l2_error(&self, reference: &ModeField) -> f64 {
        assert!(Arc::ptr_eq(&self.grid, &reference.grid) || self.grid.nodes == reference.grid.nodes);
        let num: f64 = self
            .grid
            .weights
            .iter()
            .zip(self.values.iter().zip(&reference.values))
            .map(|(w, (a, b))| w * (a - b).norm_sqr())
            .sum();
        (num / reference.l2_norm().powi(2)).sqrt()
    }

    pub fn scaled(&self, s: C64) -> ModeField {
        ModeField { alpha: self.alpha, grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &ModeField) -> ModeField {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        ModeField { alpha: self.alpha, grid: self.grid.clone(), values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_exponential_match_closed_form() {
        let f = ModeField::from_fn(1.0, YGrid::chebyshev(40), |y| C64::new(y, 0.0));
        // ∫ y e^{y} dy over [-1, 1] = 2/e.
        assert!((f.moment(1.0).re - 2.0 / 1f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_grid_resolves_thin_layers() {
        let g = YGrid::chebyshev(256);
        assert!(g.nodes_near_wall(0.0368) >= 8);
    }
}

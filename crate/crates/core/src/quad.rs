//! Quadrature building blocks: Gauss–Legendre panels, in-panel
//! antiderivative weights, Chebyshev–Lobatto grids with Clenshaw–Curtis
//! weights, barycentric interpolation and Chebyshev coefficients.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::C64;

/// Points per panel used throughout the resolvent and Evans modules.
pub const PANEL_POINTS: usize = 16;

/// Gauss–Legendre rule on `[-1, 1]` with its antiderivative matrix.
#[derive(Clone, Debug)]
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `cum[j][k] = ∫_{-1}^{x_j} ℓ_k`, with `ℓ_k` the Lagrange basis.
    pub cum: Vec<Vec<f64>>,
}

fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n > 0 {
        p[1] = x;
    }
    for k in 1..n {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
    }
    p
}

impl GlRule {
    pub fn new(n: usize) -> Self {
        let n = n.max(1);
        let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 1"));
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let p_at_nodes: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(n, x)).collect();
        let mut cum = vec![vec![0.0; n]; n];
        for (j, &xj) in nodes.iter().enumerate() {
            let pj = legendre_all(n, xj);
            let mut integ = vec![0.0; n];
            integ[0] = xj + 1.0;
            for m in 1..n {
                integ[m] = (pj[m + 1] - pj[m - 1]) / (2.0 * m as f64 + 1.0);
            }
            for k in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += (2.0 * m as f64 + 1.0) * 0.5 * p_at_nodes[k][m] * integ[m];
                }
                cum[j][k] = s * weights[k];
            }
        }
        GlRule { nodes, weights, cum }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn map(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (m + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.map(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_c<F: FnMut(f64) -> C64>(&self, a: f64, b: f64, mut f: F) -> C64 {
        self.map(a, b).map(|(x, w)| f(x) * w).sum()
    }
}

/// Shared 16-point rule.
pub fn gl16() -> &'static GlRule {
    static RULE: OnceLock<GlRule> = OnceLock::new();
    RULE.get_or_init(|| GlRule::new(PANEL_POINTS))
}

/// Composite Gauss–Legendre integral over `breaks` (ascending).
pub fn composite_c<F: FnMut(f64) -> C64>(rule: &GlRule, breaks: &[f64], mut f: F) -> C64 {
    breaks.windows(2).map(|w| rule.integrate_c(w[0], w[1], &mut f)).sum()
}

/// Nodes and weights of a composite rule over `breaks`.
pub fn composite_nodes(rule: &GlRule, breaks: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(rule.len() * breaks.len());
    let mut w = Vec::with_capacity(rule.len() * breaks.len());
    for p in breaks.windows(2) {
        for (xi, wi) in rule.map(p[0], p[1]) {
            x.push(xi);
            w.push(wi);
        }
    }
    (x, w)
}

/// Breakpoints of `n` equal panels on `[a, b]`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// Chebyshev–Lobatto nodes `-cos(πj/N)`, ascending from -1 to 1.
pub fn chebyshev_lobatto(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            // Symmetric evaluation keeps the grid exactly antisymmetric.
            let t = PI * (2.0 * j as f64 - n as f64) / (2.0 * n as f64);
            t.sin()
        })
        .collect()
}

/// Clenshaw–Curtis weights for [`chebyshev_lobatto`] nodes.
pub fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    if n == 0 {
        w[0] = 2.0;
        return w;
    }
    let nf = n as f64;
    for (j, wj) in w.iter_mut().enumerate() {
        let theta = PI * j as f64 / nf;
        let mut s = 0.0;
        for k in 1..=n / 2 {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            s += b * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        *wj = c / nf * (1.0 - s);
    }
    w
}

/// Chebyshev differentiation matrix on [`chebyshev_lobatto`] nodes, row-major.
pub fn cheb_diff(n: usize) -> Vec<Vec<f64>> {
    let x = chebyshev_lobatto(n);
    let c: Vec<f64> = (0..=n)
        .map(|j| {
            let e = if j == 0 || j == n { 2.0 } else { 1.0 };
            e * if j % 2 == 0 { 1.0 } else { -1.0 }
        })
        .collect();
    let mut d = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[i][j] = c[i] / c[j] / (x[i] - x[j]);
            }
        }
        // Negative-sum trick for the diagonal.
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[i][j]).sum();
        d[i][i] = -s;
    }
    d
}

/// Barycentric interpolation from Chebyshev–Lobatto samples to `x`.
pub fn cheb_interp(values: &[C64], x: f64) -> C64 {
    let n = values.len() - 1;
    let nodes = chebyshev_lobatto(n);
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for (j, (&xj, &fj)) in nodes.iter().zip(values).enumerate() {
        let d = x - xj;
        if d == 0.0 {
            return fj;
        }
        let mut wj = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            wj *= 0.5;
        }
        num += fj * (wj / d);
        den += wj / d;
    }
    num / den
}

/// Chebyshev coefficients of the interpolant through Lobatto samples.
pub fn cheb_coeffs(values: &[C64]) -> Vec<C64> {
    let n = values.len() - 1;
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let mut s = C64::new(0.0, 0.0);
            for (j, &v) in values.iter().enumerate() {
                // Ascending nodes: y_j = -cos(πj/N) = cos(π(N-j)/N).
                let c = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += v * (c * (PI * (k * (n - j)) as f64 / nf).cos());
            }
            let ck = if k == 0 || k == n { 1.0 } else { 2.0 };
            s * (ck / nf)
        })
        .collect()
}

/// Trapezoid rule on a possibly non-uniform grid.
pub fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(xw, fw)| 0.5 * (xw[1] - xw[0]) * (fw[0] + fw[1])).sum()
}

/// Geometric grid of `n` points on `[a, b]`, `0 < a < b`.
pub fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let r = (b / a).ln();
    (0..n).map(|k| a * (r * k as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antiderivative_matrix_integrates_polynomials() {
        let r = gl16();
        let f = |x: f64| 3.0 * x * x - 2.0 * x.powi(7) + 0.5;
        let big_f = |x: f64| x.powi(3) - 0.25 * x.powi(8) + 0.5 * x;
        for (j, &xj) in r.nodes.iter().enumerate() {
            let s: f64 = (0..r.len()).map(|k| r.cum[j][k] * f(r.nodes[k])).sum();
            assert!((s - (big_f(xj) - big_f(-1.0))).abs() < 1e-13);
        }
    }

    #[test]
    fn clenshaw_curtis_is_exact_for_polynomials() {
        let n = 32;
        let x = chebyshev_lobatto(n);
        let w = clenshaw_curtis(n);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let e: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert!((e - (1f64.exp() - (-1f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn differentiation_matrix_differentiates() {
        let n = 24;
        let x = chebyshev_lobatto(n);
        let d = cheb_diff(n);
        for i in 0..=n {
            let s: f64 = (0..=n).map(|j| d[i][j] * (2.0 * x[j]).sin()).sum();
            assert!((s - 2.0 * (2.0 * x[i]).cos()).abs() < 1e-11, "row {i}");
        }
    }

    #[test]
    fn interpolation_and_coefficients_agree() {
        let n = 20;
        let x = chebyshev_lobatto(n);
        let v: Vec<C64> = x.iter().map(|&t| C64::new((3.0 * t).cos(), t * t)).collect();
        let at = cheb_interp(&v, 0.123);
        assert!((at - C64::new((0.369f64).cos(), 0.123 * 0.123)).norm() < 1e-12);
        let c = cheb_coeffs(&v);
        let tk: C64 = c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * 0.123f64.acos()).cos()).sum();
        assert!((tk - at).norm() < 1e-12);
    }
}

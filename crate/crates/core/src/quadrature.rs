//! Quadrature rules: Gauss–Legendre on intervals, the periodic trapezoid
//! rule on the circle, and the Gauss–Legendre × trapezoid product rule on
//! the 2-sphere.

use std::f64::consts::PI;

use crate::error::{check_dimension, Result};

/// Default number of points per angular dimension.
pub const DEFAULT_ORDER: usize = 64;

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order > 0, "Gauss–Legendre order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for k in 0..m {
        // Tricomi initial guess, then Newton on P_order.
        let mut x = (PI * (k as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[order - 1 - k] = x;
        weights[k] = w;
        weights[order - 1 - k] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if order == 0 {
        return (1.0, 0.0);
    }
    for l in 2..=order {
        let lf = l as f64;
        let p2 = ((2.0 * lf - 1.0) * x * p1 - (lf - 1.0) * p0) / lf;
        p0 = p1;
        p1 = p2;
    }
    let nf = order as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped onto [a, b].
pub fn gauss_legendre_interval(order: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|xi| mid + half * xi).collect(),
        w.iter().map(|wi| half * wi).collect(),
    )
}

/// Equispaced trapezoid nodes on [0, 2π) with equal weights 2π/m.
pub fn trapezoid_circle(m: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * PI / m as f64;
    ((0..m).map(|j| j as f64 * h).collect(), h)
}

/// A node on the unit sphere S^{n-1}, with its angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereNode {
    /// Polar angle θ (n = 2: the circle angle; n = 3: colatitude).
    pub theta: f64,
    /// Azimuth φ (always 0 for n = 2).
    pub phi: f64,
    /// Cartesian unit vector; the third component is 0 for n = 2.
    pub direction: [f64; 3],
    pub weight: f64,
}

/// Product quadrature on the unit sphere. Weights sum to |S^{n-1}|.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub n: usize,
    pub order: usize,
    pub nodes: Vec<SphereNode>,
}

impl SphereRule {
    /// n = 2: `order` trapezoid points; n = 3: `order` Gauss–Legendre points
    /// in cos θ times `2 * order` trapezoid points in φ.
    pub fn new(n: usize, order: usize) -> Result<Self> {
        check_dimension(n)?;
        let mut nodes = Vec::new();
        if n == 2 {
            let (thetas, w) = trapezoid_circle(order);
            for theta in thetas {
                nodes.push(SphereNode {
                    theta,
                    phi: 0.0,
                    direction: [theta.cos(), theta.sin(), 0.0],
                    weight: w,
                });
            }
        } else {
            let (xs, ws) = gauss_legendre(order);
            let (phis, wphi) = trapezoid_circle(2 * order);
            for (x, wx) in xs.iter().zip(&ws) {
                let theta = x.acos();
                let st = theta.sin();
                for &phi in &phis {
                    nodes.push(SphereNode {
                        theta,
                        phi,
                        direction: [st * phi.cos(), st * phi.sin(), *x],
                        weight: wx * wphi,
                    });
                }
            }
        }
        Ok(Self { n, order, nodes })
    }

    /// Same rule with the order taken from `RSV_QUAD_ORDER` when set.
    pub fn with_env_order(n: usize, fallback: usize) -> Result<Self> {
        Self::new(n, env_quad_order().unwrap_or(fallback))
    }

    /// ∫_{S^{n-1}} f dσ.
    pub fn integrate<F: FnMut(&SphereNode) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().map(|node| node.weight * f(node)).sum()
    }
}

/// Quadrature order override from the `RSV_QUAD_ORDER` environment variable.
pub fn env_quad_order() -> Option<usize> {
    std::env::var("RSV_QUAD_ORDER")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&k: &usize| k >= 4)
}

/// |S^{n-1}|: 2π for the circle, 4π for the 2-sphere.
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}

/// |∂B_R| = |S^{n-1}| R^{n-1}.
pub fn sphere_area(n: usize, radius: f64) -> f64 {
    unit_sphere_area(n) * radius.powi(n as i32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        for p in 0..20 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-14, "p = {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn interval_rule_has_correct_length() {
        let (_, w) = gauss_legendre_interval(256, 0.0, 3.0);
        assert!((w.iter().sum::<f64>() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_rule_weights_sum_to_area() {
        for n in [2, 3] {
            let rule = SphereRule::new(n, 16).unwrap();
            let total = rule.integrate(|_| 1.0);
            assert!((total - unit_sphere_area(n)).abs() < 1e-13);
        }
    }

    #[test]
    fn sphere_rule_second_moment() {
        let rule = SphereRule::new(3, 12).unwrap();
        let zz = rule.integrate(|p| p.direction[2] * p.direction[2]);
        assert!((zz - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_dimension_four() {
        assert!(SphereRule::new(4, 8).is_err());
    }
}

//! Star-shaped perturbed balls `r(θ, t) = R + tN(θ) + t²/2 W(θ)`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::field::PerturbationField;
use crate::error::{check_dimension, Error, Result};
use crate::quadrature::{SphereNode, SphereRule, DEFAULT_ORDER};
use crate::special::harmonics::HarmonicExpansion;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarDomain {
    pub n: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "N")]
    pub normal: HarmonicExpansion,
    #[serde(rename = "W")]
    pub second: HarmonicExpansion,
    pub t: f64,
}

/// Position, outward unit normal and the ratio dS/dσ at one boundary node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub radius: f64,
    pub area_factor: f64,
}

impl StarDomain {
    pub fn new(
        n: usize,
        radius: f64,
        normal: HarmonicExpansion,
        second: HarmonicExpansion,
        t: f64,
    ) -> Result<Self> {
        check_dimension(n)?;
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter { name: "R", reason: format!("must be positive, got {radius}") });
        }
        if normal.n != n || second.n != n {
            return Err(Error::InvalidParameter {
                name: "N/W",
                reason: "expansion dimension does not match the domain".into(),
            });
        }
        let d = Self { n, radius, normal, second, t };
        let min_radius = d.min_radius(d.check_order());
        if !(min_radius > 0.0) {
            return Err(Error::NotStarShaped { min_radius });
        }
        Ok(d)
    }

    /// The unperturbed ball.
    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::new(n, radius, HarmonicExpansion::zero(n), HarmonicExpansion::zero(n), 0.0)
    }

    pub fn from_field(field: &PerturbationField, t: f64) -> Result<Self> {
        Self::new(field.n, field.radius, field.normal.clone(), field.second.clone(), t)
    }

    pub fn max_degree(&self) -> usize {
        self.normal.max_degree().max(self.second.max_degree())
    }

    /// Quadrature order adequate for integrands built from r, resolving
    /// polynomials of degree about n·max_degree in the harmonics.
    pub fn default_order(&self) -> usize {
        let k = self.max_degree();
        match self.n {
            2 => (4 * DEFAULT_ORDER).max(16 * (k + 1)),
            _ => DEFAULT_ORDER.max(3 * (k + 1) + 8),
        }
    }

    fn check_order(&self) -> usize {
        match self.n {
            2 => 512.max(16 * (self.max_degree() + 1)),
            _ => 48.max(4 * (self.max_degree() + 1)),
        }
    }

    pub fn min_radius(&self, order: usize) -> f64 {
        let rule = SphereRule::new(self.n, order).expect("dimension validated");
        rule.nodes
            .iter()
            .map(|node| self.radius_at(node.theta, node.phi))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn radius_at(&self, theta: f64, phi: f64) -> f64 {
        self.radius
            + self.t * self.normal.value_at(theta, phi)
            + 0.5 * self.t * self.t * self.second.value_at(theta, phi)
    }

    /// r and its tangential gradient ∇*r on the unit sphere.
    pub fn radius_and_gradient(&self, theta: f64, phi: f64) -> (f64, Vector3<f64>) {
        let (n_val, n_grad) = self.normal.value_and_gradient_at(theta, phi);
        let (w_val, w_grad) = self.second.value_and_gradient_at(theta, phi);
        let a = self.t;
        let b = 0.5 * self.t * self.t;
        let r = self.radius + a * n_val + b * w_val;
        (r, a * Vector3::from(n_grad) + b * Vector3::from(w_grad))
    }

    pub fn boundary_point(&self, node: &SphereNode) -> BoundaryPoint {
        let dir = Vector3::from(node.direction);
        let (r, grad) = self.radius_and_gradient(node.theta, node.phi);
        let stretch = (r * r + grad.norm_squared()).sqrt();
        BoundaryPoint {
            point: r * dir,
            normal: (r * dir - grad) / stretch,
            radius: r,
            area_factor: r.powi(self.n as i32 - 2) * stretch,
        }
    }

    pub fn volume_with_order(&self, order: usize) -> Result<f64> {
        let rule = SphereRule::new(self.n, order)?;
        let n = self.n as i32;
        Ok(rule.integrate(|node| self.radius_at(node.theta, node.phi).powi(n)) / self.n as f64)
    }

    pub fn surface_area_with_order(&self, order: usize) -> Result<f64> {
        let rule = SphereRule::new(self.n, order)?;
        Ok(rule.integrate(|node| self.boundary_point(node).area_factor))
    }
}

/// |Ω_t| = (1/n) ∮ r(θ, t)ⁿ dσ.
pub fn exact_volume(d: &StarDomain) -> Result<f64> {
    d.volume_with_order(d.default_order())
}

/// |∂Ω_t| = ∮ r^{n-2} (r² + |∇*r|²)^{1/2} dσ.
pub fn exact_surface_area(d: &StarDomain) -> Result<f64> {
    d.surface_area_with_order(d.default_order())
}

//! Perturbation fields: boundary normal data in harmonic form, and closed-form
//! ambient vector fields with Jacobians.
//!
//! Ambient fields live in R³; for n = 2 the third component is identically 0
//! and only the upper-left 2×2 block of the Jacobian is meaningful.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{check_dimension, Error, Result};
use crate::quadrature::{unit_sphere_area, SphereRule};
use crate::special::harmonics::{angles_of, spherical_harmonic_with_gradient, HarmonicExpansion};

/// A smooth vector field on a neighbourhood of the closed ball.
pub trait AmbientField: Debug + Send + Sync {
    fn value(&self, x: &Vector3<f64>) -> Vector3<f64>;

    /// `(D_v)_{ij} = ∂_j v_i`.
    fn jacobian(&self, x: &Vector3<f64>) -> Matrix3<f64>;

    fn divergence(&self, x: &Vector3<f64>) -> f64 {
        self.jacobian(x).trace()
    }
}

/// Largest deviation between the analytic Jacobian and centred differences of
/// `value`, relative to `max(1, |D_v|_max)`.
pub fn jacobian_self_test(field: &dyn AmbientField, n: usize, x: &Vector3<f64>, h: f64) -> f64 {
    let exact = field.jacobian(x);
    let scale = exact.amax().max(1.0);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mut e = Vector3::zeros();
        e[j] = h;
        let column = (field.value(&(x + e)) - field.value(&(x - e))) / (2.0 * h);
        for i in 0..n {
            worst = worst.max((column[i] - exact[(i, j)]).abs() / scale);
        }
    }
    worst
}

/// Identity on the first n coordinates.
pub fn ambient_identity(n: usize) -> Matrix3<f64> {
    let mut m = Matrix3::identity();
    if n == 2 {
        m[(2, 2)] = 0.0;
    }
    m
}

/// `P = I - ν νᵀ` restricted to R^n.
pub fn tangent_projector(n: usize, normal: &Vector3<f64>) -> Matrix3<f64> {
    ambient_identity(n) - normal * normal.transpose()
}

/// Affine field `v(x) = M x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearField {
    pub matrix: Matrix3<f64>,
    pub offset: Vector3<f64>,
}

impl LinearField {
    pub fn zero() -> Self {
        Self { matrix: Matrix3::zeros(), offset: Vector3::zeros() }
    }

    /// The constant field e_axis.
    pub fn translation(axis: usize) -> Self {
        let mut offset = Vector3::zeros();
        offset[axis] = 1.0;
        Self { matrix: Matrix3::zeros(), offset }
    }

    /// `(-x₂, x₁, 0)`: infinitesimal rotation in the x₁x₂-plane.
    pub fn rotation() -> Self {
        let mut m = Matrix3::zeros();
        m[(0, 1)] = -1.0;
        m[(1, 0)] = 1.0;
        Self { matrix: m, offset: Vector3::zeros() }
    }

    /// `(-x₁, -x₂, 0)`: the t² term of the exact rotation, so that
    /// `x + t·rotation + t²/2·rotation_second_order` matches R(t)x to o(t²).
    pub fn rotation_second_order() -> Self {
        let mut m = Matrix3::zeros();
        m[(0, 0)] = -1.0;
        m[(1, 1)] = -1.0;
        Self { matrix: m, offset: Vector3::zeros() }
    }

    /// `v(x) = x`.
    pub fn dilation(n: usize) -> Self {
        Self { matrix: ambient_identity(n), offset: Vector3::zeros() }
    }
}

impl AmbientField for LinearField {
    fn value(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * x + self.offset
    }

    fn jacobian(&self, _x: &Vector3<f64>) -> Matrix3<f64> {
        self.matrix
    }
}

/// Harmonic-homogeneous radial extension of boundary data N:
/// `v(x) = Σ_s (|x|/R)^s N_s(x/|x|) · x/|x|`, with N_s the degree-s part.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialExtension {
    pub n: usize,
    pub radius: f64,
    pub profile: HarmonicExpansion,
}

impl RadialExtension {
    pub fn new(n: usize, radius: f64, profile: HarmonicExpansion) -> Result<Self> {
        check_dimension(n)?;
        if profile.n != n {
            return Err(Error::InvalidParameter {
                name: "profile",
                reason: format!("expansion is for n = {}, field for n = {n}", profile.n),
            });
        }
        Ok(Self { n, radius, profile })
    }

    /// f(x) and ∇f(x) for the scalar `f = Σ_s (ρ/R)^s N_s(x̂)`.
    fn scalar(&self, x: &Vector3<f64>) -> (f64, Vector3<f64>, f64, Vector3<f64>) {
        let rho = x.norm();
        let dir = x / rho;
        let mut f = 0.0;
        let mut grad = Vector3::zeros();
        for ((s, i), c) in self.profile.terms() {
            let (y, gy) = spherical_harmonic_with_gradient(self.n, s, i, dir.as_slice())
                .expect("profile indices are validated on insertion");
            let scale = c * (rho / self.radius).powi(s as i32);
            f += scale * y;
            grad += scale / rho * (s as f64 * y * dir + Vector3::from(gy));
        }
        (f, grad, rho, dir)
    }
}

impl AmbientField for RadialExtension {
    fn value(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let (f, _, _, dir) = self.scalar(x);
        f * dir
    }

    fn jacobian(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let (f, grad, rho, dir) = self.scalar(x);
        dir * grad.transpose() + f / rho * tangent_projector(self.n, &dir)
    }
}

/// Linear combination Σ aₖ vₖ of ambient fields.
#[derive(Debug, Clone, Default)]
pub struct CombinedField {
    pub terms: Vec<(f64, Arc<dyn AmbientField>)>,
}

impl CombinedField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, weight: f64, field: Arc<dyn AmbientField>) -> Self {
        self.terms.push((weight, field));
        self
    }
}

impl AmbientField for CombinedField {
    fn value(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.terms.iter().map(|(a, f)| *a * f.value(x)).sum()
    }

    fn jacobian(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        self.terms.iter().map(|(a, f)| *a * f.jacobian(x)).sum()
    }
}

/// The pair (v, w) of an ambient perturbation `y = x + t v + t²/2 w`.
#[derive(Debug, Clone)]
pub struct AmbientPair {
    pub v: Arc<dyn AmbientField>,
    pub w: Arc<dyn AmbientField>,
}

impl AmbientPair {
    pub fn new(v: Arc<dyn AmbientField>, w: Arc<dyn AmbientField>) -> Self {
        Self { v, w }
    }
}

/// Boundary perturbation of B_R in Hadamard form: `N = v·ν` and `W = w·ν`
/// as harmonic expansions on the unit sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "FieldRepr", try_from = "FieldRepr")]
pub struct PerturbationField {
    pub n: usize,
    pub radius: f64,
    pub normal: HarmonicExpansion,
    pub second: HarmonicExpansion,
    pub ambient: Option<AmbientPair>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    n: usize,
    #[serde(rename = "R")]
    radius: f64,
    #[serde(rename = "N")]
    normal: Vec<(usize, usize, f64)>,
    #[serde(rename = "W", default)]
    second: Vec<(usize, usize, f64)>,
}

impl From<PerturbationField> for FieldRepr {
    fn from(p: PerturbationField) -> Self {
        Self {
            n: p.n,
            radius: p.radius,
            normal: p.normal.term_list(),
            second: p.second.term_list(),
        }
    }
}

impl TryFrom<FieldRepr> for PerturbationField {
    type Error = Error;
    fn try_from(r: FieldRepr) -> Result<Self> {
        let normal = HarmonicExpansion::from_terms(r.n, &r.normal)?;
        let second = HarmonicExpansion::from_terms(r.n, &r.second)?;
        Self::new(r.n, r.radius, normal, second)
    }
}

impl PerturbationField {
    pub fn new(
        n: usize,
        radius: f64,
        normal: HarmonicExpansion,
        second: HarmonicExpansion,
    ) -> Result<Self> {
        check_dimension(n)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter { name: "R", reason: format!("must be positive, got {radius}") });
        }
        if normal.n != n || second.n != n {
            return Err(Error::InvalidParameter {
                name: "N/W",
                reason: "expansion dimension does not match the field".into(),
            });
        }
        Ok(Self { n, radius, normal, second, ambient: None })
    }

    /// `y = x + t N ν` with W = 0.
    pub fn hadamard(n: usize, radius: f64, normal: HarmonicExpansion) -> Result<Self> {
        Self::new(n, radius, normal, HarmonicExpansion::zero(n))
    }

    /// Mean removed from N and the constant second-order correction for W.
    pub fn volume_preserving(n: usize, radius: f64, normal: HarmonicExpansion) -> Result<Self> {
        let normal = super::project_zero_mean(&normal);
        let second = super::second_order_volume_correction(&normal, n, radius);
        Self::new(n, radius, normal, second)
    }

    /// Normal data of an ambient pair, projected on harmonics up to
    /// `max_degree` with a sphere rule of the given order.
    pub fn from_ambient(
        n: usize,
        radius: f64,
        pair: AmbientPair,
        max_degree: usize,
        order: usize,
    ) -> Result<Self> {
        check_dimension(n)?;
        let rule = SphereRule::new(n, order)?;
        let normal_of = |field: &Arc<dyn AmbientField>| {
            HarmonicExpansion::project(n, max_degree, &rule.nodes, |node| {
                let nu = Vector3::from(node.direction);
                field.value(&(radius * nu)).dot(&nu)
            })
        };
        let normal = normal_of(&pair.v)?;
        let second = normal_of(&pair.w)?;
        let mut p = Self::new(n, radius, normal, second)?;
        p.ambient = Some(pair);
        Ok(p)
    }

    pub fn with_ambient(mut self, pair: AmbientPair) -> Self {
        self.ambient = Some(pair);
        self
    }

    /// ∮_{∂B_R} N dS.
    pub fn normal_flux(&self) -> f64 {
        self.normal.mean() * unit_sphere_area(self.n) * self.radius.powi(self.n as i32 - 1)
    }

    pub fn is_first_order_volume_preserving(&self, tol: f64) -> bool {
        self.normal.coefficient(0, 0).abs() <= tol
    }

    /// V̈(0) of the star domain r = R + tN + t²W/2:
    /// ∮ ((n-1) R^{n-2} N² + R^{n-1} W) dσ.
    pub fn second_order_volume_defect(&self) -> f64 {
        let n = self.n as i32;
        let r = self.radius;
        (self.n as f64 - 1.0) * r.powi(n - 2) * self.normal.norm_squared()
            + r.powi(n - 1) * self.second.mean() * unit_sphere_area(self.n)
    }

    /// Ambient realization `v = radial extension of N`, `w = radial extension of W`.
    pub fn radial_ambient(&self) -> Result<AmbientPair> {
        let v = RadialExtension::new(self.n, self.radius, self.normal.clone())?;
        let w = RadialExtension::new(self.n, self.radius, self.second.clone())?;
        Ok(AmbientPair::new(Arc::new(v), Arc::new(w)))
    }

    /// The stored ambient pair, or the radial extension of (N, W).
    pub fn ambient_or_radial(&self) -> Result<AmbientPair> {
        match &self.ambient {
            Some(pair) => Ok(pair.clone()),
            None => self.radial_ambient(),
        }
    }

    /// N at a unit direction.
    pub fn normal_at(&self, direction: &[f64]) -> f64 {
        let (t, p) = angles_of(self.n, direction);
        self.normal.value_at(t, p)
    }
}

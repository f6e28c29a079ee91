//! The Steklov problem Δφ + g'(u)φ = 0 in B_R, ∂_νφ + αφ = μφ on ∂B_R,
//! and the shape derivative u′ expanded in its eigenfunctions.
//!
//! Eigenfunctions are φ_{s,i}(r, θ) = (a_s(r)/a_s(R)) Y_{s,i}(θ) R^{-(n-1)/2},
//! orthonormal in L²(∂B_R).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_interval, SphereRule};
use crate::radial::{k_g, BallProblem, ProblemKind, RadialSolution};
use crate::special::bessel::bessel_j_scaled;
use crate::special::harmonics::{multiplicity, spherical_harmonic_with_gradient, HarmonicExpansion};

/// Tolerance below which a Steklov eigenvalue counts as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteklovEntry {
    pub degree: usize,
    pub mu: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteklovSpectrum {
    pub problem: BallProblem,
    pub lambda: f64,
    pub entries: Vec<SteklovEntry>,
}

impl SteklovSpectrum {
    pub fn max_degree(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn mu(&self, s: usize) -> Option<f64> {
        self.entries.get(s).map(|e| e.mu)
    }

    /// Unnormalized radial factor a_s(r) and a_s′(r).
    /// Torsion: r^s. Eigenvalue: r^s · (kr)^{-(s+ν)} J_{s+ν}(kr) with k = √λ, ν = (n-2)/2.
    pub fn radial_factor(&self, s: usize, r: f64) -> (f64, f64) {
        radial_factor(self.problem.kind, self.problem.n, self.lambda, s, r)
    }

    /// a_s(r)/a_s(R) and its r-derivative.
    pub fn normalized_radial_factor(&self, s: usize, r: f64) -> (f64, f64) {
        let (a, da) = self.radial_factor(s, r);
        let (ar, _) = self.radial_factor(s, self.problem.radius);
        (a / ar, da / ar)
    }

    /// Smallest μ_s > 0 over degrees s ≥ min_degree.
    pub fn smallest_positive(&self, min_degree: usize) -> Option<(usize, f64)> {
        self.entries
            .iter()
            .filter(|e| e.degree >= min_degree && e.mu > ZERO_EIGENVALUE_TOL)
            .map(|e| (e.degree, e.mu))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Tab-separated `degree mu multiplicity` table with a header row.
    pub fn to_table(&self) -> String {
        let mut out = String::from("degree\tmu\tmultiplicity\n");
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{:.17e}\t{}", e.degree, e.mu, e.multiplicity);
        }
        out
    }
}

pub(crate) fn radial_factor(kind: ProblemKind, n: usize, lambda: f64, s: usize, r: f64) -> (f64, f64) {
    let sf = s as f64;
    let rs1 = if s == 0 { 0.0 } else { sf * r.powi(s as i32 - 1) };
    match kind {
        ProblemKind::Torsion => (r.powi(s as i32), rs1),
        _ => {
            let k2 = lambda;
            let k = lambda.sqrt();
            let order = sf + (n as f64 - 2.0) / 2.0;
            let z = k * r;
            let b0 = bessel_j_scaled(order, z).expect("supported order");
            let b1 = bessel_j_scaled(order + 1.0, z).expect("supported order");
            (r.powi(s as i32) * b0, rs1 * b0 - k2 * r.powi(s as i32 + 1) * b1)
        }
    }
}

/// μ_s for s = 0..=max_degree.
/// Torsion: α + s/R. Eigenvalue: α + a_s′(R)/a_s(R).
pub fn steklov_spectrum(p: &BallProblem, sol: &RadialSolution, max_degree: usize) -> Result<SteklovSpectrum> {
    if p.kind == ProblemKind::DirichletEigen {
        return Err(Error::WrongKind { expected: "torsion or robin-eigen", got: p.kind.name() });
    }
    let mut entries = Vec::with_capacity(max_degree + 1);
    for s in 0..=max_degree {
        let mu = match p.kind {
            ProblemKind::Torsion => p.alpha + s as f64 / p.radius,
            _ => {
                let (a, da) = radial_factor(p.kind, p.n, sol.lambda, s, p.radius);
                let (a_mid, _) = radial_factor(p.kind, p.n, sol.lambda, s, 0.5 * p.radius);
                if a.abs() <= 1e-12 * a_mid.abs().max(f64::MIN_POSITIVE) {
                    return Err(Error::DegenerateSteklov { degree: s });
                }
                p.alpha + da / a
            }
        };
        entries.push(SteklovEntry { degree: s, mu, multiplicity: multiplicity(s, p.n) });
    }
    Ok(SteklovSpectrum { problem: *p, lambda: sol.lambda, entries })
}

/// u′ = Σ c_{s,i} φ_{s,i}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeDerivativeField {
    pub spectrum: SteklovSpectrum,
    pub k_g: f64,
    /// c_{s,i}; the s = 0 entry is always absent. Serialized as [s, i, c] triples.
    #[serde(serialize_with = "serialize_triples")]
    pub coefficients: BTreeMap<(usize, usize), f64>,
}

fn serialize_triples<S: serde::Serializer>(
    map: &BTreeMap<(usize, usize), f64>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_seq(map.iter().map(|(&(s, i), &c)| (s, i, c)))
}

impl ShapeDerivativeField {
    fn boundary_scale(&self) -> f64 {
        self.spectrum.problem.radius.powf(-(self.spectrum.problem.n as f64 - 1.0) / 2.0)
    }

    /// u′ and ∇u′ at x (Cartesian).
    pub fn value_and_gradient(&self, x: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let n = self.spectrum.problem.n;
        let r = x.norm();
        let dir = if r > 0.0 { x / r } else { Vector3::new(1.0, 0.0, 0.0) };
        let scale = self.boundary_scale();
        let mut value = 0.0;
        let mut grad = Vector3::zeros();
        for (&(s, i), &c) in &self.coefficients {
            let (y, gy) = spherical_harmonic_with_gradient(n, s, i, dir.as_slice()).expect("validated index");
            let (a, da) = self.spectrum.normalized_radial_factor(s, r);
            value += c * scale * a * y;
            // ∇(a(r)Y(x̂)) = a′ Y x̂ + (a/r) ∇*Y; a/r is bounded since a ~ r^s, s ≥ 1.
            let a_over_r = if r > 0.0 { a / r } else { self.spectrum.normalized_radial_factor(s, 1e-300).1 };
            grad += c * scale * (da * y * dir + a_over_r * Vector3::from(gy));
        }
        (value, grad)
    }

    /// u′ and ∂_ν u′ on ∂B_R at a unit direction.
    pub fn boundary_trace(&self, direction: &Vector3<f64>) -> (f64, f64) {
        let r = self.spectrum.problem.radius;
        let (v, g) = self.value_and_gradient(&(r * direction));
        (v, g.dot(direction))
    }

    /// ∂_ν u′ + αu′ on ∂B_R: Σ c μ_s φ_{s,i}.
    pub fn robin_trace(&self, direction: &Vector3<f64>) -> f64 {
        let n = self.spectrum.problem.n;
        let scale = self.boundary_scale();
        self.coefficients
            .iter()
            .map(|(&(s, i), &c)| {
                let (y, _) = spherical_harmonic_with_gradient(n, s, i, direction.as_slice()).expect("validated index");
                c * self.spectrum.entries[s].mu * scale * y
            })
            .sum()
    }

    /// max over boundary nodes of |∂_ν u′ + αu′ - k_g N|, with ∂_ν u′
    /// taken from the gradient evaluator.
    pub fn boundary_residual(&self, normal: &HarmonicExpansion, order: usize) -> Result<f64> {
        let p = &self.spectrum.problem;
        let rule = SphereRule::new(p.n, order)?;
        let mut worst: f64 = 0.0;
        for node in &rule.nodes {
            let dir = Vector3::from(node.direction);
            let (v, dn) = self.boundary_trace(&dir);
            let target = self.k_g * normal.value_at(node.theta, node.phi);
            worst = worst.max((dn + p.alpha * v - target).abs());
        }
        Ok(worst)
    }

    /// ∫|∇u′|² - ∫g′(u)u′² + α∮u′² by radial Gauss–Legendre × sphere quadrature.
    pub fn quadratic_form_by_quadrature(&self, radial_nodes: usize, order: usize) -> Result<f64> {
        let p = &self.spectrum.problem;
        let rule = SphereRule::new(p.n, order)?;
        let (rs, ws) = gauss_legendre_interval(radial_nodes, 0.0, p.radius);
        let g_prime = match p.kind {
            ProblemKind::Torsion => 0.0,
            _ => self.spectrum.lambda,
        };
        let mut bulk = 0.0;
        for (r, wr) in rs.iter().zip(&ws) {
            let jac = r.powi(p.n as i32 - 1);
            for node in &rule.nodes {
                let x = *r * Vector3::from(node.direction);
                let (v, g) = self.value_and_gradient(&x);
                bulk += wr * jac * node.weight * (g.norm_squared() - g_prime * v * v);
            }
        }
        let ds = p.radius.powi(p.n as i32 - 1);
        let boundary = p.alpha
            * ds
            * rule.integrate(|node| self.boundary_trace(&Vector3::from(node.direction)).0.powi(2));
        Ok(bulk + boundary)
    }

    /// ∮(∂_ν u′ + αu′) u′ dS by quadrature.
    pub fn boundary_pairing(&self, order: usize) -> Result<f64> {
        let p = &self.spectrum.problem;
        let rule = SphereRule::new(p.n, order)?;
        let ds = p.radius.powi(p.n as i32 - 1);
        Ok(ds * rule.integrate(|node| {
            let dir = Vector3::from(node.direction);
            let (v, dn) = self.boundary_trace(&dir);
            (dn + p.alpha * v) * v
        }))
    }
}

/// Relative tolerance used to decide that N has no s = 0 component.
pub const MEAN_FREE_TOL: f64 = 1e-12;

pub(crate) fn check_mean_free(normal: &HarmonicExpansion) -> Result<()> {
    let c0 = normal.coefficient(0, 0);
    if c0.abs() > MEAN_FREE_TOL * normal.norm_squared().sqrt().max(1.0) {
        return Err(Error::NotMeanFree(c0));
    }
    Ok(())
}

/// Solves Δu′ + g′(u)u′ = 0, ∂_νu′ + αu′ = k_g N:
/// c_{s,i} = k_g b_{s,i}/μ_s with b the coefficients of N in the φ basis,
/// and c = 0 at s = 0.
pub fn shape_derivative_uprime(
    p: &BallProblem,
    sol: &RadialSolution,
    spectrum: &SteklovSpectrum,
    normal: &HarmonicExpansion,
) -> Result<ShapeDerivativeField> {
    check_mean_free(normal)?;
    if normal.max_degree() > spectrum.max_degree() {
        return Err(Error::InvalidParameter {
            name: "max_degree",
            reason: format!(
                "spectrum stops at degree {}, N reaches degree {}",
                spectrum.max_degree(),
                normal.max_degree()
            ),
        });
    }
    let kg = k_g(p, sol)?;
    let to_b = p.radius.powf((p.n as f64 - 1.0) / 2.0);
    let mut coefficients = BTreeMap::new();
    for ((s, i), coef) in normal.terms() {
        if s == 0 || coef == 0.0 {
            continue;
        }
        let mu = spectrum.entries[s].mu;
        if mu.abs() <= ZERO_EIGENVALUE_TOL {
            return Err(Error::SingularShapeDerivative { degree: s, mu });
        }
        coefficients.insert((s, i), kg * coef * to_b / mu);
    }
    Ok(ShapeDerivativeField { spectrum: spectrum.clone(), k_g: kg, coefficients })
}

/// Q_g(u′) = Σ_{s≥1} c²_{s,i} μ_s.
pub fn quadratic_form_q(spectrum: &SteklovSpectrum, field: &ShapeDerivativeField) -> f64 {
    field
        .coefficients
        .iter()
        .map(|(&(s, _), &c)| c * c * spectrum.entries[s].mu)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn torsion() -> (BallProblem, RadialSolution) {
        let p = BallProblem::torsion(2, 1.0, 1.0).unwrap();
        let s = p.solve().unwrap();
        (p, s)
    }

    #[test]
    fn torsion_spectrum() {
        let (p, s) = torsion();
        let sp = steklov_spectrum(&p, &s, 4).unwrap();
        let mus: Vec<f64> = sp.entries.iter().map(|e| e.mu).collect();
        assert_eq!(mus, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(sp.entries[1].multiplicity, 2);
        assert!(sp.to_table().starts_with("degree\tmu\tmultiplicity\n0\t1.00000000000000000e0\t1\n"));
    }

    #[test]
    fn torsion_uprime_cos2() {
        let (p, s) = torsion();
        let sp = steklov_spectrum(&p, &s, 4).unwrap();
        let n = HarmonicExpansion::single(2, 2, 0, PI.sqrt()).unwrap();
        let up = shape_derivative_uprime(&p, &s, &sp, &n).unwrap();
        let th: f64 = 0.3;
        let x = Vector3::new(0.5 * th.cos(), 0.5 * th.sin(), 0.0);
        let (v, _) = up.value_and_gradient(&x);
        assert!((v - 0.25 / 3.0 * (2.0 * th).cos()).abs() < 1e-15);
        assert!(up.boundary_residual(&n, 64).unwrap() < 1e-13);
        assert!((quadratic_form_q(&sp, &up) - PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn torsion_uprime_cos1() {
        let (p, s) = torsion();
        let sp = steklov_spectrum(&p, &s, 2).unwrap();
        let n = HarmonicExpansion::single(2, 1, 0, PI.sqrt()).unwrap();
        let up = shape_derivative_uprime(&p, &s, &sp, &n).unwrap();
        let (v, _) = up.value_and_gradient(&Vector3::new(0.8, 0.0, 0.0));
        assert!((v - 0.4).abs() < 1e-15);
        assert!((quadratic_form_q(&sp, &up) - PI / 2.0).abs() < 1e-14);
        let mut m = n.clone();
        m.add_term(0, 0, 1.0).unwrap();
        assert!(matches!(shape_derivative_uprime(&p, &s, &sp, &m), Err(Error::NotMeanFree(_))));
    }

    #[test]
    fn serializes_to_json() {
        let (p, s) = torsion();
        let sp = steklov_spectrum(&p, &s, 2).unwrap();
        let n = HarmonicExpansion::single(2, 2, 0, 1.0).unwrap();
        let up = shape_derivative_uprime(&p, &s, &sp, &n).unwrap();
        let text = serde_json::to_string(&up).unwrap();
        assert!(text.contains(r#""coefficients":[[2,0,0.3333333333333333]]"#), "{text}");
    }

    #[test]
    fn robin_eigen_zero_mode_and_l_identity() {
        let p = BallProblem::robin_eigen(2, 1.0, 1.0).unwrap();
        let s = p.solve().unwrap();
        let sp = steklov_spectrum(&p, &s, 6).unwrap();
        assert!(sp.entries[0].mu.abs() < 1e-10);
        let l = sp.entries[1].mu - p.alpha + (p.n as f64 - 1.0) / p.radius - s.lambda / p.alpha;
        assert!(l.abs() < 1e-10, "L = {l}");
        for w in sp.entries.windows(2) {
            assert!(w[1].mu > w[0].mu);
        }
    }

    #[test]
    fn quadrature_definition_of_q() {
        for p in [BallProblem::torsion(3, 1.5, 0.7).unwrap(), BallProblem::robin_eigen(2, 1.0, 2.0).unwrap()] {
            let s = p.solve().unwrap();
            let sp = steklov_spectrum(&p, &s, 5).unwrap();
            let n = HarmonicExpansion::from_terms(p.n, &[(2, 1, 0.8), (3, 0, -0.4), (5, 1, 0.3)]).unwrap();
            let up = shape_derivative_uprime(&p, &s, &sp, &n).unwrap();
            let q = quadratic_form_q(&sp, &up);
            let qq = up.quadratic_form_by_quadrature(64, 24).unwrap();
            assert!((q - qq).abs() < 1e-8 * q.abs().max(1.0), "{q} vs {qq}");
            let pairing = up.boundary_pairing(24).unwrap();
            assert!((q - pairing).abs() < 1e-8 * q.abs().max(1.0));
            assert!(up.boundary_residual(&n, 24).unwrap() < 1e-10);
        }
    }
}

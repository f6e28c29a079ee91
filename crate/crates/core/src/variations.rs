//! First and second domain variations of the Robin energy and of the
//! principal eigenvalue at the ball, the lower bounds for α > 0, the torsion
//! sign classification, and the Dirichlet comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{check_dimension, Error, Result};
use crate::geometry::field::{tangent_projector, AmbientField, PerturbationField};
use crate::geometry::metric::metric_expansions;
use crate::geometry::surface::{integrate_converged, surface_second_variation};
use crate::quadrature::{gauss_legendre_interval, SphereRule};
use crate::radial::{k_g, sign_constant_a, BallProblem, ProblemKind, RadialSolution};
use crate::special::bessel::bessel_j;
use crate::special::harmonics::{lb_eigen, multiplicity, HarmonicExpansion};
use crate::steklov::{
    check_mean_free, quadratic_form_q, radial_factor, shape_derivative_uprime, steklov_spectrum,
    ShapeDerivativeField, ZERO_EIGENVALUE_TOL,
};

/// Agreement required between the series and the boundary-integral forms.
pub const FORM_AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Positive,
    Negative,
    Indefinite,
    Kernel,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Self::Positive => "Positive",
            Self::Negative => "Negative",
            Self::Indefinite => "Indefinite",
            Self::Kernel => "Kernel",
        }
    }

    fn of_value(value: f64, scale: f64) -> Self {
        if value.abs() <= 1e-10 * scale.max(1.0) {
            Self::Kernel
        } else if value > 0.0 {
            Self::Positive
        } else {
            Self::Negative
        }
    }
}

/// Contribution of one degree s to the second variation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeContribution {
    pub degree: usize,
    /// Σ_i N_{s,i}², the squared L²(S^{n-1}) norm of the degree-s part.
    pub norm_squared: f64,
    pub mu: f64,
    pub sddot: f64,
    pub f: f64,
    pub eddot: f64,
}

/// A scalar check embedded in a report: |value - reference| ≤ tolerance,
/// or value ≥ reference - tolerance for one-sided checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub one_sided: bool,
    pub pass: bool,
}

impl Check {
    pub fn equal(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        let pass = (value - reference).abs() <= tolerance;
        Self { name: name.into(), value, reference, tolerance, one_sided: false, pass }
    }

    /// value ≥ reference - tolerance.
    pub fn at_least(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        let pass = value >= reference - tolerance;
        Self { name: name.into(), value, reference, tolerance, one_sided: true, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub kind: ProblemKind,
    pub n: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub normal: HarmonicExpansion,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "Edot0")]
    pub edot0: f64,
    #[serde(rename = "Eddot0")]
    pub eddot0: f64,
    #[serde(rename = "Sddot0")]
    pub sddot0: f64,
    #[serde(rename = "F_series")]
    pub f_series: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub k_g: f64,
    /// ∮N² dS.
    pub normal_norm: f64,
    /// The boundary functional of the radial lemma, by quadrature.
    #[serde(rename = "Eddot0_boundary")]
    pub eddot_boundary: f64,
    /// λ̈(0), for the eigenvalue kind.
    #[serde(rename = "lambda_ddot0")]
    pub lambda_ddot: Option<f64>,
    pub bound_i: Option<f64>,
    pub bound_ii: Option<f64>,
    pub classification: Classification,
    pub modes: Vec<ModeContribution>,
    pub checks: Vec<Check>,
}

impl VariationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `key = value` lines; checks appear as `check.<name> = pass|FAIL value reference`.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.17e}"));
        let _ = writeln!(out, "kind = {}", self.kind.name());
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "R = {:.17e}", self.radius);
        let _ = writeln!(out, "alpha = {:.17e}", self.alpha);
        let _ = writeln!(out, "lambda = {:.17e}", self.lambda);
        let terms: Vec<String> = self.normal.term_list().iter().map(|(s, i, c)| format!("{s}:{i}:{c:.17e}")).collect();
        let _ = writeln!(out, "N = {}", terms.join(","));
        for (key, v) in [
            ("E0", self.e0),
            ("Edot0", self.edot0),
            ("Eddot0", self.eddot0),
            ("Sddot0", self.sddot0),
            ("F_series", self.f_series),
            ("Q", self.q),
            ("k_g", self.k_g),
            ("normal_norm", self.normal_norm),
            ("Eddot0_boundary", self.eddot_boundary),
        ] {
            let _ = writeln!(out, "{key} = {v:.17e}");
        }
        if let Some(pi) = pi_multiple(self.eddot0) {
            let _ = writeln!(out, "Eddot0_symbolic = {pi}");
        }
        let _ = writeln!(out, "lambda_ddot0 = {}", opt(self.lambda_ddot));
        let _ = writeln!(out, "bound_i = {}", opt(self.bound_i));
        let _ = writeln!(out, "bound_ii = {}", opt(self.bound_ii));
        let _ = writeln!(out, "classification = {}", self.classification.name());
        for c in &self.checks {
            let status = if c.pass { "pass" } else { "FAIL" };
            let _ = writeln!(out, "check.{} = {status} {:.17e} {:.17e}", c.name, c.value, c.reference);
        }
        out
    }

    /// Tab-separated table, one row per degree.
    pub fn to_table(&self) -> String {
        let mut out = String::from("degree\tnorm_squared\tmu\tSddot\tF\tEddot\n");
        for m in &self.modes {
            let _ = writeln!(
                out,
                "{}\t{:.17e}\t{:.17e}\t{:.17e}\t{:.17e}\t{:.17e}",
                m.degree, m.norm_squared, m.mu, m.sddot, m.f, m.eddot
            );
        }
        out
    }
}

/// `pπ/q` when x/π is a fraction with denominator at most 48.
pub fn pi_multiple(x: f64) -> Option<String> {
    let r = x / std::f64::consts::PI;
    if r == 0.0 {
        return Some("0".into());
    }
    for q in 1..=48i64 {
        let p = (r * q as f64).round();
        if p != 0.0 && (r * q as f64 - p).abs() <= 1e-9 * q as f64 * r.abs().max(1.0) {
            let p = p as i64;
            return Some(match (p, q) {
                (1, 1) => "π".into(),
                (-1, 1) => "-π".into(),
                (p, 1) => format!("{p}π"),
                (1, q) => format!("π/{q}"),
                (-1, q) => format!("-π/{q}"),
                (p, q) => format!("{p}π/{q}"),
            });
        }
    }
    None
}

/// Sphere quadrature order adequate for products of two fields of degree ≤ L.
pub fn default_order(n: usize, max_degree: usize) -> usize {
    match n {
        2 => 64.max(4 * (max_degree + 1)),
        _ => 32.max(2 * (max_degree + 1) + 8),
    }
}

fn boundary_measure(p: &BallProblem) -> f64 {
    p.radius.powi(p.n as i32 - 1)
}

fn check_kind(p: &BallProblem, s: &RadialSolution) -> Result<()> {
    check_dimension(p.n)?;
    if p.kind == ProblemKind::DirichletEigen {
        return Err(Error::WrongKind { expected: "torsion or robin-eigen", got: p.kind.name() });
    }
    if s.problem != *p {
        return Err(Error::InvalidParameter { name: "s", reason: "solution belongs to a different problem".into() });
    }
    Ok(())
}

/// The constant boundary integrand |∇u|² - 2G(u) - 2α²u² + α(n-1)u²/R.
pub fn first_variation_density(p: &BallProblem, s: &RadialSolution) -> f64 {
    let u = s.u_boundary;
    let ur = s.ur_boundary;
    ur * ur - 2.0 * s.big_g(u) - 2.0 * p.alpha * p.alpha * u * u + p.alpha * (p.n as f64 - 1.0) * u * u / p.radius
}

/// Ė(0) = z̄ ∮N dS.
pub fn first_variation_energy(p: &BallProblem, s: &RadialSolution, field: &PerturbationField) -> Result<f64> {
    check_kind(p, s)?;
    Ok(first_variation_density(p, s) * field.normal_flux() * boundary_measure(p))
}

/// Ė(0) = z̄ ∮ v·ν dS for an ambient field, by quadrature on ∂B_R.
pub fn first_variation_energy_ambient(
    p: &BallProblem,
    s: &RadialSolution,
    v: &dyn AmbientField,
    order: usize,
) -> Result<f64> {
    check_kind(p, s)?;
    let rule = SphereRule::new(p.n, order)?;
    let flux = rule.integrate(|node| {
        let nu = Vector3::from(node.direction);
        v.value(&(p.radius * nu)).dot(&nu)
    });
    Ok(first_variation_density(p, s) * flux * boundary_measure(p))
}

/// λ̇(0) = A u(R)² ∮N dS.
pub fn first_variation_eigenvalue(p: &BallProblem, s: &RadialSolution, field: &PerturbationField) -> Result<f64> {
    check_kind(p, s)?;
    let a = sign_constant_a(p, s)?;
    Ok(a * s.u_boundary.powi(2) * field.normal_flux() * boundary_measure(p))
}

struct SecondVariationData {
    kg: f64,
    uprime: ShapeDerivativeField,
    q: f64,
    sddot: f64,
    f_series: f64,
    normal_norm: f64,
    modes: Vec<ModeContribution>,
}

fn second_variation_data(p: &BallProblem, s: &RadialSolution, normal: &HarmonicExpansion) -> Result<SecondVariationData> {
    check_kind(p, s)?;
    if normal.n != p.n {
        return Err(Error::InvalidParameter { name: "N", reason: "expansion dimension does not match the problem".into() });
    }
    check_mean_free(normal)?;
    let top = normal.max_degree().max(2);
    let spectrum = steklov_spectrum(p, s, top)?;
    let uprime = shape_derivative_uprime(p, s, &spectrum, normal)?;
    let kg = uprime.k_g;
    let q = quadratic_form_q(&spectrum, &uprime);
    let au = p.alpha * s.u_boundary;
    let au2 = au * s.u_boundary;
    let ds = boundary_measure(p);
    let scale = p.radius.powi(p.n as i32 - 3);

    let mut per_degree: BTreeMap<usize, f64> = BTreeMap::new();
    for ((deg, _), c) in normal.terms() {
        if deg > 0 {
            *per_degree.entry(deg).or_default() += c * c;
        }
    }
    let mut modes = Vec::new();
    for (&deg, &c2) in &per_degree {
        let mu = spectrum.entries[deg].mu;
        let b2 = c2 * ds;
        let sddot = c2 * scale * (lb_eigen(deg, p.n).0 - (p.n as f64 - 1.0));
        let f = 2.0 * b2 * (au * kg - kg * kg / mu);
        modes.push(ModeContribution { degree: deg, norm_squared: c2, mu, sddot, f, eddot: au2 * sddot + f });
    }
    Ok(SecondVariationData {
        kg,
        uprime,
        q,
        sddot: surface_second_variation(normal, p.n, p.radius),
        f_series: modes.iter().map(|m| m.f).sum(),
        normal_norm: normal.norm_squared() * ds,
        modes,
    })
}

/// -2∮(∂_νu′+αu′)u′ + αu²S̈ + (2αu/k_g)∮(∂_νu′+αu′)², with ∂_νu′ from the
/// gradient of the series for u′.
fn boundary_functional(p: &BallProblem, s: &RadialSolution, d: &SecondVariationData, order: usize) -> Result<f64> {
    let ds = boundary_measure(p);
    let au = p.alpha * s.u_boundary;
    let (pairing, robin_sq) = {
        let rule = SphereRule::new(p.n, order)?;
        let mut pairing = 0.0;
        let mut robin_sq = 0.0;
        for node in &rule.nodes {
            let dir = Vector3::from(node.direction);
            let (v, dn) = d.uprime.boundary_trace(&dir);
            let robin = dn + p.alpha * v;
            pairing += node.weight * robin * v;
            robin_sq += node.weight * robin * robin;
        }
        (pairing * ds, robin_sq * ds)
    };
    let last = if d.kg == 0.0 { 0.0 } else { 2.0 * au / d.kg * robin_sq };
    Ok(-2.0 * pairing + au * s.u_boundary * d.sddot + last)
}

fn bounds_from(p: &BallProblem, s: &RadialSolution, normal: &HarmonicExpansion, kg: f64) -> Result<(f64, Option<f64>)> {
    if !(p.alpha > 0.0) {
        return Err(Error::InvalidParameter { name: "alpha", reason: format!("the lower bounds need α > 0, got {}", p.alpha) });
    }
    let spectrum = steklov_spectrum(p, s, normal.max_degree().max(2))?;
    let u = s.u_boundary;
    let au = p.alpha * u;
    let norm = normal.norm_squared() * boundary_measure(p);
    let sddot = surface_second_variation(normal, p.n, p.radius);
    let (_, mu_p) = spectrum.smallest_positive(1).expect("μ_s grows with s");
    let bound_i = au * u * sddot + 2.0 * kg * kg * (au / kg - 1.0 / mu_p) * norm;
    let degree_one = normal.degree_norm(1);
    let bound_ii = if degree_one > 1e-12 * normal.norm_squared().sqrt().max(1.0) {
        None
    } else {
        let (_, mu_pp) = spectrum.smallest_positive(2).expect("μ_s grows with s");
        let nf = p.n as f64;
        Some((au * u * (nf + 1.0) / (p.radius * p.radius) + 2.0 * kg * au - 2.0 * kg * kg / mu_pp) * norm)
    };
    Ok((bound_i, bound_ii))
}

/// Lower bounds for Ë(0) when α > 0. bound_i uses the smallest positive
/// Steklov eigenvalue over s ≥ 1; bound_ii skips degree 1 and uses
/// S̈ ≥ (n+1)/R² ∮N², so N may not contain degree-1 terms.
pub fn theorem_bounds(p: &BallProblem, s: &RadialSolution, normal: &HarmonicExpansion) -> Result<(f64, f64)> {
    check_kind(p, s)?;
    check_mean_free(normal)?;
    let kg = k_g(p, s)?;
    let (bi, bii) = bounds_from(p, s, normal, kg)?;
    match bii {
        Some(b) => Ok((bi, b)),
        None => Err(Error::BarycenterViolated(normal.degree_norm(1))),
    }
}

/// bound_i alone, which admits degree-1 content.
pub fn theorem_bound_i(p: &BallProblem, s: &RadialSolution, normal: &HarmonicExpansion) -> Result<f64> {
    check_kind(p, s)?;
    check_mean_free(normal)?;
    let kg = k_g(p, s)?;
    Ok(bounds_from(p, s, normal, kg)?.0)
}

fn assemble_report(
    p: &BallProblem,
    s: &RadialSolution,
    normal: &HarmonicExpansion,
    order: Option<usize>,
) -> Result<VariationReport> {
    let d = second_variation_data(p, s, normal)?;
    let u = s.u_boundary;
    let au2 = p.alpha * u * u;
    let eddot0 = au2 * d.sddot + d.f_series;
    let order = order.unwrap_or_else(|| default_order(p.n, normal.max_degree()));
    let eddot_boundary = boundary_functional(p, s, &d, order)?;
    let scale = eddot0.abs().max(d.normal_norm).max(1.0);

    let mut checks = vec![
        Check::equal("identity_series", eddot0 - au2 * d.sddot - d.f_series, 0.0, 1e-12 * scale),
        Check::equal(
            "quadratic_form_F",
            -2.0 * d.q + 2.0 * p.alpha * u * d.kg * d.normal_norm,
            d.f_series,
            1e-10 * scale,
        ),
        Check::equal("boundary_functional", eddot_boundary, eddot0, FORM_AGREEMENT_TOL * scale),
    ];
    let (bound_i, bound_ii) = if p.alpha > 0.0 {
        let (bi, bii) = bounds_from(p, s, normal, d.kg)?;
        checks.push(Check::at_least("bound_i", eddot0, bi, 1e-10 * scale));
        if let Some(b) = bii {
            checks.push(Check::at_least("bound_ii", eddot0, b, 1e-10 * scale));
        }
        (Some(bi), bii)
    } else {
        (None, None)
    };
    let lambda_ddot = if p.kind == ProblemKind::RobinEigen {
        checks.push(Check::at_least("f1", eddot0, au2 * d.sddot, 1e-12 * scale));
        Some(eddot0)
    } else {
        None
    };
    let field = PerturbationField::volume_preserving(p.n, p.radius, normal.clone())?;
    let edot0 = match p.kind {
        ProblemKind::RobinEigen => first_variation_eigenvalue(p, s, &field)?,
        _ => first_variation_energy(p, s, &field)?,
    };
    Ok(VariationReport {
        kind: p.kind,
        n: p.n,
        radius: p.radius,
        alpha: p.alpha,
        lambda: s.lambda,
        normal: normal.clone(),
        e0: s.energy(),
        edot0,
        eddot0,
        sddot0: d.sddot,
        f_series: d.f_series,
        q: d.q,
        k_g: d.kg,
        normal_norm: d.normal_norm,
        eddot_boundary,
        lambda_ddot,
        bound_i,
        bound_ii,
        classification: Classification::of_value(eddot0, d.normal_norm),
        modes: d.modes,
        checks,
    })
}

/// Ë(0) = αu(R)²S̈(0) + ℱ for the volume-preserving perturbation with normal
/// part N, together with the boundary-functional form evaluated by quadrature.
pub fn second_variation_energy_ball(p: &BallProblem, s: &RadialSolution, normal: &HarmonicExpansion) -> Result<VariationReport> {
    assemble_report(p, s, normal, None)
}

/// As [`second_variation_energy_ball`] with an explicit quadrature order.
pub fn second_variation_energy_ball_with_order(
    p: &BallProblem,
    s: &RadialSolution,
    normal: &HarmonicExpansion,
    order: usize,
) -> Result<VariationReport> {
    assemble_report(p, s, normal, Some(order))
}

/// λ̈(0) = -2Q(u′) + 2αu(R)k∮N² + αu(R)²S̈(0) for the principal Robin
/// eigenvalue with ∫u² = 1, with g(u) = λu.
pub fn second_variation_eigenvalue_ball(p: &BallProblem, s: &RadialSolution, normal: &HarmonicExpansion) -> Result<VariationReport> {
    if p.kind != ProblemKind::RobinEigen {
        return Err(Error::WrongKind { expected: "robin-eigen", got: p.kind.name() });
    }
    assemble_report(p, s, normal, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub degree: usize,
    pub index: usize,
    pub eddot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionClassification {
    pub n: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub alpha: f64,
    pub classification: Classification,
    /// Ë(0) for the unit-norm mode Y_{s,i} of every degree 2..=depth.
    pub scanned: Vec<Witness>,
    /// First positive and first negative scanned mode.
    pub positive_witness: Option<Witness>,
    pub negative_witness: Option<Witness>,
}

impl TorsionClassification {
    /// Whether the scanned modes agree with the classification.
    pub fn consistent(&self) -> bool {
        match self.classification {
            Classification::Positive => self.scanned.iter().all(|w| w.eddot > 0.0),
            Classification::Negative => self.scanned.iter().all(|w| w.eddot < 0.0),
            Classification::Indefinite => self.positive_witness.is_some() && self.negative_witness.is_some(),
            Classification::Kernel => self.scanned.iter().all(|w| w.eddot == 0.0),
        }
    }
}

/// Sign of Ë(0) for torsion over volume-preserving perturbations:
/// Positive for α > 0, Negative for -1/R < α < 0, Indefinite for α ≤ -1/R.
/// Degrees 2..=depth are scanned in ascending order; within a degree the
/// modes are equivalent and `seed` picks the reported index.
pub fn classify_torsion_sign(n: usize, radius: f64, alpha: f64, depth: usize, seed: u64) -> Result<TorsionClassification> {
    if alpha == 0.0 {
        return Err(Error::InvalidParameter { name: "alpha", reason: "α = 0 is the Neumann problem, which has no torsion solution".into() });
    }
    let p = BallProblem::torsion(n, radius, alpha)?;
    let s = p.solve()?;
    let classification = if alpha > 0.0 {
        Classification::Positive
    } else if alpha * radius > -1.0 {
        Classification::Negative
    } else {
        Classification::Indefinite
    };
    let mut scanned = Vec::new();
    for degree in 2..=depth.max(2) {
        let index = (seed % multiplicity(degree, n) as u64) as usize;
        let mode = HarmonicExpansion::single(n, degree, index, 1.0)?;
        let d = second_variation_data(&p, &s, &mode)?;
        let eddot = alpha * s.u_boundary.powi(2) * d.sddot + d.f_series;
        scanned.push(Witness { degree, index, eddot });
    }
    let positive_witness = scanned.iter().copied().find(|w| w.eddot > 0.0);
    let negative_witness = scanned.iter().copied().find(|w| w.eddot < 0.0);
    Ok(TorsionClassification { n, radius, alpha, classification, scanned, positive_witness, negative_witness })
}

/// Boundary integrals of the general second-variation formula, by quadrature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralSecondVariation {
    pub eddot: f64,
    pub q: f64,
    /// The nine terms in the order they are written in the formula, the
    /// last being -2Q.
    pub terms: [f64; 9],
    /// Coefficients of ∂_νu′ + αu′ on ∂B_R in the orthonormal basis
    /// Y_{s,i} R^{-(n-1)/2}.
    pub boundary_data: HarmonicExpansion,
}

/// Projects the right-hand side of the boundary condition for u′,
/// -∂_ν(v·∇u) + ∇^τu·D_vν + ν·D_v∇u - αv·∇u, onto degrees ≤ max_degree and
/// solves for u′ in the Steklov basis.
fn uprime_from_ambient(
    p: &BallProblem,
    s: &RadialSolution,
    v: &dyn AmbientField,
    max_degree: usize,
    order: usize,
) -> Result<(ShapeDerivativeField, HarmonicExpansion)> {
    let spectrum = steklov_spectrum(p, s, max_degree)?;
    let rule = SphereRule::new(p.n, order)?;
    let ds_half = p.radius.powf((p.n as f64 - 1.0) / 2.0);
    let rhs = |dir: &Vector3<f64>| {
        let x = p.radius * dir;
        let vv = v.value(&x);
        let jac = v.jacobian(&x);
        let grad_u = s.ur_boundary * dir;
        let hess = hessian_u(p, s, dir);
        let grad_tau = tangent_projector(p.n, dir) * grad_u;
        let jn = jac * dir;
        -(jn.dot(&grad_u) + vv.dot(&(hess * dir))) + (jac * grad_tau).dot(dir) + jn.dot(&grad_u)
            - p.alpha * vv.dot(&grad_u)
    };
    let h = HarmonicExpansion::project(p.n, max_degree, &rule.nodes, |node| rhs(&Vector3::from(node.direction)))?
        .scaled(ds_half);
    let total = ds_half * ds_half * rule.integrate(|node| rhs(&Vector3::from(node.direction)).powi(2));
    let captured = h.norm_squared();
    if (total - captured).abs() > 1e-10 * total.max(1e-300) && total > 1e-24 {
        return Err(Error::Quadrature(format!(
            "boundary data not resolved by degree {max_degree}: ∮h² = {total:e}, captured {captured:e}"
        )));
    }
    let mut coefficients = BTreeMap::new();
    for ((deg, i), c) in h.terms() {
        let mu = spectrum.entries[deg].mu;
        if mu.abs() <= ZERO_EIGENVALUE_TOL {
            if c.abs() > 1e-12 {
                return Err(Error::SingularShapeDerivative { degree: deg, mu });
            }
            continue;
        }
        coefficients.insert((deg, i), c / mu);
    }
    let kg = k_g(p, s)?;
    Ok((ShapeDerivativeField { spectrum, k_g: kg, coefficients }, h))
}

fn hessian_u(p: &BallProblem, s: &RadialSolution, dir: &Vector3<f64>) -> Matrix3<f64> {
    let proj = tangent_projector(p.n, dir);
    s.u_rr(p.radius) * dir * dir.transpose() + s.ur_boundary / p.radius * proj
}

/// Ë(0) for the family x + tv + t²w/2 on B_R by quadrature of every boundary
/// integral of the general formula, with u′ from the Steklov solver.
/// `max_degree` bounds the harmonic content of v·ν; by default it is
/// resolved from the data.
pub fn second_variation_general(
    p: &BallProblem,
    s: &RadialSolution,
    v: &dyn AmbientField,
    w: &dyn AmbientField,
    max_degree: usize,
    order: usize,
) -> Result<GeneralSecondVariation> {
    check_kind(p, s)?;
    let (uprime, h) = uprime_from_ambient(p, s, v, max_degree, order)?;
    let q: f64 = uprime
        .coefficients
        .iter()
        .map(|(&(deg, _), &c)| c * c * uprime.spectrum.entries[deg].mu)
        .sum();
    let u = s.u_boundary;
    let ur = s.ur_boundary;
    let ds = boundary_measure(p);
    let z = ur * ur - 2.0 * s.big_g(u);
    let g = s.g(u);
    let mut terms = [0.0; 9];
    let compute = |k: usize| -> Result<[f64; 8]> {
        let rule = SphereRule::new(p.n, k)?;
        let mut acc = [0.0; 8];
        for node in &rule.nodes {
            let dir = Vector3::from(node.direction);
            let x = p.radius * dir;
            let vv = v.value(&x);
            let ww = w.value(&x);
            let jac = v.jacobian(&x);
            let hess = hessian_u(p, s, &dir);
            let grad_u = ur * dir;
            let nv = vv.dot(&dir);
            let v_grad_u = vv.dot(&grad_u);
            let m2 = metric_expansions(p.n, v, w, &x)?.m2;
            let (up, dn) = uprime.boundary_trace(&dir);
            let robin = dn + p.alpha * up;
            let t = [
                (nv * jac.trace() - (jac * vv).dot(&dir) + ww.dot(&dir)) * z,
                4.0 * (ur * (jac * vv).dot(&grad_u) - nv * (jac * grad_u).dot(&grad_u)),
                2.0 * (ur * vv.dot(&(hess * vv)) - nv * vv.dot(&(hess * grad_u))),
                2.0 * g * nv * v_grad_u,
                -4.0 * v_grad_u * robin,
                -2.0 * p.alpha * v_grad_u * v_grad_u,
                -2.0 * ww.dot(&grad_u) * ur,
                p.alpha * u * u * m2,
            ];
            for (a, ti) in acc.iter_mut().zip(t) {
                *a += node.weight * ds * ti;
            }
        }
        Ok(acc)
    };
    let coarse = compute(order)?;
    let fine = compute(2 * order)?;
    for (j, (c, f)) in coarse.iter().zip(&fine).enumerate() {
        integrate_converged(order, |k| Ok(if k == order { *c } else { *f }))
            .map_err(|e| Error::Quadrature(format!("term {}: {e}", j + 1)))?;
        terms[j] = *f;
    }
    terms[8] = -2.0 * q;
    Ok(GeneralSecondVariation { eddot: terms.iter().sum(), q, terms, boundary_data: h })
}

/// Garabedian–Schiffer comparison on B_R for the first Dirichlet eigenvalue
/// with ∫u² = 1, and the Dirichlet energies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletReport {
    pub n: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub normal: HarmonicExpansion,
    pub lambda_d: f64,
    /// n/R - √λ_D J_{n/2+1}(√λ_D R)/J_{n/2}(√λ_D R).
    pub gs_coefficient: f64,
    /// (1/2)λ̈_D(0) = Σ d²(μ^D_s + (n-1)/R).
    pub half_lambda_ddot: f64,
    /// The same functional, ∫|∇u′|² - λ_D u′² + (n-1)/R ∮u′², by quadrature.
    pub half_lambda_ddot_quadrature: f64,
    pub lambda_ddot: f64,
    /// Ė(0) = ∮N(|∇u|² - 2G(u)) dS for the eigenfunction.
    pub edot: f64,
    /// 2Q_g(u′) + 2(n-1)∮u′²H for g(u) = λ_D u, where g(0) = 0.
    pub eddot_lemma_eigen: f64,
    /// Ė(0) for the Dirichlet torsion problem, u = (R² - |x|²)/(2n).
    pub edot_torsion: f64,
    /// The lemma functional for the Dirichlet torsion problem, g ≡ 1.
    pub eddot_lemma_torsion: f64,
    /// The same with g(0)∮u′²∂_νu in place of 2g(0)∮(v·ν)²∂_νu.
    pub eddot_lemma_torsion_printed: f64,
    pub checks: Vec<Check>,
}

impl DirichletReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "R = {:.17e}", self.radius);
        for (key, v) in [
            ("lambda_D", self.lambda_d),
            ("gs_coefficient", self.gs_coefficient),
            ("half_lambda_ddot", self.half_lambda_ddot),
            ("half_lambda_ddot_quadrature", self.half_lambda_ddot_quadrature),
            ("lambda_ddot", self.lambda_ddot),
            ("Edot_D", self.edot),
            ("Eddot_lemma_eigen", self.eddot_lemma_eigen),
            ("Edot_D_torsion", self.edot_torsion),
            ("Eddot_lemma_torsion", self.eddot_lemma_torsion),
            ("Eddot_lemma_torsion_printed", self.eddot_lemma_torsion_printed),
        ] {
            let _ = writeln!(out, "{key} = {v:.17e}");
        }
        for c in &self.checks {
            let status = if c.pass { "pass" } else { "FAIL" };
            let _ = writeln!(out, "check.{} = {status} {:.17e} {:.17e}", c.name, c.value, c.reference);
        }
        out
    }
}

/// Dirichlet–Steklov values μ^D_s = a_s′(R)/a_s(R) for Δφ + λ_D φ = 0.
fn dirichlet_steklov(n: usize, radius: f64, lambda: f64, s: usize) -> f64 {
    if lambda == 0.0 {
        return s as f64 / radius;
    }
    let (a, da) = radial_factor(ProblemKind::DirichletEigen, n, lambda, s, radius);
    da / a
}

/// u′ for the Dirichlet problems: Δu′ + g′u′ = 0, u′ = -N ∂_νu on ∂B_R,
/// returned as coefficients d_{s,i} in the basis Y_{s,i} R^{-(n-1)/2}.
fn dirichlet_uprime(normal: &HarmonicExpansion, radius: f64, ur: f64) -> Vec<((usize, usize), f64)> {
    let to_b = radius.powf((normal.n as f64 - 1.0) / 2.0);
    normal.terms().map(|(key, c)| (key, -ur * c * to_b)).collect()
}

/// 2Q_g(u′) + 2g(0)∮(v·ν)²∂_νu + 2(n-1)∮u′²H, with (v·ν)² = u′²/(∂_νu)².
/// With `printed` the middle term is g(0)∮u′²∂_νu instead, which the oracle rejects.
fn dirichlet_lemma(n: usize, radius: f64, g_prime: f64, g0: f64, ur: f64, d: &[((usize, usize), f64)], printed: bool) -> f64 {
    let q: f64 = d.iter().map(|&((s, _), c)| c * c * dirichlet_steklov(n, radius, g_prime, s)).sum();
    let boundary: f64 = d.iter().map(|(_, c)| c * c).sum();
    let middle = if printed { g0 * boundary * ur } else { 2.0 * g0 * boundary / ur };
    2.0 * q + middle + 2.0 * (n as f64 - 1.0) / radius * boundary
}

pub fn dirichlet_variations(n: usize, radius: f64, normal: &HarmonicExpansion) -> Result<DirichletReport> {
    check_dimension(n)?;
    check_mean_free(normal)?;
    let p = BallProblem::dirichlet_eigen(n, radius)?;
    let sol = p.solve()?;
    let lambda = sol.lambda;
    let k = lambda.sqrt();
    let nf = n as f64;
    let gs = nf / radius - k * bessel_j(nf / 2.0 + 1.0, k * radius)? / bessel_j(nf / 2.0, k * radius)?;

    let ur = sol.ur_boundary;
    let d = dirichlet_uprime(normal, radius, ur);
    let boundary: f64 = d.iter().map(|(_, c)| c * c).sum();
    let half: f64 = d
        .iter()
        .map(|&((s, _), c)| c * c * (dirichlet_steklov(n, radius, lambda, s) + (nf - 1.0) / radius))
        .sum();

    // Quadrature of the same functional with u′ assembled from its radial factors.
    let order = default_order(n, normal.max_degree());
    let rule = SphereRule::new(n, order)?;
    let (rs, ws) = gauss_legendre_interval(96, 0.0, radius);
    let scale = radius.powf(-(nf - 1.0) / 2.0);
    let field = |x: &Vector3<f64>| -> (f64, Vector3<f64>) {
        let r = x.norm();
        let dir = x / r;
        let mut value = 0.0;
        let mut grad = Vector3::zeros();
        for &((s, i), c) in &d {
            let (y, gy) = crate::special::harmonics::spherical_harmonic_with_gradient(n, s, i, dir.as_slice())
                .expect("validated index");
            let (a, da) = radial_factor(ProblemKind::DirichletEigen, n, lambda, s, r);
            let (ar, _) = radial_factor(ProblemKind::DirichletEigen, n, lambda, s, radius);
            value += c * scale * a / ar * y;
            grad += c * scale * (da / ar * y * dir + a / (ar * r) * Vector3::from(gy));
        }
        (value, grad)
    };
    let mut bulk = 0.0;
    for (r, wr) in rs.iter().zip(&ws) {
        for node in &rule.nodes {
            let (v, g) = field(&(*r * Vector3::from(node.direction)));
            bulk += wr * r.powi(n as i32 - 1) * node.weight * (g.norm_squared() - lambda * v * v);
        }
    }
    let bq = radius.powi(n as i32 - 1) * rule.integrate(|node| field(&(radius * Vector3::from(node.direction))).0.powi(2));
    let half_quadrature = bulk + (nf - 1.0) / radius * bq;

    let ds = radius.powi(n as i32 - 1);
    let flux = normal.coefficient(0, 0) * crate::quadrature::unit_sphere_area(n).sqrt() * ds;
    let edot = ur * ur * flux;
    let eddot_lemma_eigen = dirichlet_lemma(n, radius, lambda, 0.0, ur, &d, false);
    let ur_t = -radius / nf;
    let d_t = dirichlet_uprime(normal, radius, ur_t);
    let edot_torsion = ur_t * ur_t * flux;
    let eddot_lemma_torsion = dirichlet_lemma(n, radius, 0.0, 1.0, ur_t, &d_t, false);
    let eddot_lemma_torsion_printed = dirichlet_lemma(n, radius, 0.0, 1.0, ur_t, &d_t, true);

    let scale_chk = half.abs().max(boundary).max(1.0);
    let checks = vec![
        Check::equal("gs_coefficient", gs, 0.0, 1e-10),
        Check::equal("half_lambda_ddot_quadrature", half_quadrature, half, 1e-8 * scale_chk),
        Check::at_least("lambda_ddot_nonnegative", 2.0 * half, 0.0, 1e-10 * scale_chk),
    ];
    Ok(DirichletReport {
        n,
        radius,
        normal: normal.clone(),
        lambda_d: lambda,
        gs_coefficient: gs,
        half_lambda_ddot: half,
        half_lambda_ddot_quadrature: half_quadrature,
        lambda_ddot: 2.0 * half,
        edot,
        eddot_lemma_eigen,
        edot_torsion,
        eddot_lemma_torsion,
        eddot_lemma_torsion_printed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::field::{AmbientPair, CombinedField, LinearField};
    use crate::geometry::surface::volume_second_order_defect;
    use std::f64::consts::PI;
    use std::sync::Arc;

    // cos kθ on the circle.
    fn cos_k(n: usize, k: usize) -> HarmonicExpansion {
        HarmonicExpansion::single(n, k, 0, PI.sqrt()).unwrap()
    }

    fn torsion(alpha: f64) -> (BallProblem, RadialSolution) {
        let p = BallProblem::torsion(2, 1.0, alpha).unwrap();
        let s = p.solve().unwrap();
        (p, s)
    }

    #[test]
    fn first_variation_examples() {
        let (p, s) = torsion(1.0);
        let one = PerturbationField::hadamard(2, 1.0, HarmonicExpansion::constant(2, 1.0).unwrap()).unwrap();
        assert!((first_variation_energy(&p, &s, &one).unwrap() + 2.0 * PI).abs() < 1e-13);
        let mf = PerturbationField::volume_preserving(2, 1.0, cos_k(2, 2)).unwrap();
        assert_eq!(first_variation_energy(&p, &s, &mf).unwrap(), 0.0);
        let e = first_variation_energy_ambient(&p, &s, &LinearField::rotation(), 64).unwrap();
        assert!(e.abs() < 1e-14);

        let p = BallProblem::robin_eigen(2, 1.0, 1.0).unwrap();
        let s = p.solve().unwrap();
        let l = first_variation_eigenvalue(&p, &s, &one).unwrap();
        let a = sign_constant_a(&p, &s).unwrap();
        assert!(l < 0.0);
        assert!((l - a * s.u_boundary.powi(2) * 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn torsion_cos2() {
        let (p, s) = torsion(1.0);
        let r = second_variation_energy_ball(&p, &s, &cos_k(2, 2)).unwrap();
        assert!((r.eddot0 - 13.0 * PI / 12.0).abs() < 1e-12, "{}", r.eddot0);
        assert!((r.sddot0 - 3.0 * PI).abs() < 1e-12);
        assert!(r.all_pass(), "{:?}", r.checks);
        assert!((r.bound_i.unwrap() - 0.75 * PI).abs() < 1e-12);
        assert!((r.bound_ii.unwrap() - 13.0 * PI / 12.0).abs() < 1e-12);
        assert_eq!(r.classification, Classification::Positive);
        assert_eq!(pi_multiple(r.eddot0).as_deref(), Some("13π/12"));
    }

    #[test]
    fn translations_are_kernel() {
        let (p, s) = torsion(1.0);
        let r = second_variation_energy_ball(&p, &s, &cos_k(2, 1)).unwrap();
        assert!(r.eddot0.abs() < 1e-12);
        assert_eq!(r.classification, Classification::Kernel);
        assert!(r.bound_i.unwrap().abs() < 1e-12);
        assert!(r.bound_ii.is_none());
        assert!(matches!(theorem_bounds(&p, &s, &cos_k(2, 1)), Err(Error::BarycenterViolated(_))));

        let p = BallProblem::robin_eigen(3, 1.0, 1.0).unwrap();
        let s = p.solve().unwrap();
        let n1 = HarmonicExpansion::single(3, 1, 2, 0.7).unwrap();
        let r = second_variation_eigenvalue_ball(&p, &s, &n1).unwrap();
        assert!(r.lambda_ddot.unwrap().abs() < 1e-10);
    }

    #[test]
    fn torsion_negative_alpha() {
        let (p, s) = torsion(-0.5);
        let r = second_variation_energy_ball(&p, &s, &cos_k(2, 2)).unwrap();
        assert!(r.eddot0 < 0.0);
        assert!(r.bound_i.is_none());
        assert!(r.all_pass());
    }

    #[test]
    fn bound_ii_closed_form() {
        for &(n, radius, alpha) in &[(2usize, 1.0, 1.0), (3, 2.0, 0.5), (2, 1.5, 3.0)] {
            let p = BallProblem::torsion(n, radius, alpha).unwrap();
            let s = p.solve().unwrap();
            let mode = HarmonicExpansion::from_terms(n, &[(2, 0, 0.8), (3, 1, -0.3)]).unwrap();
            let (_, b2) = theorem_bounds(&p, &s, &mode).unwrap();
            let nf = n as f64;
            let norm = mode.norm_squared() * radius.powi(n as i32 - 1);
            let closed = ((nf + 1.0) / (alpha * nf * nf)
                + 2.0 * (1.0 + alpha * radius) * radius / (nf * nf * (2.0 + alpha * radius)))
                * norm;
            assert!((b2 - closed).abs() < 1e-12 * closed.abs(), "{b2} vs {closed}");
        }
    }

    #[test]
    fn eigenvalue_f1() {
        let p = BallProblem::robin_eigen(2, 1.0, 1.0).unwrap();
        let s = p.solve().unwrap();
        let r = second_variation_eigenvalue_ball(&p, &s, &cos_k(2, 2)).unwrap();
        let floor = p.alpha * s.u_boundary.powi(2) * 3.0 * PI;
        assert!(r.lambda_ddot.unwrap() > floor);
        assert!(r.all_pass(), "{:?}", r.checks);
        let (p, s) = torsion(1.0);
        assert!(second_variation_eigenvalue_ball(&p, &s, &cos_k(2, 2)).is_err());
    }

    #[test]
    fn non_mean_free_rejected() {
        let (p, s) = torsion(1.0);
        let mut n = cos_k(2, 2);
        n.add_term(0, 0, 0.1).unwrap();
        assert!(matches!(second_variation_energy_ball(&p, &s, &n), Err(Error::NotMeanFree(_))));
    }

    #[test]
    fn classification() {
        assert_eq!(classify_torsion_sign(2, 1.0, 1.0, 6, 0).unwrap().classification, Classification::Positive);
        let c = classify_torsion_sign(2, 1.0, -0.5, 6, 0).unwrap();
        assert_eq!(c.classification, Classification::Negative);
        assert!(c.consistent());
        let c = classify_torsion_sign(2, 1.0, -1.5, 6, 0).unwrap();
        assert_eq!(c.classification, Classification::Indefinite);
        assert!(c.negative_witness.is_some());
        assert!(classify_torsion_sign(2, 1.0, 0.0, 6, 0).is_err());
        let c = classify_torsion_sign(3, 1.0, 1.0, 4, 7).unwrap();
        assert_eq!(c.scanned[0].index, 7 % 5);
    }

    #[test]
    fn general_translation_and_rotation() {
        let (p, s) = torsion(1.0);
        let zero = LinearField::zero();
        let g = second_variation_general(&p, &s, &LinearField::translation(0), &zero, 8, 64).unwrap();
        assert!(g.eddot.abs() < 1e-12, "{:?}", g.terms);
        let g = second_variation_general(
            &p,
            &s,
            &LinearField::rotation(),
            &LinearField::rotation_second_order(),
            8,
            64,
        )
        .unwrap();
        assert!(g.eddot.abs() < 1e-12, "{:?}", g.terms);
    }

    #[test]
    fn general_matches_series() {
        let (p, s) = torsion(1.0);
        let field = PerturbationField::volume_preserving(2, 1.0, cos_k(2, 2)).unwrap();
        let AmbientPair { v, w } = field.radial_ambient().unwrap();
        let g = second_variation_general(&p, &s, v.as_ref(), w.as_ref(), 8, 64).unwrap();
        assert!((g.eddot - 13.0 * PI / 12.0).abs() < 1e-10, "{} {:?}", g.eddot, g.terms);
        let twisted = CombinedField::new().with(1.0, v.clone()).with(0.3, Arc::new(LinearField::rotation()));
        // Restore second-order volume preservation with a dilation in w.
        let defect = volume_second_order_defect(&twisted, w.as_ref(), 2, 1.0, 64).unwrap();
        let w2 = CombinedField::new().with(1.0, w.clone()).with(-defect / (2.0 * PI), Arc::new(LinearField::dilation(2)));
        let g2 = second_variation_general(&p, &s, &twisted, &w2, 8, 64).unwrap();
        assert!((g2.eddot - g.eddot).abs() < 1e-10, "{} vs {}", g2.eddot, g.eddot);
    }

    #[test]
    fn dirichlet_examples() {
        for &(n, r) in &[(2usize, 1.0), (3, 1.0), (2, 2.0), (3, 2.0)] {
            let d = dirichlet_variations(n, r, &HarmonicExpansion::single(n, 2, 0, 1.0).unwrap()).unwrap();
            assert!(d.gs_coefficient.abs() < 1e-10);
            assert!(d.all_pass(), "{:?}", d.checks);
            assert!(d.lambda_ddot > 0.0);
        }
        let d = dirichlet_variations(2, 1.0, &cos_k(2, 1)).unwrap();
        assert!(d.lambda_ddot.abs() < 1e-10);
        assert_eq!(d.edot, 0.0);
        let d = dirichlet_variations(2, 1.0, &cos_k(2, 2)).unwrap();
        assert!((d.eddot_lemma_torsion - PI / 2.0).abs() < 1e-12);
        assert!((d.eddot_lemma_torsion_printed - 11.0 * PI / 8.0).abs() < 1e-12);
    }
}

//! Brute-force oracle: the torsion and principal-eigenvalue problems solved
//! on perturbed star domains by Trefftz collocation, and finite differences
//! in t of the resulting energies and eigenvalues.
//!
//! Every basis function solves the PDE exactly: harmonics ρ^s Y_{s,i} plus
//! the particular solution -|y|²/(2n) for torsion, and ρ^s (kρ)^{-(s+ν)}
//! J_{s+ν}(kρ) Y_{s,i} for the eigenvalue problems. The boundary condition
//! is imposed in least squares at equispaced angles. In n = 3 only zonal
//! domains are supported.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::field::PerturbationField;
use crate::geometry::star::StarDomain;
use crate::quadrature::{gauss_legendre, gauss_legendre_interval, SphereNode, SphereRule};
use crate::radial::{solve_dirichlet_eigen_ball, solve_robin_eigen_ball, BallProblem, ProblemKind};
use crate::special::bessel::{bessel_j_scaled, bessel_j_sequence};
use crate::special::harmonics::{angles_of, evaluate_all};

/// Collocation rows per unknown.
pub const OVERSAMPLING: usize = 4;
/// Largest accepted ratio σ_max/σ_min of the column-scaled collocation matrix.
pub const CONDITION_LIMIT: f64 = 1e13;
/// Boundary residual the oracle is expected to reach.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Default finite-difference step.
pub const DEFAULT_FD_H: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundaryCondition {
    Robin(f64),
    Dirichlet,
}

impl BoundaryCondition {
    pub fn of(p: &BallProblem) -> Self {
        match p.kind {
            ProblemKind::DirichletEigen => Self::Dirichlet,
            _ => Self::Robin(p.alpha),
        }
    }

    fn alpha(self) -> f64 {
        match self {
            Self::Robin(a) => a,
            Self::Dirichlet => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
enum Equation {
    Torsion,
    Helmholtz(f64),
}

/// Column j of the collocation matrix: a_s(ρ) Y_{s,i}(ŷ), rescaled.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct Basis {
    n: usize,
    radius: f64,
    equation: Equation,
    indices: Vec<(usize, usize)>,
    scale: Vec<f64>,
}

impl Basis {
    fn new(n: usize, radius: f64, equation: Equation, modes: usize) -> Self {
        let mut indices = vec![(0, 0)];
        for s in 1..=modes {
            indices.push((s, 0));
            if n == 2 {
                indices.push((s, 1));
            }
        }
        let mut b = Self { n, radius, equation, indices, scale: Vec::new() };
        // a_s(R) itself can vanish (s = 0 at the Dirichlet eigenvalue), so
        // Helmholtz columns are scaled by the small-argument size R^s S_{s+ν}(0).
        b.scale = b
            .indices
            .iter()
            .map(|&(s, _)| match equation {
                Equation::Torsion => b.radial(s, radius).0,
                Equation::Helmholtz(_) => {
                    let order = s as f64 + (n as f64 - 2.0) / 2.0;
                    radius.powi(s as i32) * bessel_j_scaled(order, 0.0).expect("supported order")
                }
            })
            .collect();
        b
    }

    fn radial(&self, s: usize, r: f64) -> (f64, f64) {
        let sf = s as f64;
        let rs = r.powi(s as i32);
        let drs = if s == 0 { 0.0 } else { sf * r.powi(s as i32 - 1) };
        match self.equation {
            Equation::Torsion => (rs, drs),
            Equation::Helmholtz(lambda) => {
                let order = sf + (self.n as f64 - 2.0) / 2.0;
                let z = lambda.sqrt() * r;
                let b0 = bessel_j_scaled(order, z).expect("supported order");
                let b1 = bessel_j_scaled(order + 1.0, z).expect("supported order");
                (rs * b0, drs * b0 - lambda * r * rs * b1)
            }
        }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }

    fn max_degree(&self) -> usize {
        self.indices.last().map_or(0, |&(s, _)| s)
    }

    /// (a_s, a_s′) at ρ for s = 0..=max_degree, with one Bessel sequence.
    fn radial_all(&self, rho: f64) -> Vec<(f64, f64)> {
        let top = self.max_degree();
        match self.equation {
            Equation::Torsion => (0..=top).map(|s| self.radial(s, rho)).collect(),
            Equation::Helmholtz(lambda) => {
                let nu = (self.n as f64 - 2.0) / 2.0;
                let z = lambda.sqrt() * rho;
                let scaled: Vec<f64> = if z <= 1.0 {
                    (0..=top + 1).map(|s| bessel_j_scaled(nu + s as f64, z).expect("supported order")).collect()
                } else {
                    let j = bessel_j_sequence(nu, top + 2, z).expect("supported order");
                    j.iter().enumerate().map(|(s, v)| v / z.powf(nu + s as f64)).collect()
                };
                (0..=top)
                    .map(|s| {
                        let rs = rho.powi(s as i32);
                        let drs = if s == 0 { 0.0 } else { s as f64 * rho.powi(s as i32 - 1) };
                        (rs * scaled[s], drs * scaled[s] - lambda * rho * rs * scaled[s + 1])
                    })
                    .collect()
            }
        }
    }

    /// Values and gradients of every column at y.
    fn eval_all(&self, y: &Vector3<f64>) -> Vec<(f64, Vector3<f64>)> {
        let rho = y.norm();
        let dir = y / rho;
        let (theta, phi) = angles_of(self.n, dir.as_slice());
        let harmonics = evaluate_all(self.n, self.max_degree(), theta, phi, &self.indices);
        let radial = self.radial_all(rho);
        self.indices
            .iter()
            .zip(harmonics)
            .zip(&self.scale)
            .map(|((&(s, _), (yv, gy)), scale)| {
                let (a, da) = radial[s];
                let c = 1.0 / scale;
                (c * a * yv, c * (da * yv * dir + a / rho * Vector3::from(gy)))
            })
            .collect()
    }

    fn particular(&self, y: &Vector3<f64>) -> (f64, Vector3<f64>) {
        match self.equation {
            Equation::Torsion => {
                let n = self.n as f64;
                (-y.norm_squared() / (2.0 * n), -y / n)
            }
            Equation::Helmholtz(_) => (0.0, Vector3::zeros()),
        }
    }
}

/// Angular nodes on S^{n-1}: the full circle for n = 2, the meridian φ = 0
/// with weights carrying the 2π of the azimuth for zonal n = 3.
fn angular_nodes(n: usize, count: usize, gauss: bool) -> Vec<SphereNode> {
    if n == 2 {
        return SphereRule::new(2, count).expect("n = 2").nodes;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    if gauss {
        let (xs, ws) = gauss_legendre(count);
        xs.iter()
            .zip(&ws)
            .map(|(x, w)| {
                let theta = x.acos();
                SphereNode { theta, phi: 0.0, direction: [theta.sin(), 0.0, *x], weight: two_pi * w }
            })
            .collect()
    } else {
        (0..count)
            .map(|j| {
                let theta = (j as f64 + 0.5) * std::f64::consts::PI / count as f64;
                SphereNode { theta, phi: 0.0, direction: [theta.sin(), 0.0, theta.cos()], weight: 0.0 }
            })
            .collect()
    }
}

fn check_domain(d: &StarDomain) -> Result<()> {
    if d.n == 3 {
        let zonal = d.normal.terms().chain(d.second.terms()).all(|((_, i), c)| i == 0 || c == 0.0);
        if !zonal {
            return Err(Error::InvalidParameter {
                name: "N",
                reason: "the n = 3 oracle handles zonal (axisymmetric) perturbations only".into(),
            });
        }
    }
    let min = d.min_radius(512);
    if !(min > 0.0) {
        return Err(Error::NotStarShaped { min_radius: min });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSolution {
    pub domain: StarDomain,
    pub boundary: BoundaryCondition,
    pub modes: usize,
    pub coefficients: Vec<f64>,
    /// Max over a check grid of |∂_νu + αu| (or |u| for Dirichlet).
    pub residual: f64,
    pub condition: f64,
    pub eigenvalue: Option<f64>,
    /// (∫|∇u|² + α∮u²)/∫u².
    pub rayleigh: Option<f64>,
    pub energy: f64,
    /// -∫u for torsion.
    pub energy_weak: Option<f64>,
    pub volume: f64,
    pub surface: f64,
    basis: Basis,
}

impl OracleSolution {
    pub fn value_and_gradient(&self, y: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let (mut v, mut g) = self.basis.particular(y);
        for (c, (bv, bg)) in self.coefficients.iter().zip(self.basis.eval_all(y)) {
            v += c * bv;
            g += *c * bg;
        }
        (v, g)
    }

    /// Err unless the boundary residual is within `tol`.
    pub fn require_residual(&self, tol: f64) -> Result<()> {
        if self.residual > tol {
            return Err(Error::OracleResidual { residual: self.residual, tolerance: tol });
        }
        Ok(())
    }
}

struct Integrals {
    grad_sq: f64,
    mass: f64,
    mean: f64,
    boundary_sq: f64,
}

fn integrals(d: &StarDomain, modes: usize, f: impl Fn(&Vector3<f64>) -> (f64, Vector3<f64>)) -> Integrals {
    let count = match d.n {
        2 => 256.max(8 * (modes + d.max_degree() + 1)),
        _ => 96.max(4 * (modes + d.max_degree() + 1)),
    };
    let nodes = angular_nodes(d.n, count, true);
    let (xs, ws) = gauss_legendre_interval(64.max(2 * modes + 8), 0.0, 1.0);
    let mut out = Integrals { grad_sq: 0.0, mass: 0.0, mean: 0.0, boundary_sq: 0.0 };
    for node in &nodes {
        let dir = Vector3::from(node.direction);
        let bp = d.boundary_point(node);
        let r = bp.radius;
        for (x, w) in xs.iter().zip(&ws) {
            let rho = r * x;
            let (v, g) = f(&(rho * dir));
            let jw = node.weight * w * r * rho.powi(d.n as i32 - 1);
            out.grad_sq += jw * g.norm_squared();
            out.mass += jw * v * v;
            out.mean += jw * v;
        }
        let (v, _) = f(&bp.point);
        out.boundary_sq += node.weight * bp.area_factor * v * v;
    }
    out
}

fn collocation(
    d: &StarDomain,
    basis: &Basis,
    bc: BoundaryCondition,
    rows: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let nodes = angular_nodes(d.n, rows, false);
    let k = basis.len();
    let mut a = DMatrix::zeros(nodes.len(), k);
    let mut b = DVector::zeros(nodes.len());
    for (row, node) in nodes.iter().enumerate() {
        let bp = d.boundary_point(node);
        let apply = |(v, g): (f64, Vector3<f64>)| match bc {
            BoundaryCondition::Robin(alpha) => g.dot(&bp.normal) + alpha * v,
            BoundaryCondition::Dirichlet => v,
        };
        for (j, col) in basis.eval_all(&bp.point).into_iter().enumerate() {
            a[(row, j)] = apply(col);
        }
        b[row] = -apply(basis.particular(&bp.point));
    }
    (a, b)
}

fn boundary_residual(d: &StarDomain, bc: BoundaryCondition, rows: usize, u: impl Fn(&Vector3<f64>) -> (f64, Vector3<f64>)) -> f64 {
    let nodes = angular_nodes(d.n, 3 * rows + 1, false);
    nodes
        .iter()
        .map(|node| {
            let bp = d.boundary_point(node);
            let (v, g) = u(&bp.point);
            match bc {
                BoundaryCondition::Robin(alpha) => (g.dot(&bp.normal) + alpha * v).abs(),
                BoundaryCondition::Dirichlet => v.abs(),
            }
        })
        .fold(0.0, f64::max)
}

fn singular_range(s: &DVector<f64>) -> (f64, f64) {
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    (max, min)
}

/// Torsion Δu + 1 = 0 on the star domain with the given boundary condition.
/// `modes` is the highest harmonic degree of the ansatz.
pub fn solve_perturbed_torsion(d: &StarDomain, bc: BoundaryCondition, modes: usize) -> Result<OracleSolution> {
    check_domain(d)?;
    let basis = Basis::new(d.n, d.radius, Equation::Torsion, modes);
    let rows = OVERSAMPLING * basis.len();
    let (a, b) = collocation(d, &basis, bc, rows);
    let svd = a.svd(true, true);
    let (smax, smin) = singular_range(&svd.singular_values);
    let condition = smax / smin;
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::IllConditioned(condition));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::Quadrature(e.to_string()))?;
    let mut sol = OracleSolution {
        domain: d.clone(),
        boundary: bc,
        modes,
        coefficients: x.iter().copied().collect(),
        residual: 0.0,
        condition,
        eigenvalue: None,
        rayleigh: None,
        energy: 0.0,
        energy_weak: None,
        volume: d.volume_with_order(d.default_order())?,
        surface: d.surface_area_with_order(d.default_order())?,
        basis,
    };
    sol.residual = boundary_residual(d, bc, rows, |y| sol.value_and_gradient(y));
    let ints = integrals(d, modes, |y| sol.value_and_gradient(y));
    sol.energy = ints.grad_sq - 2.0 * ints.mean + bc.alpha() * ints.boundary_sq;
    sol.energy_weak = Some(-ints.mean);
    Ok(sol)
}

/// Smallest singular value of the collocation matrix at λ.
fn sigma_min(d: &StarDomain, bc: BoundaryCondition, modes: usize, lambda: f64) -> f64 {
    let basis = Basis::new(d.n, d.radius, Equation::Helmholtz(lambda), modes);
    let (a, _) = collocation(d, &basis, bc, OVERSAMPLING * basis.len());
    singular_range(&a.singular_values()).1
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let mut fc = f(c);
    let mut fe = f(e);
    while (b - a).abs() > tol * (a.abs() + b.abs()).max(1e-300) {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = f(e);
        }
    }
    0.5 * (a + b)
}

/// The principal eigenvalue λ(t) of Δu + λu = 0 on the star domain, with
/// the Robin or Dirichlet condition; the eigenfunction is normalized in L².
pub fn solve_perturbed_eigen(d: &StarDomain, bc: BoundaryCondition, modes: usize) -> Result<OracleSolution> {
    check_domain(d)?;
    let lambda0 = match bc {
        BoundaryCondition::Robin(alpha) => solve_robin_eigen_ball(&BallProblem::robin_eigen(d.n, d.radius, alpha)?)?.lambda,
        BoundaryCondition::Dirichlet => solve_dirichlet_eigen_ball(d.n, d.radius)?,
    };
    // Coarse scan around the ball's eigenvalue, rescaled by the volume.
    let volume = d.volume_with_order(d.default_order())?;
    let ball = d.radius.powi(d.n as i32) * crate::quadrature::unit_sphere_area(d.n) / d.n as f64;
    let guess = lambda0 * (ball / volume).powf(2.0 / d.n as f64);
    let (lo, hi) = (0.8 * guess, 1.2 * guess);
    let steps = 24;
    let grid: Vec<f64> = (0..=steps).map(|j| lo + (hi - lo) * j as f64 / steps as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&l| sigma_min(d, bc, modes, l)).collect();
    let best = (0..grid.len()).min_by(|&i, &j| values[i].total_cmp(&values[j])).expect("nonempty grid");
    if best == 0 || best == steps {
        return Err(Error::Bracketing { lo, hi, f_lo: values[0], f_hi: values[steps] });
    }
    let lambda = golden_min(|l| sigma_min(d, bc, modes, l), grid[best - 1], grid[best + 1], 1e-15);

    let basis = Basis::new(d.n, d.radius, Equation::Helmholtz(lambda), modes);
    let rows = OVERSAMPLING * basis.len();
    let (a, _) = collocation(d, &basis, bc, rows);
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let jmin = (0..sv.len()).min_by(|&i, &j| sv[i].total_cmp(&sv[j])).expect("nonempty");
    let second = (0..sv.len()).filter(|&j| j != jmin).map(|j| sv[j]).fold(f64::INFINITY, f64::min);
    let condition = singular_range(sv).0 / second;
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::IllConditioned(condition));
    }
    let v_t = svd.v_t.as_ref().expect("computed");
    let mut coefficients: Vec<f64> = v_t.row(jmin).iter().copied().collect();

    let mut sol = OracleSolution {
        domain: d.clone(),
        boundary: bc,
        modes,
        coefficients: coefficients.clone(),
        residual: 0.0,
        condition,
        eigenvalue: Some(lambda),
        rayleigh: None,
        energy: 0.0,
        energy_weak: None,
        volume,
        surface: d.surface_area_with_order(d.default_order())?,
        basis,
    };
    let ints = integrals(d, modes, |y| sol.value_and_gradient(y));
    let sign = if ints.mean < 0.0 { -1.0 } else { 1.0 };
    let norm = sign / ints.mass.sqrt();
    for c in &mut coefficients {
        *c *= norm;
    }
    sol.coefficients = coefficients;
    let ints = integrals(d, modes, |y| sol.value_and_gradient(y));
    let alpha = bc.alpha();
    sol.rayleigh = Some((ints.grad_sq + alpha * ints.boundary_sq) / ints.mass);
    sol.energy = ints.grad_sq - lambda * ints.mass + alpha * ints.boundary_sq;
    sol.residual = boundary_residual(d, bc, rows, |y| sol.value_and_gradient(y));
    Ok(sol)
}

/// Solves p on the star domain: torsion or the principal eigenvalue.
pub fn solve_perturbed(d: &StarDomain, p: &BallProblem, modes: usize) -> Result<OracleSolution> {
    let bc = BoundaryCondition::of(p);
    match p.kind {
        ProblemKind::Torsion => solve_perturbed_torsion(d, bc, modes),
        _ => solve_perturbed_eigen(d, bc, modes),
    }
}

/// Both computations of the energy: ∫|∇u|² - 2∫G(u) + α∮u², and for torsion
/// the weak-form value -∫u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyPaths {
    pub energy: f64,
    pub weak_form: Option<f64>,
}

pub fn energy_of(sol: &OracleSolution, p: &BallProblem) -> Result<EnergyPaths> {
    let torsion = sol.eigenvalue.is_none();
    if torsion != (p.kind == ProblemKind::Torsion) || BoundaryCondition::of(p) != sol.boundary {
        return Err(Error::WrongKind { expected: p.kind.name(), got: if torsion { "torsion" } else { "eigenvalue" } });
    }
    Ok(EnergyPaths { energy: sol.energy, weak_form: sol.energy_weak })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivatives {
    pub d1: f64,
    pub d2: f64,
    /// Difference between the last two Richardson levels.
    pub error_d1: f64,
    pub error_d2: f64,
}

/// Central differences at t = 0 on the steps h, 2h, …, 2^levels h, combined
/// by Richardson extrapolation (both differences have even error expansions).
pub fn finite_difference_derivatives(f: impl Fn(f64) -> Result<f64>, h: f64, levels: usize) -> Result<Derivatives> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter { name: "h", reason: format!("must be positive, got {h}") });
    }
    let f0 = f(0.0)?;
    let mut fmax = f0.abs();
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    for j in 0..=levels {
        let step = h * 2f64.powi(j as i32);
        let fp = f(step)?;
        let fm = f(-step)?;
        fmax = fmax.max(fp.abs()).max(fm.abs());
        d1.push((fp - fm) / (2.0 * step));
        d2.push((fp - 2.0 * f0 + fm) / (step * step));
    }
    let extrapolate = |mut t: Vec<f64>| -> (f64, f64) {
        let mut last_spread = 0.0;
        for k in 1..t.len() {
            let factor = 4f64.powi(k as i32);
            let prev = t.clone();
            for j in 0..t.len() - k {
                t[j] = (factor * prev[j] - prev[j + 1]) / (factor - 1.0);
            }
            last_spread = (t[0] - prev[0]).abs();
        }
        (t[0], last_spread)
    };
    let (a1, e1) = extrapolate(d1);
    let (a2, e2) = extrapolate(d2);
    // f is rarely known to better than a few hundred ulps.
    let roundoff = 1e3 * f64::EPSILON * fmax / (h * h);
    let scale = a2.abs().max(a1.abs()).max(fmax);
    if roundoff > 1e-4 * scale {
        return Err(Error::StepTooSmall { roundoff, spread: e2 });
    }
    Ok(Derivatives { d1: a1, d2: a2, error_d1: e1, error_d2: e2 })
}

/// One row of a t-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub energy: f64,
    pub lambda: Option<f64>,
    pub surface: f64,
    pub volume: f64,
    pub residual: f64,
}

pub fn sweep_row(field: &PerturbationField, p: &BallProblem, t: f64, modes: usize) -> Result<SweepRow> {
    let d = StarDomain::from_field(field, t)?;
    let sol = solve_perturbed(&d, p, modes)?;
    Ok(SweepRow {
        t,
        energy: sol.energy,
        lambda: sol.eigenvalue,
        surface: sol.surface,
        volume: sol.volume,
        residual: sol.residual,
    })
}

/// Tab-separated `t E lambda S V residual` table.
pub fn sweep_table(rows: &[SweepRow]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("t\tE\tlambda\tS\tV\tresidual\n");
    for r in rows {
        let lambda = r.lambda.map_or("nan".to_string(), |l| format!("{l:.17e}"));
        let _ = writeln!(
            out,
            "{:.17e}\t{:.17e}\t{lambda}\t{:.17e}\t{:.17e}\t{:.3e}",
            r.t, r.energy, r.surface, r.volume, r.residual
        );
    }
    out
}

/// Boundary residual for each number of modes.
pub fn convergence(d: &StarDomain, p: &BallProblem, modes: &[usize]) -> Result<Vec<(usize, f64)>> {
    modes.iter().map(|&m| Ok((m, solve_perturbed(d, p, m)?.residual))).collect()
}

/// The quantity an oracle sweep differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    Energy,
    Eigenvalue,
    Surface,
    Volume,
}

/// d/dt and d²/dt² at t = 0 of an observable along the star family of `field`.
pub fn oracle_derivatives(
    field: &PerturbationField,
    p: &BallProblem,
    observable: Observable,
    modes: usize,
    h: f64,
    levels: usize,
) -> Result<Derivatives> {
    finite_difference_derivatives(
        |t| {
            let d = StarDomain::from_field(field, t)?;
            match observable {
                Observable::Surface => d.surface_area_with_order(d.default_order()),
                Observable::Volume => d.volume_with_order(d.default_order()),
                Observable::Energy => Ok(solve_perturbed(&d, p, modes)?.energy),
                Observable::Eigenvalue => solve_perturbed(&d, p, modes)?
                    .eigenvalue
                    .ok_or(Error::WrongKind { expected: "robin-eigen or dirichlet-eigen", got: p.kind.name() }),
            }
        },
        h,
        levels,
    )
}

/// `RSV_FD_H` when set and positive, else the default step.
pub fn env_fd_h() -> f64 {
    std::env::var("RSV_FD_H")
        .ok()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|h| *h > 0.0)
        .unwrap_or(DEFAULT_FD_H)
}

//! Radial solutions of the torsion and principal-eigenvalue problems on B_R.

use serde::{Deserialize, Serialize};

use crate::error::{check_dimension, Error, Result};
use crate::quadrature::{gauss_legendre_interval, unit_sphere_area};
use crate::special::bessel::{bessel_j, bessel_j_scaled, bessel_zero, bisect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Δu + 1 = 0, G(u) = u.
    Torsion,
    /// Δu + λu = 0 with the Robin condition, G(u) = λu²/2.
    RobinEigen,
    /// Δu + λu = 0 with u = 0 on the boundary.
    DirichletEigen,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Torsion => "torsion",
            Self::RobinEigen => "robin-eigen",
            Self::DirichletEigen => "dirichlet-eigen",
        }
    }
}

/// The unperturbed problem on B_R. For `DirichletEigen`, `alpha` is +∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallProblem {
    pub n: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub alpha: f64,
    pub kind: ProblemKind,
}

impl BallProblem {
    pub fn new(n: usize, radius: f64, alpha: f64, kind: ProblemKind) -> Result<Self> {
        check_dimension(n)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter { name: "R", reason: format!("must be positive, got {radius}") });
        }
        match kind {
            ProblemKind::Torsion if alpha == 0.0 || !alpha.is_finite() => {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    reason: "torsion needs a finite nonzero Robin parameter; α = 0 has no solution".into(),
                })
            }
            ProblemKind::RobinEigen if !(alpha > 0.0) || !alpha.is_finite() => {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    reason: format!("the Robin eigenvalue branch is implemented for α > 0, got {alpha}"),
                })
            }
            _ => {}
        }
        let alpha = if kind == ProblemKind::DirichletEigen { f64::INFINITY } else { alpha };
        Ok(Self { n, radius, alpha, kind })
    }

    pub fn torsion(n: usize, radius: f64, alpha: f64) -> Result<Self> {
        Self::new(n, radius, alpha, ProblemKind::Torsion)
    }

    pub fn robin_eigen(n: usize, radius: f64, alpha: f64) -> Result<Self> {
        Self::new(n, radius, alpha, ProblemKind::RobinEigen)
    }

    pub fn dirichlet_eigen(n: usize, radius: f64) -> Result<Self> {
        Self::new(n, radius, f64::INFINITY, ProblemKind::DirichletEigen)
    }

    /// Solves the radial problem of this kind.
    pub fn solve(&self) -> Result<RadialSolution> {
        match self.kind {
            ProblemKind::Torsion => solve_torsion_ball(self),
            ProblemKind::RobinEigen => solve_robin_eigen_ball(self),
            ProblemKind::DirichletEigen => {
                let lambda = solve_dirichlet_eigen_ball(self.n, self.radius)?;
                eigen_solution(self, lambda)
            }
        }
    }
}

/// Radial solution u(r). For the eigenvalue kinds u = c·r^{-ν} J_ν(√λ r),
/// ν = (n-2)/2, normalized so that ∫_{B_R} u² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSolution {
    pub problem: BallProblem,
    /// 0 for torsion.
    pub lambda: f64,
    /// The constant c above (1 for torsion).
    pub normalization: f64,
    #[serde(rename = "uR")]
    pub u_boundary: f64,
    #[serde(rename = "urR")]
    pub ur_boundary: f64,
}

impl RadialSolution {
    fn nu(&self) -> f64 {
        (self.problem.n as f64 - 2.0) / 2.0
    }

    pub fn u(&self, r: f64) -> f64 {
        let p = &self.problem;
        match p.kind {
            ProblemKind::Torsion => {
                let n = p.n as f64;
                p.radius / (p.alpha * n) + (p.radius * p.radius - r * r) / (2.0 * n)
            }
            _ => {
                let k = self.lambda.sqrt();
                let nu = self.nu();
                self.normalization * k.powf(nu) * bessel_j_scaled(nu, k * r).expect("supported order")
            }
        }
    }

    pub fn u_r(&self, r: f64) -> f64 {
        let p = &self.problem;
        match p.kind {
            ProblemKind::Torsion => -r / p.n as f64,
            _ => {
                let k = self.lambda.sqrt();
                let nu = self.nu();
                -self.normalization * k.powf(nu + 2.0) * r * bessel_j_scaled(nu + 1.0, k * r).expect("supported order")
            }
        }
    }

    pub fn u_rr(&self, r: f64) -> f64 {
        let p = &self.problem;
        match p.kind {
            ProblemKind::Torsion => -1.0 / p.n as f64,
            _ => {
                let k = self.lambda.sqrt();
                let nu = self.nu();
                let z = k * r;
                let s1 = bessel_j_scaled(nu + 1.0, z).expect("supported order");
                let s2 = bessel_j_scaled(nu + 2.0, z).expect("supported order");
                -self.normalization * k.powf(nu + 2.0) * (s1 - z * z * s2)
            }
        }
    }

    /// g(u).
    pub fn g(&self, u: f64) -> f64 {
        match self.problem.kind {
            ProblemKind::Torsion => 1.0,
            _ => self.lambda * u,
        }
    }

    /// g'(u).
    pub fn g_prime(&self) -> f64 {
        match self.problem.kind {
            ProblemKind::Torsion => 0.0,
            _ => self.lambda,
        }
    }

    /// G(u) with G' = g, G(0) = 0.
    pub fn big_g(&self, u: f64) -> f64 {
        match self.problem.kind {
            ProblemKind::Torsion => u,
            _ => 0.5 * self.lambda * u * u,
        }
    }

    /// u'' + (n-1)u'/r + g(u).
    pub fn pde_residual(&self, r: f64) -> f64 {
        let u = self.u(r);
        self.u_rr(r) + (self.problem.n as f64 - 1.0) * self.u_r(r) / r + self.g(u)
    }

    /// u_r(R) + αu(R); for the Dirichlet kind, u(R).
    pub fn robin_residual(&self) -> f64 {
        match self.problem.kind {
            ProblemKind::DirichletEigen => self.u_boundary,
            _ => self.ur_boundary + self.problem.alpha * self.u_boundary,
        }
    }

    /// ∫_{B_R} f(u(r), r) dx by radial Gauss–Legendre quadrature.
    pub fn integrate_radial<F: Fn(f64, f64) -> f64>(&self, nodes: usize, f: F) -> f64 {
        let p = &self.problem;
        let (r, w) = gauss_legendre_interval(nodes, 0.0, p.radius);
        let area = unit_sphere_area(p.n);
        r.iter()
            .zip(&w)
            .map(|(ri, wi)| wi * area * ri.powi(p.n as i32 - 1) * f(self.u(*ri), *ri))
            .sum()
    }

    /// Robin energy ∫|∇u|² - 2∫G(u) + α∮u² of the radial solution.
    pub fn energy(&self) -> f64 {
        let p = &self.problem;
        let bulk = self.integrate_radial(256, |u, r| self.u_r(r).powi(2) - 2.0 * self.big_g(u));
        let boundary = match p.kind {
            ProblemKind::DirichletEigen => 0.0,
            _ => p.alpha * self.u_boundary.powi(2) * unit_sphere_area(p.n) * p.radius.powi(p.n as i32 - 1),
        };
        bulk + boundary
    }
}

/// u(r) = R/(αn) + (R² - r²)/(2n).
pub fn solve_torsion_ball(p: &BallProblem) -> Result<RadialSolution> {
    if p.kind != ProblemKind::Torsion {
        return Err(Error::WrongKind { expected: "torsion", got: p.kind.name() });
    }
    let n = p.n as f64;
    Ok(RadialSolution {
        problem: *p,
        lambda: 0.0,
        normalization: 1.0,
        u_boundary: p.radius / (p.alpha * n),
        ur_boundary: -p.radius / n,
    })
}

fn eigen_solution(p: &BallProblem, lambda: f64) -> Result<RadialSolution> {
    let mut s = RadialSolution { problem: *p, lambda, normalization: 1.0, u_boundary: 0.0, ur_boundary: 0.0 };
    let mass = s.integrate_radial(256, |u, _| u * u);
    s.normalization = 1.0 / mass.sqrt();
    s.u_boundary = s.u(p.radius);
    s.ur_boundary = s.u_r(p.radius);
    if p.kind == ProblemKind::DirichletEigen {
        s.u_boundary = 0.0;
    }
    Ok(s)
}

/// Principal Robin eigenvalue: the root of √λ J_{n/2}(√λR) = α J_{n/2-1}(√λR)
/// below the Dirichlet eigenvalue, by bisection in √λ.
pub fn solve_robin_eigen_ball(p: &BallProblem) -> Result<RadialSolution> {
    if p.kind != ProblemKind::RobinEigen {
        return Err(Error::WrongKind { expected: "robin-eigen", got: p.kind.name() });
    }
    let nu = (p.n as f64 - 2.0) / 2.0;
    let j1 = bessel_zero(nu, 1)?;
    // Divided by (kR)^ν so that the left end k = 0 is not itself a root.
    let f = |k: f64| {
        let z = k * p.radius;
        Ok(k * z * bessel_j_scaled(nu + 1.0, z)? - p.alpha * bessel_j_scaled(nu, z)?)
    };
    let k = bisect(f, 0.0, j1 / p.radius, 1e-15)?;
    eigen_solution(p, k * k)
}

/// Residual √λ J_{n/2}(√λR) - α J_{n/2-1}(√λR) of the Robin eigenvalue equation.
pub fn robin_eigen_equation_residual(n: usize, radius: f64, alpha: f64, lambda: f64) -> Result<f64> {
    let nu = (n as f64 - 2.0) / 2.0;
    let k = lambda.sqrt();
    Ok(k * bessel_j(nu + 1.0, k * radius)? - alpha * bessel_j(nu, k * radius)?)
}

/// λ_D = (j_{(n-2)/2, 1} / R)².
pub fn solve_dirichlet_eigen_ball(n: usize, radius: f64) -> Result<f64> {
    check_dimension(n)?;
    let j = bessel_zero((n as f64 - 2.0) / 2.0, 1)?;
    Ok((j / radius).powi(2))
}

/// k_g = g(u(R)) - α(n-1)u(R)/R + α²u(R).
pub fn k_g(p: &BallProblem, s: &RadialSolution) -> Result<f64> {
    if p.kind == ProblemKind::DirichletEigen {
        return Err(Error::WrongKind { expected: "torsion or robin-eigen", got: p.kind.name() });
    }
    let u = s.u_boundary;
    Ok(s.g(u) - p.alpha * (p.n as f64 - 1.0) * u / p.radius + p.alpha * p.alpha * u)
}

/// A = -α² + (n-1)α/R - λ.
pub fn sign_constant_a(p: &BallProblem, s: &RadialSolution) -> Result<f64> {
    if p.kind != ProblemKind::RobinEigen {
        return Err(Error::WrongKind { expected: "robin-eigen", got: p.kind.name() });
    }
    Ok(-p.alpha * p.alpha + (p.n as f64 - 1.0) * p.alpha / p.radius - s.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn torsion_values() {
        let p = BallProblem::torsion(2, 1.0, 1.0).unwrap();
        let s = p.solve().unwrap();
        assert_eq!(s.u_boundary, 0.5);
        assert_eq!(s.u(0.0), 0.75);
        assert_eq!(s.robin_residual(), 0.0);
        assert!((k_g(&p, &s).unwrap() - 1.0).abs() < 1e-15);
        let p = BallProblem::torsion(3, 2.0, 0.5).unwrap();
        let s = p.solve().unwrap();
        assert!((k_g(&p, &s).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(BallProblem::torsion(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn torsion_energy_is_minus_integral_of_u() {
        let p = BallProblem::torsion(2, 1.0, 1.0).unwrap();
        let s = p.solve().unwrap();
        assert!((s.energy() + 5.0 * PI / 8.0).abs() < 1e-13);
    }

    #[test]
    fn robin_eigen_values() {
        let p = BallProblem::robin_eigen(2, 1.0, 1.0).unwrap();
        let s = p.solve().unwrap();
        assert!((s.lambda - 1.577).abs() < 1e-3, "{}", s.lambda);
        assert!(s.robin_residual().abs() < 1e-12);
        assert!(robin_eigen_equation_residual(2, 1.0, 1.0, s.lambda).unwrap().abs() < 1e-12);
        let mass = s.integrate_radial(256, |u, _| u * u);
        assert!((mass - 1.0).abs() < 1e-12);
        let a = sign_constant_a(&p, &s).unwrap();
        assert!((a + s.lambda).abs() < 1e-15);
        assert!(BallProblem::robin_eigen(2, 1.0, -1.0).is_err());
    }

    #[test]
    fn dirichlet_values() {
        let l = solve_dirichlet_eigen_ball(2, 1.0).unwrap();
        assert!((l - 2.404825557695773f64.powi(2)).abs() < 1e-12);
        assert!((solve_dirichlet_eigen_ball(3, 1.0).unwrap() - PI * PI).abs() < 1e-12);
        assert!((solve_dirichlet_eigen_ball(2, 2.0).unwrap() - l / 4.0).abs() < 1e-12);
    }

    #[test]
    fn pde_residuals() {
        for n in [2, 3] {
            for kind in [ProblemKind::Torsion, ProblemKind::RobinEigen, ProblemKind::DirichletEigen] {
                let p = BallProblem::new(n, 1.3, 0.7, kind).unwrap();
                let s = p.solve().unwrap();
                for r in [0.05, 0.4, 0.9, 1.3] {
                    assert!(s.pde_residual(r).abs() < 1e-10, "{kind:?} n={n} r={r}");
                }
                if kind != ProblemKind::DirichletEigen {
                    assert!(s.robin_residual().abs() < 1e-12);
                }
            }
        }
    }
}

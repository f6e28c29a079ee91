use anyhow::{bail, Result};
use rayon::prelude::*;
use rsv_core::geometry::{surface_second_variation, PerturbationField};
use rsv_core::oracle::{oracle_derivatives, sweep_row, sweep_table, Derivatives, Observable, RESIDUAL_TOL};
use rsv_core::radial::{sign_constant_a, BallProblem, ProblemKind};
use rsv_core::special::HarmonicExpansion;
use rsv_core::steklov::steklov_spectrum;
use rsv_core::variations::{
    classify_torsion_sign, dirichlet_variations, first_variation_density, first_variation_eigenvalue,
    first_variation_energy, pi_multiple, second_variation_eigenvalue_ball, second_variation_energy_ball_with_order,
    Check,
};

use crate::config::ExperimentConfig;
use crate::report::Report;

/// Relative agreement required between a closed form and the oracle's
/// second derivative.
const ORACLE_REL_TOL: f64 = 1e-3;
const SURFACE_REL_TOL: f64 = 1e-6;
/// |oracle d/dt| at the ball, relative to the unperturbed value.
const CRITICALITY_TOL: f64 = 1e-6;
const STEKLOV_TOL: f64 = 1e-10;
const DIRICHLET_FLOOR: f64 = -1e-6;

const MEAN_TOL: f64 = 1e-14;

fn field_for(cfg: &ExperimentConfig, normal: &HarmonicExpansion) -> Result<PerturbationField> {
    let (n, r) = (cfg.problem.n, cfg.problem.radius);
    Ok(if normal.mean().abs() <= MEAN_TOL {
        PerturbationField::volume_preserving(n, r, normal.clone())?
    } else {
        PerturbationField::hadamard(n, r, normal.clone())?
    })
}

fn symbolic(report: &mut Report, key: &str, value: f64) {
    if let Some(pi) = pi_multiple(value) {
        report.line(&format!("{key}_symbolic"), pi);
    }
}

fn oracle(cfg: &ExperimentConfig, field: &PerturbationField, p: &BallProblem, obs: Observable) -> Result<Derivatives> {
    let o = &cfg.oracle;
    Ok(oracle_derivatives(field, p, obs, o.modes, cfg.fd_h(), o.richardson_levels)?)
}

fn observable(kind: ProblemKind) -> Observable {
    match kind {
        ProblemKind::Torsion => Observable::Energy,
        _ => Observable::Eigenvalue,
    }
}

fn header(report: &mut Report, p: &BallProblem, normal: &HarmonicExpansion) {
    report.line("kind", p.kind.name());
    report.line("n", p.n);
    report.num("R", p.radius);
    report.num("alpha", p.alpha);
    let terms: Vec<String> = normal.term_list().iter().map(|(s, i, c)| format!("{s}:{i}:{c:.17e}")).collect();
    report.line("N", terms.join(","));
}

/// Appends the oracle comparison of a second derivative to `reference`.
fn oracle_second(report: &mut Report, d: &Derivatives, reference: f64, tolerance_rel: f64) {
    report.num("oracle_d2", d.d2);
    report.num("oracle_richardson_spread", d.error_d2);
    let rel = (d.d2 - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
    report.num("oracle_rel_err", rel);
    report.line("oracle_match", rel <= tolerance_rel);
    report.check(&Check::equal("oracle_second_derivative", d.d2, reference, tolerance_rel * reference.abs()));
}

pub fn first_variation(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.ball_problem()?;
    let normal = cfg.normal()?;
    let field = field_for(cfg, &normal)?;
    let mut report = Report::new("first-variation");
    header(&mut report, &p, &normal);
    report.num("normal_flux", field.normal_flux());
    let (value, scale) = match p.kind {
        ProblemKind::Torsion => {
            let s = p.solve()?;
            let e0 = s.energy();
            report.num("E0", e0);
            report.num("density", first_variation_density(&p, &s));
            let v = first_variation_energy(&p, &s, &field)?;
            report.num("Edot0", v);
            (v, e0.abs())
        }
        ProblemKind::RobinEigen => {
            let s = p.solve()?;
            report.num("lambda", s.lambda);
            report.num("A", sign_constant_a(&p, &s)?);
            let v = first_variation_eigenvalue(&p, &s, &field)?;
            report.num("lambda_dot0", v);
            (v, s.lambda)
        }
        ProblemKind::DirichletEigen => {
            let d = dirichlet_variations(p.n, p.radius, &normal)?;
            report.num("lambda", d.lambda_d);
            report.num("lambda_dot0", d.edot);
            report.num("Edot_D_torsion", d.edot_torsion);
            (d.edot, d.lambda_d)
        }
    };
    if field.normal_flux().abs() <= MEAN_TOL {
        report.check(&Check::equal("mean_free_first_variation", value, 0.0, 1e-12 * scale.max(1.0)));
    }
    if cfg.oracle.enabled {
        let d = oracle(cfg, &field, &p, observable(p.kind))?;
        report.num("oracle_d1", d.d1);
        report.check(&Check::equal("oracle_first_derivative", d.d1, value, CRITICALITY_TOL * scale.max(1.0)));
    }
    Ok(report)
}

pub fn second_variation(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.ball_problem()?;
    let normal = cfg.normal()?;
    if p.kind == ProblemKind::DirichletEigen {
        let mut report = dirichlet(cfg)?;
        report.command = "second-variation".into();
        return Ok(report);
    }
    let s = p.solve()?;
    let r = match p.kind {
        ProblemKind::Torsion => {
            second_variation_energy_ball_with_order(&p, &s, &normal, cfg.quadrature_order(normal.max_degree()))?
        }
        _ => second_variation_eigenvalue_ball(&p, &s, &normal)?,
    };
    let mut report = Report::new("second-variation");
    report.absorb(&r.to_kv(), &r.checks);
    report.table = r.to_table();
    if cfg.oracle.enabled {
        let field = PerturbationField::volume_preserving(p.n, p.radius, normal)?;
        let reference = r.lambda_ddot.unwrap_or(r.eddot0);
        let d = oracle(cfg, &field, &p, observable(p.kind))?;
        oracle_second(&mut report, &d, reference, ORACLE_REL_TOL);
    }
    Ok(report)
}

pub fn steklov(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.ball_problem()?;
    if p.kind == ProblemKind::DirichletEigen {
        bail!("steklov: kind must be torsion or robin-eigen");
    }
    let s = p.solve()?;
    let spectrum = steklov_spectrum(&p, &s, cfg.steklov.max_degree)?;
    let mut report = Report::new("steklov");
    report.line("kind", p.kind.name());
    report.line("n", p.n);
    report.num("R", p.radius);
    report.num("alpha", p.alpha);
    report.num("lambda", s.lambda);
    let compact: Vec<String> = spectrum
        .entries
        .iter()
        .map(|e| if e.multiplicity == 1 { format!("{}", e.mu) } else { format!("{}×{}", e.mu, e.multiplicity) })
        .collect();
    report.line("spectrum", compact.join("; "));
    for e in &spectrum.entries {
        report.num(&format!("mu.{}", e.degree), e.mu);
    }
    match p.kind {
        ProblemKind::Torsion => {
            for e in &spectrum.entries {
                let exact = p.alpha + e.degree as f64 / p.radius;
                report.check(&Check::equal(&format!("torsion_mu_{}", e.degree), e.mu, exact, 0.0));
            }
        }
        _ => {
            report.check(&Check::equal("mu_0", spectrum.mu(0).unwrap_or(f64::NAN), 0.0, STEKLOV_TOL));
            if let Some(mu1) = spectrum.mu(1) {
                let l = mu1 - p.alpha + (p.n as f64 - 1.0) / p.radius - s.lambda / p.alpha;
                report.check(&Check::equal("L", l, 0.0, STEKLOV_TOL));
            }
        }
    }
    report.table = spectrum.to_table();
    Ok(report)
}

pub fn surface(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.ball_problem()?;
    let normal = cfg.normal()?;
    let mut report = Report::new("surface");
    header(&mut report, &p, &normal);
    let closed = surface_second_variation(&normal, p.n, p.radius);
    report.num("Sddot0", closed);
    symbolic(&mut report, "Sddot0", closed);
    if cfg.oracle.enabled {
        let field = PerturbationField::volume_preserving(p.n, p.radius, normal)?;
        let d = oracle(cfg, &field, &p, Observable::Surface)?;
        oracle_second(&mut report, &d, closed, SURFACE_REL_TOL);
        let v = oracle(cfg, &field, &p, Observable::Volume)?;
        report.num("oracle_volume_d1", v.d1);
        report.num("oracle_volume_d2", v.d2);
    }
    Ok(report)
}

pub fn classify(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let p = &cfg.problem;
    let Some(alpha) = p.alpha else { bail!("classify: problem.alpha is required") };
    let c = classify_torsion_sign(p.n, p.radius, alpha, cfg.classify.depth, seed)?;
    let mut report = Report::new("classify");
    report.line("n", c.n);
    report.num("R", c.radius);
    report.num("alpha", c.alpha);
    report.line("classification", c.classification.name());
    let witness = |w: Option<rsv_core::variations::Witness>| {
        w.map_or("none".to_string(), |w| format!("{}:{} {:.17e}", w.degree, w.index, w.eddot))
    };
    report.line("positive_witness", witness(c.positive_witness));
    report.line("negative_witness", witness(c.negative_witness));
    let mut table = String::from("degree\tindex\tEddot\n");
    for w in &c.scanned {
        report.num(&format!("Eddot.{}.{}", w.degree, w.index), w.eddot);
        table.push_str(&format!("{}\t{}\t{:.17e}\n", w.degree, w.index, w.eddot));
    }
    report.table = table;
    let consistent = c.consistent();
    report.line("consistent", consistent);
    if !consistent {
        report.failures.push(crate::report::Failure {
            check: "classification_consistent".into(),
            value: f64::NAN,
            reference: f64::NAN,
            tolerance: 0.0,
            detail: format!(
                "{} expected, but scanned modes give positive witness {} and negative witness {}",
                c.classification.name(),
                witness(c.positive_witness),
                witness(c.negative_witness)
            ),
        });
    }
    Ok(report)
}

pub fn dirichlet(cfg: &ExperimentConfig) -> Result<Report> {
    let p = &cfg.problem;
    let normal = cfg.normal()?;
    let d = dirichlet_variations(p.n, p.radius, &normal)?;
    let mut report = Report::new("dirichlet");
    report.absorb(&d.to_kv(), &d.checks);
    if cfg.oracle.enabled {
        let bp = BallProblem::dirichlet_eigen(p.n, p.radius)?;
        let field = PerturbationField::volume_preserving(p.n, p.radius, normal)?;
        let o = oracle(cfg, &field, &bp, Observable::Eigenvalue)?;
        oracle_second(&mut report, &o, d.lambda_ddot, ORACLE_REL_TOL);
        report.check(&Check::at_least("oracle_lambda_ddot_nonnegative", o.d2, 0.0, -DIRICHLET_FLOOR));
    }
    Ok(report)
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.ball_problem()?;
    let normal = cfg.normal()?;
    let field = field_for(cfg, &normal)?;
    let k = cfg.sweep.steps;
    let ts: Vec<f64> = (0..k).map(|j| cfg.sweep.t_max * (2.0 * j as f64 / (k - 1) as f64 - 1.0)).collect();
    let rows = ts
        .par_iter()
        .map(|&t| sweep_row(&field, &p, t, cfg.oracle.modes))
        .collect::<rsv_core::Result<Vec<_>>>()?;
    let mut report = Report::new("sweep");
    header(&mut report, &p, &normal);
    for (j, r) in rows.iter().enumerate() {
        let lambda = r.lambda.map_or("nan".into(), |l| format!("{l:.17e}"));
        report.line(
            &format!("row.{j}"),
            format!("{:.17e} {:.17e} {lambda} {:.17e} {:.17e} {:.3e}", r.t, r.energy, r.surface, r.volume, r.residual),
        );
        report.check(&Check::equal(&format!("residual.{j}"), r.residual, 0.0, RESIDUAL_TOL));
    }
    report.table = sweep_table(&rows);
    Ok(report)
}

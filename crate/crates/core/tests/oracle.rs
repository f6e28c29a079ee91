use std::f64::consts::PI;

use proptest::prelude::*;
use rsv_core::geometry::{PerturbationField, StarDomain};
use rsv_core::oracle::{convergence, oracle_derivatives, solve_perturbed, Observable, DEFAULT_FD_H};
use rsv_core::radial::BallProblem;
use rsv_core::special::HarmonicExpansion;
use rsv_core::variations::{first_variation_eigenvalue, second_variation_energy_ball};

fn cos2(n: usize) -> HarmonicExpansion {
    if n == 2 {
        HarmonicExpansion::single(2, 2, 0, PI.sqrt()).unwrap()
    } else {
        HarmonicExpansion::single(3, 2, 0, 1.0).unwrap()
    }
}

#[test]
fn residual_decays_geometrically() {
    let p = BallProblem::torsion(2, 1.0, 1.0).unwrap();
    let f = PerturbationField::volume_preserving(2, 1.0, cos2(2)).unwrap();
    let d = StarDomain::from_field(&f, 0.1).unwrap();
    let rows = convergence(&d, &p, &[8, 16, 24]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].1 < 0.1 * w[0].1, "{rows:?}");
    }
}

#[test]
fn eigenvalue_is_even_under_the_quarter_turn() {
    // -cos2θ is cos2θ rotated by π/2, so λ(t) = λ(-t) exactly.
    let p = BallProblem::robin_eigen(2, 1.0, 1.0).unwrap();
    let f = PerturbationField::volume_preserving(2, 1.0, cos2(2)).unwrap();
    let lp = solve_perturbed(&StarDomain::from_field(&f, 0.05).unwrap(), &p, 24).unwrap().eigenvalue.unwrap();
    let lm = solve_perturbed(&StarDomain::from_field(&f, -0.05).unwrap(), &p, 24).unwrap().eigenvalue.unwrap();
    assert!((lp - lm).abs() < 1e-9 * lp, "{lp} vs {lm}");
}

#[test]
fn dilation_rate_of_the_eigenvalue() {
    // N = 1 is not volume preserving; λ̇ = A u(R)² |∂B_R|.
    let p = BallProblem::robin_eigen(2, 1.0, 1.0).unwrap();
    let s = p.solve().unwrap();
    let f = PerturbationField::hadamard(2, 1.0, HarmonicExpansion::constant(2, 1.0).unwrap()).unwrap();
    let formula = first_variation_eigenvalue(&p, &s, &f).unwrap();
    let d = oracle_derivatives(&f, &p, Observable::Eigenvalue, 8, DEFAULT_FD_H, 1).unwrap();
    assert!((d.d1 - formula).abs() < 1e-6 * formula.abs(), "{} vs {formula}", d.d1);
    // The same rate from the radial solver: λ(R(t)) with R(t) = 1 + t.
    let dr = 1e-4;
    let at = |r: f64| BallProblem::robin_eigen(2, r, 1.0).unwrap().solve().unwrap().lambda;
    let radial = (at(1.0 + dr) - at(1.0 - dr)) / (2.0 * dr);
    assert!((radial - formula).abs() < 1e-6 * formula.abs(), "{radial} vs {formula}");
}

#[test]
fn ball_solutions_match_the_radial_solver() {
    for n in [2, 3] {
        let d = StarDomain::ball(n, 1.5).unwrap();
        let p = BallProblem::robin_eigen(n, 1.5, 0.7).unwrap();
        let sol = solve_perturbed(&d, &p, 8).unwrap();
        let l = p.solve().unwrap().lambda;
        assert!((sol.eigenvalue.unwrap() - l).abs() < 1e-9 * l);
        let p = BallProblem::torsion(n, 1.5, 0.7).unwrap();
        let sol = solve_perturbed(&d, &p, 8).unwrap();
        assert!((sol.energy - p.solve().unwrap().energy()).abs() < 1e-10);
    }
}

#[test]
fn zonal_torsion_second_variation_in_three_dimensions() {
    let p = BallProblem::torsion(3, 1.0, 1.0).unwrap();
    let s = p.solve().unwrap();
    let formula = second_variation_energy_ball(&p, &s, &cos2(3)).unwrap().eddot0;
    let f = PerturbationField::volume_preserving(3, 1.0, cos2(3)).unwrap();
    let d = oracle_derivatives(&f, &p, Observable::Energy, 24, DEFAULT_FD_H, 1).unwrap();
    assert!((d.d2 - formula).abs() < 1e-4 * formula.abs(), "{} vs {formula}", d.d2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn torsion_second_variation_matches_oracle(c2 in -1.0f64..1.0, s3 in -1.0f64..1.0, alpha in 0.5f64..2.0) {
        let normal = HarmonicExpansion::from_terms(2, &[(2, 0, c2), (3, 1, s3)]).unwrap();
        prop_assume!(normal.norm_squared() > 0.05);
        let p = BallProblem::torsion(2, 1.0, alpha).unwrap();
        let formula = second_variation_energy_ball(&p, &p.solve().unwrap(), &normal).unwrap().eddot0;
        let f = PerturbationField::volume_preserving(2, 1.0, normal).unwrap();
        let d = oracle_derivatives(&f, &p, Observable::Energy, 32, DEFAULT_FD_H, 1).unwrap();
        prop_assert!(d.d1.abs() < 1e-7, "{}", d.d1);
        prop_assert!((d.d2 - formula).abs() < 1e-4 * formula.abs(), "{} vs {formula}", d.d2);
    }
}

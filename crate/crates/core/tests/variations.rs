use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rsv_core::geometry::{volume_second_order_defect, CombinedField, LinearField, PerturbationField};
use rsv_core::radial::BallProblem;
use rsv_core::special::HarmonicExpansion;
use rsv_core::variations::{
    first_variation_energy, second_variation_eigenvalue_ball, second_variation_energy_ball,
    second_variation_general,
};

fn mean_free(n: usize, coefs: &[f64]) -> HarmonicExpansion {
    let mut e = HarmonicExpansion::zero(n);
    let mut it = coefs.iter();
    for s in 1..=4usize {
        let count = if n == 2 { 2 } else { 2 * s + 1 };
        for i in 0..count {
            if let Some(&c) = it.next() {
                e.add_term(s, i, c).unwrap();
            }
        }
    }
    e
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![0.2f64..4.0, -0.95f64..-0.05, -3.0f64..-1.05]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn three_second_variation_forms_agree(coefs in prop::collection::vec(-1.0f64..1.0, 8), alpha in alpha_strategy(), radius in 0.5f64..2.0) {
        let normal = mean_free(2, &coefs);
        let p = BallProblem::torsion(2, radius, alpha).unwrap();
        prop_assume!((alpha * radius + 2.0).abs() > 1e-3 && (alpha * radius + 3.0).abs() > 1e-3 && (alpha * radius + 4.0).abs() > 1e-3);
        let s = p.solve().unwrap();
        let r = second_variation_energy_ball(&p, &s, &normal).unwrap();
        prop_assert!(r.all_pass(), "{:?}", r.checks);
        let scale = r.eddot0.abs().max(1.0);
        prop_assert!((r.eddot_boundary - r.eddot0).abs() <= 1e-8 * scale);
        let field = PerturbationField::volume_preserving(2, radius, normal).unwrap();
        let pair = field.radial_ambient().unwrap();
        let g = second_variation_general(&p, &s, pair.v.as_ref(), pair.w.as_ref(), 8, 64).unwrap();
        prop_assert!((g.eddot - r.eddot0).abs() <= 1e-8 * scale, "{} vs {}", g.eddot, r.eddot0);
    }

    #[test]
    fn eigenvalue_floor(coefs in prop::collection::vec(-1.0f64..1.0, 8), alpha in 0.3f64..3.0) {
        let normal = mean_free(2, &coefs);
        let p = BallProblem::robin_eigen(2, 1.0, alpha).unwrap();
        let s = p.solve().unwrap();
        let r = second_variation_eigenvalue_ball(&p, &s, &normal).unwrap();
        let floor = alpha * s.u_boundary.powi(2) * r.sddot0;
        prop_assert!(r.lambda_ddot.unwrap() >= floor - 1e-12);
        prop_assert!(r.all_pass(), "{:?}", r.checks);
    }

    #[test]
    fn torsion_scaling(coefs in prop::collection::vec(-1.0f64..1.0, 6), alpha in 0.2f64..3.0, c in 0.5f64..3.0) {
        // u_{cR, α/c}(x) = c² u_{R, α}(x/c), so E scales as c^{n+2} and the
        // boundary displacement as c.
        let normal = mean_free(2, &coefs);
        let p1 = BallProblem::torsion(2, 1.0, alpha).unwrap();
        let pc = BallProblem::torsion(2, c, alpha / c).unwrap();
        let e1 = second_variation_energy_ball(&p1, &p1.solve().unwrap(), &normal).unwrap().eddot0;
        // The unit-sphere coefficients of cN stay c·N.
        let ec = second_variation_energy_ball(&pc, &pc.solve().unwrap(), &normal.scaled(c)).unwrap().eddot0;
        prop_assert!((ec - c.powi(4) * e1).abs() <= 1e-10 * ec.abs().max(1.0), "{ec} vs {}", c.powi(4) * e1);
    }

    #[test]
    fn tangential_part_and_w_do_not_matter(coefs in prop::collection::vec(-1.0f64..1.0, 6), twist in -1.0f64..1.0) {
        let normal = mean_free(2, &coefs);
        let p = BallProblem::torsion(2, 1.0, 1.0).unwrap();
        let s = p.solve().unwrap();
        let field = PerturbationField::volume_preserving(2, 1.0, normal).unwrap();
        let pair = field.radial_ambient().unwrap();
        let base = second_variation_general(&p, &s, pair.v.as_ref(), pair.w.as_ref(), 8, 64).unwrap().eddot;
        let v = CombinedField::new().with(1.0, pair.v.clone()).with(twist, Arc::new(LinearField::rotation()));
        let defect = volume_second_order_defect(&v, pair.w.as_ref(), 2, 1.0, 64).unwrap();
        let w = CombinedField::new()
            .with(1.0, pair.w.clone())
            .with(0.7 * twist, Arc::new(LinearField::rotation()))
            .with(-defect / (2.0 * PI), Arc::new(LinearField::dilation(2)));
        prop_assert!(volume_second_order_defect(&v, &w, 2, 1.0, 64).unwrap().abs() < 1e-12);
        let twisted = second_variation_general(&p, &s, &v, &w, 8, 64).unwrap().eddot;
        prop_assert!((twisted - base).abs() <= 1e-8 * base.abs().max(1.0), "{twisted} vs {base}");
    }
}

#[test]
fn first_variation_vanishes_for_mean_free_fields() {
    let p = BallProblem::torsion(3, 1.5, 0.7).unwrap();
    let s = p.solve().unwrap();
    let f = PerturbationField::volume_preserving(3, 1.5, mean_free(3, &[0.3, -0.2, 0.5, 0.1])).unwrap();
    assert_eq!(first_variation_energy(&p, &s, &f).unwrap(), 0.0);
}

#[test]
fn three_dimensional_forms_agree() {
    let normal = mean_free(3, &[0.0, 0.0, 0.0, 0.4, -0.3, 0.2, 0.1, 0.5]);
    let p = BallProblem::torsion(3, 1.0, 1.0).unwrap();
    let s = p.solve().unwrap();
    let r = second_variation_energy_ball(&p, &s, &normal).unwrap();
    assert!(r.all_pass(), "{:?}", r.checks);
    let field = PerturbationField::volume_preserving(3, 1.0, normal).unwrap();
    let pair = field.radial_ambient().unwrap();
    let g = second_variation_general(&p, &s, pair.v.as_ref(), pair.w.as_ref(), 6, 24).unwrap();
    assert!((g.eddot - r.eddot0).abs() < 1e-8 * r.eddot0.abs(), "{} vs {}", g.eddot, r.eddot0);
}

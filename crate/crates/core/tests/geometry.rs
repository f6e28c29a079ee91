use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rsv_core::geometry::{
    exact_surface_area, exact_volume, metric_expansions, surface_second_variation, surface_second_variation_general,
    volume_second_order_defect, LinearField, PerturbationField, StarDomain,
};
use rsv_core::oracle::finite_difference_derivatives;
use rsv_core::quadrature::SphereRule;
use rsv_core::special::{lb_eigen, HarmonicExpansion};

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

// ∮∇^τf·∇^τg = ∮ f(-Δ_τ g): by quadrature on the left, by the spectrum on the right.
fn check_surface_gauss(n: usize, f: &HarmonicExpansion, g: &HarmonicExpansion) {
    let rule = SphereRule::new(n, 48).unwrap();
    let lhs = rule.integrate(|node| {
        let (_, gf) = f.value_and_gradient_at(node.theta, node.phi);
        let (_, gg) = g.value_and_gradient_at(node.theta, node.phi);
        Vector3::from(gf).dot(&Vector3::from(gg))
    });
    let rhs: f64 = f.terms().map(|((s, i), c)| c * g.coefficient(s, i) * lb_eigen(s, n).0).sum();
    assert!((lhs - rhs).abs() < 1e-11 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn surface_integration_by_parts(a in prop::collection::vec(-1.0f64..1.0, 8), b in prop::collection::vec(-1.0f64..1.0, 8)) {
        check_surface_gauss(2, &mean_free(2, &a), &mean_free(2, &b));
        check_surface_gauss(3, &mean_free(3, &a), &mean_free(3, &b));
    }

    #[test]
    fn surface_second_variation_matches_area_differences(coefs in prop::collection::vec(-0.5f64..0.5, 6), radius in 0.5f64..2.0) {
        let normal = mean_free(2, &coefs);
        prop_assume!(normal.norm_squared() > 1e-2);
        let field = PerturbationField::volume_preserving(2, radius, normal.clone()).unwrap();
        let d = finite_difference_derivatives(
            |t| exact_surface_area(&StarDomain::from_field(&field, t)?),
            5e-3,
            1,
        ).unwrap();
        let closed = surface_second_variation(&normal, 2, radius);
        prop_assert!((d.d2 - closed).abs() <= 1e-6 * closed.abs().max(1.0), "{} vs {}", d.d2, closed);
        let v = finite_difference_derivatives(|t| exact_volume(&StarDomain::from_field(&field, t)?), 5e-3, 1).unwrap();
        prop_assert!(v.d1.abs() < 1e-9 && v.d2.abs() < 1e-7, "{:?}", v);
    }

    #[test]
    fn general_form_of_area_variation(coefs in prop::collection::vec(-1.0f64..1.0, 6)) {
        let normal = mean_free(2, &coefs);
        let field = PerturbationField::volume_preserving(2, 1.3, normal.clone()).unwrap();
        let pair = field.radial_ambient().unwrap();
        let general = surface_second_variation_general(pair.v.as_ref(), pair.w.as_ref(), 2, 1.3, 64).unwrap();
        let closed = surface_second_variation(&normal, 2, 1.3);
        prop_assert!((general - closed).abs() < 1e-10 * closed.abs().max(1.0));
        let defect = volume_second_order_defect(pair.v.as_ref(), pair.w.as_ref(), 2, 1.3, 64).unwrap();
        prop_assert!(defect.abs() < 1e-12);
    }

    #[test]
    fn jacobian_expansion_of_affine_maps(m in prop::collection::vec(-0.5f64..0.5, 18)) {
        let v = LinearField { matrix: Matrix3::from_row_slice(&m[..9]), offset: Vector3::zeros() };
        let w = LinearField { matrix: Matrix3::from_row_slice(&m[9..]), offset: Vector3::zeros() };
        let x = Vector3::new(0.36, 0.48, 0.8);
        let me = metric_expansions(3, &v, &w, &x).unwrap();
        let det = |t: f64| (Matrix3::identity() + t * v.matrix + 0.5 * t * t * w.matrix).determinant();
        let d = finite_difference_derivatives(|t| Ok(det(t)), 1e-3, 1).unwrap();
        prop_assert!((d.d1 - me.j1).abs() < 1e-9 && (d.d2 - me.j2).abs() < 1e-7, "{:?} vs {} {}", d, me.j1, me.j2);
    }
}

#[test]
fn zonal_area_variation_in_three_dimensions() {
    let normal = HarmonicExpansion::single(3, 2, 0, 1.0).unwrap();
    let field = PerturbationField::volume_preserving(3, 1.0, normal.clone()).unwrap();
    let d = finite_difference_derivatives(|t| exact_surface_area(&StarDomain::from_field(&field, t)?), 5e-3, 1).unwrap();
    let closed = surface_second_variation(&normal, 3, 1.0);
    assert!((d.d2 - closed).abs() < 1e-6 * closed, "{} vs {closed}", d.d2);
}

//! Volume constraints and the second variation of surface area on B_R.

use nalgebra::Vector3;

use super::field::{tangent_projector, AmbientField};
use super::metric::metric_expansions;
use crate::error::{check_dimension, Error, Result};
use crate::quadrature::{unit_sphere_area, SphereRule};
use crate::special::harmonics::{lb_eigen, HarmonicExpansion};

/// N with its s = 0 coefficient removed.
pub fn project_zero_mean(normal: &HarmonicExpansion) -> HarmonicExpansion {
    normal.without_mean()
}

/// The constant W = -(n-1)·mean(N²)/R, which makes V̈(0) = 0 for the star
/// domain R + tN + t²W/2 when N is mean-free.
pub fn second_order_volume_correction(normal: &HarmonicExpansion, n: usize, radius: f64) -> HarmonicExpansion {
    let mean_sq = normal.norm_squared() / unit_sphere_area(n);
    if mean_sq == 0.0 {
        return HarmonicExpansion::zero(n);
    }
    HarmonicExpansion::constant(n, -(n as f64 - 1.0) * mean_sq / radius)
        .expect("dimension of a valid expansion")
}

/// ∮|∇^τN|² dS - (n-1)/R² ∮N² dS on ∂B_R, from the coefficients:
/// Σ c² R^{n-3} (s(s+n-2) - (n-1)).
pub fn surface_second_variation(normal: &HarmonicExpansion, n: usize, radius: f64) -> f64 {
    let scale = radius.powi(n as i32 - 3);
    normal
        .terms()
        .map(|((s, _), c)| c * c * scale * (lb_eigen(s, n).0 - (n as f64 - 1.0)))
        .sum()
}

/// Boundary data of an ambient field at x = Rν: N, ∇^τN, div v, v·(D_v ν)
/// in the convention a·D_v b = a_i ∂_i v_k b_k.
pub(crate) struct BoundaryFieldData {
    pub normal_part: f64,
    pub tangential_gradient: Vector3<f64>,
    pub div: f64,
    pub v_dv_nu: f64,
}

pub(crate) fn boundary_field_data(
    n: usize,
    radius: f64,
    field: &dyn AmbientField,
    nu: &Vector3<f64>,
) -> BoundaryFieldData {
    let x = radius * nu;
    let v = field.value(&x);
    let d = field.jacobian(&x);
    let p = tangent_projector(n, nu);
    // ∂_j(v·ν) = ν_i ∂_j v_i + v_i (δ_ij - ν_i ν_j)/R
    let grad_n = d.transpose() * nu + p * v / radius;
    BoundaryFieldData {
        normal_part: v.dot(nu),
        tangential_gradient: p * grad_n,
        div: d.trace(),
        v_dv_nu: (d * v).dot(nu),
    }
}

/// ∮_{∂B_R} (N div v - v·D_v ν + w·ν) dS, which vanishes exactly when
/// (v, w) is volume preserving of the second order.
pub fn volume_second_order_defect(
    v: &dyn AmbientField,
    w: &dyn AmbientField,
    n: usize,
    radius: f64,
    order: usize,
) -> Result<f64> {
    let rule = SphereRule::new(n, order)?;
    let ds = radius.powi(n as i32 - 1);
    Ok(ds * rule.integrate(|node| {
        let nu = Vector3::from(node.direction);
        let b = boundary_field_data(n, radius, v, &nu);
        b.normal_part * b.div - b.v_dv_nu + w.value(&(radius * nu)).dot(&nu)
    }))
}

pub(crate) fn integrate_converged<F: Fn(usize) -> Result<f64>>(order: usize, f: F) -> Result<f64> {
    let coarse = f(order)?;
    let fine = f(2 * order)?;
    let scale = fine.abs().max(1.0);
    if (fine - coarse).abs() > 1e-10 * scale {
        return Err(Error::Quadrature(format!(
            "order {order} gives {coarse:e}, order {} gives {fine:e}",
            2 * order
        )));
    }
    Ok(fine)
}

/// S̈(0) for a general ambient pair, evaluated by quadrature as
/// ∮(|∇^τN|² - (n-1)N²/R²) dS + (n-1)/R ∮(N div v - v·D_v ν + w·ν) dS.
/// The rule is compared against one of twice the order.
pub fn surface_second_variation_general(
    v: &dyn AmbientField,
    w: &dyn AmbientField,
    n: usize,
    radius: f64,
    order: usize,
) -> Result<f64> {
    check_dimension(n)?;
    let nm1 = n as f64 - 1.0;
    let ds = radius.powi(n as i32 - 1);
    integrate_converged(order, |k| {
        let rule = SphereRule::new(n, k)?;
        Ok(ds * rule.integrate(|node| {
            let nu = Vector3::from(node.direction);
            let b = boundary_field_data(n, radius, v, &nu);
            let wn = w.value(&(radius * nu)).dot(&nu);
            b.tangential_gradient.norm_squared() - nm1 * b.normal_part * b.normal_part / (radius * radius)
                + nm1 / radius * (b.normal_part * b.div - b.v_dv_nu + wn)
        }))
    })
}

/// ∮ m̈(0) dS with m̈(0) from the surface-metric traces σ_A, σ_B, σ_{A²}.
pub fn surface_second_variation_from_metric(
    v: &dyn AmbientField,
    w: &dyn AmbientField,
    n: usize,
    radius: f64,
    order: usize,
) -> Result<f64> {
    check_dimension(n)?;
    let ds = radius.powi(n as i32 - 1);
    integrate_converged(order, |k| {
        let rule = SphereRule::new(n, k)?;
        let mut total = 0.0;
        for node in &rule.nodes {
            let x = radius * Vector3::from(node.direction);
            total += node.weight * metric_expansions(n, v, w, &x)?.m2;
        }
        Ok(ds * total)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::field::{LinearField, PerturbationField};
    use std::f64::consts::PI;

    fn cos_k(k: usize) -> HarmonicExpansion {
        HarmonicExpansion::single(2, k, 0, PI.sqrt()).unwrap()
    }

    #[test]
    fn project_zero_mean_examples() {
        let n = cos_k(2);
        assert_eq!(project_zero_mean(&n), n);
        let mut with_mean = n.clone();
        with_mean.add_term(0, 0, (2.0 * PI).sqrt()).unwrap();
        assert_eq!(project_zero_mean(&with_mean), n);
        assert!(project_zero_mean(&HarmonicExpansion::zero(2)).is_zero());
    }

    #[test]
    fn correction_examples() {
        let w = second_order_volume_correction(&cos_k(2), 2, 1.0);
        assert!((w.mean() + 0.5).abs() < 1e-15);
        assert!(second_order_volume_correction(&HarmonicExpansion::zero(2), 2, 1.0).is_zero());
        let z = HarmonicExpansion::single(3, 2, 0, 1.3).unwrap();
        let w = second_order_volume_correction(&z, 3, 2.0);
        let mean_sq = 1.3f64.powi(2) / (4.0 * PI);
        assert!((w.mean() + mean_sq).abs() < 1e-15);
    }

    #[test]
    fn closed_form_examples() {
        assert!((surface_second_variation(&cos_k(2), 2, 1.0) - 3.0 * PI).abs() < 1e-13);
        assert!(surface_second_variation(&cos_k(1), 2, 1.0).abs() < 1e-15);
        let one = HarmonicExpansion::constant(3, 1.0).unwrap();
        let r: f64 = 1.7;
        let expected = -2.0 / (r * r) * 4.0 * PI * r * r;
        assert!((surface_second_variation(&one, 3, r) - expected).abs() < 1e-12);
    }

    #[test]
    fn general_examples() {
        let zero = LinearField::zero();
        let s = surface_second_variation_general(&LinearField::translation(0), &zero, 2, 1.0, 64).unwrap();
        assert!(s.abs() < 1e-13);
        let s = surface_second_variation_general(
            &LinearField::rotation(),
            &LinearField::rotation_second_order(),
            2,
            1.0,
            64,
        )
        .unwrap();
        assert!(s.abs() < 1e-13);
        let p = PerturbationField::volume_preserving(2, 1.0, cos_k(2)).unwrap();
        let pair = p.radial_ambient().unwrap();
        let s = surface_second_variation_general(pair.v.as_ref(), pair.w.as_ref(), 2, 1.0, 64).unwrap();
        assert!((s - 3.0 * PI).abs() < 1e-12);
        let m = surface_second_variation_from_metric(pair.v.as_ref(), pair.w.as_ref(), 2, 1.0, 64).unwrap();
        assert!((m - 3.0 * PI).abs() < 1e-12);
    }
}

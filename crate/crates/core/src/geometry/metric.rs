//! Pointwise t-expansions of the volume element J(t), the pulled-back
//! coefficient matrix A(t) and the surface element m(t).

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::Serialize;

use super::field::{tangent_projector, AmbientField};
use crate::error::{check_dimension, Result};

/// Taylor coefficients at t = 0 (values, first and second derivatives).
/// Surface quantities refer to the sphere through x, with ν = x/|x|.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricExpansion {
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub a0: DMatrix<f64>,
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub sigma_a2: f64,
}

fn block(n: usize, m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| m[(i, j)])
}

pub fn metric_expansions(
    n: usize,
    v: &dyn AmbientField,
    w: &dyn AmbientField,
    x: &Vector3<f64>,
) -> Result<MetricExpansion> {
    check_dimension(n)?;
    let d = v.jacobian(x);
    let dw = w.jacobian(x);
    let id = super::field::ambient_identity(n);
    let div_v = d.trace();
    let div_w = dw.trace();
    let d_colon_d = (d * d).trace();
    let sym = d + d.transpose();

    let j2 = div_v * div_v - d_colon_d + div_w;
    let a1 = div_v * id - sym;
    let a2 = (div_v * div_v - d_colon_d) * id
        + 2.0 * (d * d + (d * d).transpose())
        + 2.0 * d * d.transpose()
        - 2.0 * div_v * sym
        + div_w * id
        - (dw + dw.transpose());

    let rho = x.norm();
    let (sigma_a, sigma_b, sigma_a2, m1, m2) = if rho > 0.0 {
        let nu = x / rho;
        let p = tangent_projector(n, &nu);
        let s = p * sym * p;
        let sigma_a = 2.0 * (p * d).trace();
        let sigma_a2 = (s * s).trace();
        let sigma_b = 2.0 * (p * d.transpose() * d * p).trace() + 2.0 * (p * dw).trace();
        let m2 = 0.5 * sigma_b - 0.5 * sigma_a2 + 0.25 * sigma_a * sigma_a;
        (sigma_a, sigma_b, sigma_a2, 0.5 * sigma_a, m2)
    } else {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    };

    Ok(MetricExpansion {
        j0: 1.0,
        j1: div_v,
        j2,
        m0: 1.0,
        m1,
        m2,
        a0: DMatrix::identity(n, n),
        a1: block(n, &a1),
        a2: block(n, &a2),
        sigma_a,
        sigma_b,
        sigma_a2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::field::LinearField;

    // For affine fields the map y = x + tv + t²/2 w has the constant Jacobian
    // I + tD + t²/2 Dw, so J(t), A(t) and m(t) are available exactly.
    fn exact(n: usize, v: &LinearField, w: &LinearField, x: &Vector3<f64>, t: f64) -> (f64, DMatrix<f64>, f64) {
        let jac = block(n, &(Matrix3::identity() + t * v.matrix + 0.5 * t * t * w.matrix));
        let det = jac.determinant();
        let inv = jac.clone().try_inverse().unwrap();
        let a = &inv * inv.transpose() * det;
        let nu = x / x.norm();
        let p = tangent_projector(n, &nu);
        // Surface element ratio: for n = 2 the stretch of the unit tangent,
        // for n = 3 the area stretch of a tangent frame.
        let tangents: Vec<Vector3<f64>> = (0..3)
            .map(|k| p.column(k).into_owned())
            .filter(|c| c.norm() > 1e-3)
            .collect();
        let e1 = tangents[0].normalize();
        let full = Matrix3::identity() + t * v.matrix + 0.5 * t * t * w.matrix;
        let m = if n == 2 {
            (full * e1).norm()
        } else {
            let e2 = nu.cross(&e1);
            (full * e1).cross(&(full * e2)).norm()
        };
        (det, a, m)
    }

    fn check(n: usize, v: LinearField, w: LinearField, x: Vector3<f64>) {
        let me = metric_expansions(n, &v, &w, &x).unwrap();
        let h = 1e-3;
        let (j_p, a_p, m_p) = exact(n, &v, &w, &x, h);
        let (j_m, a_m, m_m) = exact(n, &v, &w, &x, -h);
        let (j_0, a_0, m_0) = exact(n, &v, &w, &x, 0.0);
        let d1 = |p: f64, m: f64| (p - m) / (2.0 * h);
        let d2 = |p: f64, z: f64, m: f64| (p - 2.0 * z + m) / (h * h);
        assert!((d1(j_p, j_m) - me.j1).abs() < 1e-5);
        assert!((d2(j_p, j_0, j_m) - me.j2).abs() < 1e-5);
        assert!((d1(m_p, m_m) - me.m1).abs() < 1e-5);
        assert!((d2(m_p, m_0, m_m) - me.m2).abs() < 1e-5, "{} vs {}", d2(m_p, m_0, m_m), me.m2);
        for i in 0..n {
            for j in 0..n {
                assert!((d1(a_p[(i, j)], a_m[(i, j)]) - me.a1[(i, j)]).abs() < 1e-5);
                let fd = d2(a_p[(i, j)], a_0[(i, j)], a_m[(i, j)]);
                assert!((fd - me.a2[(i, j)]).abs() < 1e-5, "A2[{i}{j}] {fd} vs {}", me.a2[(i, j)]);
            }
        }
    }

    #[test]
    fn matches_exact_affine_maps() {
        let v = LinearField {
            matrix: Matrix3::new(0.3, -0.7, 0.0, 0.2, 0.5, 0.0, 0.0, 0.0, 0.0),
            offset: Vector3::new(0.1, -0.2, 0.0),
        };
        let w = LinearField {
            matrix: Matrix3::new(-0.4, 0.1, 0.0, 0.6, 0.2, 0.0, 0.0, 0.0, 0.0),
            offset: Vector3::zeros(),
        };
        check(2, v, w, Vector3::new(0.6, 0.8, 0.0));
        let v3 = LinearField {
            matrix: Matrix3::new(0.3, -0.7, 0.1, 0.2, 0.5, -0.3, 0.4, 0.0, -0.2),
            offset: Vector3::zeros(),
        };
        let w3 = LinearField {
            matrix: Matrix3::new(0.1, 0.2, 0.3, -0.1, 0.0, 0.5, 0.2, -0.4, 0.1),
            offset: Vector3::zeros(),
        };
        check(3, v3, w3, Vector3::new(0.36, 0.48, 0.8));
    }

    #[test]
    fn simple_fields() {
        let x = Vector3::new(0.6, 0.8, 0.0);
        let me = metric_expansions(2, &LinearField::translation(0), &LinearField::zero(), &x).unwrap();
        assert_eq!((me.j1, me.j2), (0.0, 0.0));
        assert!(me.a1.amax() == 0.0);
        let me = metric_expansions(2, &LinearField::dilation(2), &LinearField::zero(), &x).unwrap();
        assert_eq!((me.j1, me.j2), (2.0, 2.0));
        assert!(me.a1.amax() == 0.0 && me.a2.amax() == 0.0);
        let me = metric_expansions(2, &LinearField::rotation(), &LinearField::zero(), &x).unwrap();
        assert_eq!((me.j1, me.j2), (0.0, 2.0));
        let me = metric_expansions(
            2,
            &LinearField::rotation(),
            &LinearField::rotation_second_order(),
            &x,
        )
        .unwrap();
        assert!(me.j2.abs() < 1e-15 && me.m1.abs() < 1e-15 && me.m2.abs() < 1e-15);
    }
}

//! Real spherical harmonics orthonormal on the unit sphere, their tangential
//! gradients, and harmonic expansions of boundary functions.
//!
//! Index convention (0-based `i`): for degree `s ≥ 1`, `i = 0` is the
//! cosine-type (n = 2) or zonal (n = 3) member. For n = 2, `i = 1` is
//! `sin(sθ)`. For n = 3, `i = 2m - 1` is `cos(mφ)` and `i = 2m` is `sin(mφ)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_dimension, Error, Result};
use crate::quadrature::SphereNode;

/// Laplace–Beltrami eigenvalue μ_s = s(s+n-2) and multiplicity d_s on S^{n-1}.
pub fn lb_eigen(s: usize, n: usize) -> (f64, usize) {
    let mu = (s * (s + n - 2)) as f64;
    (mu, multiplicity(s, n))
}

/// d_s = C(s+n-1, n-1) - C(s+n-3, n-1).
pub fn multiplicity(s: usize, n: usize) -> usize {
    let binom = |a: usize, b: usize| -> usize {
        if b > a {
            return 0;
        }
        (0..b).fold(1usize, |acc, k| acc * (a - k) / (k + 1))
    };
    let lower = if s >= 2 { binom(s + n - 3, n - 1) } else { 0 };
    binom(s + n - 1, n - 1) - lower
}

/// All (s, i) pairs with s ≤ max_degree.
pub fn harmonic_indices(n: usize, max_degree: usize) -> Vec<(usize, usize)> {
    (0..=max_degree)
        .flat_map(|s| (0..multiplicity(s, n)).map(move |i| (s, i)))
        .collect()
}

fn check_index(n: usize, s: usize, i: usize) -> Result<()> {
    check_dimension(n)?;
    if i >= multiplicity(s, n) {
        return Err(Error::HarmonicIndex { n, degree: s, index: i });
    }
    Ok(())
}

/// Angles of a unit direction: (θ, φ) with φ = 0 for n = 2.
pub fn angles_of(n: usize, direction: &[f64]) -> (f64, f64) {
    if n == 2 {
        (direction[1].atan2(direction[0]), 0.0)
    } else {
        let r = (direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2])
            .sqrt();
        let z = (direction[2] / r).clamp(-1.0, 1.0);
        (z.acos(), direction[1].atan2(direction[0]))
    }
}

/// Associated Legendre data at x = cos θ, without the Condon–Shortley phase:
/// `p[l][m] = P_l^m`, `q[l][m] = P_l^m / sin θ` (m ≥ 1), `dp[l][m] = dP_l^m/dθ`.
struct LegendreTable {
    p: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    dp: Vec<Vec<f64>>,
}

impl LegendreTable {
    fn new(lmax: usize, theta: f64) -> Self {
        let x = theta.cos();
        let sn = theta.sin();
        let mut p = vec![vec![0.0; lmax + 2]; lmax + 2];
        let mut q = vec![vec![0.0; lmax + 2]; lmax + 2];
        let fill = |table: &mut Vec<Vec<f64>>, m: usize, seed: f64| {
            table[m][m] = seed;
            if m < lmax + 1 {
                table[m + 1][m] = x * (2 * m + 1) as f64 * seed;
            }
            for l in (m + 2)..=(lmax + 1) {
                table[l][m] = ((2 * l - 1) as f64 * x * table[l - 1][m]
                    - (l + m - 1) as f64 * table[l - 2][m])
                    / (l - m) as f64;
            }
        };
        let mut double_factorial = 1.0; // (2m-1)!!
        for m in 0..=(lmax + 1) {
            if m > 0 {
                double_factorial *= (2 * m - 1) as f64;
            }
            fill(&mut p, m, double_factorial * sn.powi(m as i32));
            if m > 0 {
                fill(&mut q, m, double_factorial * sn.powi(m as i32 - 1));
            }
        }
        let mut dp = vec![vec![0.0; lmax + 1]; lmax + 1];
        for l in 0..=lmax {
            dp[l][0] = -p[l][1];
            for m in 1..=l {
                let upper = if m < l { p[l][m + 1] } else { 0.0 };
                dp[l][m] = 0.5 * ((l + m) as f64 * (l - m + 1) as f64 * p[l][m - 1] - upper);
            }
        }
        Self { p, q, dp }
    }
}

fn norm_factor(l: usize, m: usize) -> f64 {
    let mut ratio = 1.0; // (l-m)!/(l+m)!
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    let base = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    if m == 0 {
        base
    } else {
        base * 2f64.sqrt()
    }
}

/// Value and Cartesian tangential gradient on the unit sphere.
fn value_and_gradient_angles(n: usize, s: usize, i: usize, theta: f64, phi: f64) -> (f64, [f64; 3]) {
    if n == 2 {
        let e_theta = [-theta.sin(), theta.cos(), 0.0];
        if s == 0 {
            return (1.0 / (2.0 * PI).sqrt(), [0.0; 3]);
        }
        let c = 1.0 / PI.sqrt();
        let sf = s as f64;
        let (val, d) = if i == 0 {
            (c * (sf * theta).cos(), -c * sf * (sf * theta).sin())
        } else {
            (c * (sf * theta).sin(), c * sf * (sf * theta).cos())
        };
        return (val, [d * e_theta[0], d * e_theta[1], 0.0]);
    }
    let table = LegendreTable::new(s, theta);
    value_and_gradient_from_table(&table, s, i, theta, phi)
}

fn value_and_gradient_from_table(
    table: &LegendreTable,
    s: usize,
    i: usize,
    theta: f64,
    phi: f64,
) -> (f64, [f64; 3]) {
    let (ct, st) = (theta.cos(), theta.sin());
    let (cp, sp) = (phi.cos(), phi.sin());
    let e_theta = [ct * cp, ct * sp, -st];
    let e_phi = [-sp, cp, 0.0];
    let m = i.div_ceil(2);
    let k = norm_factor(s, m);
    let (val, d_theta, d_phi_over_sin) = if m == 0 {
        (k * table.p[s][0], k * table.dp[s][0], 0.0)
    } else {
        let mf = m as f64;
        let (trig, dtrig) = if i % 2 == 1 {
            ((mf * phi).cos(), -mf * (mf * phi).sin())
        } else {
            ((mf * phi).sin(), mf * (mf * phi).cos())
        };
        (k * table.p[s][m] * trig, k * table.dp[s][m] * trig, k * table.q[s][m] * dtrig)
    };
    let grad = [
        d_theta * e_theta[0] + d_phi_over_sin * e_phi[0],
        d_theta * e_theta[1] + d_phi_over_sin * e_phi[1],
        d_theta * e_theta[2] + d_phi_over_sin * e_phi[2],
    ];
    (val, grad)
}

/// Y_{s,i}(direction), orthonormal on S^{n-1}.
pub fn spherical_harmonic(n: usize, s: usize, i: usize, direction: &[f64]) -> Result<f64> {
    check_index(n, s, i)?;
    let (theta, phi) = angles_of(n, direction);
    Ok(value_and_gradient_angles(n, s, i, theta, phi).0)
}

/// Y_{s,i} and its tangential gradient ∇*Y_{s,i} (Cartesian, on the unit sphere).
pub fn spherical_harmonic_with_gradient(
    n: usize,
    s: usize,
    i: usize,
    direction: &[f64],
) -> Result<(f64, [f64; 3])> {
    check_index(n, s, i)?;
    let (theta, phi) = angles_of(n, direction);
    Ok(value_and_gradient_angles(n, s, i, theta, phi))
}

/// Tabulated Y_{s,i} and |∇*Y_{s,i}| on the nodes of a sphere rule.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub n: usize,
    pub max_degree: usize,
    pub indices: Vec<(usize, usize)>,
    /// `values[node][k]` for `indices[k]`.
    pub values: Vec<Vec<f64>>,
    pub gradient_norms: Vec<Vec<f64>>,
}

impl HarmonicBasis {
    pub fn new(n: usize, max_degree: usize, nodes: &[SphereNode]) -> Result<Self> {
        check_dimension(n)?;
        let indices = harmonic_indices(n, max_degree);
        let mut values = Vec::with_capacity(nodes.len());
        let mut gradient_norms = Vec::with_capacity(nodes.len());
        for node in nodes {
            let evals = evaluate_all(n, max_degree, node.theta, node.phi, &indices);
            values.push(evals.iter().map(|(v, _)| *v).collect());
            gradient_norms.push(
                evals
                    .iter()
                    .map(|(_, g)| (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt())
                    .collect(),
            );
        }
        Ok(Self { n, max_degree, indices, values, gradient_norms })
    }
}

pub(crate) fn evaluate_all(
    n: usize,
    max_degree: usize,
    theta: f64,
    phi: f64,
    indices: &[(usize, usize)],
) -> Vec<(f64, [f64; 3])> {
    if n == 2 {
        indices
            .iter()
            .map(|&(s, i)| value_and_gradient_angles(2, s, i, theta, phi))
            .collect()
    } else {
        let table = LegendreTable::new(max_degree, theta);
        indices
            .iter()
            .map(|&(s, i)| value_and_gradient_from_table(&table, s, i, theta, phi))
            .collect()
    }
}

/// A real function on S^{n-1} given by its coefficients in the orthonormal
/// harmonic basis.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "ExpansionRepr", into = "ExpansionRepr")]
pub struct HarmonicExpansion {
    pub n: usize,
    coeffs: BTreeMap<(usize, usize), f64>,
}

/// Wire form: `{"n": 2, "terms": [[s, i, c], ...]}`.
#[derive(Serialize, Deserialize)]
struct ExpansionRepr {
    n: usize,
    terms: Vec<(usize, usize, f64)>,
}

impl From<HarmonicExpansion> for ExpansionRepr {
    fn from(e: HarmonicExpansion) -> Self {
        Self { n: e.n, terms: e.term_list() }
    }
}

impl TryFrom<ExpansionRepr> for HarmonicExpansion {
    type Error = Error;
    fn try_from(r: ExpansionRepr) -> Result<Self> {
        Self::from_terms(r.n, &r.terms)
    }
}

impl HarmonicExpansion {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: BTreeMap::new() }
    }

    pub fn from_terms(n: usize, terms: &[(usize, usize, f64)]) -> Result<Self> {
        check_dimension(n)?;
        let mut e = Self::zero(n);
        for &(s, i, c) in terms {
            e.add_term(s, i, c)?;
        }
        Ok(e)
    }

    /// A single harmonic with coefficient `c`.
    pub fn single(n: usize, s: usize, i: usize, c: f64) -> Result<Self> {
        Self::from_terms(n, &[(s, i, c)])
    }

    /// The constant function `value`.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        check_dimension(n)?;
        let y0 = if n == 2 { 1.0 / (2.0 * PI).sqrt() } else { 1.0 / (4.0 * PI).sqrt() };
        Self::single(n, 0, 0, value / y0)
    }

    pub fn add_term(&mut self, s: usize, i: usize, c: f64) -> Result<()> {
        check_index(self.n, s, i)?;
        *self.coeffs.entry((s, i)).or_insert(0.0) += c;
        Ok(())
    }

    pub fn coefficient(&self, s: usize, i: usize) -> f64 {
        self.coeffs.get(&(s, i)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.coeffs.iter().map(|(k, v)| (*k, *v))
    }

    /// Non-zero terms as (s, i, c) triples in ascending (s, i) order.
    pub fn term_list(&self) -> Vec<(usize, usize, f64)> {
        self.coeffs.iter().map(|(&(s, i), &c)| (s, i, c)).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| *c == 0.0)
    }

    /// Σ c², i.e. ∫_{S^{n-1}} f² dσ.
    pub fn norm_squared(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }

    /// Mean over the unit sphere.
    pub fn mean(&self) -> f64 {
        let y0 = if self.n == 2 { 1.0 / (2.0 * PI).sqrt() } else { 1.0 / (4.0 * PI).sqrt() };
        self.coefficient(0, 0) * y0
    }

    /// Root of Σ c² over degree-s coefficients.
    pub fn degree_norm(&self, s: usize) -> f64 {
        self.coeffs
            .iter()
            .filter(|(k, _)| k.0 == s)
            .map(|(_, c)| c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Removes the s = 0 coefficient.
    pub fn without_mean(&self) -> Self {
        let mut e = self.clone();
        e.coeffs.remove(&(0, 0));
        e
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut e = self.clone();
        for c in e.coeffs.values_mut() {
            *c *= factor;
        }
        e
    }

    /// Value at angles (θ, φ).
    pub fn value_at(&self, theta: f64, phi: f64) -> f64 {
        self.value_and_gradient_at(theta, phi).0
    }

    /// Value and tangential gradient on the unit sphere at (θ, φ).
    pub fn value_and_gradient_at(&self, theta: f64, phi: f64) -> (f64, [f64; 3]) {
        if self.coeffs.is_empty() {
            return (0.0, [0.0; 3]);
        }
        let indices: Vec<(usize, usize)> = self.coeffs.keys().copied().collect();
        let evals = evaluate_all(self.n, self.max_degree(), theta, phi, &indices);
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        for ((_, c), (v, g)) in self.coeffs.iter().zip(evals) {
            value += c * v;
            for k in 0..3 {
                grad[k] += c * g[k];
            }
        }
        (value, grad)
    }

    /// Value at a unit direction.
    pub fn value(&self, direction: &[f64]) -> f64 {
        let (t, p) = angles_of(self.n, direction);
        self.value_at(t, p)
    }

    pub fn value_and_gradient(&self, direction: &[f64]) -> (f64, [f64; 3]) {
        let (t, p) = angles_of(self.n, direction);
        self.value_and_gradient_at(t, p)
    }

    /// ∂_θ f and ∂_φ f at (θ, φ) (for n = 2 the second entry is 0).
    pub fn angular_derivatives(&self, theta: f64, phi: f64) -> (f64, f64) {
        let (_, g) = self.value_and_gradient_at(theta, phi);
        if self.n == 2 {
            let e_theta = [-theta.sin(), theta.cos()];
            (g[0] * e_theta[0] + g[1] * e_theta[1], 0.0)
        } else {
            let (ct, st) = (theta.cos(), theta.sin());
            let (cp, sp) = (phi.cos(), phi.sin());
            let d_theta = g[0] * ct * cp + g[1] * ct * sp - g[2] * st;
            let d_phi = (-g[0] * sp + g[1] * cp) * st;
            (d_theta, d_phi)
        }
    }

    /// Projects a function onto harmonics of degree ≤ max_degree by quadrature.
    pub fn project<F: FnMut(&SphereNode) -> f64>(
        n: usize,
        max_degree: usize,
        nodes: &[SphereNode],
        mut f: F,
    ) -> Result<Self> {
        check_dimension(n)?;
        let indices = harmonic_indices(n, max_degree);
        let mut acc = vec![0.0; indices.len()];
        for node in nodes {
            let fx = f(node);
            let evals = evaluate_all(n, max_degree, node.theta, node.phi, &indices);
            for (a, (y, _)) in acc.iter_mut().zip(evals) {
                *a += node.weight * fx * y;
            }
        }
        let mut e = Self::zero(n);
        for ((s, i), c) in indices.into_iter().zip(acc) {
            if c.abs() > 1e-15 {
                e.coeffs.insert((s, i), c);
            }
        }
        Ok(e)
    }
}

//! Bessel functions of the first kind for integer and half-integer orders.
//!
//! Small arguments use the power series. Larger arguments use Miller's
//! backward recurrence, normalized by `J_0 + 2 Σ J_{2k} = 1` for integer
//! orders and by `Σ (2l+1) j_l² = 1` for half-integer orders (spherical
//! Bessel functions). Both are accurate to a few ulps of `max |J|` on
//! `x ∈ [0, 50]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 1.0;
const RESCALE: f64 = 1e130;

/// Order class: ν = base + k with base ∈ {0, 1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OrderClass {
    Integer,
    HalfInteger,
}

fn classify(order: f64) -> Result<(OrderClass, usize)> {
    if !(order >= 0.0) || !order.is_finite() {
        return Err(Error::UnsupportedBesselOrder(order));
    }
    let twice = 2.0 * order;
    if (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::UnsupportedBesselOrder(order));
    }
    let twice = twice.round() as usize;
    if twice.is_multiple_of(2) {
        Ok((OrderClass::Integer, twice / 2))
    } else {
        Ok((OrderClass::HalfInteger, twice / 2))
    }
}

fn base_of(class: OrderClass) -> f64 {
    match class {
        OrderClass::Integer => 0.0,
        OrderClass::HalfInteger => 0.5,
    }
}

/// Γ(ν + 1) for ν ∈ ½ℕ.
fn gamma_plus_one(order: f64) -> f64 {
    // Γ(1) = 1, Γ(3/2) = √π / 2, then Γ(x + 1) = x Γ(x).
    let mut x;
    let mut g;
    if (order - order.round()).abs() < 1e-12 {
        x = 1.0;
        g = 1.0;
    } else {
        x = 1.5;
        g = PI.sqrt() / 2.0;
    }
    while x < order + 1.0 - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Σ_k (-1)^k (x/2)^{2k} / (k! Γ(k+ν+1)) · Γ(ν+1), i.e. the series of
/// Γ(ν+1) (x/2)^{-ν} J_ν(x).
fn reduced_series(order: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * (kf + order));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// J_{base + k}(x) for k = 0..count by Miller's algorithm, x > 0.
fn miller_sequence(class: OrderClass, count: usize, x: f64) -> Vec<f64> {
    let base = base_of(class);
    let top = (count as f64).max(x);
    let mut start = (top + 20.0 + (40.0 * top).sqrt()).ceil() as usize + 10;
    if start % 2 == 1 {
        start += 1;
    }
    let mut values = vec![0.0; count.max(2)];
    let mut next = 0.0; // f_{k+1}
    let mut current = 1e-30; // f_k
    let mut norm = 0.0;
    let add_to_norm = |k: usize, f: f64| -> f64 {
        match class {
            OrderClass::Integer => {
                if k == 0 {
                    f
                } else if k.is_multiple_of(2) {
                    2.0 * f
                } else {
                    0.0
                }
            }
            OrderClass::HalfInteger => (2 * k + 1) as f64 * f * f,
        }
    };
    let mut k = start;
    loop {
        if k < values.len() {
            values[k] = current;
        }
        norm += add_to_norm(k, current);
        if k == 0 {
            break;
        }
        let prev = 2.0 * (base + k as f64) / x * current - next;
        next = current;
        current = prev;
        k -= 1;
        if current.abs() > RESCALE {
            let s = 1.0 / RESCALE;
            current *= s;
            next *= s;
            for v in values.iter_mut() {
                *v *= s;
            }
            norm *= match class {
                OrderClass::Integer => s,
                OrderClass::HalfInteger => s * s,
            };
        }
    }
    let scale = match class {
        OrderClass::Integer => 1.0 / norm,
        OrderClass::HalfInteger => {
            let magnitude = (2.0 * x / PI / norm).sqrt();
            // Fix the sign from whichever closed form is larger.
            let pref = (2.0 / (PI * x)).sqrt();
            let j_half = pref * x.sin();
            let j_three_half = pref * (x.sin() / x - x.cos());
            if j_half.abs() >= j_three_half.abs() {
                magnitude * (j_half * values[0]).signum()
            } else {
                magnitude * (j_three_half * values[1]).signum()
            }
        }
    };
    values.truncate(count);
    values.iter().map(|v| v * scale).collect()
}

/// J_ν(x) for ν ∈ {0, 1/2, 1, 3/2, …} and x ≥ 0.
pub fn bessel_j(order: f64, x: f64) -> Result<f64> {
    let (class, k) = classify(order)?;
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: format!("Bessel argument must be non-negative, got {x}"),
        });
    }
    if x == 0.0 {
        return Ok(if order == 0.0 { 1.0 } else { 0.0 });
    }
    if x <= SERIES_CUTOFF {
        return Ok((0.5 * x).powf(order) / gamma_plus_one(order) * reduced_series(order, x));
    }
    Ok(miller_sequence(class, k + 1, x)[k])
}

/// z^{-ν} J_ν(z), smooth through z = 0 where it equals 1 / (2^ν Γ(ν+1)).
pub fn bessel_j_scaled(order: f64, z: f64) -> Result<f64> {
    classify(order)?;
    let z = z.abs();
    if z <= SERIES_CUTOFF {
        return Ok(reduced_series(order, z) / (2f64.powf(order) * gamma_plus_one(order)));
    }
    Ok(bessel_j(order, z)? / z.powf(order))
}

/// J_{ν₀ + k}(x) for k = 0..count, where ν₀ ∈ {0, 1/2}.
pub fn bessel_j_sequence(base_order: f64, count: usize, x: f64) -> Result<Vec<f64>> {
    let (class, k0) = classify(base_order)?;
    if k0 != 0 {
        return Err(Error::UnsupportedBesselOrder(base_order));
    }
    if x == 0.0 {
        let mut v = vec![0.0; count];
        if class == OrderClass::Integer && count > 0 {
            v[0] = 1.0;
        }
        return Ok(v);
    }
    if x <= SERIES_CUTOFF {
        return (0..count)
            .map(|k| bessel_j(base_order + k as f64, x))
            .collect();
    }
    Ok(miller_sequence(class, count, x))
}

/// dJ_ν/dx = (J_{ν-1} - J_{ν+1}) / 2, with J_0' = -J_1.
pub fn bessel_j_derivative(order: f64, x: f64) -> Result<f64> {
    if order == 0.0 {
        return Ok(-bessel_j(1.0, x)?);
    }
    if order < 1.0 {
        // ν = 1/2: J' = J_{-1/2}/2 - J_{3/2}/2 with J_{-1/2} = √(2/πx) cos x.
        if x == 0.0 {
            return Err(Error::InvalidParameter {
                name: "x",
                reason: "J_{1/2} is not differentiable at 0".into(),
            });
        }
        let j_minus = (2.0 / (PI * x)).sqrt() * x.cos();
        return Ok(0.5 * (j_minus - bessel_j(1.5, x)?));
    }
    Ok(0.5 * (bessel_j(order - 1.0, x)? - bessel_j(order + 1.0, x)?))
}

/// k-th positive zero of J_ν (k ≥ 1), by scanning for a sign change and bisecting to 1e-14.
pub fn bessel_zero(order: f64, k: usize) -> Result<f64> {
    classify(order)?;
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "zeros are counted from 1".into(),
        });
    }
    let step = 0.05;
    let mut lo = 1e-3;
    let mut f_lo = bessel_j(order, lo)?;
    let mut found = 0;
    while lo < 200.0 {
        let hi = lo + step;
        let f_hi = bessel_j(order, hi)?;
        if f_lo == 0.0 || f_lo * f_hi < 0.0 {
            found += 1;
            if found == k {
                return bisect(|x| bessel_j(order, x), lo, hi, 1e-14);
            }
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::Bracketing { lo: 1e-3, hi: 200.0, f_lo: f64::NAN, f_hi: f64::NAN })
}

/// Bisection on [lo, hi] for a sign-changing function.
pub(crate) fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo * f_hi > 0.0 {
        return Err(Error::Bracketing { lo, hi, f_lo, f_hi });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * mid.abs().max(1.0) || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid * f_lo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

//! A priori bounds on envelope problems.
//!
//! All three take an envelope `½xᵀ(A ± δI)x` with `A` diagonal and sorted
//! descending, as built by [`ModelEnvelope`]. The tracked axis for Morse
//! index `m` is `k = n − m`, the least negative of the negative directions.

use crate::error::{Error, Result};
use crate::numkit::{Frame, Matrix, Vector};
use crate::objective::ModelEnvelope;

/// Index of the eigen-direction that carries the optimizing pair.
pub fn tracked_axis(n: usize, m: usize) -> usize {
    n - m
}

/// `|unit(x)·s − e_k|_∞`, minimized over the sign `s`.
pub fn direction_error(x: &Vector, k: usize) -> Option<f64> {
    let n = x.norm();
    if n == 0.0 {
        return None;
    }
    let err = |s: f64| {
        x.iter()
            .enumerate()
            .map(|(i, &c)| (s * c / n - if i == k { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    };
    Some(err(1.0).min(err(-1.0)))
}

/// Interval for `|x|` when `h(x) = l < 0` and `x` points within `θ` of `±e_k`.
///
/// `None` when `θ` is too large for the upper bound to exist.
pub fn length_estimate_bounds(env: &ModelEnvelope, k: usize, level: f64, theta: f64) -> Option<(f64, f64)> {
    let n = env.diag.len();
    // Coefficients of the Σ a_i x_i² form.
    let a = |i: usize| 0.5 * env.diag[i];
    let d = 0.5 * env.delta;
    let nm1 = (n - 1) as f64;
    let a_top = a(0);
    let a_bottom = a(n - 1);
    let lo_den = (a(k) - d) * (1.0 + theta).powi(2) + nm1 * (a_bottom - d) * theta * theta;
    let hi_den = (a(k) + d) * (1.0 - theta).powi(2) + nm1 * (a_top + d) * theta * theta;
    if !(level < 0.0 && lo_den < 0.0 && hi_den < 0.0 && theta < 1.0) {
        return None;
    }
    let lower = (1.0 - theta) * (level / lo_den).sqrt();
    let upper = (((1.0 + theta).powi(2) + nm1 * theta * theta) * level / hi_den).sqrt();
    Some((lower, upper))
}

/// Interval for the min-max diameter at level `l` from the two envelope quadratics.
pub fn diameter_envelope_bounds(env: &ModelEnvelope, m: usize, level: f64) -> Result<(f64, f64)> {
    let n = env.diag.len();
    if m == 0 || m > n {
        return Err(Error::config("morse-index", format!("must lie in 1..={n}, got {m}")));
    }
    let k = tracked_axis(n, m);
    let lo = env.diag[k] - env.delta;
    let hi = env.diag[k] + env.delta;
    if !(level < 0.0 && hi < 0.0) {
        return Err(Error::InvalidLevel(level));
    }
    Ok((2.0 * (2.0 * level / lo).sqrt(), 2.0 * (2.0 * level / hi).sqrt()))
}

/// `−½|A−δI|(1 + |[Vᵀ(A−δI)V]⁻¹| |Vᵀ| |A−δI|)² |z|²` with `V` a frame of `S^⊥`.
pub fn critical_value_lower_bound(env: &ModelEnvelope, z: &Vector, complement: &Frame) -> Result<f64> {
    let n = env.diag.len();
    if z.len() != n || complement.ambient_dim() != n {
        return Err(Error::DimensionMismatch("critical value bound".into()));
    }
    let shifted = Matrix::from_diagonal(&env.diag.map(|a| a - env.delta));
    let v = complement.matrix();
    let reduced = v.transpose() * &shifted * v;
    let inv = reduced.clone().try_inverse().ok_or(Error::RankDeficient {
        smallest: 0.0,
        largest: reduced.norm(),
    })?;
    let norm = |m: &Matrix| m.singular_values().max();
    let a_norm = norm(&shifted);
    let factor = 1.0 + norm(&inv) * norm(&v.transpose()) * a_norm;
    Ok(-0.5 * a_norm * factor * factor * z.norm_squared())
}

//! Grid oracle for slice diameters in low dimension.

use super::slice::Slice;
use super::{AffineSubspace, TrustRegion};
use crate::error::{Error, Result};
use crate::numkit::Vector;
use crate::objective::Objective;

#[derive(Debug, Clone)]
pub struct BruteForceDiameter {
    pub diameter: f64,
    pub x: Vector,
    pub y: Vector,
    /// Grid error bound `2√k · diam(S ∩ U) / resolution`.
    pub tolerance: f64,
    pub empty: bool,
}

/// Diameter of the grid points of `S ∩ lev_{≥l} f ∩ U` (`k ≤ 3`, resolution ≥ 32 per axis).
pub fn brute_force_diameter(
    f: &dyn Objective,
    subspace: &AffineSubspace,
    level: f64,
    region: &TrustRegion,
    resolution: usize,
) -> Result<BruteForceDiameter> {
    let k = subspace.dim();
    if k == 0 || k > 3 {
        return Err(Error::DimensionMismatch(format!("grid search needs 1 ≤ k ≤ 3, got {k}")));
    }
    if resolution < 32 {
        return Err(Error::config("resolution", "must be at least 32"));
    }
    let slice = Slice::new(f, subspace, level, region)?;
    let n = resolution;
    let h = 2.0 * slice.rs / (n - 1) as f64;
    let tolerance = 2.0 * (k as f64).sqrt() * 2.0 * slice.rs / n as f64;

    let total = n.pow(k as u32);
    let index = |i: usize| -> Vec<usize> { (0..k).map(|a| (i / n.pow(a as u32)) % n).collect() };
    let mut inside = vec![false; total];
    for (i, slot) in inside.iter_mut().enumerate() {
        let idx = index(i);
        let w = Vector::from_fn(k, |a, _| slice.wc[a] - slice.rs + h * idx[a] as f64);
        if slice.ball_slack(&w) >= 0.0 {
            *slot = slice.g(&w).map(|v| v >= level).unwrap_or(false);
        }
    }

    // Only points with an outside neighbour can realize the diameter.
    let mut edge = Vec::new();
    for i in 0..total {
        if !inside[i] {
            continue;
        }
        let idx = index(i);
        let mut boundary = false;
        for a in 0..k {
            for delta in [-1i64, 1] {
                let j = idx[a] as i64 + delta;
                if j < 0 || j >= n as i64 {
                    boundary = true;
                    continue;
                }
                let nb = (i as i64 + delta * n.pow(a as u32) as i64) as usize;
                if !inside[nb] {
                    boundary = true;
                }
            }
        }
        if boundary {
            edge.push(Vector::from_fn(k, |a, _| slice.wc[a] - slice.rs + h * idx[a] as f64));
        }
    }

    if edge.is_empty() {
        let z = subspace.point(&slice.wc);
        let any = inside.iter().any(|&b| b);
        return Ok(BruteForceDiameter {
            diameter: 0.0,
            x: z.clone(),
            y: z,
            tolerance,
            empty: !any,
        });
    }
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..edge.len() {
        for j in i + 1..edge.len() {
            let d = (&edge[i] - &edge[j]).norm_squared();
            if d > best {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    Ok(BruteForceDiameter {
        diameter: best.max(0.0).sqrt(),
        x: subspace.point(&edge[bi]),
        y: subspace.point(&edge[bj]),
        tolerance,
        empty: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quadratic_minmax_exact;
    use crate::numkit::Frame;
    use crate::objective::Quadratic;

    #[test]
    fn matches_exact_line() {
        let q = Quadratic::sum_of_squares(&[1.0, -1.0]);
        let exact = quadratic_minmax_exact(&[1.0, -1.0], -1.0).unwrap();
        let u = TrustRegion::new(Vector::zeros(2), 2.0).unwrap();
        let b = brute_force_diameter(&q, &exact.subspace, -1.0, &u, 128).unwrap();
        assert!((b.diameter - exact.diameter).abs() <= 2.0 * 4.0 / 128.0);
        assert!((b.tolerance - 2.0 * 4.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn empty_when_level_too_high() {
        let q = Quadratic::sum_of_squares(&[1.0, -1.0]);
        let s = AffineSubspace::new(Vector::zeros(2), Frame::coordinates(2, &[1])).unwrap();
        let u = TrustRegion::new(Vector::zeros(2), 2.0).unwrap();
        let b = brute_force_diameter(&q, &s, 0.5, &u, 64).unwrap();
        assert!(b.empty);
    }
}

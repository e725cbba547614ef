//! Slices of superlevel sets by affine subspaces.
//!
//! A slice is `S ∩ lev_{≥l} f ∩ U` for an affine subspace `S`, a level `l`
//! and a ball `U`. The inner problem asks for its diameter and a pair of
//! points realizing it.

mod brute;
mod closest;
mod inner;
pub(crate) mod slice;

pub use brute::{brute_force_diameter, BruteForceDiameter};
pub use closest::{closest_point_on_slice, ClosestOptions};
pub use inner::{inner_max_diameter, InnerOptions};

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::numkit::{complete_frame, unit, Frame, Matrix, Vector};
use crate::objective::{eval_grad, Objective};

/// `base + span(frame)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    pub base: Vector,
    pub frame: Frame,
}

impl AffineSubspace {
    pub fn new(base: Vector, frame: Frame) -> Result<Self> {
        if base.len() != frame.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "base of length {} with frame in dimension {}",
                base.len(),
                frame.ambient_dim()
            )));
        }
        Ok(AffineSubspace { base, frame })
    }

    /// The whole space, anchored at `base`.
    pub fn full(base: Vector) -> Self {
        let n = base.len();
        AffineSubspace {
            base,
            frame: Frame::standard(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// `base + V w`.
    pub fn point(&self, w: &Vector) -> Vector {
        &self.base + self.frame.matrix() * w
    }

    /// `Vᵀ(x − base)`.
    pub fn coords(&self, x: &Vector) -> Vector {
        self.frame.matrix().transpose() * (x - &self.base)
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &Vector) -> Vector {
        self.point(&self.coords(x))
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        (x - self.project(x)).norm()
    }

    /// Orthonormal basis of the directions orthogonal to the subspace.
    pub fn complement(&self) -> Frame {
        let full = complete_frame(&self.frame);
        full.columns(self.dim(), self.ambient_dim() - self.dim())
    }

    /// Same directions, new base.
    pub fn rebased(&self, base: Vector) -> Self {
        AffineSubspace {
            base,
            frame: self.frame.clone(),
        }
    }
}

/// Closed ball `{x : |x − center| ≤ radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegion {
    pub center: Vector,
    pub radius: f64,
}

impl TrustRegion {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::config("radius", format!("must be positive, got {radius}")));
        }
        Ok(TrustRegion { center, radius })
    }

    pub fn contains(&self, x: &Vector) -> bool {
        (x - &self.center).norm() <= self.radius
    }

    /// Distance from `x` to the sphere; negative outside.
    pub fn depth(&self, x: &Vector) -> f64 {
        self.radius - (x - &self.center).norm()
    }
}

/// Status bits attached to an [`OptimizingTriple`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TripleFlags {
    /// No point of the slice was found.
    pub empty: bool,
    /// Every search that contributed reached its stopping test.
    pub converged: bool,
    /// An endpoint lies within `1e-6` of the trust-region boundary.
    pub boundary_hit: bool,
    /// A distinct pair reached the same diameter within `1e-6`.
    pub non_unique: bool,
}

/// A subspace together with a diameter-realizing pair of its slice.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizingTriple {
    pub subspace: AffineSubspace,
    pub level: f64,
    pub x: Vector,
    pub y: Vector,
    pub diameter: f64,
    pub flags: TripleFlags,
}

impl OptimizingTriple {
    pub fn midpoint(&self) -> Vector {
        (&self.x + &self.y) * 0.5
    }

    pub(crate) fn empty(subspace: AffineSubspace, level: f64) -> Self {
        let z = subspace.base.clone();
        OptimizingTriple {
            subspace,
            level,
            x: z.clone(),
            y: z,
            diameter: 0.0,
            flags: TripleFlags {
                empty: true,
                converged: true,
                ..Default::default()
            },
        }
    }
}

/// Multipliers of the two-point optimality system and the opposite-gradient residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktCertificate {
    /// `λ₁` fits `2(y − x) ≈ λ₁∇f(x)`.
    pub lambda1: f64,
    /// `λ₂` fits `2(x − y) ≈ λ₂∇f(y)`.
    pub lambda2: f64,
    /// Norm of the part of `λ₁∇f(x) − 2(y − x)` left unexplained.
    pub lambda3: f64,
    /// Norm of the part of `λ₂∇f(y) − 2(x − y)` left unexplained.
    pub lambda4: f64,
    /// `‖unit(∇f(x)) − unit(y − x)‖ + ‖unit(∇f(y)) − unit(x − y)‖`.
    pub residual: f64,
}

/// How far `∇f(x)` and `∇f(y)` are from pointing at each other's point.
pub fn opposite_gradient_residual(f: &dyn Objective, x: &Vector, y: &Vector) -> Result<KktCertificate> {
    let gx = eval_grad(f, x)?;
    let gy = eval_grad(f, y)?;
    if gx.norm() < 1e-12 {
        return Err(Error::ZeroGradient { at: x.as_slice().to_vec() });
    }
    if gy.norm() < 1e-12 {
        return Err(Error::ZeroGradient { at: y.as_slice().to_vec() });
    }
    let d = y - x;
    let dir = unit(&d).ok_or(Error::CoincidentPoints)?;
    let residual = (unit(&gx).unwrap() - &dir).norm() + (unit(&gy).unwrap() + &dir).norm();
    let lambda1 = (2.0 * d.dot(&gx) / gx.norm_squared()).max(0.0);
    let lambda2 = (-2.0 * d.dot(&gy) / gy.norm_squared()).max(0.0);
    let lambda3 = (&gx * lambda1 - &d * 2.0).norm();
    let lambda4 = (&gy * lambda2 + &d * 2.0).norm();
    Ok(KktCertificate {
        lambda1,
        lambda2,
        lambda3,
        lambda4,
        residual,
    })
}

/// Length of the segment through `(d, 0)` cutting the two sides of an
/// isosceles triangle with base angles `α`, when it makes angle `θ` with the base.
pub fn isosceles_segment_length(alpha: f64, d: f64, theta: f64) -> f64 {
    let s = alpha.sin();
    d * (s / theta.sin() + s / (std::f64::consts::PI - 2.0 * alpha - theta).sin())
}

/// Angle minimizing [`isosceles_segment_length`]: `π/2 − α`.
pub fn isosceles_min_segment(alpha: f64, d: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(Error::InvalidLevel(alpha));
    }
    if !(d > 0.0) {
        return Err(Error::InvalidLevel(d));
    }
    Ok(FRAC_PI_2 - alpha)
}

/// Exact solution of the min-max problem for `Σ a_j x_j²`.
///
/// `a` must be strictly descending, nonzero and contain `m ≥ 1` negative
/// entries; `l < 0`. The minimizing subspace is spanned by the last `m`
/// coordinates and the pair lies on the axis of the negative entry closest to zero.
pub fn quadratic_minmax_exact(a: &[f64], l: f64) -> Result<OptimizingTriple> {
    let n = a.len();
    let descending = a.windows(2).all(|w| w[0] > w[1]);
    let m = a.iter().filter(|&&c| c < 0.0).count();
    if n == 0 || !descending || a.iter().any(|&c| c == 0.0) || m == 0 {
        return Err(Error::BadSignature);
    }
    if !(l < 0.0) {
        return Err(Error::InvalidLevel(l));
    }
    let k = n - m;
    let half = (l / a[k]).sqrt();
    let mut x = Vector::zeros(n);
    x[k] = half;
    let idx: Vec<usize> = (k..n).collect();
    let subspace = AffineSubspace::new(Vector::zeros(n), Frame::coordinates(n, &idx))?;
    Ok(OptimizingTriple {
        subspace,
        level: l,
        y: -&x,
        x,
        diameter: 2.0 * half,
        flags: TripleFlags {
            converged: true,
            ..Default::default()
        },
    })
}

/// Projects `v` onto the orthogonal complement of the columns of `basis` (assumed orthonormal).
pub(crate) fn reject(basis: &Matrix, v: &Vector) -> Vector {
    if basis.ncols() == 0 {
        return v.clone();
    }
    let once = v - basis * (basis.transpose() * v);
    &once - basis * (basis.transpose() * &once)
}

/// Lexicographic comparison of two vectors.
pub(crate) fn lex_less(a: &Vector, b: &Vector) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

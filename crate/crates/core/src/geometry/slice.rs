//! Reduced coordinates on a slice and ray searches to its boundary.

use super::{AffineSubspace, TrustRegion};
use crate::error::{Error, Result};
use crate::numkit::{Matrix, Vector};
use crate::objective::{eval, eval_grad, hessian_or_fd, Objective};

/// Samples along a ray before root refinement.
const RAY_SAMPLES: usize = 16;

/// `g(w) = f(base + V w)` restricted to the ball `U ∩ S`, which in
/// reduced coordinates is a ball with center `wc` and radius `rs`.
pub(crate) struct Slice<'a> {
    pub f: &'a dyn Objective,
    pub sub: &'a AffineSubspace,
    pub level: f64,
    pub wc: Vector,
    pub rs: f64,
}

/// A boundary point reached along a ray.
#[derive(Debug, Clone)]
pub(crate) struct Hit {
    pub w: Vector,
    pub sphere: bool,
}

impl<'a> Slice<'a> {
    pub fn new(f: &'a dyn Objective, sub: &'a AffineSubspace, level: f64, region: &TrustRegion) -> Result<Self> {
        if f.dim() != sub.ambient_dim() || region.center.len() != sub.ambient_dim() {
            return Err(Error::DimensionMismatch("objective, subspace and region".into()));
        }
        let wc = sub.coords(&region.center);
        let off = (&region.center - sub.point(&wc)).norm_squared();
        let r2 = region.radius * region.radius - off;
        if r2 <= 0.0 {
            return Err(Error::SubspaceMissesRegion);
        }
        Ok(Slice {
            f,
            sub,
            level,
            wc,
            rs: r2.sqrt(),
        })
    }

    pub fn k(&self) -> usize {
        self.sub.dim()
    }

    pub fn point(&self, w: &Vector) -> Vector {
        self.sub.point(w)
    }

    pub fn g(&self, w: &Vector) -> Result<f64> {
        eval(self.f, &self.point(w))
    }

    pub fn grad(&self, w: &Vector) -> Result<Vector> {
        Ok(self.sub.frame.matrix().transpose() * eval_grad(self.f, &self.point(w))?)
    }

    pub fn hess(&self, w: &Vector) -> Result<Matrix> {
        let v = self.sub.frame.matrix();
        let h = hessian_or_fd(self.f, &self.point(w))?;
        Ok(v.transpose() * h * v)
    }

    pub fn ball_slack(&self, w: &Vector) -> f64 {
        self.rs - (w - &self.wc).norm()
    }

    /// Pulls `w` back into the ball if it left it.
    pub fn clamp(&self, w: &Vector) -> Vector {
        let d = w - &self.wc;
        let n = d.norm();
        if n <= self.rs {
            w.clone()
        } else {
            &self.wc + d * (self.rs / n)
        }
    }

    /// Largest `t ≥ 0` with `a + t u` in the ball (`u` a unit vector).
    pub fn sphere_exit(&self, a: &Vector, u: &Vector) -> f64 {
        let p = a - &self.wc;
        let b = p.dot(u);
        let c = p.norm_squared() - self.rs * self.rs;
        let disc = b * b - c;
        if disc <= 0.0 {
            return 0.0;
        }
        (-b + disc.sqrt()).max(0.0)
    }

    /// First point where the ray `a + t u` leaves `{g ≥ l} ∩ ball`.
    ///
    /// `a` is assumed to satisfy `g(a) ≥ l`.
    pub fn exit(&self, a: &Vector, u: &Vector) -> Result<Hit> {
        let tb = self.sphere_exit(a, u);
        if tb <= 0.0 {
            return Ok(Hit { w: a.clone(), sphere: true });
        }
        let phi = |t: f64| -> Result<f64> { Ok(self.g(&(a + u * t))? - self.level) };
        let mut prev = 0.0;
        for i in 1..=RAY_SAMPLES {
            let t = tb * i as f64 / RAY_SAMPLES as f64;
            let v = phi(t)?;
            if v < 0.0 {
                let t = refine_crossing(&phi, prev, t, v)?;
                return Ok(Hit { w: a + u * t, sphere: false });
            }
            prev = t;
        }
        Ok(Hit { w: a + u * tb, sphere: true })
    }

    /// Outward unit normal of the region at a boundary hit.
    pub fn outward_normal(&self, hit: &Hit, anchor: &Vector) -> Result<Vector> {
        if hit.sphere {
            return Ok((&hit.w - &self.wc) / self.rs);
        }
        let g = self.grad(&hit.w)?;
        let n = g.norm();
        if n > 0.0 {
            Ok(-g / n)
        } else {
            let r = &hit.w - anchor;
            let rn = r.norm();
            Ok(if rn > 0.0 { r / rn } else { r })
        }
    }
}

/// Illinois iteration for a sign change of `phi` on `[lo, hi]` with
/// `phi(lo) ≥ 0 > phi(hi)`. Returns a point on the nonnegative side.
pub(crate) fn refine_crossing<F>(phi: &F, mut lo: f64, mut hi: f64, mut fhi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut flo = phi(lo)?;
    if flo < 0.0 {
        return Ok(lo);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        let mut t = if flo - fhi > 0.0 { lo + (hi - lo) * flo / (flo - fhi) } else { 0.5 * (lo + hi) };
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let v = phi(t)?;
        if v >= 0.0 {
            lo = t;
            flo = v;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = t;
            fhi = v;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
        if flo == 0.0 {
            break;
        }
    }
    Ok(lo)
}

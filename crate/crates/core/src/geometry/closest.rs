//! Nearest point of a sublevel set within an affine subspace.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::slice::refine_crossing;
use super::{lex_less, AffineSubspace};
use crate::error::{Error, Result};
use crate::numkit::{unit, Matrix, Vector};
use crate::objective::{eval, eval_grad, hessian_or_fd, Objective};

const RAY_SAMPLES: usize = 64;

#[derive(Debug, Clone)]
pub struct ClosestOptions {
    /// Search radius around the query point.
    pub radius: f64,
    pub seed: u64,
    /// Extra start directions (ambient, projected onto the subspace).
    pub seeds: Vec<Vector>,
    pub random_starts: usize,
}

impl ClosestOptions {
    pub fn with_radius(radius: f64) -> Self {
        ClosestOptions {
            radius,
            seed: 0,
            seeds: Vec::new(),
            random_starts: 4,
        }
    }
}

/// The point of `S ∩ lev_{≤l} f` nearest to `z ∈ S`, searched within `radius` of `z`.
///
/// Directions from `z` are scanned for their first crossing of the level `l`;
/// the nearest crossing is then moved along the level set toward `z` and
/// finished with a Newton solve of `p − z + μ∇f(p) = 0`, `f(p) = l`.
pub fn closest_point_on_slice(
    f: &dyn Objective,
    z: &Vector,
    level: f64,
    subspace: &AffineSubspace,
    opts: &ClosestOptions,
) -> Result<Vector> {
    let k = subspace.dim();
    let v = subspace.frame.matrix();
    let wz = subspace.coords(z);
    let origin = subspace.point(&wz);
    let g = |w: &Vector| eval(f, &(&origin + v * w));
    if g(&Vector::zeros(k))? <= level {
        return Ok(origin);
    }
    if k == 0 {
        return Err(Error::SliceEmpty { radius: opts.radius });
    }

    let mut dirs: Vec<Vector> = Vec::new();
    for s in &opts.seeds {
        if let Some(u) = unit(&(v.transpose() * s)) {
            dirs.push(-&u);
            dirs.push(u);
        }
    }
    for i in 0..k {
        let mut e = Vector::zeros(k);
        e[i] = 1.0;
        dirs.push(-&e);
        dirs.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_starts {
        let r = Vector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
        if let Some(u) = unit(&r) {
            dirs.push(u);
        }
    }

    let first_hit = |u: &Vector| -> Result<Option<f64>> {
        let phi = |t: f64| -> Result<f64> { Ok(g(&(u * t))? - level) };
        let mut prev = 0.0;
        for i in 1..=RAY_SAMPLES {
            let t = opts.radius * i as f64 / RAY_SAMPLES as f64;
            let val = phi(t)?;
            if val < 0.0 {
                return Ok(Some(refine_crossing(&phi, prev, t, val)?));
            }
            if val == 0.0 {
                return Ok(Some(t));
            }
            prev = t;
        }
        Ok(None)
    };

    // The refinement must land on the sublevel side; nudge past the crossing.
    let hit_point = |u: &Vector, t: f64| -> Result<Vector> {
        let mut p = u * t;
        let mut bump = (t * f64::EPSILON).max(f64::MIN_POSITIVE);
        while g(&p)? > level && bump < 1e-8 * (1.0 + t) {
            p = u * (t + bump);
            bump *= 2.0;
        }
        Ok(p)
    };

    let mut best: Option<Vector> = None;
    for u in &dirs {
        if let Some(t) = first_hit(u)? {
            let p = hit_point(u, t)?;
            let better = match &best {
                None => true,
                Some(b) => {
                    let (pn, bn) = (p.norm(), b.norm());
                    pn < bn - 1e-12 * bn || ((pn - bn).abs() <= 1e-12 * bn && lex_less(&p, b))
                }
            };
            if better {
                best = Some(p);
            }
        }
    }
    let Some(mut p) = best else {
        return Err(Error::SliceEmpty { radius: opts.radius });
    };

    // Tangential descent of |p| along the level set, retracted by ray search.
    let mut step = 0.25 * p.norm();
    let scale = p.norm();
    for _ in 0..300 {
        if step < 1e-10 * scale {
            break;
        }
        let gr = v.transpose() * eval_grad(f, &(&origin + v * &p))?;
        let Some(n) = unit(&gr) else { break };
        let d = -&p;
        let t = &d - &n * d.dot(&n);
        let tn = t.norm();
        if tn <= 1e-12 * p.norm() {
            break;
        }
        let Some(u) = unit(&(&p + &t * (step / tn))) else { break };
        match first_hit(&u)? {
            Some(th) if th < p.norm() => {
                p = hit_point(&u, th)?;
                step = (2.0 * step).min(scale);
            }
            _ => step *= 0.5,
        }
    }

    if let Some(q) = polish(f, &origin, v, &p, level)? {
        p = q;
    }
    Ok(&origin + v * p)
}

fn polish(f: &dyn Objective, origin: &Vector, v: &Matrix, p0: &Vector, level: f64) -> Result<Option<Vector>> {
    let k = p0.len();
    let at = |w: &Vector| origin + v * w;
    let grad = |w: &Vector| -> Result<Vector> { Ok(v.transpose() * eval_grad(f, &at(w))?) };
    let g0 = grad(p0)?;
    if g0.norm() == 0.0 {
        return Ok(None);
    }
    let mut p = p0.clone();
    let mut mu = -p0.dot(&g0) / g0.norm_squared();
    if !(mu > 0.0) {
        return Ok(None);
    }
    let residual = |p: &Vector, mu: f64| -> Result<(Vector, Vector)> {
        let gp = grad(p)?;
        let mut r = Vector::zeros(k + 1);
        r.rows_mut(0, k).copy_from(&(p + &gp * mu));
        r[k] = eval(f, &at(p))? - level;
        Ok((r, gp))
    };
    let (mut r, mut gp) = residual(&p, mu)?;
    for _ in 0..12 {
        let rn = r.norm();
        if rn <= 1e-15 * (1.0 + p0.norm()) {
            break;
        }
        let h = v.transpose() * hessian_or_fd(f, &at(&p))? * v;
        let mut j = Matrix::zeros(k + 1, k + 1);
        j.view_mut((0, 0), (k, k)).copy_from(&(Matrix::identity(k, k) + h * mu));
        j.view_mut((0, k), (k, 1)).copy_from(&gp);
        j.view_mut((k, 0), (1, k)).copy_from(&gp.transpose());
        let Some(step) = j.lu().solve(&(-&r)) else { break };
        let np = &p + step.rows(0, k);
        let nmu = mu + step[k];
        let Ok((nr, ngp)) = residual(&np, nmu) else { break };
        if nr.norm() >= rn {
            break;
        }
        p = np;
        mu = nmu;
        r = nr;
        gp = ngp;
    }
    let ok = r[k].abs() <= 1e-10 * (1.0 + level.abs())
        && mu > 0.0
        && p.norm() <= p0.norm() * (1.0 + 1e-12) + 1e-15
        && (&p - p0).norm() <= 1e-3 * (1.0 + p0.norm());
    Ok(ok.then_some(p))
}

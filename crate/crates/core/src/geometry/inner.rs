//! Multi-start search for the diameter of a slice.
//!
//! Each start takes a pair of ray exits from an interior anchor and then
//! alternates: move `x` along the boundary away from `y`, then `y` away from
//! `x`. Boundary moves are projected ascent steps retracted radially
//! through the anchor. A Newton solve of the two-point optimality system
//! finishes the best pair when both ends sit on the level set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::slice::{Hit, Slice};
use super::{lex_less, AffineSubspace, OptimizingTriple, TripleFlags, TrustRegion};
use crate::error::Result;
use crate::numkit::{unit, Matrix, Vector};
use crate::objective::Objective;

/// Knobs for [`inner_max_diameter`].
#[derive(Debug, Clone)]
pub struct InnerOptions {
    /// Number of start pairs; `None` means `2k + 2`.
    pub starts: Option<usize>,
    pub seed: u64,
    pub max_alternations: usize,
    /// Start only from this pair (ambient points) instead of the multi-start set.
    pub warm_start: Option<(Vector, Vector)>,
    /// Newton refinement of the best pair.
    pub polish: bool,
    pub boundary_tol: f64,
    pub non_unique_tol: f64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        InnerOptions {
            starts: None,
            seed: 0,
            max_alternations: 60,
            warm_start: None,
            polish: true,
            boundary_tol: 1e-6,
            non_unique_tol: 1e-6,
        }
    }
}

struct Pair {
    x: Hit,
    y: Hit,
    converged: bool,
}

impl Pair {
    fn diameter(&self) -> f64 {
        (&self.x.w - &self.y.w).norm()
    }
}

/// Diameter of `S ∩ lev_{≥l} f ∩ U` with a realizing pair.
///
/// Returns an empty triple (diameter 0) when no point of the slice is found.
/// Fails with `SubspaceMissesRegion` when `S` does not meet `U`.
pub fn inner_max_diameter(
    f: &dyn Objective,
    subspace: &AffineSubspace,
    level: f64,
    region: &TrustRegion,
    opts: &InnerOptions,
) -> Result<OptimizingTriple> {
    let slice = Slice::new(f, subspace, level, region)?;
    let k = slice.k();

    let mut hints = Vec::new();
    if let Some((x, y)) = &opts.warm_start {
        hints.push(subspace.coords(&((x + y) * 0.5)));
    }
    let Some(anchor) = find_anchor(&slice, &hints)? else {
        return Ok(OptimizingTriple::empty(subspace.clone(), level));
    };

    if k == 0 {
        let p = slice.point(&anchor);
        return Ok(OptimizingTriple {
            subspace: subspace.clone(),
            level,
            x: p.clone(),
            y: p,
            diameter: 0.0,
            flags: TripleFlags {
                converged: true,
                ..Default::default()
            },
        });
    }

    let mut starts: Vec<(Vector, Vector)> = Vec::new();
    if let Some((x, y)) = &opts.warm_start {
        let ux = unit(&(subspace.coords(x) - &anchor));
        let uy = unit(&(subspace.coords(y) - &anchor));
        if let (Some(ux), Some(uy)) = (ux, uy) {
            starts.push((ux, uy));
        }
    }
    if starts.is_empty() {
        let total = opts.starts.unwrap_or(2 * k + 2).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for i in 0..total {
            let d = if i < k {
                let mut e = Vector::zeros(k);
                e[i] = 1.0;
                e
            } else {
                random_unit(&mut rng, k)
            };
            starts.push((d.clone(), -d));
        }
    }

    let mut results = Vec::with_capacity(starts.len());
    for (ux, uy) in &starts {
        let x = slice.exit(&anchor, ux)?;
        let y = slice.exit(&anchor, uy)?;
        results.push(alternate(&slice, &anchor, x, y, opts.max_alternations, LOOSE)?);
    }

    for p in results.iter_mut() {
        if lex_less(&p.y.w, &p.x.w) {
            std::mem::swap(&mut p.x, &mut p.y);
        }
    }
    let mut best = 0;
    for i in 1..results.len() {
        let (di, db) = (results[i].diameter(), results[best].diameter());
        let tie = (di - db).abs() <= 1e-12 * (1.0 + db);
        if (!tie && di > db) || (tie && lex_less(&results[i].x.w, &results[best].x.w)) {
            best = i;
        }
    }

    let best_d = results[best].diameter();
    let separation = 1e-4 * best_d + 1e-9;
    let mut non_unique = false;
    for (i, p) in results.iter().enumerate() {
        if i == best {
            continue;
        }
        let b = &results[best];
        let same = ((&p.x.w - &b.x.w).norm() + (&p.y.w - &b.y.w).norm()) <= separation;
        if !same && (p.diameter() - best_d).abs() <= opts.non_unique_tol {
            non_unique = true;
        }
    }

    let mut pair = results.swap_remove(best);
    let mut polished = false;
    if opts.polish && !pair.x.sphere && !pair.y.sphere && pair.diameter() > 0.0 {
        if let Some((x, y)) = polish(&slice, &pair.x.w, &pair.y.w)? {
            pair.x.w = x;
            pair.y.w = y;
            pair.converged = true;
            polished = true;
        }
    }
    if !polished {
        pair = alternate(&slice, &anchor, pair.x, pair.y, opts.max_alternations, TIGHT)?;
    }

    let x = slice.point(&pair.x.w);
    let y = slice.point(&pair.y.w);
    let boundary_hit = region.depth(&x) <= opts.boundary_tol || region.depth(&y) <= opts.boundary_tol;
    let converged = pair.converged;
    Ok(OptimizingTriple {
        subspace: subspace.clone(),
        level,
        diameter: (&x - &y).norm(),
        x,
        y,
        flags: TripleFlags {
            empty: false,
            converged,
            boundary_hit,
            non_unique,
        },
    })
}

fn random_unit(rng: &mut ChaCha8Rng, k: usize) -> Vector {
    loop {
        let v = Vector::from_fn(k, |_, _| StandardNormal.sample(rng));
        if let Some(u) = unit(&v) {
            return u;
        }
    }
}

/// A point of the slice, preferring hints, the region center and the base.
/// Falls back to gradient ascent of `g` inside the ball.
fn find_anchor(slice: &Slice, hints: &[Vector]) -> Result<Option<Vector>> {
    let mut cands: Vec<Vector> = hints.iter().map(|h| slice.clamp(h)).collect();
    cands.push(slice.wc.clone());
    cands.push(slice.clamp(&Vector::zeros(slice.k())));
    let mut best: Option<(Vector, f64)> = None;
    for c in cands {
        let v = slice.g(&c)?;
        if v >= slice.level && slice.ball_slack(&c) > 1e-12 * slice.rs {
            return Ok(Some(c));
        }
        if best.as_ref().map_or(true, |(_, bv)| v > *bv) {
            best = Some((c, v));
        }
    }
    let (mut w, mut gw) = best.expect("at least one candidate");
    if slice.k() == 0 {
        return Ok((gw >= slice.level).then_some(w));
    }
    let mut step = 0.1 * slice.rs;
    for _ in 0..500 {
        if gw >= slice.level {
            return Ok(Some(w));
        }
        let gr = slice.grad(&w)?;
        let gn = gr.norm();
        if gn == 0.0 || step < 1e-15 * slice.rs {
            break;
        }
        let cand = slice.clamp(&(&w + &gr * (step / gn)));
        let gc = slice.g(&cand)?;
        if gc > gw {
            w = cand;
            gw = gc;
            step *= 2.0;
        } else {
            step *= 0.5;
        }
    }
    Ok((gw >= slice.level).then_some(w))
}

/// Relative step floor of the farthest-point ascent before a Newton polish.
const LOOSE: f64 = 1e-6;
/// Relative step floor when no polish follows.
const TIGHT: f64 = 1e-10;

fn alternate(slice: &Slice, anchor: &Vector, mut x: Hit, mut y: Hit, max_alt: usize, tol: f64) -> Result<Pair> {
    let mut prev = (&x.w - &y.w).norm();
    let mut converged = false;
    for _ in 0..max_alt {
        x = farthest(slice, anchor, &y.w, x, tol)?;
        y = farthest(slice, anchor, &x.w, y, tol)?;
        let d = (&x.w - &y.w).norm();
        if d - prev <= 1e-3 * tol * (1.0 + d) {
            converged = true;
            break;
        }
        prev = d;
    }
    Ok(Pair { x, y, converged })
}

/// Locally farthest boundary point from `y`, starting at `x`.
fn farthest(slice: &Slice, anchor: &Vector, y: &Vector, mut x: Hit, tol: f64) -> Result<Hit> {
    let scale = (&x.w - anchor).norm().max((&x.w - y).norm());
    if scale == 0.0 {
        return Ok(x);
    }
    let mut step = 0.25 * scale;
    let mut dist = (&x.w - y).norm();
    for _ in 0..400 {
        let d = &x.w - y;
        let n = slice.outward_normal(&x, anchor)?;
        let along = d.dot(&n);
        let dir = if along > 0.0 { &d - &n * along } else { d.clone() };
        let dn = dir.norm();
        if dn <= 1e-12 * dist.max(1e-300) || step < tol * scale {
            break;
        }
        let target = &x.w + &dir * (step / dn) - anchor;
        let Some(u) = unit(&target) else {
            step *= 0.5;
            continue;
        };
        let cand = slice.exit(anchor, &u)?;
        let cd = (&cand.w - y).norm();
        if cd > dist {
            x = cand;
            dist = cd;
            step = (step * 2.0).min(scale);
        } else {
            step *= 0.5;
        }
    }
    Ok(x)
}

/// Newton iteration on `x − y + λ₁∇g(x) = 0`, `y − x + λ₂∇g(y) = 0`,
/// `g(x) = g(y) = l`. Returns the refined pair if it stays feasible and
/// does not shrink the diameter.
fn polish(slice: &Slice, x0: &Vector, y0: &Vector) -> Result<Option<(Vector, Vector)>> {
    let k = slice.k();
    let l = slice.level;
    let d0 = (x0 - y0).norm();
    let gx = slice.grad(x0)?;
    let gy = slice.grad(y0)?;
    if gx.norm() == 0.0 || gy.norm() == 0.0 {
        return Ok(None);
    }
    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut l1 = -(x0 - y0).dot(&gx) / gx.norm_squared();
    let mut l2 = -(y0 - x0).dot(&gy) / gy.norm_squared();
    if !(l1 > 0.0 && l2 > 0.0) {
        return Ok(None);
    }

    let residual = |x: &Vector, y: &Vector, l1: f64, l2: f64| -> Result<(Vector, Vector, Vector)> {
        let gx = slice.grad(x)?;
        let gy = slice.grad(y)?;
        let mut r = Vector::zeros(2 * k + 2);
        r.rows_mut(0, k).copy_from(&(x - y + &gx * l1));
        r.rows_mut(k, k).copy_from(&(y - x + &gy * l2));
        r[2 * k] = slice.g(x)? - l;
        r[2 * k + 1] = slice.g(y)? - l;
        Ok((r, gx, gy))
    };

    let (mut r, mut gx, mut gy) = residual(&x, &y, l1, l2)?;
    for _ in 0..12 {
        let rn = r.norm();
        if rn <= 1e-15 * (1.0 + d0) {
            break;
        }
        let hx = slice.hess(&x)?;
        let hy = slice.hess(&y)?;
        let mut j = Matrix::zeros(2 * k + 2, 2 * k + 2);
        let eye = Matrix::identity(k, k);
        j.view_mut((0, 0), (k, k)).copy_from(&(&eye + hx * l1));
        j.view_mut((0, k), (k, k)).copy_from(&(-&eye));
        j.view_mut((0, 2 * k), (k, 1)).copy_from(&gx);
        j.view_mut((k, 0), (k, k)).copy_from(&(-&eye));
        j.view_mut((k, k), (k, k)).copy_from(&(&eye + hy * l2));
        j.view_mut((k, 2 * k + 1), (k, 1)).copy_from(&gy);
        j.view_mut((2 * k, 0), (1, k)).copy_from(&gx.transpose());
        j.view_mut((2 * k + 1, k), (1, k)).copy_from(&gy.transpose());
        let Some(step) = j.lu().solve(&(-&r)) else {
            break;
        };
        let nx = &x + step.rows(0, k);
        let ny = &y + step.rows(k, k);
        let (nl1, nl2) = (l1 + step[2 * k], l2 + step[2 * k + 1]);
        let Ok((nr, ngx, ngy)) = residual(&nx, &ny, nl1, nl2) else {
            break;
        };
        if nr.norm() >= rn {
            break;
        }
        x = nx;
        y = ny;
        l1 = nl1;
        l2 = nl2;
        r = nr;
        gx = ngx;
        gy = ngy;
    }

    let d = (&x - &y).norm();
    let feasible = (r[2 * k]).abs() <= 1e-10 * (1.0 + l.abs())
        && (r[2 * k + 1]).abs() <= 1e-10 * (1.0 + l.abs())
        && slice.ball_slack(&x) >= 0.0
        && slice.ball_slack(&y) >= 0.0
        && l1 > 0.0
        && l2 > 0.0;
    if feasible && d >= d0 - 1e-12 * (1.0 + d0) && (&x - x0).norm() <= 1e-3 * (1.0 + d0) {
        Ok(Some((x, y)))
    } else {
        Ok(None)
    }
}

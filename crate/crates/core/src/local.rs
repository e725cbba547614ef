//! Fast local iteration near a nondegenerate saddle.
//!
//! Each step solves the min-max problem at the current level `l_i`, builds
//! an estimate `S_i` of the negative eigenspace from the optimizing pair
//! and nearest points of sublevel sets, and then raises the level to the
//! minimum of `f` over the affine space through the pair midpoint
//! orthogonal to `S_i`.

use crate::error::{Error, Result};
use crate::geometry::{
    closest_point_on_slice, opposite_gradient_residual, reject, AffineSubspace, ClosestOptions, OptimizingTriple,
    TrustRegion,
};
use crate::numkit::{complete_frame, sym_eigen, unit, Frame, Matrix, Vector};
use crate::objective::{eval, eval_grad, hessian_or_fd, Objective};
use crate::outer::{outer_min_subspace, OuterOptions, EMPTY_DIAMETER};
use crate::trace::{SolverTrace, TraceRecord};

/// Knobs for [`estimate_negative_eigenspace`].
#[derive(Debug, Clone, Default)]
pub struct EigenspaceOptions {
    /// Search radius for nearest points; defaults to the trust-region radius.
    pub radius: Option<f64>,
    /// Previous estimate; its directions seed the nearest-point searches.
    pub previous: Option<Frame>,
    pub seed: u64,
}

/// Negative eigenspace estimate from an optimizing pair at level `l`.
///
/// Starts from `span{x − y}` and adds, `m − 1` times, the direction from the
/// midpoint `z` to the nearest point of `lev_{≤l} f` within the affine space
/// through `z` orthogonal to the directions found so far.
pub fn estimate_negative_eigenspace(
    f: &dyn Objective,
    triple: &OptimizingTriple,
    level: f64,
    m: usize,
    region: &TrustRegion,
    opts: &EigenspaceOptions,
) -> Result<AffineSubspace> {
    let n = f.dim();
    let z = triple.midpoint();
    let d = unit(&(&triple.x - &triple.y)).ok_or(Error::CoincidentPoints)?;
    let mut x = Matrix::zeros(n, m);
    x.set_column(0, &d);
    let radius = opts.radius.unwrap_or(region.radius);
    for j in 1..m {
        let current = Frame::from_matrix_unchecked(x.columns(0, j).into_owned());
        let comp = complete_frame(&current).columns(j, n - j);
        let space = AffineSubspace::new(z.clone(), comp.clone())?;
        let mut copts = ClosestOptions::with_radius(radius);
        copts.seed = opts.seed;
        if let Some(prev) = &opts.previous {
            copts.seeds = (0..prev.dim()).map(|c| prev.column(c)).collect();
        }
        let p = closest_point_on_slice(f, &z, level, &space, &copts)?;
        let dir = unit(&reject(&current.into_matrix(), &(&p - &z))).unwrap_or_else(|| comp.column(0));
        x.set_column(j, &dir);
    }
    AffineSubspace::new(z, Frame::orthonormalize(&x)?)
}

/// Minimum of `f` over the affine space through `z` orthogonal to `S`, inside `U`.
#[derive(Debug, Clone)]
pub struct LowerBound {
    pub value: f64,
    pub point: Vector,
    pub boundary_hit: bool,
}

/// Trust-region Newton on `w ↦ f(z + W w)` with `W` spanning the complement of `S`.
///
/// Fails with `Unbounded` when the descent ends on the trust-region boundary
/// with negative curvature along the complement.
pub fn orthogonal_space_lower_bound(
    f: &dyn Objective,
    z: &Vector,
    subspace: &AffineSubspace,
    region: &TrustRegion,
) -> Result<LowerBound> {
    let w_frame = subspace.complement();
    let p = w_frame.dim();
    if p == 0 {
        return Ok(LowerBound {
            value: eval(f, z)?,
            point: z.clone(),
            boundary_hit: region.depth(z) <= 1e-6,
        });
    }
    let wm = w_frame.matrix();
    let wc = wm.transpose() * (&region.center - z);
    let off = (&region.center - z - wm * &wc).norm_squared();
    let r2 = region.radius * region.radius - off;
    if r2 <= 0.0 {
        return Err(Error::SubspaceMissesRegion);
    }
    let rw = r2.sqrt();
    let at = |w: &Vector| z + wm * w;
    let clamp = |w: &Vector| {
        let d = w - &wc;
        let n = d.norm();
        if n <= rw {
            w.clone()
        } else {
            &wc + d * (rw / n)
        }
    };

    let mut w = clamp(&Vector::zeros(p));
    let mut val = eval(f, &at(&w))?;
    let mut delta = 0.1 * rw;
    for _ in 0..300 {
        let g = wm.transpose() * eval_grad(f, &at(&w))?;
        let h = wm.transpose() * hessian_or_fd(f, &at(&w))? * wm;
        let h = (&h + h.transpose()) * 0.5;
        let step = trust_region_step(&g, &h, delta)?;
        let cand = clamp(&(&w + &step));
        let actual = &cand - &w;
        if actual.norm() <= 1e-15 * (1.0 + w.norm()) {
            break;
        }
        let predicted = -(g.dot(&actual) + 0.5 * actual.dot(&(&h * &actual)));
        let cval = eval(f, &at(&cand))?;
        let reduction = val - cval;
        if predicted <= 0.0 {
            break;
        }
        let rho = reduction / predicted;
        if rho > 0.1 {
            w = cand;
            val = cval;
            if rho > 0.75 && step.norm() >= 0.99 * delta {
                delta *= 2.0;
            }
        } else {
            delta *= 0.25;
            if delta < 1e-16 * (1.0 + w.norm()) {
                break;
            }
        }
    }

    let slack = rw - (&w - &wc).norm();
    let boundary_hit = slack <= 1e-6 * region.radius;
    if boundary_hit {
        let h = wm.transpose() * hessian_or_fd(f, &at(&w))? * wm;
        let lowest = sym_eigen(&((&h + h.transpose()) * 0.5))?.values.min();
        if lowest < 0.0 {
            return Err(Error::Unbounded { value: val });
        }
    }
    Ok(LowerBound {
        value: val,
        point: at(&w),
        boundary_hit,
    })
}

/// `argmin gᵀs + ½sᵀHs` over `|s| ≤ Δ`, via the eigendecomposition of `H`.
fn trust_region_step(g: &Vector, h: &Matrix, delta: f64) -> Result<Vector> {
    let e = sym_eigen(h)?;
    let q = &e.vectors;
    let lam = &e.values;
    let gt = q.transpose() * g;
    let n = g.len();
    let lmin = lam.min();
    let step_for = |mu: f64| -> Vector {
        let c = Vector::from_fn(n, |i, _| -gt[i] / (lam[i] + mu));
        q * c
    };
    if lmin > 0.0 {
        let s = step_for(0.0);
        if s.norm() <= delta {
            return Ok(s);
        }
    }
    let floor = (-lmin).max(0.0);
    let tiny = 1e-14 * (1.0 + lam.amax());
    // Hard case: no gradient component along the lowest eigenvectors.
    let along_low: f64 = (0..n)
        .filter(|&i| lam[i] - lmin <= tiny)
        .map(|i| gt[i] * gt[i])
        .sum();
    if along_low.sqrt() <= 1e-14 * (1.0 + g.norm()) {
        let partial = {
            let c = Vector::from_fn(n, |i, _| if lam[i] - lmin <= tiny { 0.0 } else { -gt[i] / (lam[i] + floor) });
            q * c
        };
        if partial.norm() <= delta {
            let low = (0..n).find(|&i| lam[i] - lmin <= tiny).unwrap_or(n - 1);
            let t = (delta * delta - partial.norm_squared()).max(0.0).sqrt();
            return Ok(partial + q.column(low) * t);
        }
    }
    let mut lo = floor;
    let mut hi = floor + g.norm() / delta + lam.amax() + 1.0;
    while step_for(hi).norm() > delta {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if step_for(mid).norm() > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(step_for(hi))
}

/// Knobs for [`fast_local_solve`].
#[derive(Debug, Clone, Default)]
pub struct FastLocalOptions {
    pub outer: OuterOptions,
    /// Feed the outer problem's subspace straight to the level update.
    pub naive_subspace: bool,
    pub eigenspace: EigenspaceOptions,
    /// Critical value, when known, used for the ratio column of the trace.
    pub known_value: Option<f64>,
}

/// Per-iteration state.
#[derive(Debug, Clone)]
pub struct LocalState {
    pub iter: usize,
    pub level: f64,
    pub triple: OptimizingTriple,
    /// `S_i`, through the pair midpoint.
    pub subspace: Option<AffineSubspace>,
    pub next_level: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FastLocalResult {
    pub point: Vector,
    pub value: f64,
    pub converged: bool,
    pub states: Vec<LocalState>,
    pub trace: SolverTrace,
}

impl FastLocalResult {
    pub fn levels(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.level).collect()
    }
}

/// Runs the fast local iteration from a lower bound `l0` of the critical value.
///
/// Stops when consecutive levels differ by less than `tol`, when the slice
/// collapses to a point, or after `max_iter` iterations.
pub fn fast_local_solve(
    f: &dyn Objective,
    region: &TrustRegion,
    m: usize,
    l0: f64,
    max_iter: usize,
    tol: f64,
    opts: &FastLocalOptions,
) -> Result<FastLocalResult> {
    if !l0.is_finite() {
        return Err(Error::InvalidLevel(l0));
    }
    let mut level = l0;
    let mut outer_opts = opts.outer.clone();
    outer_opts.keep_initial_on_tie |= opts.naive_subspace;
    let mut states: Vec<LocalState> = Vec::new();
    let mut trace = SolverTrace::default();
    let mut previous_frame: Option<Frame> = opts.eigenspace.previous.clone();
    let mut last_point: Option<Vector> = None;
    let mut converged = false;

    for iter in 0..max_iter {
        let sol = outer_min_subspace(f, level, region, m, &outer_opts)?;
        let triple = sol.triple;
        if triple.flags.empty {
            if iter == 0 {
                return Err(Error::InvalidLevel(level));
            }
            let prev = states.last().map(|s| s.level).unwrap_or(level);
            converged = (level - prev).abs() < tol;
            break;
        }
        let z = triple.midpoint();
        let kkt = opposite_gradient_residual(f, &triple.x, &triple.y).ok().map(|c| c.residual);
        let grad_norm = eval_grad(f, &z).ok().map(|g| g.norm());
        let ratio = ratio_for(&states, level, opts.known_value);
        trace.push(TraceRecord {
            iter,
            l: level,
            u: None,
            diameter: triple.diameter,
            kkt_residual: kkt,
            z: z.as_slice().to_vec(),
            grad_norm,
            ratio,
        });
        let collapsed = triple.diameter <= EMPTY_DIAMETER;
        let stalled = states.last().is_some_and(|s| (level - s.level).abs() < tol);
        states.push(LocalState {
            iter,
            level,
            triple: triple.clone(),
            subspace: None,
            next_level: None,
        });
        if collapsed || stalled {
            if collapsed {
                last_point = Some(z);
            }
            converged = true;
            break;
        }

        let s_i = if opts.naive_subspace {
            triple.subspace.rebased(z.clone())
        } else {
            let mut eo = opts.eigenspace.clone();
            eo.previous = previous_frame.clone();
            estimate_negative_eigenspace(f, &triple, level, m, region, &eo)?
        };
        let lb = orthogonal_space_lower_bound(f, &z, &s_i, region)?;
        if lb.value < level - 1e-14 * level.abs() {
            return Err(Error::LowerBoundViolated {
                previous: level,
                next: lb.value,
            });
        }
        let st = states.last_mut().expect("pushed above");
        st.subspace = Some(s_i.clone());
        st.next_level = Some(lb.value);
        previous_frame = Some(s_i.frame.clone());
        outer_opts.initial = Some(s_i.rebased(z));
        last_point = Some(lb.point);
        level = lb.value;
    }

    let point = last_point.unwrap_or_else(|| region.center.clone());
    let value = states.last().map(|s| s.level).unwrap_or(level);
    Ok(FastLocalResult {
        point,
        value,
        converged,
        states,
        trace,
    })
}

fn ratio_for(states: &[LocalState], level: f64, known: Option<f64>) -> Option<f64> {
    let n = states.len();
    match known {
        Some(c) => {
            let prev = states.last()?.level;
            let den = (prev - c).abs();
            (den > 0.0).then(|| (level - c).abs() / den)
        }
        None if n >= 2 => {
            let den = (states[n - 1].level - states[n - 2].level).abs();
            (den > 0.0).then(|| (level - states[n - 1].level).abs() / den)
        }
        None => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateClass {
    Superlinear,
    Linear,
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub class: RateClass,
    /// Final ratio for superlinear runs, mean of the last three otherwise.
    pub ratio: f64,
    pub ratios: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Limit the gaps were measured against.
    pub limit: Option<f64>,
    /// The gap reached exactly zero.
    pub finite_termination: bool,
}

/// Classifies how fast a trace converges.
///
/// Traces with an upper bound column are measured by bracket width.
/// Otherwise gaps are `|l_i − c|` against `known` or, failing that, against
/// an Aitken extrapolation of the last three levels.
pub fn measure_convergence_rate(trace: &SolverTrace, known: Option<f64>) -> Result<RateEstimate> {
    let recs = &trace.records;
    let bracketed = !recs.is_empty() && recs.iter().all(|r| r.u.is_some());
    let (gaps, limit): (Vec<f64>, Option<f64>) = if bracketed {
        (recs.iter().map(|r| r.u.unwrap() - r.l).collect(), None)
    } else if let Some(c) = known {
        (recs.iter().map(|r| (r.l - c).abs()).collect(), Some(c))
    } else {
        if recs.len() < 4 {
            return Err(Error::InsufficientData { needed: 4, found: recs.len() });
        }
        let n = recs.len();
        let (a, b, c) = (recs[n - 3].l, recs[n - 2].l, recs[n - 1].l);
        let den = c - 2.0 * b + a;
        let lim = if den != 0.0 && (c - b).abs() > 0.0 { c - (c - b) * (c - b) / den } else { c };
        let mut g: Vec<f64> = recs.iter().map(|r| (r.l - lim).abs()).collect();
        g.pop();
        (g, Some(lim))
    };

    // Gaps at the roundoff floor of the first one count as exact termination.
    let floor = gaps.first().copied().unwrap_or(0.0) * f64::EPSILON * f64::EPSILON;
    let cut = gaps.iter().position(|&g| g <= floor);
    let finite_termination = cut.is_some_and(|i| i > 0);
    let gaps: Vec<f64> = match cut {
        Some(i) => gaps[..=i].to_vec(),
        None => gaps,
    };
    if !finite_termination && gaps.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, found: gaps.len() });
    }
    let ratios: Vec<f64> = gaps.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
    if ratios.is_empty() {
        return Err(Error::InsufficientData { needed: 2, found: gaps.len() });
    }
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    let last = *tail.last().unwrap();
    let decreasing = tail.len() == 3 && tail.windows(2).all(|w| w[1] < w[0]);
    let class = if (decreasing && last < 0.1) || finite_termination {
        RateClass::Superlinear
    } else if tail.iter().all(|&r| r < 1.0) {
        RateClass::Linear
    } else {
        RateClass::Stalled
    };
    let ratio = match class {
        RateClass::Superlinear => last,
        _ => tail.iter().sum::<f64>() / tail.len() as f64,
    };
    Ok(RateEstimate {
        class,
        ratio,
        ratios,
        gaps,
        limit,
        finite_termination,
    })
}

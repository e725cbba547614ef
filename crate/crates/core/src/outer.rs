//! Minimizing the slice diameter over `m`-dimensional affine subspaces.
//!
//! Coordinate search over plane rotations `(v_i, w_j)`, with `v_i` a
//! direction of the subspace and `w_j` one of its complement, plus
//! translations along each `w_j`. Rotations pivot about the midpoint of the
//! current pair. Step sizes halve whenever a full sweep finds no decrease.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::slice::Slice;
use crate::geometry::{inner_max_diameter, AffineSubspace, InnerOptions, OptimizingTriple, TrustRegion};
use crate::numkit::{sym_eigen, Frame, Matrix, Vector};
use crate::objective::{hessian_or_fd, Objective};

/// A slice diameter at or below this counts as empty.
pub const EMPTY_DIAMETER: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OuterOptions {
    pub inner: InnerOptions,
    /// Starting subspace; defaults to the negative eigenspace of the Hessian at the region center.
    pub initial: Option<AffineSubspace>,
    pub rotation_step: f64,
    pub min_rotation_step: f64,
    /// Also search over translations orthogonal to the subspace.
    pub translate: bool,
    pub max_sweeps: usize,
    pub non_unique_tol: f64,
    /// Return `initial` itself when it ties with the local optimum within `non_unique_tol`.
    pub keep_initial_on_tie: bool,
}

impl Default for OuterOptions {
    fn default() -> Self {
        OuterOptions {
            inner: InnerOptions::default(),
            initial: None,
            rotation_step: PI / 16.0,
            min_rotation_step: 1e-7,
            translate: true,
            max_sweeps: 400,
            non_unique_tol: 1e-6,
            keep_initial_on_tie: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OuterSolution {
    pub triple: OptimizingTriple,
    pub sweeps: usize,
    pub inner_solves: usize,
    pub converged: bool,
    /// A clearly different subspace reached the same diameter within tolerance.
    pub non_unique_subspace: bool,
}

/// Span of the eigenvectors of the `m` smallest Hessian eigenvalues at the
/// region center, or the last `m` coordinate directions if that fails.
pub fn initial_subspace(f: &dyn Objective, region: &TrustRegion, m: usize) -> AffineSubspace {
    let n = f.dim();
    let fallback = || Frame::coordinates(n, &(n - m..n).collect::<Vec<_>>());
    let frame = hessian_or_fd(f, &region.center)
        .ok()
        .filter(|h| h.iter().all(|c| c.is_finite()))
        .and_then(|h| sym_eigen(&h).ok())
        .and_then(|e| Frame::new(e.vectors.columns(n - m, m).into_owned()).ok())
        .unwrap_or_else(fallback);
    AffineSubspace {
        base: region.center.clone(),
        frame,
    }
}

#[derive(Clone, Copy)]
enum Move {
    Rotate(usize, usize),
    Translate(usize),
}

fn apply(s: &AffineSubspace, comp: &Frame, mv: Move, amount: f64) -> AffineSubspace {
    match mv {
        Move::Rotate(i, j) => {
            let mut v: Matrix = s.frame.matrix().clone();
            let col = v.column(i) * amount.cos() + comp.matrix().column(j) * amount.sin();
            v.set_column(i, &col);
            let frame = Frame::orthonormalize(&v).unwrap_or_else(|_| s.frame.clone());
            AffineSubspace {
                base: s.base.clone(),
                frame,
            }
        }
        Move::Translate(j) => s.rebased(&s.base + comp.matrix().column(j) * amount),
    }
}

/// `min over m-dim S meeting U of diam(S ∩ lev_{≥l} f ∩ U)`, locally.
pub fn outer_min_subspace(
    f: &dyn Objective,
    level: f64,
    region: &TrustRegion,
    m: usize,
    opts: &OuterOptions,
) -> Result<OuterSolution> {
    let n = f.dim();
    if m == 0 || m > n {
        return Err(Error::config("morse-index", format!("must lie in 1..={n}, got {m}")));
    }
    if region.center.len() != n {
        return Err(Error::DimensionMismatch("region center".into()));
    }
    let mut solves = 0usize;
    let mut solve = |s: &AffineSubspace, warm: Option<&OptimizingTriple>| -> Result<OptimizingTriple> {
        solves += 1;
        let mut o = opts.inner.clone();
        o.warm_start = warm.map(|t| (t.x.clone(), t.y.clone()));
        inner_max_diameter(f, s, level, region, &o)
    };

    if m == n {
        let s = AffineSubspace::full(region.center.clone());
        let triple = solve(&s, None)?;
        return Ok(OuterSolution {
            triple,
            sweeps: 0,
            inner_solves: 1,
            converged: true,
            non_unique_subspace: false,
        });
    }

    let mut s = opts.initial.clone().unwrap_or_else(|| initial_subspace(f, region, m));
    if s.dim() != m || s.ambient_dim() != n {
        return Err(Error::DimensionMismatch("initial subspace".into()));
    }
    let mut cur = solve(&s, None)?;
    if cur.flags.empty || cur.diameter <= EMPTY_DIAMETER {
        return Ok(OuterSolution {
            triple: cur,
            sweeps: 0,
            inner_solves: solves,
            converged: true,
            non_unique_subspace: false,
        });
    }
    s = principal_frame(f, &s.rebased(cur.midpoint()));
    cur.subspace = s.clone();

    let mut moves = Vec::new();
    for i in 0..m {
        for j in 0..n - m {
            moves.push(Move::Rotate(i, j));
        }
    }
    if opts.translate {
        for j in 0..n - m {
            moves.push(Move::Translate(j));
        }
    }

    let score = |t: &OptimizingTriple, s: &AffineSubspace, mu: f64| -> Result<f64> {
        if mu == 0.0 {
            return Ok(t.diameter);
        }
        let c = principal_chords(f, s, level, region, &t.midpoint())?.unwrap_or(t.diameter);
        Ok(t.diameter + mu * c)
    };

    let shift0 = 0.125 * region.radius;
    let mut comp = s.complement();
    let mut sweeps = 0;
    let mut converged = false;
    let mut flat = false;
    let mut rot = opts.rotation_step;
    // With m ≥ 2 the diameter is a max over principal chords and coordinate
    // search stalls where two of them tie; a first pass also shrinks the others.
    let phases: &[(f64, f64)] = if m >= 2 {
        &[(SMOOTHING, SMOOTHING_STOP), (0.0, 0.0)]
    } else {
        &[(0.0, 0.0)]
    };

    for &(mu, stop_at) in phases {
        let stop_at = stop_at.max(opts.min_rotation_step);
        if mu == 0.0 && phases.len() > 1 {
            rot = (4.0 * rot).min(opts.rotation_step);
        }
        let mut cur_score = score(&cur, &s, mu)?;
        let mut recheck = true;
        while sweeps < opts.max_sweeps {
            sweeps += 1;
            if recheck {
                let cold = solve(&s, None)?;
                if cold.diameter > cur.diameter + 1e-12 * (1.0 + cur.diameter) {
                    cur = cold;
                    cur.subspace = s.clone();
                    cur_score = score(&cur, &s, mu)?;
                }
                recheck = false;
            }
            let shift = shift0 * rot / opts.rotation_step;
            let mut improved = false;
            for &mv in &moves {
                let amount = match mv {
                    Move::Rotate(..) => rot,
                    Move::Translate(_) => shift,
                };
                for sign in [1.0, -1.0] {
                    let cand = apply(&s, &comp, mv, sign * amount);
                    // Sliding toward ∂U shrinks slices through the ball, not the level set.
                    if matches!(mv, Move::Translate(_)) && cand.distance(&region.center) > 0.5 * region.radius {
                        continue;
                    }
                    let t = match solve(&cand, Some(&cur)) {
                        Ok(t) => t,
                        Err(Error::SubspaceMissesRegion) => continue,
                        Err(e) => return Err(e),
                    };
                    if t.flags.empty || t.diameter <= EMPTY_DIAMETER {
                        return Ok(OuterSolution {
                            triple: t,
                            sweeps,
                            inner_solves: solves,
                            converged: true,
                            non_unique_subspace: false,
                        });
                    }
                    if rot >= opts.rotation_step / 4.0 && (t.diameter - cur.diameter).abs() <= opts.non_unique_tol {
                        flat = true;
                    }
                    if t.flags.boundary_hit && !cur.flags.boundary_hit {
                        continue;
                    }
                    let next = principal_frame(f, &cand.rebased(t.midpoint()));
                    let sc = score(&t, &next, mu)?;
                    if sc < cur_score - 1e-14 * (1.0 + cur_score) {
                        s = next;
                        cur = t;
                        cur.subspace = s.clone();
                        cur_score = sc;
                        comp = s.complement();
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                rot *= 0.5;
                recheck = true;
                if rot < stop_at {
                    converged = true;
                    break;
                }
            }
        }
    }

    let last = solve(&s, None)?;
    if last.diameter > cur.diameter + 1e-12 * (1.0 + cur.diameter) {
        cur = last;
    } else {
        cur.flags.non_unique |= last.flags.non_unique;
    }
    cur.flags.converged &= converged;
    if let (true, Some(init)) = (opts.keep_initial_on_tie, &opts.initial) {
        let t = solve(init, None)?;
        if !t.flags.empty && t.diameter <= cur.diameter + opts.non_unique_tol {
            return Ok(OuterSolution {
                triple: t,
                sweeps,
                inner_solves: solves,
                converged,
                non_unique_subspace: true,
            });
        }
    }
    Ok(OuterSolution {
        triple: cur,
        sweeps,
        inner_solves: solves,
        converged,
        non_unique_subspace: flat,
    })
}

/// Weight of the chord term in the first search phase.
const SMOOTHING: f64 = 0.5;
/// Rotation step at which the first phase hands over to the plain diameter.
const SMOOTHING_STOP: f64 = 1e-3;

/// Same subspace, frame rotated onto the eigenvectors of the restricted Hessian at the base.
fn principal_frame(f: &dyn Objective, s: &AffineSubspace) -> AffineSubspace {
    let v = s.frame.matrix();
    let aligned = hessian_or_fd(f, &s.base)
        .ok()
        .map(|h| v.transpose() * h * v)
        .filter(|b| b.iter().all(|c| c.is_finite()))
        .and_then(|b| sym_eigen(&((&b + b.transpose()) * 0.5)).ok())
        .and_then(|e| Frame::orthonormalize(&(v * e.vectors)).ok());
    match aligned {
        Some(frame) => AffineSubspace {
            base: s.base.clone(),
            frame,
        },
        None => s.clone(),
    }
}

/// Root mean square of the slice chords through `z` along the frame directions.
fn principal_chords(
    f: &dyn Objective,
    s: &AffineSubspace,
    level: f64,
    region: &TrustRegion,
    z: &Vector,
) -> Result<Option<f64>> {
    let slice = match Slice::new(f, s, level, region) {
        Ok(sl) => sl,
        Err(Error::SubspaceMissesRegion) => return Ok(None),
        Err(e) => return Err(e),
    };
    let w = s.coords(z);
    if slice.g(&w)? < level || slice.ball_slack(&w) < 0.0 {
        return Ok(None);
    }
    let k = s.dim();
    let mut sum = 0.0;
    for i in 0..k {
        let mut e = Vector::zeros(k);
        e[i] = 1.0;
        let a = slice.exit(&w, &e)?;
        let b = slice.exit(&w, &(-&e))?;
        sum += (&a.w - &b.w).norm_squared();
    }
    Ok(Some((sum / k as f64).sqrt()))
}

/// Whether the min-max value at level `l` vanishes.
#[derive(Debug, Clone)]
pub enum Feasibility {
    Empty(OptimizingTriple),
    Nonempty(OptimizingTriple),
}

impl Feasibility {
    pub fn is_empty(&self) -> bool {
        matches!(self, Feasibility::Empty(_))
    }

    pub fn triple(&self) -> &OptimizingTriple {
        match self {
            Feasibility::Empty(t) | Feasibility::Nonempty(t) => t,
        }
    }
}

/// Empty iff the outer minimum of the slice diameter is at most `1e-9`.
pub fn level_feasibility(
    f: &dyn Objective,
    level: f64,
    region: &TrustRegion,
    m: usize,
    opts: &OuterOptions,
) -> Result<Feasibility> {
    let sol = outer_min_subspace(f, level, region, m, opts)?;
    if sol.triple.flags.empty || sol.triple.diameter <= EMPTY_DIAMETER {
        Ok(Feasibility::Empty(sol.triple))
    } else {
        Ok(Feasibility::Nonempty(sol.triple))
    }
}

//! Bisection on the level.
//!
//! At each midpoint level the outer problem decides whether the slices can
//! be made empty. An empty slice puts the midpoint above the critical value,
//! a nonempty one puts it below, so the bracket always keeps the critical
//! value and halves in width each step.

use crate::error::{Error, Result};
use crate::geometry::{opposite_gradient_residual, OptimizingTriple, TrustRegion};
use crate::numkit::Vector;
use crate::objective::{eval, eval_grad, Objective};
use crate::outer::{level_feasibility, Feasibility, OuterOptions, EMPTY_DIAMETER};
use crate::trace::{SolverTrace, TraceRecord};

#[derive(Debug, Clone)]
pub struct BisectionOptions {
    pub outer: OuterOptions,
    /// Gradient norm at the final midpoint below which the run counts as converged.
    pub grad_tol: f64,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        BisectionOptions {
            outer: OuterOptions::default(),
            grad_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BisectionResult {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    /// Last nonempty optimizing triple, if any level was below the critical value.
    pub triple: Option<OptimizingTriple>,
    pub trace: SolverTrace,
    pub stationarity: StationarityReport,
}

impl BisectionResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn converged(&self) -> bool {
        self.stationarity.flag == StationarityFlag::Converged
    }
}

/// `[min f, max f + 1]` over the region center and the points `center ± r eᵢ`.
pub fn default_bracket(f: &dyn Objective, region: &TrustRegion) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut probe = |x: &Vector| -> Result<()> {
        let v = eval(f, x)?;
        lo = lo.min(v);
        hi = hi.max(v);
        Ok(())
    };
    probe(&region.center)?;
    for i in 0..region.center.len() {
        for s in [1.0, -1.0] {
            let mut x = region.center.clone();
            x[i] += s * region.radius;
            probe(&x)?;
        }
    }
    Ok((lo, hi + 1.0))
}

/// Halves `[l0, u0]` until its width is at most `tol` or `max_iter` steps were taken.
pub fn bisection_solve(
    f: &dyn Objective,
    region: &TrustRegion,
    m: usize,
    l0: f64,
    u0: f64,
    tol: f64,
    max_iter: usize,
    opts: &BisectionOptions,
) -> Result<BisectionResult> {
    if !(l0.is_finite() && u0.is_finite() && l0 < u0) {
        return Err(Error::InvalidBracket { lower: l0, upper: u0 });
    }
    let (mut lo, mut hi) = (l0, u0);
    let mut trace = SolverTrace::default();
    let mut best: Option<OptimizingTriple> = None;
    let mut iterations = 0;
    while iterations < max_iter && hi - lo > tol {
        iterations += 1;
        let width_before = hi - lo;
        let mid = 0.5 * (lo + hi);
        let feas = level_feasibility(f, mid, region, m, &opts.outer)?;
        let (diameter, kkt) = match &feas {
            Feasibility::Empty(_) => {
                hi = mid;
                (0.0, None)
            }
            Feasibility::Nonempty(t) => {
                lo = mid;
                let kkt = opposite_gradient_residual(f, &t.x, &t.y).ok().map(|c| c.residual);
                best = Some(t.clone());
                (t.diameter, kkt)
            }
        };
        let z = best.as_ref().map(|t| t.midpoint()).unwrap_or_else(|| region.center.clone());
        let grad_norm = eval_grad(f, &z).ok().map(|g| g.norm());
        trace.push(TraceRecord {
            iter: iterations,
            l: lo,
            u: Some(hi),
            diameter,
            kkt_residual: kkt,
            z: z.as_slice().to_vec(),
            grad_norm,
            ratio: Some((hi - lo) / width_before),
        });
    }
    let stationarity = stationarity_diagnostic(&trace, opts.grad_tol);
    Ok(BisectionResult {
        lower: lo,
        upper: hi,
        iterations,
        triple: best,
        trace,
        stationarity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationarityFlag {
    /// The last recorded midpoint has gradient norm below tolerance.
    Converged,
    /// The pair gap did not shrink over the recorded nonempty iterates.
    NotConverging,
    InProgress,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityEntry {
    pub iter: usize,
    pub grad_norm: Option<f64>,
    pub gap: f64,
    pub kkt_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub entries: Vec<StationarityEntry>,
    pub flag: StationarityFlag,
}

/// Gradient norm at the midpoint, pair gap and residual per record.
pub fn stationarity_diagnostic(trace: &SolverTrace, grad_tol: f64) -> StationarityReport {
    let entries: Vec<StationarityEntry> = trace
        .records
        .iter()
        .map(|r| StationarityEntry {
            iter: r.iter,
            grad_norm: r.grad_norm,
            gap: r.diameter,
            kkt_residual: r.kkt_residual,
        })
        .collect();
    let gaps: Vec<f64> = entries.iter().map(|e| e.gap).filter(|&g| g > EMPTY_DIAMETER).collect();
    let flag = match entries.last().and_then(|e| e.grad_norm) {
        Some(g) if g < grad_tol => StationarityFlag::Converged,
        _ if gaps.len() >= 2 && gaps[gaps.len() - 1] >= gaps[0] => StationarityFlag::NotConverging,
        _ => StationarityFlag::InProgress,
    };
    StationarityReport { entries, flag }
}

//! Run configuration and the `solve` / `report` drivers behind the binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::bisection::{bisection_solve, default_bracket, BisectionOptions};
use crate::error::{Error, Result};
use crate::geometry::{AffineSubspace, InnerOptions, TrustRegion};
use crate::local::{fast_local_solve, measure_convergence_rate, EigenspaceOptions, FastLocalOptions, RateClass};
use crate::numkit::Vector;
use crate::objective::{eval, eval_grad, TestProblem};
use crate::outer::OuterOptions;
use crate::trace::{SolverTrace, TraceFormat, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Bisection,
    FastLocal,
    Both,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bisection" => Ok(Algorithm::Bisection),
            "fast-local" => Ok(Algorithm::FastLocal),
            "both" => Ok(Algorithm::Both),
            other => Err(Error::config(
                "algorithm",
                format!("expected bisection, fast-local or both, got `{other}`"),
            )),
        }
    }
}

/// Unvalidated solver settings as they come from the command line.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub morse_index: Option<usize>,
    pub algorithm: Algorithm,
    pub center: Option<Vec<f64>>,
    pub radius: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub trace_out: Option<PathBuf>,
    pub format: Option<TraceFormat>,
    pub naive_subspace: bool,
    /// Gradient norm at which a bisection run counts as converged.
    pub grad_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: None,
            morse_index: None,
            algorithm: Algorithm::Bisection,
            center: None,
            radius: 1.0,
            lower: None,
            upper: None,
            tol: 1e-8,
            max_iter: 50,
            seed: 0,
            trace_out: None,
            format: None,
            naive_subspace: false,
            grad_tol: 1e-6,
        }
    }
}

/// A [`RunConfig`] that passed validation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub problem: TestProblem,
    pub m: usize,
    pub region: TrustRegion,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved> {
        let name = self.problem.as_deref().ok_or_else(|| Error::config("problem", "required"))?;
        let problem = TestProblem::parse(name)?;
        let n = problem.objective.dim();
        let m = self.morse_index.ok_or_else(|| Error::config("morse-index", "required"))?;
        if m == 0 || m > n {
            return Err(Error::config("morse-index", format!("must lie in 1..={n}, got {m}")));
        }
        let center = match &self.center {
            Some(c) if c.len() != n => {
                return Err(Error::config("center", format!("expected {n} coordinates, got {}", c.len())));
            }
            Some(c) => Vector::from_column_slice(c),
            None => Vector::zeros(n),
        };
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("center", "coordinates must be finite"));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::config("radius", format!("must be positive and finite, got {}", self.radius)));
        }
        for (field, v) in [("lower", self.lower), ("upper", self.upper)] {
            if v.is_some_and(|x| !x.is_finite()) {
                return Err(Error::config(field, "must be finite"));
            }
        }
        if let (Some(l), Some(u)) = (self.lower, self.upper) {
            if l >= u {
                return Err(Error::config("upper", format!("must exceed lower ({l} >= {u})")));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::config("tol", format!("must be positive and finite, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max-iter", "must be at least 1"));
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return Err(Error::config("grad-tol", "must be positive and finite"));
        }
        let region = TrustRegion::new(center, self.radius)?;
        Ok(Resolved { problem, m, region })
    }

    /// Output format: explicit flag, else `.json` extension, else CSV.
    pub fn trace_format(&self) -> TraceFormat {
        self.format.unwrap_or_else(|| match &self.trace_out {
            Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => TraceFormat::Json,
            _ => TraceFormat::Csv,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Converged => 0,
            Status::NotConverged => 2,
        }
    }
}

/// Exit code for a failed run: 1 for bad configuration or input files, 3 for structural failures.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::InvalidBracket { .. }
        | Error::Io(_)
        | Error::TraceFormat(_)
        | Error::InsufficientData { .. } => 1,
        _ => 3,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: Status,
    pub trace: SolverTrace,
    pub point: Vector,
    pub value: f64,
}

/// Level at a quarter of the way from `f(center)` down to the lowest probe value.
fn default_start_level(r: &Resolved) -> Result<f64> {
    let f = r.problem.objective.as_ref();
    let (lo, _) = default_bracket(f, &r.region)?;
    let fc = eval(f, &r.region.center)?;
    Ok(fc + 0.25 * (lo - fc))
}

fn outer_options(cfg: &RunConfig) -> OuterOptions {
    OuterOptions {
        inner: InnerOptions {
            seed: cfg.seed,
            ..Default::default()
        },
        ..Default::default()
    }
}

/// Runs the configured solver, writes the trace and prints a summary to `out`.
pub fn run_solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<RunOutcome> {
    let r = cfg.resolve()?;
    let f = r.problem.objective.as_ref();
    writeln!(out, "problem   {} (n = {}, m = {})", r.problem.name, f.dim(), r.m)?;

    let outcome = match cfg.algorithm {
        Algorithm::Bisection => run_bisection(cfg, &r, cfg.tol, cfg.max_iter, out)?,
        Algorithm::FastLocal => {
            let l0 = match cfg.lower {
                Some(l) => l,
                None => default_start_level(&r)?,
            };
            run_fast_local(cfg, &r, l0, out)?
        }
        Algorithm::Both => {
            let first = run_bisection(cfg, &r, 0.0, cfg.max_iter.min(8), out)?;
            let l0 = first.trace.last().map(|t| t.l).unwrap_or(first.value);
            let mut second = run_fast_local(cfg, &r, l0, out)?;
            let offset = first.trace.len();
            let mut records: Vec<TraceRecord> = first.trace.records;
            records.extend(second.trace.records.into_iter().map(|mut t| {
                t.iter += offset + 1;
                t
            }));
            second.trace = SolverTrace { records };
            second
        }
    };

    report_rate(&outcome.trace, r.problem.critical_value, out)?;
    let grad = eval_grad(f, &outcome.point)?.norm();
    writeln!(out, "point     {}", join(outcome.point.as_slice()))?;
    writeln!(out, "grad norm {grad:.6e}")?;
    writeln!(
        out,
        "status    {}",
        match outcome.status {
            Status::Converged => "converged",
            Status::NotConverged => "not converged",
        }
    )?;
    if let Some(path) = &cfg.trace_out {
        outcome.trace.save(path, cfg.trace_format())?;
        writeln!(out, "trace     {}", path.display())?;
    }
    Ok(outcome)
}

fn run_bisection(cfg: &RunConfig, r: &Resolved, tol: f64, max_iter: usize, out: &mut dyn Write) -> Result<RunOutcome> {
    let f = r.problem.objective.as_ref();
    let (dl, du) = default_bracket(f, &r.region)?;
    let (l0, u0) = (cfg.lower.unwrap_or(dl), cfg.upper.unwrap_or(du));
    let opts = BisectionOptions {
        outer: outer_options(cfg),
        grad_tol: cfg.grad_tol,
    };
    let res = bisection_solve(f, &r.region, r.m, l0, u0, tol, max_iter, &opts)?;
    let point = res.triple.as_ref().map(|t| t.midpoint()).unwrap_or_else(|| r.region.center.clone());
    writeln!(
        out,
        "bracket   [{:.16e}, {:.16e}] width {:.3e} after {} iterations",
        res.lower,
        res.upper,
        res.width(),
        res.iterations
    )?;
    let status = if res.width() <= tol || res.converged() {
        Status::Converged
    } else {
        Status::NotConverged
    };
    Ok(RunOutcome {
        status,
        value: 0.5 * (res.lower + res.upper),
        trace: res.trace,
        point,
    })
}

fn run_fast_local(cfg: &RunConfig, r: &Resolved, l0: f64, out: &mut dyn Write) -> Result<RunOutcome> {
    let f = r.problem.objective.as_ref();
    let mut outer = outer_options(cfg);
    if cfg.naive_subspace {
        if let Some(frame) = &r.problem.naive_frame {
            outer.initial = Some(AffineSubspace::new(r.region.center.clone(), frame.clone())?);
        }
    }
    let opts = FastLocalOptions {
        outer,
        naive_subspace: cfg.naive_subspace,
        eigenspace: EigenspaceOptions {
            seed: cfg.seed,
            ..Default::default()
        },
        known_value: r.problem.critical_value,
    };
    let res = fast_local_solve(f, &r.region, r.m, l0, cfg.max_iter, cfg.tol, &opts)?;
    writeln!(out, "level     {:.16e} after {} iterations", res.value, res.states.len())?;
    Ok(RunOutcome {
        status: if res.converged { Status::Converged } else { Status::NotConverged },
        trace: res.trace,
        point: res.point,
        value: res.value,
    })
}

fn join(x: &[f64]) -> String {
    x.iter().map(|c| format!("{c:.6e}")).collect::<Vec<_>>().join(", ")
}

fn report_rate(trace: &SolverTrace, known: Option<f64>, out: &mut dyn Write) -> Result<()> {
    match measure_convergence_rate(trace, known) {
        Ok(est) => writeln!(out, "rate      {} (ratio {:.3e})", class_name(est.class), est.ratio)?,
        Err(e) => writeln!(out, "rate      unavailable: {e}")?,
    }
    Ok(())
}

fn class_name(c: RateClass) -> &'static str {
    match c {
        RateClass::Superlinear => "superlinear",
        RateClass::Linear => "linear",
        RateClass::Stalled => "stalled",
    }
}

/// Prints per-iteration gaps and ratios of a saved trace and its rate class.
pub fn run_report(path: &Path, true_value: Option<f64>, out: &mut dyn Write) -> Result<()> {
    let trace = SolverTrace::load(path)?;
    let est = measure_convergence_rate(&trace, true_value)?;
    match (trace.records.iter().all(|r| r.u.is_some()), est.limit) {
        (true, _) => writeln!(out, "gap = u - l")?,
        (false, Some(c)) => writeln!(out, "gap = |l - {c:.16e}|")?,
        (false, None) => writeln!(out, "gap = |l - limit|")?,
    }
    writeln!(out, "{:>5} {:>24} {:>12} {:>12}", "iter", "l", "gap", "ratio")?;
    for (i, gap) in est.gaps.iter().enumerate() {
        let ratio = if i == 0 {
            String::from("-")
        } else {
            est.ratios.get(i - 1).map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into())
        };
        let rec = &trace.records[i];
        writeln!(out, "{:>5} {:>24.16e} {:>12.3e} {:>12}", rec.iter, rec.l, gap, ratio)?;
    }
    writeln!(out, "class {} ratio {:.3e}", class_name(est.class), est.ratio)?;
    Ok(())
}

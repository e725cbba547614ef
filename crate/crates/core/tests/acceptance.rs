//! Acceptance suite: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use levelsaddle::bisection::{bisection_solve, BisectionOptions};
use levelsaddle::bounds::{critical_value_lower_bound, direction_error, length_estimate_bounds, tracked_axis};
use levelsaddle::geometry::{
    brute_force_diameter, inner_max_diameter, opposite_gradient_residual, AffineSubspace, InnerOptions, TrustRegion,
};
use levelsaddle::local::{
    fast_local_solve, measure_convergence_rate, orthogonal_space_lower_bound, FastLocalOptions, RateClass,
};
use levelsaddle::numkit::{complete_frame, orthonormality_defect, Frame, Matrix, Vector};
use levelsaddle::objective::{
    eval, eval_grad, four_lines_function, make_quadratic, EnvelopeProblem, ModelEnvelope, Objective, Polynomial,
    Quadratic, TestProblem,
};
use levelsaddle::outer::{outer_min_subspace, OuterOptions};
use levelsaddle::quadmodel::{fit_quadratic_rectangular, fit_quadratic_square, SimplexData};
use levelsaddle::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

// Pinned tolerances.
const DIAM_TOL: f64 = 1e-6;
const KKT_TOL: f64 = 1e-5;
const FOUR_LINES_MIN_RESIDUAL: f64 = 0.5;
const GRADIENT_TOL: f64 = 1e-6;
const BRACKET_WIDTH: f64 = 4e-6;
const BRACKET_GRAD: f64 = 1e-3;
const LOCAL_LEVEL: f64 = 1e-10;
const SUPERLINEAR_FINAL: f64 = 0.1;
const LINEAR_RATIO: f64 = 0.5;
const LINEAR_SLACK: f64 = 0.01;
const FIT_TOL: f64 = 1e-9;
const FIT_TREND: f64 = 50.0;
const FRAME_TOL: f64 = 1e-12;
const ENVELOPE_DELTA: f64 = 1e-3;
const MIDPOINT_RATIO: f64 = 0.1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn v(x: &[f64]) -> Vector {
    Vector::from_column_slice(x)
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

/// Sorted-descending coefficients with `m` negatives and gaps of at least 0.2.
fn random_signature(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<f64> {
    loop {
        let mut a: Vec<f64> = (0..n - m).map(|_| rng.random_range(0.5..3.0)).collect();
        a.extend((0..m).map(|_| rng.random_range(-3.0..-0.5)));
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        if a.windows(2).all(|w| w[0] - w[1] >= 0.2) {
            return a;
        }
    }
}

struct QuadCase {
    measured: f64,
    expected: f64,
    kkt: Option<f64>,
}

fn quadratic_cases() -> (Vec<QuadCase>, Duration) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let mut cases = Vec::new();
    for _ in 0..20 {
        let n = rng.random_range(2..=6usize);
        let m = rng.random_range(1..=3usize.min(n));
        let a = random_signature(&mut rng, n, m);
        let l = rng.random_range(-2.0..-0.1);
        let ak = a[n - m];
        let half = (l / ak).sqrt();
        let radius = 1.6 * half + 0.2;
        let u = TrustRegion::new(Vector::zeros(n), radius).unwrap();
        let f = Quadratic::sum_of_squares(&a);
        let mut e = Matrix::zeros(n, m);
        for j in 0..m {
            e[(n - m + j, j)] = 1.0;
        }
        let frame = Frame::orthonormalize(&(e + gaussian(&mut rng, n, m) * 0.2)).unwrap();
        let base = gaussian(&mut rng, n, 1).column(0) * (0.05 * half);
        let opts = OuterOptions {
            initial: Some(AffineSubspace::new(base, frame).unwrap()),
            ..Default::default()
        };
        let sol = outer_min_subspace(&f, l, &u, m, &opts).unwrap();
        let t = &sol.triple;
        let kkt = (t.flags.converged && !t.flags.non_unique)
            .then(|| opposite_gradient_residual(&f, &t.x, &t.y).map(|c| c.residual).unwrap_or(f64::INFINITY));
        cases.push(QuadCase {
            measured: t.diameter,
            expected: 2.0 * half,
            kkt,
        });
    }
    (cases, start.elapsed())
}

fn criterion_1(cases: &[QuadCase], elapsed: Duration) -> Outcome {
    let worst = cases.iter().map(|c| (c.measured - c.expected).abs()).fold(0.0, f64::max);
    outcome(
        worst <= DIAM_TOL && elapsed.as_secs_f64() < 60.0,
        format!("max |diam - 2sqrt(l/a)| = {worst:.2e} over {} cases in {:.1}s", cases.len(), elapsed.as_secs_f64()),
    )
}

fn criterion_2(cases: &[QuadCase]) -> Outcome {
    let certified: Vec<f64> = cases.iter().filter_map(|c| c.kkt).collect();
    let worst = certified.iter().copied().fold(0.0, f64::max);
    let f = four_lines_function();
    let (x, y) = (v(&[1.0, 0.0, 0.0]), v(&[-1.0, 0.0, 0.0]));
    let gx = eval_grad(&f, &x).unwrap();
    let gy = eval_grad(&f, &y).unwrap();
    let third = 8.0 / 3.0;
    let grads_ok = (gx - v(&[-third, 0.0, third])).amax() <= GRADIENT_TOL && (gy - v(&[third, 0.0, third])).amax() <= GRADIENT_TOL;
    let residual = opposite_gradient_residual(&f, &x, &y).unwrap().residual;
    outcome(
        !certified.is_empty() && worst <= KKT_TOL && grads_ok && residual > FOUR_LINES_MIN_RESIDUAL,
        format!(
            "max residual {worst:.2e} over {} unique solves; four-lines residual {residual:.4}, gradients exact: {grads_ok}",
            certified.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut worst_width: f64 = 0.0;
    let mut worst_grad: f64 = 0.0;
    let mut contains = true;
    for (coeffs, m) in [(vec![1.0, -1.0], 1), (vec![1.0, -1.0, -3.0], 2)] {
        let f = Quadratic::sum_of_squares(&coeffs);
        let u = TrustRegion::new(Vector::zeros(coeffs.len()), 2.0).unwrap();
        let r = bisection_solve(&f, &u, m, -1.0, 1.0, 0.0, 20, &BisectionOptions::default()).unwrap();
        worst_width = worst_width.max(r.width());
        contains &= r.lower <= 0.0 && 0.0 <= r.upper;
        let z = r.triple.as_ref().map(|t| t.midpoint()).unwrap();
        worst_grad = worst_grad.max(eval_grad(&f, &z).unwrap().norm());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_width <= BRACKET_WIDTH && contains && worst_grad <= BRACKET_GRAD && secs < 30.0,
        format!("width {worst_width:.2e}, contains 0: {contains}, grad {worst_grad:.2e}, {secs:.1}s"),
    )
}

fn failure_runs() -> (Result<levelsaddle::local::FastLocalResult, Error>, levelsaddle::local::FastLocalResult) {
    let p = TestProblem::failure_3d();
    let f = p.objective.as_ref();
    let u = TrustRegion::new(Vector::zeros(3), 2.0).unwrap();
    let naive = FastLocalOptions {
        naive_subspace: true,
        outer: OuterOptions {
            initial: Some(AffineSubspace::new(Vector::zeros(3), p.naive_frame.clone().unwrap()).unwrap()),
            ..Default::default()
        },
        known_value: Some(0.0),
        ..Default::default()
    };
    let naive_run = fast_local_solve(f, &u, 2, -1.0, 10, 1e-14, &naive);
    let good = FastLocalOptions {
        known_value: Some(0.0),
        ..Default::default()
    };
    let good_run = fast_local_solve(f, &u, 2, -1.0, 10, 1e-14, &good).unwrap();
    (naive_run, good_run)
}

fn criterion_4(naive: &Result<levelsaddle::local::FastLocalResult, Error>, good: &levelsaddle::local::FastLocalResult) -> Outcome {
    let unbounded = matches!(naive, Err(Error::Unbounded { .. }));
    let first_small = good.levels().iter().position(|l| l.abs() < LOCAL_LEVEL);
    let dist = good.point.norm();
    outcome(
        unbounded && good.converged && first_small.is_some_and(|i| i < 10) && dist < 1e-6,
        format!(
            "naive: {}; corrected: |l| < 1e-10 at iteration {:?}, |point| = {dist:.1e}",
            match naive {
                Err(e) => e.to_string(),
                Ok(_) => "no failure".into(),
            },
            first_small
        ),
    )
}

fn criterion_5(good: &levelsaddle::local::FastLocalResult) -> Outcome {
    let fail_rate = measure_convergence_rate(&good.trace, Some(0.0)).unwrap();
    let fail_ok = fail_rate.class == RateClass::Superlinear;

    let p = TestProblem::cubic_saddle();
    let f = p.objective.as_ref();
    let u = TrustRegion::new(Vector::zeros(2), 0.6).unwrap();
    let opts = FastLocalOptions {
        known_value: Some(0.0),
        ..Default::default()
    };
    let cubic = fast_local_solve(f, &u, 1, -0.1, 20, 1e-14, &opts).unwrap();
    let cubic_rate = measure_convergence_rate(&cubic.trace, Some(0.0)).unwrap();
    let tail = &cubic_rate.ratios[cubic_rate.ratios.len().saturating_sub(3)..];
    let cubic_ok = tail.len() == 3 && tail.windows(2).all(|w| w[1] < w[0]) && tail[2] < SUPERLINEAR_FINAL;

    let mut linear_ok = true;
    let mut linear_ratios = Vec::new();
    for (prob, m, radius) in [(TestProblem::failure_3d(), 2, 2.0), (TestProblem::cubic_saddle(), 1, 0.6)] {
        let n = prob.objective.dim();
        let u = TrustRegion::new(Vector::zeros(n), radius).unwrap();
        let r = bisection_solve(prob.objective.as_ref(), &u, m, -0.1, 0.1, 0.0, 10, &BisectionOptions::default())
            .unwrap();
        let est = measure_convergence_rate(&r.trace, None).unwrap();
        linear_ok &= est.class == RateClass::Linear && (est.ratio - LINEAR_RATIO).abs() <= LINEAR_SLACK;
        linear_ratios.push(est.ratio);
    }
    outcome(
        fail_ok && cubic_ok && linear_ok,
        format!(
            "failure-3d: terminates exactly after {} step(s) (gap {:.1e}); cubic ratios {:?}; bisection ratios {:?}",
            fail_rate.gaps.len() - 1,
            fail_rate.gaps.last().unwrap(),
            tail.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>(),
            linear_ratios
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=5usize);
        let g = gaussian(&mut rng, n, n);
        let a = (&g + g.transpose()) * 0.5;
        let b = gaussian(&mut rng, n, 1).column(0).into_owned();
        let c: f64 = rng.sample(StandardNormal);
        let q = make_quadratic(a.clone(), b.clone(), c).unwrap();
        let p1 = gaussian(&mut rng, n, 1).column(0).into_owned();
        let edges = Matrix::identity(n, n) + gaussian(&mut rng, n, n) * 0.3;
        let verts: Vec<Vector> = std::iter::once(p1.clone()).chain(edges.column_iter().map(|e| &p1 + e)).collect();
        let data = SimplexData::sample(&q, verts).unwrap();
        let fit = fit_quadratic_square(&data).unwrap();
        let err = (fit.curvature() - &a).amax().max((fit.b - &b).amax()).max((fit.c - c).abs());
        worst = worst.max(err);
    }

    // Quadratic plus a small cubic, fitted on a 2-simplex in R³.
    let cubic = Polynomial::new(
        3,
        vec![
            (1.0, vec![2, 0, 0]),
            (-0.5, vec![0, 2, 0]),
            (0.7, vec![1, 1, 0]),
            (-1.0, vec![0, 0, 2]),
            (0.05, vec![3, 0, 0]),
            (0.05, vec![1, 1, 1]),
            (0.05, vec![0, 2, 1]),
        ],
    )
    .unwrap();
    let shape = [v(&[0.0, 0.0, 0.0]), v(&[1.0, 0.2, 0.1]), v(&[0.3, 1.0, -0.2])];
    let base = v(&[0.3, -0.2, 0.1]);
    let model_error = |scale: f64| -> f64 {
        let verts: Vec<Vector> = shape.iter().map(|p| &base + p * scale).collect();
        let data = SimplexData::sample(&cubic, verts.clone()).unwrap();
        let model = fit_quadratic_rectangular(&data).unwrap();
        let mut e: f64 = 0.0;
        for i in 0..=20 {
            for j in 0..=20 - i {
                let (s, t) = (i as f64 / 20.0, j as f64 / 20.0);
                let x = &verts[0] + (&verts[1] - &verts[0]) * s + (&verts[2] - &verts[0]) * t;
                e = e.max((model.value(&x) - eval(&cubic, &x).unwrap()).abs());
            }
        }
        e
    };
    let coarse_scale = 0.1 / SimplexData::sample(&cubic, shape.to_vec()).unwrap().diameter();
    let big = model_error(coarse_scale);
    let small = model_error(coarse_scale / 10.0);
    let trend = big / small;
    outcome(
        worst <= FIT_TOL && trend >= FIT_TREND,
        format!("square round-trip max error {worst:.2e}; model error {big:.2e} -> {small:.2e} (factor {trend:.0})"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=8usize);
        let k = rng.random_range(0..=n);
        let frame = Frame::orthonormalize(&gaussian(&mut rng, n, k)).unwrap();
        let done = complete_frame(&frame);
        worst = worst.max(orthonormality_defect(done.matrix()));
    }
    let mut monotone = true;
    let mut devs = Vec::new();
    for trial in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(70 + trial);
        let (n, k) = (6, 3);
        let dir = gaussian(&mut rng, n, k);
        let mut prev = f64::INFINITY;
        for delta in [1e-2, 1e-4, 1e-6] {
            let e = Matrix::identity(n, n).columns(0, k).into_owned();
            let frame = Frame::orthonormalize(&(e + &dir * delta)).unwrap();
            let dev = (complete_frame(&frame).into_matrix() - Matrix::identity(n, n)).amax();
            monotone &= dev < prev;
            prev = dev;
            if trial == 0 {
                devs.push(dev);
            }
        }
    }
    outcome(
        worst <= FRAME_TOL && monotone,
        format!("max |FᵀF - I| = {worst:.1e}; deviation from I over δ: {:?}", devs.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>()),
    )
}

fn criterion_8() -> Outcome {
    let mut all_ok = true;
    let mut checked = 0;
    let mut midpoint_ratio = f64::NAN;
    let mut lb_ok = true;
    for (diag, m, seed) in [(vec![2.0, -1.0], 1usize, 8u64), (vec![2.0, -1.0, -3.0], 2, 9), (vec![1.5, 0.5, -2.0], 1, 10)] {
        let n = diag.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = ModelEnvelope::new(Vector::from_vec(diag), ENVELOPE_DELTA).unwrap();
        let h = EnvelopeProblem::new(env.clone(), gaussian(&mut rng, n, n), gaussian(&mut rng, n, 1).column(0).into_owned())
            .unwrap();
        let u = TrustRegion::new(Vector::zeros(n), 0.9).unwrap();
        let run = fast_local_solve(&h, &u, m, -0.05, 12, 1e-14, &FastLocalOptions::default()).unwrap();
        all_ok &= run.converged;
        let k = tracked_axis(n, m);
        for st in &run.states {
            if st.triple.diameter <= 1e-9 || st.level >= 0.0 {
                continue;
            }
            for p in [&st.triple.x, &st.triple.y] {
                let level = eval(&h, p).unwrap();
                let theta = direction_error(p, k).unwrap();
                if let Some((lo, hi)) = length_estimate_bounds(&env, k, level, theta) {
                    let r = p.norm();
                    all_ok &= lo * (1.0 - 1e-9) <= r && r <= hi * (1.0 + 1e-9);
                    checked += 1;
                }
            }
            if let (Some(s), Some(next)) = (&st.subspace, st.next_level) {
                let z = st.triple.midpoint();
                let bound = critical_value_lower_bound(&env, &z, &s.complement()).unwrap();
                lb_ok &= next >= bound - 1e-15;
            }
        }
        // Last iterate whose level is still well above roundoff.
        let last = run.states.iter().rev().find(|s| s.level.abs() > 1e-24 && s.triple.diameter > 1e-9).unwrap();
        let z = last.triple.midpoint();
        let ratio = z.norm_squared() / last.level.abs();
        midpoint_ratio = if midpoint_ratio.is_nan() { ratio } else { midpoint_ratio.max(ratio) };
    }
    outcome(
        all_ok && checked > 0 && midpoint_ratio < MIDPOINT_RATIO && lb_ok,
        format!("{checked} pair lengths inside their bounds; worst final |z|²/|l| = {midpoint_ratio:.1e}; level bound held: {lb_ok}"),
    )
}

fn criterion_9() -> Outcome {
    let mut cases: Vec<(String, std::sync::Arc<dyn Objective>, AffineSubspace, f64, TrustRegion)> = Vec::new();
    let ball = |n: usize, r: f64| TrustRegion::new(Vector::zeros(n), r).unwrap();
    let sub = |base: &[f64], cols: &[f64], k: usize| {
        AffineSubspace::new(v(base), Frame::orthonormalize(&Matrix::from_column_slice(base.len(), k, cols)).unwrap())
            .unwrap()
    };
    let q2 = TestProblem::quadratic_diag(&[1.0, -1.0]);
    cases.push(("saddle line".into(), q2.objective.clone(), sub(&[0.0, 0.0], &[0.0, 1.0], 1), -0.5, ball(2, 2.0)));
    cases.push(("saddle tilted line".into(), q2.objective.clone(), sub(&[0.1, 0.0], &[0.3, 1.0], 1), -0.5, ball(2, 2.0)));
    cases.push(("saddle plane".into(), q2.objective.clone(), sub(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0], 2), -0.5, ball(2, 1.5)));
    let f3 = TestProblem::failure_3d();
    cases.push(("failure axes".into(), f3.objective.clone(), sub(&[0.0; 3], &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 2), -1.0, ball(3, 2.0)));
    cases.push(("failure naive".into(), f3.objective.clone(), sub(&[0.0; 3], &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0], 2), -1.0, ball(3, 2.0)));
    cases.push(("failure line".into(), f3.objective.clone(), sub(&[0.2, 0.0, 0.0], &[0.0, 0.4, 1.0], 1), -0.5, ball(3, 2.0)));
    let cs = TestProblem::cubic_saddle();
    cases.push(("cubic line".into(), cs.objective.clone(), sub(&[0.0, 0.0], &[0.0, 1.0], 1), -0.1, ball(2, 0.6)));
    cases.push(("cubic plane".into(), cs.objective.clone(), sub(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0], 2), -0.1, ball(2, 0.6)));
    let c3 = TestProblem::cubic_saddle_3d();
    cases.push(("cubic-3d plane".into(), c3.objective.clone(), sub(&[0.0; 3], &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 2), -0.1, ball(3, 0.6)));
    cases.push(("cubic-3d line".into(), c3.objective.clone(), sub(&[0.05, 0.0, 0.0], &[0.0, 1.0, 0.5], 1), -0.1, ball(3, 0.6)));
    let fl = TestProblem::parse("four-lines").unwrap();
    cases.push(("four-lines plane".into(), fl.objective.clone(), sub(&[0.0; 3], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0], 2), -1.0, ball(3, 0.9)));
    cases.push(("four-lines line".into(), fl.objective.clone(), sub(&[0.0, 0.0, 0.2], &[1.0, 0.3, 0.0], 1), -0.5, ball(3, 0.7)));

    let mut failures = Vec::new();
    let mut worst_margin = f64::NEG_INFINITY;
    for (name, f, s, l, u) in &cases {
        let inner = inner_max_diameter(f.as_ref(), s, *l, u, &InnerOptions::default()).unwrap();
        let res = if s.dim() == 1 { 4000 } else { 240 };
        let brute = brute_force_diameter(f.as_ref(), s, *l, u, res).unwrap();
        let gap = (inner.diameter - brute.diameter).abs();
        worst_margin = worst_margin.max(gap / brute.tolerance);
        if gap > brute.tolerance {
            failures.push(format!("{name}: {:.4} vs {:.4}", inner.diameter, brute.diameter));
        }
    }
    outcome(
        failures.is_empty() && cases.len() >= 10,
        format!("{} slices, worst |gap|/tolerance = {worst_margin:.2}{}", cases.len(), if failures.is_empty() { String::new() } else { format!("; {failures:?}") }),
    )
}

fn main() {
    let lower_bound_example = {
        let q = Quadratic::sum_of_squares(&[1.0, -1.0]);
        let s = AffineSubspace::new(v(&[0.1, 0.05]), Frame::coordinates(2, &[1])).unwrap();
        let u = TrustRegion::new(Vector::zeros(2), 1.0).unwrap();
        orthogonal_space_lower_bound(&q, &v(&[0.1, 0.05]), &s, &u).unwrap().value
    };
    assert!((lower_bound_example + 0.0025).abs() < 1e-15);

    let (quad, elapsed) = quadratic_cases();
    let (naive, good) = failure_runs();
    let results = [
        ("exact-quadratic oracle", criterion_1(&quad, elapsed)),
        ("opposite-gradient certificate", criterion_2(&quad)),
        ("bisection bracket", criterion_3()),
        ("failure-mode reproduction", criterion_4(&naive, &good)),
        ("superlinear and linear rates", criterion_5(&good)),
        ("quadratic recovery", criterion_6()),
        ("frame completion", criterion_7()),
        ("envelope sandwich", criterion_8()),
        ("brute-force cross-check", criterion_9()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("{} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

//! Objective functions, finite differences and the named test corpus.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numkit::{Frame, Matrix, Vector};

/// A smooth (or at least C¹) function `R^n → R`.
///
/// Only `value` is required. Gradients default to central differences and
/// Hessians are optional; callers fall back to [`hessian_or_fd`].
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector {
        fd_gradient(self, x, None).unwrap_or_else(|_| Vector::from_element(x.len(), f64::NAN))
    }

    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        None
    }

    fn check_domain(&self, _x: &Vector) -> Result<()> {
        Ok(())
    }
}

/// Evaluates `f(x)` after a domain check, rejecting non-finite values.
pub fn eval<F: Objective + ?Sized>(f: &F, x: &Vector) -> Result<f64> {
    f.check_domain(x)?;
    let v = f.value(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteValue { at: x.as_slice().to_vec() })
    }
}

/// Evaluates `∇f(x)` after a domain check, rejecting non-finite entries.
pub fn eval_grad<F: Objective + ?Sized>(f: &F, x: &Vector) -> Result<Vector> {
    f.check_domain(x)?;
    let g = f.gradient(x);
    if g.iter().all(|c| c.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFiniteValue { at: x.as_slice().to_vec() })
    }
}

/// Default central-difference step `eps^{1/3} (1 + ‖x‖∞)`.
pub fn default_fd_step(x: &Vector) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + x.amax())
}

/// Central-difference gradient.
pub fn fd_gradient<F: Objective + ?Sized>(f: &F, x: &Vector, h: Option<f64>) -> Result<Vector> {
    let h = h.unwrap_or_else(|| default_fd_step(x));
    let mut g = Vector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f.value(&probe);
        probe[i] = x[i] - h;
        let down = f.value(&probe);
        probe[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFiniteValue { at: x.as_slice().to_vec() });
        }
        g[i] = (up - down) / (2.0 * h);
    }
    Ok(g)
}

/// Central differences of the gradient, symmetrized.
pub fn fd_hessian<F: Objective + ?Sized>(f: &F, x: &Vector) -> Result<Matrix> {
    let n = x.len();
    let h = default_fd_step(x);
    let mut hm = Matrix::zeros(n, n);
    let mut probe = x.clone();
    for i in 0..n {
        probe[i] = x[i] + h;
        let up = f.gradient(&probe);
        probe[i] = x[i] - h;
        let down = f.gradient(&probe);
        probe[i] = x[i];
        let col = (up - down) / (2.0 * h);
        if col.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteValue { at: x.as_slice().to_vec() });
        }
        hm.set_column(i, &col);
    }
    Ok((&hm + hm.transpose()) * 0.5)
}

/// Analytic Hessian when the objective provides one, central differences otherwise.
pub fn hessian_or_fd<F: Objective + ?Sized>(f: &F, x: &Vector) -> Result<Matrix> {
    match f.hessian(x) {
        Some(h) => Ok(h),
        None => fd_hessian(f, x),
    }
}

/// `½ xᵀA x + bᵀx + c`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub a: Matrix,
    pub b: Vector,
    pub c: f64,
}

/// Builds `½ xᵀA x + bᵀx + c`.
pub fn make_quadratic(a: Matrix, b: Vector, c: f64) -> Result<Quadratic> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "quadratic with A {}x{} and b of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    Ok(Quadratic { a, b, c })
}

impl Quadratic {
    /// `Σ a_j x_j²`, i.e. `A = 2 diag(a)`.
    pub fn sum_of_squares(coeffs: &[f64]) -> Self {
        let n = coeffs.len();
        let a = Matrix::from_diagonal(&Vector::from_iterator(n, coeffs.iter().map(|c| 2.0 * c)));
        Quadratic { a, b: Vector::zeros(n), c: 0.0 }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x) + self.c
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (&self.a + self.a.transpose()) * x * 0.5 + &self.b
    }

    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        Some((&self.a + self.a.transpose()) * 0.5)
    }
}

/// A polynomial given as a list of monomials `coef · Π x_i^{e_i}`.
#[derive(Debug, Clone)]
pub struct Polynomial {
    n: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        if terms.iter().any(|(_, e)| e.len() != n) {
            return Err(Error::DimensionMismatch("monomial exponent length".into()));
        }
        Ok(Polynomial { n, terms })
    }

    fn monomial(x: &Vector, e: &[u32], skip: &[usize]) -> f64 {
        let mut p = 1.0;
        for (i, &ei) in e.iter().enumerate() {
            let d = skip.iter().filter(|&&s| s == i).count() as u32;
            if d > ei {
                return 0.0;
            }
            let mut coef = 1.0;
            for k in 0..d {
                coef *= (ei - k) as f64;
            }
            p *= coef * x[i].powi((ei - d) as i32);
        }
        p
    }
}

impl Objective for Polynomial {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &Vector) -> f64 {
        self.terms.iter().map(|(c, e)| c * Self::monomial(x, e, &[])).sum()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.n, |i, _| {
            self.terms.iter().map(|(c, e)| c * Self::monomial(x, e, &[i])).sum()
        })
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        Some(Matrix::from_fn(self.n, self.n, |i, j| {
            self.terms.iter().map(|(c, e)| c * Self::monomial(x, e, &[i, j])).sum()
        }))
    }
}

/// `−(x/(1+z) + y/(1−z))^{4/3} − (x/(1+z) − y/(1−z))^{4/3}` on `|z| < 1`.
///
/// Powers use the real cube root, so `u^{4/3} = |u|^{4/3}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FourLines;

pub fn four_lines_function() -> FourLines {
    FourLines
}

impl FourLines {
    fn parts(x: &Vector) -> (f64, f64, f64, f64) {
        let (p, q) = (1.0 + x[2], 1.0 - x[2]);
        (x[0] / p + x[1] / q, x[0] / p - x[1] / q, p, q)
    }
}

impl Objective for FourLines {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: &Vector) -> f64 {
        if x[2].abs() >= 1.0 {
            return f64::NAN;
        }
        let (a, b, _, _) = Self::parts(x);
        -a.cbrt().powi(4) - b.cbrt().powi(4)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        if x[2].abs() >= 1.0 {
            return Vector::from_element(3, f64::NAN);
        }
        let (a, b, p, q) = Self::parts(x);
        let (ca, cb) = (4.0 / 3.0 * a.cbrt(), 4.0 / 3.0 * b.cbrt());
        let (dxz, dyz) = (-x[0] / (p * p), x[1] / (q * q));
        Vector::from_vec(vec![
            -(ca + cb) / p,
            (-ca + cb) / q,
            -ca * (dxz + dyz) - cb * (dxz - dyz),
        ])
    }

    fn check_domain(&self, x: &Vector) -> Result<()> {
        if x.len() != 3 {
            return Err(Error::DimensionMismatch("four-lines needs 3 coordinates".into()));
        }
        if x[2].abs() >= 1.0 {
            return Err(Error::DomainViolation(format!("|z| = {} must be below 1", x[2].abs())));
        }
        Ok(())
    }
}

/// Quadratic envelope `½xᵀ(A ∓ δI)x` around a diagonal model `A`.
#[derive(Debug, Clone)]
pub struct ModelEnvelope {
    pub diag: Vector,
    pub delta: f64,
}

impl ModelEnvelope {
    /// Requires nonzero, strictly descending diagonal entries and `δ ≥ 0`.
    pub fn new(diag: Vector, delta: f64) -> Result<Self> {
        let descending = diag.as_slice().windows(2).all(|w| w[0] > w[1]);
        if !descending || diag.iter().any(|&a| a == 0.0) || !(delta >= 0.0) {
            return Err(Error::BadSignature);
        }
        Ok(ModelEnvelope { diag, delta })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of negative diagonal entries.
    pub fn morse_index(&self) -> usize {
        self.diag.iter().filter(|&&a| a < 0.0).count()
    }

    pub fn h_min(&self, x: &Vector) -> f64 {
        0.5 * x.iter().zip(self.diag.iter()).map(|(xi, a)| (a - self.delta) * xi * xi).sum::<f64>()
    }

    pub fn h_max(&self, x: &Vector) -> f64 {
        0.5 * x.iter().zip(self.diag.iter()).map(|(xi, a)| (a + self.delta) * xi * xi).sum::<f64>()
    }

    pub fn a(&self) -> Matrix {
        Matrix::from_diagonal(&self.diag)
    }
}

/// `½xᵀAx + ε (xᵀPx)(1 + sin(uᵀx))/2` with `‖P‖₂ = 1`, `|u| = 1`, `ε = 0.4δ`.
///
/// Inside the unit ball this stays within the envelope: the value is within
/// `½δ|x|²` of `½xᵀAx` and the gradient within `δ|x|` of `Ax`. The sine makes
/// the perturbation odd, so level sets are not symmetric about the origin.
#[derive(Debug, Clone)]
pub struct EnvelopeProblem {
    pub envelope: ModelEnvelope,
    p: Matrix,
    u: Vector,
    eps: f64,
}

impl EnvelopeProblem {
    pub fn new(envelope: ModelEnvelope, p: Matrix, u: Vector) -> Result<Self> {
        let n = envelope.dim();
        if p.shape() != (n, n) || u.len() != n {
            return Err(Error::DimensionMismatch("envelope perturbation".into()));
        }
        let sym = (&p + p.transpose()) * 0.5;
        let norm = sym.clone().singular_values().max();
        let p = if norm > 0.0 { sym / norm } else { sym };
        let u = crate::numkit::unit(&u).ok_or(Error::DimensionMismatch("zero direction".into()))?;
        let eps = 0.4 * envelope.delta;
        Ok(EnvelopeProblem { envelope, p, u, eps })
    }
}

impl Objective for EnvelopeProblem {
    fn dim(&self) -> usize {
        self.envelope.dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        let q = x.dot(&(&self.p * x));
        let s = 0.5 * (1.0 + self.u.dot(x).sin());
        0.5 * x.iter().zip(self.envelope.diag.iter()).map(|(xi, a)| a * xi * xi).sum::<f64>()
            + self.eps * q * s
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let px = &self.p * x;
        let q = x.dot(&px);
        let t = self.u.dot(x);
        let s = 0.5 * (1.0 + t.sin());
        let base = x.component_mul(&self.envelope.diag);
        base + (&px * (2.0 * s) + &self.u * (0.5 * q * t.cos())) * self.eps
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        let px = &self.p * x;
        let q = x.dot(&px);
        let t = self.u.dot(x);
        let s = 0.5 * (1.0 + t.sin());
        let c = 0.5 * t.cos();
        let cross = &px * self.u.transpose() * (2.0 * c);
        let h = &self.p * (2.0 * s) + &cross + cross.transpose()
            - &self.u * self.u.transpose() * (0.5 * q * t.sin());
        Some(self.envelope.a() + h * self.eps)
    }
}

/// A named objective together with whatever is known about it.
#[derive(Clone)]
pub struct TestProblem {
    pub name: String,
    pub objective: Arc<dyn Objective>,
    pub critical_point: Option<Vector>,
    pub critical_value: Option<f64>,
    pub morse_index: Option<usize>,
    /// A subspace direction set that is optimal for the outer problem but
    /// whose orthogonal complement carries no minimum.
    pub naive_frame: Option<Frame>,
}

impl std::fmt::Debug for TestProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestProblem")
            .field("name", &self.name)
            .field("critical_point", &self.critical_point)
            .field("critical_value", &self.critical_value)
            .field("morse_index", &self.morse_index)
            .finish()
    }
}

impl TestProblem {
    /// Resolves a problem name:
    /// `quadratic-diag:a1,a2,...`, `four-lines`, `failure-3d`, `cubic-saddle`, `cubic-saddle-3d`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("quadratic-diag:") {
            let coeffs: std::result::Result<Vec<f64>, _> =
                rest.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let coeffs = coeffs.map_err(|e| Error::config("problem", format!("bad coefficient: {e}")))?;
            if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::config("problem", "need finite coefficients"));
            }
            return Ok(Self::quadratic_diag(&coeffs));
        }
        match spec {
            "four-lines" => Ok(TestProblem {
                name: spec.into(),
                objective: Arc::new(FourLines),
                critical_point: Some(Vector::zeros(3)),
                critical_value: Some(0.0),
                morse_index: None,
                naive_frame: None,
            }),
            "failure-3d" => Ok(Self::failure_3d()),
            "cubic-saddle" => Ok(Self::cubic_saddle()),
            "cubic-saddle-3d" => Ok(Self::cubic_saddle_3d()),
            other => Err(Error::config("problem", format!("unknown problem `{other}`"))),
        }
    }

    /// `Σ a_j x_j²`.
    pub fn quadratic_diag(coeffs: &[f64]) -> Self {
        let n = coeffs.len();
        let nonzero = coeffs.iter().all(|&c| c != 0.0);
        TestProblem {
            name: format!(
                "quadratic-diag:{}",
                coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
            ),
            objective: Arc::new(Quadratic::sum_of_squares(coeffs)),
            critical_point: Some(Vector::zeros(n)),
            critical_value: Some(0.0),
            morse_index: nonzero.then(|| coeffs.iter().filter(|&&c| c < 0.0).count()),
            naive_frame: None,
        }
    }

    /// `x₁² − x₂² − 3x₃²` with the misleading optimal subspace `{x₁ = x₃}`.
    pub fn failure_3d() -> Self {
        let mut p = Self::quadratic_diag(&[1.0, -1.0, -3.0]);
        p.name = "failure-3d".into();
        let s = 0.5f64.sqrt();
        p.naive_frame = Some(Frame::from_matrix_unchecked(Matrix::from_column_slice(
            3,
            2,
            &[s, 0.0, s, 0.0, 1.0, 0.0],
        )));
        p
    }

    /// `x₁² − x₂² + 0.3x₁²x₂ + 0.5x₂³`, index-1 saddle at the origin.
    pub fn cubic_saddle() -> Self {
        let poly = Polynomial::new(
            2,
            vec![
                (1.0, vec![2, 0]),
                (-1.0, vec![0, 2]),
                (0.3, vec![2, 1]),
                (0.5, vec![0, 3]),
            ],
        )
        .expect("well-formed monomials");
        TestProblem {
            name: "cubic-saddle".into(),
            objective: Arc::new(poly),
            critical_point: Some(Vector::zeros(2)),
            critical_value: Some(0.0),
            morse_index: Some(1),
            naive_frame: None,
        }
    }

    /// `x₁² − x₂² − 3x₃² + 0.5x₂³ + 0.4x₃³ + 0.3x₁x₃²`, index-2 saddle at the origin.
    pub fn cubic_saddle_3d() -> Self {
        let poly = Polynomial::new(
            3,
            vec![
                (1.0, vec![2, 0, 0]),
                (-1.0, vec![0, 2, 0]),
                (-3.0, vec![0, 0, 2]),
                (0.5, vec![0, 3, 0]),
                (0.4, vec![0, 0, 3]),
                (0.3, vec![1, 0, 2]),
            ],
        )
        .expect("well-formed monomials");
        TestProblem {
            name: "cubic-saddle-3d".into(),
            objective: Arc::new(poly),
            critical_point: Some(Vector::zeros(3)),
            critical_value: Some(0.0),
            morse_index: Some(2),
            naive_frame: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn fd_gradient_on_square() {
        let q = Quadratic::sum_of_squares(&[1.0]);
        let g = fd_gradient(&q, &v(&[3.0]), None).unwrap();
        assert_relative_eq!(g[0], 6.0, epsilon = 1e-7);
    }

    #[test]
    fn fd_gradient_reports_non_finite() {
        struct Bad;
        impl Objective for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, x: &Vector) -> f64 {
                if x[0] > 0.0 {
                    f64::NAN
                } else {
                    0.0
                }
            }
        }
        assert!(matches!(fd_gradient(&Bad, &v(&[0.0]), None), Err(Error::NonFiniteValue { .. })));
    }

    #[test]
    fn quadratic_gradient_and_hessian() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0]);
        let q = make_quadratic(a.clone(), v(&[1.0, 0.0]), 3.0).unwrap();
        assert_eq!(q.value(&v(&[1.0, 0.0])), 5.0);
        assert_eq!(q.gradient(&v(&[1.0, 1.0])), v(&[3.0, -1.0]));
        assert_eq!(q.hessian(&v(&[0.0, 0.0])).unwrap(), a);
    }

    #[test]
    fn four_lines_values_and_domain() {
        let f = FourLines;
        assert_relative_eq!(f.value(&v(&[1.0, 0.0, 0.0])), -2.0, epsilon = 1e-15);
        let g = f.gradient(&v(&[1.0, 0.0, 0.0]));
        assert_relative_eq!(g[0], -8.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(g[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(g[2], 8.0 / 3.0, epsilon = 1e-14);
        assert!(matches!(eval(&f, &v(&[0.0, 0.0, 1.0])), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn polynomial_derivatives_match_differences() {
        let p = TestProblem::cubic_saddle_3d();
        let x = v(&[0.3, -0.2, 0.4]);
        let g = p.objective.gradient(&x);
        let fd = fd_gradient(p.objective.as_ref(), &x, None).unwrap();
        assert!((g - fd).amax() < 1e-8);
        let h = p.objective.hessian(&x).unwrap();
        let hfd = fd_hessian(p.objective.as_ref(), &x)
        .unwrap();
        assert!((h - hfd).amax() < 1e-6);
    }

    #[test]
    fn envelope_problem_respects_bounds() {
        let env = ModelEnvelope::new(v(&[2.0, -1.0, -3.0]), 1e-2).unwrap();
        let p = Matrix::from_row_slice(3, 3, &[0.3, 1.0, -0.2, 1.0, 0.1, 0.5, -0.2, 0.5, -0.7]);
        let h = EnvelopeProblem::new(env.clone(), p, v(&[1.0, 2.0, -1.0])).unwrap();
        for x in [v(&[0.5, 0.1, -0.3]), v(&[-0.2, 0.7, 0.4]), v(&[0.0, 0.0, 0.9])] {
            let lo = env.h_min(&x);
            let hi = env.h_max(&x);
            let val = h.value(&x);
            assert!(lo - 1e-15 <= val && val <= hi + 1e-15);
            let dev = (h.gradient(&x) - x.component_mul(&env.diag)).norm();
            assert!(dev <= env.delta * x.norm() + 1e-15);
            let fd = fd_gradient(&h, &x, None).unwrap();
            assert!((h.gradient(&x) - fd).amax() < 1e-8);
            let hfd = fd_hessian(&h, &x).unwrap();
            assert!((h.hessian(&x).unwrap() - hfd).amax() < 1e-6);
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(TestProblem::parse("quadratic-diag:1,-1").unwrap().morse_index, Some(1));
        assert_eq!(TestProblem::parse("failure-3d").unwrap().objective.dim(), 3);
        assert!(matches!(TestProblem::parse("nope"), Err(Error::Config { .. })));
        assert!(matches!(TestProblem::parse("quadratic-diag:1,x"), Err(Error::Config { .. })));
    }
}

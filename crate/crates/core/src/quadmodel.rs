//! Quadratic models from values and gradients at simplex vertices.

use crate::error::{Error, Result};
use crate::numkit::{qr_decompose, sym_eigen, Frame, Matrix, Vector};
use crate::objective::{eval, eval_grad, Objective};

/// `h(x) = ½xᵀAx + bᵀx + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub a: Matrix,
    pub b: Vector,
    pub c: f64,
}

impl QuadraticModel {
    pub fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x) + self.c
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        (&self.a + self.a.transpose()) * x * 0.5 + &self.b
    }

    /// `½(A + Aᵀ)`.
    pub fn curvature(&self) -> Matrix {
        (&self.a + self.a.transpose()) * 0.5
    }
}

/// Vertices `p_1..p_{m+1}` with values and gradients.
#[derive(Debug, Clone)]
pub struct SimplexData {
    pub vertices: Vec<Vector>,
    pub values: Vec<f64>,
    pub gradients: Vec<Vector>,
}

impl SimplexData {
    pub fn new(vertices: Vec<Vector>, values: Vec<f64>, gradients: Vec<Vector>) -> Result<Self> {
        let Some(n) = vertices.first().map(|v| v.len()) else {
            return Err(Error::DimensionMismatch("simplex needs at least one vertex".into()));
        };
        if values.len() != vertices.len() || gradients.len() != vertices.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vertices, {} values, {} gradients",
                vertices.len(),
                values.len(),
                gradients.len()
            )));
        }
        if vertices.iter().chain(gradients.iter()).any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch("vertex or gradient length".into()));
        }
        if vertices.len() > n + 1 {
            return Err(Error::SingularSimplex);
        }
        Ok(SimplexData {
            vertices,
            values,
            gradients,
        })
    }

    /// Evaluates `f` and its gradient at each vertex.
    pub fn sample<F: Objective + ?Sized>(f: &F, vertices: Vec<Vector>) -> Result<Self> {
        let values = vertices.iter().map(|v| eval(f, v)).collect::<Result<Vec<_>>>()?;
        let gradients = vertices.iter().map(|v| eval_grad(f, v)).collect::<Result<Vec<_>>>()?;
        SimplexData::new(vertices, values, gradients)
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// Simplex dimension `m`.
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// `P`, columns `p_{i+1} − p_1`.
    pub fn edges(&self) -> Matrix {
        let p1 = &self.vertices[0];
        Matrix::from_columns(&self.vertices[1..].iter().map(|v| v - p1).collect::<Vec<_>>())
    }

    /// `D`, columns `∇h(p_{i+1}) − ∇h(p_1)`.
    pub fn gradient_differences(&self) -> Matrix {
        let g1 = &self.gradients[0];
        Matrix::from_columns(&self.gradients[1..].iter().map(|g| g - g1).collect::<Vec<_>>())
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    /// `‖P‖·‖R⁻¹‖` for `P = QR`.
    pub fn conditioning(&self) -> Result<f64> {
        let (_, r) = qr(&self.edges())?;
        let rinv = r.try_inverse().ok_or(Error::SingularSimplex)?;
        Ok(self.edges().singular_values().max() * rinv.singular_values().max())
    }
}

fn qr(p: &Matrix) -> Result<(Frame, Matrix)> {
    qr_decompose(p).map_err(|e| match e {
        Error::RankDeficient { .. } => Error::SingularSimplex,
        other => other,
    })
}

/// `A = DP⁻¹`, `b = ∇h(p_1) − Ap_1`, `c = h(p_1) − ½p_1ᵀAp_1 − bᵀp_1`.
pub fn fit_quadratic_square(data: &SimplexData) -> Result<QuadraticModel> {
    let n = data.ambient_dim();
    if data.dim() != n {
        return Err(Error::DimensionMismatch(format!("square fit needs {} vertices, got {}", n + 1, data.vertices.len())));
    }
    let p = data.edges();
    qr(&p)?;
    let pinv = p.try_inverse().ok_or(Error::SingularSimplex)?;
    let a = data.gradient_differences() * pinv;
    let p1 = &data.vertices[0];
    let b = &data.gradients[0] - &a * p1;
    let c = data.values[0] - 0.5 * p1.dot(&(&a * p1)) - b.dot(p1);
    Ok(QuadraticModel { a, b, c })
}

/// Model on the affine hull of a simplex, in coordinates `w` with `x = p_1 + Qw`.
#[derive(Debug, Clone)]
pub struct HullModel {
    pub origin: Vector,
    pub frame: Frame,
    /// Reduced model: `A = ½(M + Mᵀ)` with `M = QᵀDR⁻¹`, `b = Qᵀ∇f(p_1)`, `c = f(p_1)`.
    pub reduced: QuadraticModel,
    /// Ambient curvature operator `DR⁻¹Qᵀ`.
    pub operator: Matrix,
}

impl HullModel {
    /// Model value at an ambient point, after projecting it onto the hull.
    pub fn value(&self, x: &Vector) -> f64 {
        self.reduced.value(&self.coords(x))
    }

    pub fn coords(&self, x: &Vector) -> Vector {
        self.frame.matrix().transpose() * (x - &self.origin)
    }

    /// The same model as an ambient quadratic, exact on the hull.
    pub fn to_ambient(&self) -> QuadraticModel {
        let q = self.frame.matrix();
        let a = q * &self.reduced.a * q.transpose();
        let g = q * &self.reduced.b;
        let p1 = &self.origin;
        let b = &g - &a * p1;
        let c = self.reduced.c - g.dot(p1) + 0.5 * p1.dot(&(&a * p1));
        QuadraticModel { a, b, c }
    }
}

/// Quadratic model on the hull of `m + 1 ≤ n + 1` vertices from the QR factors of `P`.
pub fn fit_quadratic_rectangular(data: &SimplexData) -> Result<HullModel> {
    if data.dim() == 0 {
        return Err(Error::SingularSimplex);
    }
    let p = data.edges();
    let (q, r) = qr(&p)?;
    let rinv = r.try_inverse().ok_or(Error::SingularSimplex)?;
    let d = data.gradient_differences();
    let qm = q.matrix();
    let m = qm.transpose() * &d * &rinv;
    let reduced = QuadraticModel {
        a: (&m + m.transpose()) * 0.5,
        b: qm.transpose() * &data.gradients[0],
        c: data.values[0],
    };
    Ok(HullModel {
        origin: data.vertices[0].clone(),
        operator: d * rinv * qm.transpose(),
        frame: q,
        reduced,
    })
}

/// Upper bound on `f` over the relative boundary of the simplex for concave `f`.
///
/// Each facet contributes `max_x min_i T_i(x)` over the facet, with `T_i` the
/// tangent plane at `p_i`; that linear program is solved by enumerating the
/// vertices of its feasible set. With `require_concave` the fitted curvature
/// must be negative definite.
pub fn concave_upper_bound(data: &SimplexData, require_concave: bool) -> Result<f64> {
    let m = data.dim();
    if m == 0 {
        return Err(Error::SingularSimplex);
    }
    let model = fit_quadratic_rectangular(data)?;
    if require_concave {
        let largest = sym_eigen(&model.reduced.a)?.values[0];
        if largest >= 0.0 {
            return Err(Error::NotConcave { largest });
        }
    }
    let tangent = |i: usize, x: &Vector| data.values[i] + data.gradients[i].dot(&(x - &data.vertices[i]));
    let mut best = f64::NEG_INFINITY;
    for drop in 0..=m {
        let facet: Vec<&Vector> = (0..=m).filter(|&j| j != drop).map(|j| &data.vertices[j]).collect();
        // c[i][j] = T_i(q_j); the plane values are affine in barycentric weights.
        let c: Vec<Vec<f64>> = (0..=m).map(|i| facet.iter().map(|q| tangent(i, q)).collect()).collect();
        best = best.max(max_min_over_simplex(&c));
    }
    Ok(best)
}

/// `max_{λ ∈ Δ} min_i Σ_j c[i][j] λ_j` by vertex enumeration.
fn max_min_over_simplex(c: &[Vec<f64>]) -> f64 {
    let rows = c.len();
    let k = c[0].len();
    if k == 1 {
        return c.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
    }
    // Unknowns (λ_1..λ_k, t). Inequalities: λ_j ≥ 0, then t ≤ (Cλ)_i.
    let total = k + rows;
    let row_of = |idx: usize| -> (Vec<f64>, f64) {
        let mut a = vec![0.0; k + 1];
        if idx < k {
            a[idx] = 1.0;
        } else {
            let i = idx - k;
            a[..k].copy_from_slice(&c[i]);
            a[k] = -1.0;
        }
        (a, 0.0)
    };
    let feasible = |x: &[f64]| -> bool {
        let tol = 1e-12 * (1.0 + x[k].abs());
        (0..total).all(|idx| {
            let (a, b) = row_of(idx);
            a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() >= b - tol
        })
    };
    let mut best = f64::NEG_INFINITY;
    let mut chosen = Vec::with_capacity(k);
    choose(total, k, 0, &mut chosen, &mut |set: &[usize]| {
        let mut a = Matrix::zeros(k + 1, k + 1);
        let mut rhs = Vector::zeros(k + 1);
        for j in 0..k {
            a[(0, j)] = 1.0;
        }
        rhs[0] = 1.0;
        for (r, &idx) in set.iter().enumerate() {
            let (coef, b) = row_of(idx);
            for (col, v) in coef.into_iter().enumerate() {
                a[(r + 1, col)] = v;
            }
            rhs[r + 1] = b;
        }
        if let Some(x) = a.lu().solve(&rhs) {
            if x.iter().all(|v| v.is_finite()) && feasible(x.as_slice()) {
                best = best.max(x[k]);
            }
        }
    });
    best
}

fn choose(total: usize, k: usize, start: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        visit(cur);
        return;
    }
    for i in start..total {
        if total - i < k - cur.len() {
            break;
        }
        cur.push(i);
        choose(total, k, i + 1, cur, visit);
        cur.pop();
    }
}

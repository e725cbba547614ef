//! Dense linear algebra helpers: thin QR, sorted symmetric eigenpairs,
//! orthonormal frame completion and the Moore-Penrose pseudoinverse.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Tolerance used when a matrix must have orthonormal columns.
pub const FRAME_TOL: f64 = 1e-10;

/// Residual norm below which an elementary vector is rejected during frame completion.
const COMPLETION_FLOOR: f64 = 1e-8;

/// A matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    m: Matrix,
}

impl Frame {
    /// Wraps `m` after checking `mᵀm = I` to [`FRAME_TOL`].
    pub fn new(m: Matrix) -> Result<Self> {
        if m.ncols() > m.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "frame with {} columns in dimension {}",
                m.ncols(),
                m.nrows()
            )));
        }
        let defect = orthonormality_defect(&m);
        if defect > FRAME_TOL {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Frame { m })
    }

    /// Orthonormalizes the columns of `m` (thin QR with positive diagonal).
    pub fn orthonormalize(m: &Matrix) -> Result<Self> {
        Ok(qr_decompose(m)?.0)
    }

    /// The first `k` standard basis vectors of `R^n`.
    pub fn standard(n: usize, k: usize) -> Self {
        let mut m = Matrix::zeros(n, k);
        for i in 0..k.min(n) {
            m[(i, i)] = 1.0;
        }
        Frame { m }
    }

    /// The standard basis vectors with the given indices.
    pub fn coordinates(n: usize, idx: &[usize]) -> Self {
        let mut m = Matrix::zeros(n, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        Frame { m }
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        Frame { m }
    }

    pub fn ambient_dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn dim(&self) -> usize {
        self.m.ncols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    pub fn column(&self, j: usize) -> Vector {
        self.m.column(j).into_owned()
    }

    /// Orthogonal projector `V Vᵀ` applied to `x`.
    pub fn project(&self, x: &Vector) -> Vector {
        &self.m * (self.m.transpose() * x)
    }

    /// Columns `range` as a new frame.
    pub fn columns(&self, start: usize, count: usize) -> Frame {
        Frame {
            m: self.m.columns(start, count).into_owned(),
        }
    }
}

/// Largest entry of `|mᵀm − I|`.
pub fn orthonormality_defect(m: &Matrix) -> f64 {
    let g = m.transpose() * m;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Thin QR of an `n×k` matrix, `n ≥ k`, with the diagonal of `R` made positive.
pub fn qr_decompose(m: &Matrix) -> Result<(Frame, Matrix)> {
    let (n, k) = m.shape();
    if k == 0 {
        return Ok((Frame::from_matrix_unchecked(Matrix::zeros(n, 0)), Matrix::zeros(0, 0)));
    }
    if k > n {
        return Err(Error::RankDeficient {
            smallest: 0.0,
            largest: m.abs().max(),
        });
    }
    let sv = m.clone().singular_values();
    let largest = sv.max();
    let smallest = sv.min();
    if !(largest > 0.0) || smallest <= 1e-12 * largest {
        return Err(Error::RankDeficient { smallest, largest });
    }
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..k {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    Ok((Frame::from_matrix_unchecked(q), r))
}

/// Eigenpairs of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues, descending.
    pub values: Vector,
    /// Matching unit eigenvectors as columns; each has its largest-magnitude entry positive.
    pub vectors: Matrix,
}

/// Symmetric eigendecomposition with descending eigenvalues.
pub fn sym_eigen(m: &Matrix) -> Result<SymEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigen of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.abs().max().max(1.0);
    let asymmetry = (m - m.transpose()).abs().max();
    if asymmetry > 1e-10 * scale {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values = Vector::zeros(n);
    let mut vectors = Matrix::zeros(n, n);
    for (j, &src) in order.iter().enumerate() {
        values[j] = eig.eigenvalues[src];
        let mut v = eig.eigenvectors.column(src).into_owned();
        let peak = v.amax();
        let lead = v.iter().position(|c| c.abs() >= peak - 1e-12).unwrap_or(0);
        if v[lead] < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(j, &v);
    }
    Ok(SymEigen { values, vectors })
}

/// Extends an orthonormal `n×k` frame to an orthonormal basis of `R^n`.
///
/// The first `k` columns are copied unchanged. Each new column is the
/// normalized residual of the next elementary vector after projecting out
/// the columns already present.
pub fn complete_frame(v: &Frame) -> Frame {
    let n = v.ambient_dim();
    let k = v.dim();
    let mut out = Matrix::zeros(n, n);
    out.columns_mut(0, k).copy_from(v.matrix());
    let mut cursor = k;
    for j in k..n {
        let mut placed = false;
        for step in 0..n {
            let idx = (cursor + step) % n;
            let mut r = Vector::zeros(n);
            r[idx] = 1.0;
            let basis = out.columns(0, j);
            let first = &r - &basis * (basis.transpose() * &r);
            if first.norm() < COMPLETION_FLOOR {
                continue;
            }
            let second = &first - &basis * (basis.transpose() * &first);
            out.set_column(j, &(second.normalize()));
            cursor = idx + 1;
            placed = true;
            break;
        }
        debug_assert!(placed, "frame completion ran out of candidates");
    }
    Frame::from_matrix_unchecked(out)
}

/// Moore-Penrose pseudoinverse via SVD.
pub fn pseudoinverse(m: &Matrix) -> Matrix {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Matrix::zeros(c, r);
    }
    let svd = SVD::new(m.clone(), true, true);
    let largest = svd.singular_values.max();
    if largest == 0.0 {
        return Matrix::zeros(c, r);
    }
    let eps = r.max(c) as f64 * f64::EPSILON * largest;
    svd.pseudo_inverse(eps).unwrap_or_else(|_| Matrix::zeros(c, r))
}

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).abs().max()
}

/// Unit vector in the direction of `v`, or `None` for a zero vector.
pub fn unit(v: &Vector) -> Option<Vector> {
    let n = v.norm();
    if n > 0.0 && n.is_finite() {
        Some(v / n)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn qr_of_single_column() {
        let m = Matrix::from_column_slice(2, 1, &[3.0, 4.0]);
        let (q, r) = qr_decompose(&m).unwrap();
        assert_relative_eq!(q.matrix()[(0, 0)], 0.6, epsilon = 1e-15);
        assert_relative_eq!(q.matrix()[(1, 0)], 0.8, epsilon = 1e-15);
        assert_relative_eq!(r[(0, 0)], 5.0, epsilon = 1e-14);
    }

    #[test]
    fn qr_rejects_dependent_columns() {
        let m = Matrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(qr_decompose(&m), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn eigen_descending_with_sign_rule() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0]);
        let e = sym_eigen(&m).unwrap();
        assert_eq!(e.values.as_slice(), &[2.0, -1.0]);
        assert_eq!(e.vectors, Matrix::identity(2, 2));

        let m = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = sym_eigen(&m).unwrap();
        assert_relative_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert!(e.vectors.column(0).iter().all(|&c| c > 0.0));
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(sym_eigen(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn completion_of_diagonal_direction() {
        let s = 0.5f64.sqrt();
        let v = Frame::new(Matrix::from_column_slice(3, 1, &[s, s, 0.0])).unwrap();
        let f = complete_frame(&v);
        let expect = Matrix::from_row_slice(3, 3, &[s, -s, 0.0, s, s, 0.0, 0.0, 0.0, 1.0]);
        assert!(max_abs_diff(f.matrix(), &expect) < 1e-15);
    }

    #[test]
    fn completion_of_standard_frame_is_identity() {
        let f = complete_frame(&Frame::standard(4, 2));
        assert_eq!(f.matrix(), &Matrix::identity(4, 4));
    }

    #[test]
    fn completion_skips_spanned_elementary_vectors() {
        let f = complete_frame(&Frame::coordinates(3, &[1]));
        assert!(orthonormality_defect(f.matrix()) < 1e-15);
        assert_eq!(f.column(0), Vector::from_vec(vec![0.0, 1.0, 0.0]));
    }

    #[test]
    fn pseudoinverse_examples() {
        let row = Matrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let p = pseudoinverse(&row);
        assert_eq!(p.shape(), (2, 1));
        assert_relative_eq!(p[(0, 0)], 0.12, epsilon = 1e-15);
        assert_relative_eq!(p[(1, 0)], 0.16, epsilon = 1e-15);
        assert_eq!(pseudoinverse(&Matrix::zeros(2, 3)), Matrix::zeros(3, 2));
    }
}

//! Orthonormal frames, completion, QR and symmetric eigenpairs.

use levelsaddle::numkit::{complete_frame, orthonormality_defect, qr_decompose, sym_eigen, Frame, Matrix};

fn main() -> levelsaddle::Result<()> {
    let a = Matrix::from_row_slice(4, 2, &[1.0, 0.5, 2.0, -1.0, 0.0, 3.0, 1.0, 1.0]);
    let (q, r) = qr_decompose(&a)?;
    println!("QR residual      {:.2e}", (q.matrix() * &r - &a).abs().max());

    let v = Frame::orthonormalize(&a)?;
    let full = complete_frame(&v);
    println!("completed to {}x{}, |FᵀF - I| = {:.2e}", full.ambient_dim(), full.dim(), orthonormality_defect(full.matrix()));

    let h = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, -1.0, 0.5, 0.0, 0.5, -3.0]);
    let e = sym_eigen(&h)?;
    println!("eigenvalues      {:?}", e.values.as_slice());
    Ok(())
}

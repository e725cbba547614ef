//! Fitting quadratics from values and gradients on a simplex.

use levelsaddle::numkit::Vector;
use levelsaddle::objective::{eval, TestProblem};
use levelsaddle::quadmodel::{concave_upper_bound, fit_quadratic_rectangular, fit_quadratic_square, SimplexData};

fn main() -> levelsaddle::Result<()> {
    let p = TestProblem::cubic_saddle_3d();
    let f = p.objective.as_ref();

    for h in [1e-1, 1e-2, 1e-3] {
        let verts = vec![
            Vector::from_column_slice(&[0.0, 0.0, 0.0]),
            Vector::from_column_slice(&[h, 0.0, 0.0]),
            Vector::from_column_slice(&[0.0, h, 0.0]),
            Vector::from_column_slice(&[0.0, 0.0, h]),
        ];
        let data = SimplexData::sample(f, verts)?;
        let model = fit_quadratic_square(&data)?;
        let x = Vector::from_column_slice(&[0.3 * h, 0.2 * h, 0.1 * h]);
        println!("h = {h:.0e}: model error {:.2e}", (model.value(&x) - eval(f, &x)?).abs());
    }

    // Two points along a concave direction: a 1-d hull.
    let verts = vec![Vector::from_column_slice(&[0.0, 0.05, 0.0]), Vector::from_column_slice(&[0.0, -0.05, 0.0])];
    let data = SimplexData::sample(f, verts)?;
    let hull = fit_quadratic_rectangular(&data)?;
    println!("hull curvature {:.4}", hull.reduced.curvature()[(0, 0)]);
    println!("upper bound on the hull {:.6e}", concave_upper_bound(&data, true)?);
    Ok(())
}

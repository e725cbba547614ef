//! Diameter of one slice, checked against the closed form and a grid.

use levelsaddle::geometry::{
    brute_force_diameter, inner_max_diameter, opposite_gradient_residual, AffineSubspace, InnerOptions, TrustRegion,
};
use levelsaddle::numkit::{Frame, Vector};
use levelsaddle::objective::Quadratic;

fn main() -> levelsaddle::Result<()> {
    // x² - y² - 3z², sliced by the (y, z) plane at level -0.2: an ellipse
    // whose long axis is along y.
    let f = Quadratic::sum_of_squares(&[1.0, -1.0, -3.0]);
    let region = TrustRegion::new(Vector::zeros(3), 1.0)?;
    let s = AffineSubspace::new(Vector::zeros(3), Frame::coordinates(3, &[1, 2]))?;
    let level = -0.2;

    let t = inner_max_diameter(&f, &s, level, &region, &InnerOptions::default())?;
    let kkt = opposite_gradient_residual(&f, &t.x, &t.y)?;
    println!("diameter    {:.12}", t.diameter);
    println!("closed form {:.12}", 2.0 * (0.2f64).sqrt());
    println!("pair        {:?} / {:?}", t.x.as_slice(), t.y.as_slice());
    println!("KKT residual {:.2e}", kkt.residual);

    let grid = brute_force_diameter(&f, &s, level, &region, 400)?;
    println!("grid        {:.6} (± {:.1e})", grid.diameter, grid.tolerance);
    Ok(())
}

//! Minimizing the slice diameter over 2-planes of a 4-d quadratic.

use levelsaddle::geometry::{quadratic_minmax_exact, TrustRegion};
use levelsaddle::numkit::Vector;
use levelsaddle::objective::Quadratic;
use levelsaddle::outer::{outer_min_subspace, OuterOptions};

fn main() -> levelsaddle::Result<()> {
    let a = [1.5, 0.4, -0.8, -2.0];
    let f = Quadratic::sum_of_squares(&a);
    let region = TrustRegion::new(Vector::zeros(4), 2.0)?;
    let level = -0.3;

    let sol = outer_min_subspace(&f, level, &region, 2, &OuterOptions::default())?;
    let exact = quadratic_minmax_exact(&a, level)?;
    println!("min-max diameter {:.12} after {} sweeps, {} inner solves", sol.triple.diameter, sol.sweeps, sol.inner_solves);
    println!("exact            {:.12}", exact.diameter);
    println!("subspace frame\n{:.4}", sol.triple.subspace.frame.matrix());
    Ok(())
}

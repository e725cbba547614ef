//! An optimal subspace whose complement has no minimum, and the fix.

use levelsaddle::geometry::{AffineSubspace, TrustRegion};
use levelsaddle::local::{fast_local_solve, FastLocalOptions};
use levelsaddle::numkit::Vector;
use levelsaddle::objective::TestProblem;
use levelsaddle::outer::OuterOptions;

fn main() -> levelsaddle::Result<()> {
    let p = TestProblem::failure_3d();
    let f = p.objective.as_ref();
    let region = TrustRegion::new(Vector::zeros(3), 1.0)?;
    let frame = p.naive_frame.clone().expect("problem ships a misleading frame");

    let naive = FastLocalOptions {
        outer: OuterOptions {
            initial: Some(AffineSubspace::new(Vector::zeros(3), frame)?),
            ..Default::default()
        },
        naive_subspace: true,
        ..Default::default()
    };
    match fast_local_solve(f, &region, 2, -0.25, 10, 1e-12, &naive) {
        Ok(r) => println!("naive: level {:.3e}", r.value),
        Err(e) => println!("naive: {e}"),
    }

    let fixed = fast_local_solve(f, &region, 2, -0.25, 10, 1e-12, &FastLocalOptions::default())?;
    println!("estimated eigenspace: level {:.3e} after {} steps at {:?}", fixed.value, fixed.states.len(), fixed.point.as_slice());
    Ok(())
}

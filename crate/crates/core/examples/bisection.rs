//! Bracketing the critical value of an index-2 saddle.

use levelsaddle::bisection::{bisection_solve, BisectionOptions};
use levelsaddle::geometry::TrustRegion;
use levelsaddle::numkit::Vector;
use levelsaddle::objective::TestProblem;

fn main() -> levelsaddle::Result<()> {
    let p = TestProblem::cubic_saddle_3d();
    let region = TrustRegion::new(Vector::zeros(3), 0.5)?;
    let res = bisection_solve(p.objective.as_ref(), &region, 2, -0.5, 0.5, 1e-6, 40, &BisectionOptions::default())?;
    for r in &res.trace.records {
        println!("{:>3}  [{:+.8}, {:+.8}]  diam {:.3e}", r.iter, r.l, r.u.unwrap_or(f64::NAN), r.diameter);
    }
    println!("bracket width {:.2e}, stationarity {:?}", res.width(), res.stationarity.flag);
    Ok(())
}

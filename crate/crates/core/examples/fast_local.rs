//! Superlinear level updates near a nondegenerate saddle.

use levelsaddle::geometry::TrustRegion;
use levelsaddle::local::{fast_local_solve, measure_convergence_rate, FastLocalOptions};
use levelsaddle::numkit::Vector;
use levelsaddle::objective::TestProblem;

fn main() -> levelsaddle::Result<()> {
    let p = TestProblem::cubic_saddle();
    let region = TrustRegion::new(Vector::zeros(2), 0.6)?;
    let opts = FastLocalOptions {
        known_value: p.critical_value,
        ..Default::default()
    };
    let res = fast_local_solve(p.objective.as_ref(), &region, 1, -0.1, 20, 1e-12, &opts)?;
    for s in &res.states {
        println!("{:>2}  l = {:+.3e}  diam {:.3e}", s.iter, s.level, s.triple.diameter);
    }
    let rate = measure_convergence_rate(&res.trace, p.critical_value)?;
    let ratios: Vec<String> = rate.ratios.iter().map(|r| format!("{r:.1e}")).collect();
    println!("rate {:?}, ratios {}", rate.class, ratios.join(" "));
    println!("point {:?}", res.point.as_slice());
    Ok(())
}

//! Saving a run, reading it back and classifying its convergence.

use levelsaddle::app::{run_report, run_solve, RunConfig};

fn main() -> levelsaddle::Result<()> {
    let dir = std::env::temp_dir().join("levelsaddle-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("bisection.json");
    let cfg = RunConfig {
        problem: Some("quadratic-diag:1,-2".into()),
        morse_index: Some(1),
        lower: Some(-1.0),
        upper: Some(1.0),
        max_iter: 12,
        trace_out: Some(path.clone()),
        ..Default::default()
    };
    let mut out = std::io::stdout();
    let outcome = run_solve(&cfg, &mut out)?;
    println!("exit code would be {}\n", outcome.status.exit_code());
    run_report(&path, Some(0.0), &mut out)
}

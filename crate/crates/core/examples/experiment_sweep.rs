//! Relative bias and MSE of each estimator along a treatment-probability sweep.
//!
//! Small by default; pass `graphs reps` to enlarge.

use snipe::harness::{experiment_csv, run_experiment, ExperimentConfig, ReplicationStats, SweepVar};

pub fn run_example(graphs: usize, reps: usize) -> snipe::Result<Vec<ReplicationStats>> {
    let cfg = ExperimentConfig {
        sweep: SweepVar::P,
        sweep_values: vec![0.1, 0.3, 0.5],
        n: 1000,
        graphs,
        reps,
        seed: Some(5),
        ..ExperimentConfig::default()
    };
    run_experiment(&cfg)
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let rows = run_example(args.first().copied().unwrap_or(3), args.get(1).copied().unwrap_or(50))?;
    print!("{}", experiment_csv(&rows));
    Ok(())
}

//! Empirical variance, mean conservative estimate and worst-case bound of
//! the SNIPE estimator along a population-size sweep.
//!
//! Usage: `cargo run --release --example variance_table -- [beta] [graphs] [reps]`

use snipe::harness::{run_variance_report, variance_csv, ExperimentConfig, SweepVar, VarianceRow};

pub fn run_example(beta: usize, graphs: usize, reps: usize, sizes: &[f64]) -> snipe::Result<Vec<VarianceRow>> {
    let cfg = ExperimentConfig {
        sweep: SweepVar::N,
        sweep_values: sizes.to_vec(),
        p: 0.2,
        r: 2.0,
        beta,
        graphs,
        reps,
        seed: Some(2024),
        ..ExperimentConfig::variance_defaults()
    };
    run_variance_report(&cfg)
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let beta = args.first().copied().unwrap_or(1);
    let graphs = args.get(1).copied().unwrap_or(10);
    let reps = args.get(2).copied().unwrap_or(100);
    let rows = run_example(beta, graphs, reps, &[1000.0, 2500.0, 5000.0])?;
    print!("{}", variance_csv(&rows));
    Ok(())
}

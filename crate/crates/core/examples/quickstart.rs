//! Generate a graph and an outcomes model, draw one treatment and estimate
//! the total treatment effect.

use snipe::snipe::snipe_tte;
use snipe::{gen_erdos_renyi, gen_experiment_model, uniform_design};

/// Returns `(estimate, true total effect)`.
pub fn run_example(n: usize, beta: usize, seed: u64) -> snipe::Result<(f64, f64)> {
    let g = gen_erdos_renyi(n, 10.0 / n as f64, true, seed)?;
    let model = gen_experiment_model(&g, beta, 2.0, seed + 1)?;
    let design = uniform_design(n, 0.2)?;
    let z = design.sample(seed + 2);
    let y = model.evaluate(&z)?;
    let estimate = snipe_tte(&g, &y, &z, &design, beta)?;
    Ok((estimate, model.ground_truth()?.tte))
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    let (estimate, tte) = run_example(2000, 2, 11)?;
    println!("estimate {estimate:.4}  true {tte:.4}");
    Ok(())
}

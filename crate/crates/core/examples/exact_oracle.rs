//! Exact mean and variance of the estimator on a small population, by
//! enumerating every treatment vector.

use snipe::oracle::{exact_moments, ExactMoments};
use snipe::snipe::snipe_tte;
use snipe::{gen_erdos_renyi, gen_experiment_model, Design};

/// Returns the exact moments and the true total effect.
pub fn run_example(n: usize, beta: usize) -> snipe::Result<(ExactMoments, f64)> {
    let g = gen_erdos_renyi(n, 0.3, true, 21)?;
    let model = gen_experiment_model(&g, beta, 1.0, 22)?;
    // non-uniform probabilities between 0.15 and 0.45
    let design = Design::new((0..n).map(|i| 0.15 + 0.3 * i as f64 / n as f64).collect())?;
    let moments = exact_moments(
        |z| {
            let y = model.evaluate(z).expect("treatment length matches");
            snipe_tte(&g, &y, z, &design, beta).expect("valid inputs")
        },
        &design,
        n,
    )?;
    Ok((moments, model.ground_truth()?.tte))
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    let (m, tte) = run_example(12, 2)?;
    println!("E[est] {:.12}  TTE {:.12}  Var {:.6}  support {}", m.mean, tte, m.variance, m.support);
    Ok(())
}

//! Direct, conditional direct and fixed-size interaction effects, checked
//! exactly on a small population.

use snipe::oracle::exact_moments;
use snipe::snipe::{snipe_ate, snipe_cate, snipe_te_alpha};
use snipe::{gen_erdos_renyi, gen_experiment_model, uniform_design};

/// One line per estimand: `(name, exact mean of estimator, true value)`.
pub fn run_example(n: usize, beta: usize) -> snipe::Result<Vec<(String, f64, f64)>> {
    let g = gen_erdos_renyi(n, 0.3, true, 51)?;
    let model = gen_experiment_model(&g, beta, 2.0, 52)?;
    let design = uniform_design(n, 0.3)?;
    let truth = model.ground_truth()?;
    let y = |z: &snipe::TreatmentVector| model.evaluate(z).expect("treatment length matches");
    let demographic: Vec<usize> = (0..n).step_by(2).collect();

    let mut out = Vec::new();
    let ate = exact_moments(|z| snipe_ate(&g, &y(z), z, &design, beta).expect("self-loops present"), &design, n)?;
    out.push(("ate".to_string(), ate.mean, truth.ate));
    let cate = exact_moments(
        |z| snipe_cate(&g, &y(z), z, &design, beta, &demographic).expect("valid demographic"),
        &design,
        n,
    )?;
    out.push(("cate(even units)".to_string(), cate.mean, model.cate(&demographic)?));
    for alpha in 1..=beta {
        let te = exact_moments(|z| snipe_te_alpha(&g, &y(z), z, &design, beta, alpha).expect("valid alpha"), &design, n)?;
        out.push((format!("te({alpha})"), te.mean, truth.te_alpha[alpha - 1]));
    }
    out.push(("sum of te".to_string(), truth.te_alpha.iter().sum(), truth.tte));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    for (name, got, want) in run_example(10, 2)? {
        println!("{name:>16} {got:.10} {want:.10}");
    }
    Ok(())
}

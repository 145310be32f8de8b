//! Conservative variance estimate, worst-case bound and normal interval for
//! a single draw.

use snipe::variance::VarianceReport;
use snipe::{gen_erdos_renyi, gen_experiment_model, uniform_design};

pub fn run_example(n: usize, beta: usize, alpha: f64) -> snipe::Result<(VarianceReport, f64)> {
    let g = gen_erdos_renyi(n, 10.0 / n as f64, true, 41)?;
    let model = gen_experiment_model(&g, beta, 2.0, 42)?;
    let design = uniform_design(n, 0.2)?;
    let z = design.sample(43);
    let report = VarianceReport::single_draw(&g, &model, &design, &z, alpha)?;
    Ok((report, model.ground_truth()?.tte))
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    let (report, tte) = run_example(5000, 1, 0.05)?;
    println!("{}", VarianceReport::CSV_HEADER);
    println!("{}", report.to_csv_row());
    println!("true effect {tte:.4}");
    Ok(())
}

//! Every estimator on one draw from one instance.

use snipe::baselines::{dm_thresh_tte, dm_tte, ht_tte, ls_fit, ls_tte, Covariate};
use snipe::snipe::snipe_tte;
use snipe::{gen_erdos_renyi, gen_experiment_model, uniform_design};

/// `(name, estimate)` pairs followed by the true effect. Undefined
/// estimates are reported as NaN.
pub fn run_example(n: usize, beta: usize, seed: u64) -> snipe::Result<(Vec<(&'static str, f64)>, f64)> {
    let g = gen_erdos_renyi(n, 10.0 / n as f64, true, seed)?;
    let model = gen_experiment_model(&g, beta, 2.0, seed + 1)?;
    let design = uniform_design(n, 0.2)?;
    let z = design.sample(seed + 2);
    let y = model.evaluate(&z)?;
    let or_nan = |r: snipe::Result<f64>| match r {
        Err(e) if e.is_undefined_estimate() => Ok(f64::NAN),
        other => other,
    };
    let rows = vec![
        ("snipe", snipe_tte(&g, &y, &z, &design, beta)?),
        ("ht", ht_tte(&g, &y, &z, &design)?),
        ("dm", or_nan(dm_tte(&y, &z))?),
        ("dm-thresh", or_nan(dm_thresh_tte(&g, &y, &z, 0.75))?),
        ("ls-num", ls_tte(&ls_fit(&g, &y, &z, beta, Covariate::Count)?, &g)),
        ("ls-prop", ls_tte(&ls_fit(&g, &y, &z, beta, Covariate::Proportion)?, &g)),
    ];
    Ok((rows, model.ground_truth()?.tte))
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    let (rows, tte) = run_example(3000, 2, 31)?;
    println!("true {tte:.4}");
    for (name, est) in rows {
        println!("{name:>10} {est:.4}");
    }
    Ok(())
}

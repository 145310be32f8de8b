//! Times the count-indexed weight table against per-unit subset enumeration.

use std::time::Instant;

use snipe::snipe::{snipe_tte, UniformWeightTable};
use snipe::{gen_erdos_renyi, gen_experiment_model, uniform_design};

pub struct Timing {
    pub general_secs: f64,
    pub uniform_secs: f64,
    pub max_diff: f64,
}

pub fn run_example(n: usize, beta: usize, draws: u64) -> snipe::Result<Timing> {
    let p = 0.2;
    let g = gen_erdos_renyi(n, 10.0 / n as f64, true, 3)?;
    let model = gen_experiment_model(&g, beta, 2.0, 4)?;
    let design = uniform_design(n, p)?;
    let samples: Vec<_> = (0..draws)
        .map(|k| {
            let z = design.sample(k);
            let y = model.evaluate(&z)?;
            Ok((z, y))
        })
        .collect::<snipe::Result<_>>()?;

    let t0 = Instant::now();
    let general: Vec<f64> = samples
        .iter()
        .map(|(z, y)| snipe_tte(&g, y, z, &design, beta))
        .collect::<snipe::Result<_>>()?;
    let general_secs = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let table = UniformWeightTable::new(p, beta, g.d_in())?;
    let fast: Vec<f64> = samples
        .iter()
        .map(|(z, y)| table.estimate(&g, y, z))
        .collect::<snipe::Result<_>>()?;
    let uniform_secs = t0.elapsed().as_secs_f64();

    let max_diff = general.iter().zip(&fast).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Timing { general_secs, uniform_secs, max_diff })
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    let t = run_example(5000, 2, 50)?;
    println!(
        "general {:.3}s  uniform {:.3}s  speedup {:.1}x  max diff {:.2e}",
        t.general_secs,
        t.uniform_secs,
        t.general_secs / t.uniform_secs,
        t.max_diff
    );
    Ok(())
}

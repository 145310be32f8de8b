//! Writes a graph, model, design and treatment vector to disk and reads them
//! back, as the command-line tool does.

use std::path::Path;

use snipe::snipe::snipe_tte;
use snipe::{gen_erdos_renyi, gen_experiment_model, CausalGraph, Design, OutcomesModel, TreatmentVector};

/// Returns the estimate before and after the round trip.
pub fn run_example(dir: &Path) -> snipe::Result<(f64, f64)> {
    let n = 500;
    let g = gen_erdos_renyi(n, 0.02, true, 61)?;
    let model = gen_experiment_model(&g, 2, 1.5, 62)?;
    let design = Design::new((0..n).map(|i| 0.1 + 0.3 * (i % 7) as f64 / 6.0).collect())?;
    let z = design.sample(63);
    let before = snipe_tte(&g, &model.evaluate(&z)?, &z, &design, 2)?;

    g.save_json(&dir.join("graph.json"))?;
    model.save_json(&dir.join("model.json"))?;
    design.save_json(&dir.join("design.json"))?;
    z.save_csv(&dir.join("z.csv"))?;

    let g2 = CausalGraph::load_json(&dir.join("graph.json"))?;
    let model2 = OutcomesModel::load_json(&dir.join("model.json"), &g2)?;
    let design2 = Design::load_json(&dir.join("design.json"))?;
    let z2 = TreatmentVector::load_csv(&dir.join("z.csv"))?;
    let after = snipe_tte(&g2, &model2.evaluate(&z2)?, &z2, &design2, 2)?;
    Ok((before, after))
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    let dir = std::env::temp_dir().join("snipe_roundtrip_example");
    std::fs::create_dir_all(&dir)?;
    let (before, after) = run_example(&dir)?;
    println!("before {before}  after {after}  (files in {})", dir.display());
    Ok(())
}

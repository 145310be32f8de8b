//! Builds the per-unit design matrix, checks its closed-form inverse and
//! compares the weight read off the inverse with the explicit subset sum.

use snipe::snipe::{design_matrix, design_matrix_inverse, implicit_tte_weight, snipe_weight};
use snipe::{CausalGraph, Design};

/// Returns `(max |M A - I|, |implicit - explicit|)`.
pub fn run_example(beta: usize) -> snipe::Result<(f64, f64)> {
    let design = Design::new(vec![0.2, 0.35, 0.5, 0.15, 0.3, 0.45])?;
    let neigh = [0, 1, 2, 4, 5];
    let m = design_matrix(&neigh, &design, beta)?;
    let inv = design_matrix_inverse(&neigh, &design, beta)?;
    let prod = &m * &inv.matrix;
    let mut worst = 0.0f64;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((prod[(r, c)] - target).abs());
        }
    }
    let edges: Vec<(usize, usize)> = neigh.iter().map(|&j| (j, 3)).collect();
    let g = CausalGraph::from_edges(6, false, &edges)?;
    let z = design.sample(5);
    let implicit = implicit_tte_weight(&neigh, &z, &design, beta)?;
    let explicit = snipe_weight(&g, 3, &z, &design, beta)?;
    Ok((worst, (implicit - explicit).abs()))
}

#[allow(dead_code)]
fn main() -> snipe::Result<()> {
    for beta in 1..=3 {
        let (inv, w) = run_example(beta)?;
        println!("beta {beta}: |MA - I| {inv:.2e}  weight diff {w:.2e}");
    }
    Ok(())
}

//! Worst-case variance bound, conservative variance estimate and normal
//! confidence intervals for the total-effect estimator.

use std::f64::consts::E;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::design::{Design, TreatmentVector};
use crate::error::{check_len, Error, Result};
use crate::graph::{dependency_index, CausalGraph};
use crate::numeric::CompensatedSum;
use crate::outcomes::OutcomesModel;
use crate::snipe::{snipe_weights, SnipeWeights};

/// `(d_in d_out Y_max^2 / n) ((e d_in / beta) max(4 beta^2, 1 / (p (1 - p))))^beta`
/// with `p` the design's probability floor.
pub fn worst_case_bound(g: &CausalGraph, model: &OutcomesModel, design: &Design) -> Result<f64> {
    check_len("model units", g.n(), model.n())?;
    design.check_units(g.n())?;
    Ok(variance_bound(
        g.n(),
        g.d_in(),
        g.d_out(),
        model.y_max(),
        model.beta(),
        design.p_floor(),
    ))
}

/// The bound from its scalar ingredients.
pub fn variance_bound(n: usize, d_in: usize, d_out: usize, y_max: f64, beta: usize, p: f64) -> f64 {
    let b = beta as f64;
    let d = d_in as f64;
    let per_order = (E * d / b) * (4.0 * b * b).max(1.0 / (p * (1.0 - p)));
    d * d_out as f64 * y_max * y_max / n as f64 * per_order.powi(beta as i32)
}

/// Graph-dependent parts of the conservative estimate, reusable across
/// treatment draws.
///
/// For every unit `i` and every `j` sharing an in-neighbor with `i`
/// (including `i` itself) this stores `N_i cap N_j`, and for every `i` the
/// count `K_i = sum_j 2^|N_j| - 2^|N_j \ N_i|` of exposures of `j`
/// incompatible with a fixed exposure of `i`.
#[derive(Debug, Clone)]
pub struct ConservativePlan {
    pair_offsets: Vec<usize>,
    partners: Vec<usize>,
    overlap_offsets: Vec<usize>,
    overlaps: Vec<usize>,
    incompatible: Vec<f64>,
}

impl ConservativePlan {
    pub fn new(g: &CausalGraph) -> Self {
        let index = dependency_index(g);
        let mut pair_offsets = vec![0];
        let mut partners = Vec::with_capacity(index.total_pairs());
        let mut overlap_offsets = vec![0];
        let mut overlaps = Vec::new();
        let mut incompatible = Vec::with_capacity(g.n());
        for i in 0..g.n() {
            let ni = g.neighbors(i);
            let mut k = 0.0;
            for &j in index.members(i) {
                let nj = g.neighbors(j);
                let before = overlaps.len();
                intersect_into(ni, nj, &mut overlaps);
                let shared = overlaps.len() - before;
                if shared == 0 {
                    continue;
                }
                partners.push(j);
                overlap_offsets.push(overlaps.len());
                k += 2f64.powi(nj.len() as i32) - 2f64.powi((nj.len() - shared) as i32);
            }
            pair_offsets.push(partners.len());
            incompatible.push(k);
        }
        ConservativePlan {
            pair_offsets,
            partners,
            overlap_offsets,
            overlaps,
            incompatible,
        }
    }

    pub fn n(&self) -> usize {
        self.incompatible.len()
    }

    /// The estimate for one draw from observed outcomes and the estimator's
    /// weights. Single draws may be negative and are returned as is.
    pub fn evaluate(
        &self,
        g: &CausalGraph,
        y: &[f64],
        z: &TreatmentVector,
        design: &Design,
        weights: &SnipeWeights,
    ) -> Result<f64> {
        let n = self.n();
        check_len("outcome vector", n, y.len())?;
        check_len("treatment vector", n, z.len())?;
        check_len("weights", n, weights.weights.len())?;
        design.check_units(n)?;
        let q: Vec<f64> = (0..n)
            .map(|k| if z.get(k) { design.p(k) } else { 1.0 - design.p(k) })
            .collect();
        let a: Vec<f64> = y.iter().zip(&weights.weights).map(|(y, w)| y * w).collect();

        let mut cross = CompensatedSum::default();
        let mut own = CompensatedSum::default();
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for t in self.pair_offsets[i]..self.pair_offsets[i + 1] {
                let j = self.partners[t];
                let shared: f64 = self.overlaps[self.overlap_offsets[t]..self.overlap_offsets[t + 1]]
                    .iter()
                    .map(|&k| q[k])
                    .product();
                cross.add(a[i] * a[j] * (1.0 - shared));
            }
            let exposure: f64 = g.neighbors(i).iter().map(|&k| q[k]).product();
            own.add(exposure * a[i] * a[i] * self.incompatible[i]);
        }
        Ok((cross.value() + own.value()) / (n as f64 * n as f64))
    }
}

fn intersect_into(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[x]);
                x += 1;
                y += 1;
            }
        }
    }
}

/// Conservative variance estimate for one draw, building the plan on the fly.
pub fn conservative_variance(
    g: &CausalGraph,
    y: &[f64],
    z: &TreatmentVector,
    design: &Design,
    beta: usize,
) -> Result<f64> {
    let weights = snipe_weights(g, z, design, beta)?;
    ConservativePlan::new(g).evaluate(g, y, z, design, &weights)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub low: f64,
    pub high: f64,
    /// Set when a negative variance was floored at zero.
    pub floored: bool,
}

/// Standard normal quantile.
pub fn normal_quantile(prob: f64) -> f64 {
    Normal::standard().inverse_cdf(prob)
}

/// `estimate -/+ sqrt(variance) z_{1 - alpha/2}`.
pub fn confidence_interval(estimate: f64, variance: f64, alpha: f64) -> Result<ConfidenceInterval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if variance.is_nan() {
        return Err(Error::InvalidParameter("variance is NaN".into()));
    }
    let floored = variance < 0.0;
    let half = variance.max(0.0).sqrt() * normal_quantile(1.0 - alpha / 2.0);
    Ok(ConfidenceInterval {
        low: estimate - half,
        high: estimate + half,
        floored,
    })
}

/// Logs a warning when the design leaves the range covered by the
/// asymptotic normality result.
pub fn warn_if_outside_clt_range(design: &Design) {
    if design.any_above_half() {
        log::warn!("confidence intervals assume p_i <= 0.5; some treatment probabilities exceed it");
    }
}

/// One row of variance output.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub point_estimate: f64,
    pub empirical_variance: Option<f64>,
    pub conservative_estimate: f64,
    pub worst_case_bound: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl VarianceReport {
    pub const CSV_HEADER: &'static str = "estimate,empirical_var,conservative_var,bound,ci_low,ci_high";

    /// Single-draw report with the interval built from the conservative estimate.
    pub fn single_draw(
        g: &CausalGraph,
        model: &OutcomesModel,
        design: &Design,
        z: &TreatmentVector,
        alpha: f64,
    ) -> Result<Self> {
        warn_if_outside_clt_range(design);
        let y = model.evaluate(z)?;
        let weights = snipe_weights(g, z, design, model.beta())?;
        let estimate = weights.estimate(&y)?;
        let conservative = ConservativePlan::new(g).evaluate(g, &y, z, design, &weights)?;
        let ci = confidence_interval(estimate, conservative, alpha)?;
        if ci.floored {
            log::warn!("negative conservative variance {conservative} floored at 0 for the interval");
        }
        Ok(VarianceReport {
            point_estimate: estimate,
            empirical_variance: None,
            conservative_estimate: conservative,
            worst_case_bound: worst_case_bound(g, model, design)?,
            ci_low: ci.low,
            ci_high: ci.high,
        })
    }

    pub fn to_csv_row(&self) -> String {
        let empirical = self
            .empirical_variance
            .map_or_else(|| "NA".to_string(), |v| v.to_string());
        format!(
            "{},{},{},{},{},{}",
            self.point_estimate,
            empirical,
            self.conservative_estimate,
            self.worst_case_bound,
            self.ci_low,
            self.ci_high
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::uniform_design;
    use crate::graph::gen_erdos_renyi;
    use crate::outcomes::gen_experiment_model;

    #[test]
    fn bound_examples() {
        let v = variance_bound(100, 1, 1, 1.0, 1, 0.5);
        assert!((v - 4.0 * E / 100.0).abs() < 1e-15);
        assert!((v - 0.108731).abs() < 1e-6);
        assert_eq!(variance_bound(100, 5, 3, 0.0, 2, 0.2), 0.0);
        // beta = 1 with 1 / (p (1 - p)) >= 4
        let (n, d_in, d_out, y, p) = (500, 7, 9, 2.5, 0.2);
        let simple = E * (d_in * d_in * d_out) as f64 * y * y / (n as f64 * p * (1.0 - p));
        assert!((variance_bound(n, d_in, d_out, y, 1, p) - simple).abs() < 1e-9 * simple);
    }

    #[test]
    fn isolated_node_terms() {
        let g = CausalGraph::from_edges(1, true, &[]).unwrap();
        let d = uniform_design(1, 0.5).unwrap();
        for (treated, y) in [(true, 3.0), (false, 1.0)] {
            let z = TreatmentVector::all(1, treated);
            let v = conservative_variance(&g, &[y], &z, &d, 1).unwrap();
            assert!((v - y * y * 4.0).abs() < 1e-12);
        }
        let z = TreatmentVector::all(1, true);
        assert_eq!(conservative_variance(&g, &[0.0], &z, &d, 1).unwrap(), 0.0);
    }

    #[test]
    fn zero_outcomes_give_zero() {
        let g = gen_erdos_renyi(200, 0.05, true, 1).unwrap();
        let d = uniform_design(200, 0.2).unwrap();
        let z = d.sample(3);
        assert_eq!(conservative_variance(&g, &[0.0; 200], &z, &d, 2).unwrap(), 0.0);
    }

    /// The estimator written as explicit sums over exposures of `N_i cup N_j`.
    fn exposure_sum_estimate(g: &CausalGraph, m: &OutcomesModel, z: &TreatmentVector, d: &Design, beta: usize) -> f64 {
        let n = g.n();
        let prob = |units: &[usize], x: &TreatmentVector| -> f64 {
            units.iter().map(|&k| if x.get(k) { d.p(k) } else { 1.0 - d.p(k) }).product()
        };
        let yw = |i: usize, x: &TreatmentVector| {
            m.evaluate_unit(i, x) * crate::snipe::snipe_weight(g, i, x, d, beta).unwrap()
        };
        let mut total = 0.0;
        for i in 0..n {
            let ni = g.neighbors(i);
            let mut k_i = 0.0;
            for j in 0..n {
                let nj = g.neighbors(j);
                let shared: Vec<usize> = ni.iter().copied().filter(|k| nj.contains(k)).collect();
                if shared.is_empty() {
                    continue;
                }
                k_i += 2f64.powi(nj.len() as i32) - 2f64.powi((nj.len() - shared.len()) as i32);
                let mut union: Vec<usize> = ni.iter().chain(nj).copied().collect();
                union.sort_unstable();
                union.dedup();
                for mask in 0..1u64 << union.len() {
                    let mut x = z.clone();
                    for (b, &k) in union.iter().enumerate() {
                        x.set(k, mask >> b & 1 == 1);
                    }
                    if union.iter().any(|&k| x.get(k) != z.get(k)) {
                        continue;
                    }
                    let p_union = prob(&union, &x);
                    let cov = p_union * (1.0 - prob(&shared, &x));
                    total += yw(i, &x) * yw(j, &x) * cov / p_union;
                }
            }
            for mask in 0..1u64 << ni.len() {
                let mut x = z.clone();
                for (b, &k) in ni.iter().enumerate() {
                    x.set(k, mask >> b & 1 == 1);
                }
                if ni.iter().all(|&k| x.get(k) == z.get(k)) {
                    total += prob(ni, &x) * yw(i, &x).powi(2) * k_i;
                }
            }
        }
        total / (n * n) as f64
    }

    #[test]
    fn collapsed_form_matches_exposure_sums() {
        for seed in 0..6 {
            let n = 9;
            let g = gen_erdos_renyi(n, 0.25, true, seed).unwrap();
            let beta = 1 + seed as usize % 2;
            let m = gen_experiment_model(&g, beta, 1.5, seed + 100).unwrap();
            let d = Design::new((0..n).map(|k| 0.1 + 0.04 * k as f64).collect()).unwrap();
            let z = d.sample(seed + 200);
            let y = m.evaluate(&z).unwrap();
            let fast = conservative_variance(&g, &y, &z, &d, beta).unwrap();
            let slow = exposure_sum_estimate(&g, &m, &z, &d, beta);
            assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0), "{fast} vs {slow}");
        }
    }

    #[test]
    fn plan_reuse_matches_direct() {
        let g = gen_erdos_renyi(300, 0.03, true, 8).unwrap();
        let m = gen_experiment_model(&g, 2, 2.0, 9).unwrap();
        let d = uniform_design(300, 0.3).unwrap();
        let plan = ConservativePlan::new(&g);
        for s in 0..5 {
            let z = d.sample(s);
            let y = m.evaluate(&z).unwrap();
            let w = snipe_weights(&g, &z, &d, 2).unwrap();
            let a = plan.evaluate(&g, &y, &z, &d, &w).unwrap();
            let b = conservative_variance(&g, &y, &z, &d, 2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn interval_examples() {
        let ci = confidence_interval(1.5, 0.0, 0.05).unwrap();
        assert_eq!((ci.low, ci.high), (1.5, 1.5));
        let ci = confidence_interval(2.0, 1.0, 0.3174).unwrap();
        assert!((ci.high - 3.0).abs() < 1e-3 && (ci.low - 1.0).abs() < 1e-3);
        assert!(((ci.low + ci.high) / 2.0 - 2.0).abs() < 1e-15);
        let ci = confidence_interval(0.0, 1.0, 2.0 * (1.0 - 0.841_344_746_068_542_9)).unwrap();
        assert!((ci.high - 1.0).abs() < 1e-6);
        let ci = confidence_interval(0.0, 1.0, 0.05).unwrap();
        assert!((ci.high - 1.959_963_984_540_054).abs() < 1e-8);
        let ci = confidence_interval(0.0, -1.0, 0.05).unwrap();
        assert!(ci.floored && ci.low == 0.0);
        assert!(confidence_interval(0.0, 1.0, 1.0).is_err());
        assert!(confidence_interval(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn report_row() {
        let g = gen_erdos_renyi(50, 0.1, true, 1).unwrap();
        let m = OutcomesModel::zero(&g, 1).unwrap();
        let d = uniform_design(50, 0.2).unwrap();
        let r = VarianceReport::single_draw(&g, &m, &d, &d.sample(1), 0.05).unwrap();
        assert_eq!(r.to_csv_row(), "0,NA,0,0,0,0");
    }
}

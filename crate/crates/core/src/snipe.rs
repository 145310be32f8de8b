//! The SNIPE estimator family.
//!
//! For unit `i` with in-neighborhood `N_i` the weight is
//!
//! `w_i(z) = sum_{S in N_i, 1 <= |S| <= beta} g(S) prod_{j in S} (z_j - p_j) / (p_j (1 - p_j))`
//!
//! with `g(S) = prod_S (1 - p_s) - prod_S (-p_s)`, and the total-effect
//! estimate is `mean_i Y_i w_i(z)`. Writing `a_j` for the per-unit factor,
//! each subset term is `prod_S (1 - p_j) a_j - prod_S (-p_j) a_j`, so both
//! products are carried as prefix products during enumeration.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::design::{Design, TreatmentVector};
use crate::error::{check_len, Error, Result};
use crate::graph::CausalGraph;
use crate::numeric::{binomial, compensated_sum, CompensatedSum};
use crate::subsets::{count_upto, for_each_upto, for_each_with_prefix};

/// Largest subset index supported by the design-matrix path.
pub const DESIGN_MATRIX_LIMIT: usize = 1 << 16;

/// `g(S)` for a subset of units; `g(empty) = 0`.
pub fn g_coeff(subset: &[usize], design: &Design) -> f64 {
    if subset.is_empty() {
        return 0.0;
    }
    let treat: f64 = subset.iter().map(|&s| 1.0 - design.p(s)).product();
    let control: f64 = subset.iter().map(|&s| -design.p(s)).product();
    treat - control
}

fn check_beta(beta: usize) -> Result<()> {
    if beta == 0 {
        return Err(Error::InvalidParameter("beta must be at least 1".into()));
    }
    Ok(())
}

fn check_inputs(g: &CausalGraph, y: &[f64], z: &TreatmentVector, design: &Design) -> Result<()> {
    check_len("outcome vector", g.n(), y.len())?;
    check_len("treatment vector", g.n(), z.len())?;
    design.check_units(g.n())
}

/// Weight of one unit, summed over neighborhood subsets of size `1..=beta`.
pub fn snipe_weight(
    g: &CausalGraph,
    i: usize,
    z: &TreatmentVector,
    design: &Design,
    beta: usize,
) -> Result<f64> {
    check_beta(beta)?;
    check_len("treatment vector", g.n(), z.len())?;
    design.check_units(g.n())?;
    Ok(weight_of(g.in_neighborhood(i)?, z, design, beta))
}

#[inline]
fn weight_of(nbrs: &[usize], z: &TreatmentVector, design: &Design, beta: usize) -> f64 {
    // (1 - p) a and -p a for each neighbor; a = (z - p) / (p (1 - p))
    let factors: Vec<(f64, f64)> = nbrs
        .iter()
        .map(|&j| {
            let p = design.p(j);
            if z.get(j) {
                ((1.0 - p) / p, -1.0)
            } else {
                (-1.0, p / (1.0 - p))
            }
        })
        .collect();
    let mut acc = CompensatedSum::default();
    for_each_with_prefix(
        factors.len(),
        beta,
        (1.0f64, 1.0f64),
        |(t, c), pos| (t * factors[pos].0, c * factors[pos].1),
        |_, (t, c)| acc.add(t - c),
    );
    acc.value()
}

/// Per-unit weights `w_i(z)` for one treatment draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SnipeWeights {
    pub weights: Vec<f64>,
    pub beta: usize,
}

impl SnipeWeights {
    /// `mean_i Y_i w_i`.
    pub fn estimate(&self, y: &[f64]) -> Result<f64> {
        check_len("outcome vector", self.weights.len(), y.len())?;
        Ok(compensated_sum(y.iter().zip(&self.weights).map(|(y, w)| y * w)) / y.len() as f64)
    }
}

pub fn snipe_weights(
    g: &CausalGraph,
    z: &TreatmentVector,
    design: &Design,
    beta: usize,
) -> Result<SnipeWeights> {
    check_beta(beta)?;
    check_len("treatment vector", g.n(), z.len())?;
    design.check_units(g.n())?;
    let weights = (0..g.n())
        .map(|i| weight_of(g.neighbors(i), z, design, beta))
        .collect();
    Ok(SnipeWeights { weights, beta })
}

/// Total treatment effect estimate using the explicit subset sum.
pub fn snipe_tte(
    g: &CausalGraph,
    y: &[f64],
    z: &TreatmentVector,
    design: &Design,
    beta: usize,
) -> Result<f64> {
    check_inputs(g, y, z, design)?;
    snipe_weights(g, z, design, beta)?.estimate(y)
}

/// Weights of the uniform-probability estimator indexed by the number of
/// treated and control units in a neighborhood.
#[derive(Debug, Clone)]
pub struct UniformWeightTable {
    p: f64,
    beta: usize,
    max_degree: usize,
    table: Vec<f64>,
}

impl UniformWeightTable {
    pub fn new(p: f64, beta: usize, max_degree: usize) -> Result<Self> {
        check_beta(beta)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability {
                what: "treatment probability",
                value: p,
            });
        }
        let side = max_degree + 1;
        let mut table = vec![0.0; side * side];
        for treated in 0..side {
            for control in 0..side - treated {
                table[treated * side + control] = uniform_weight(p, beta, treated, control);
            }
        }
        Ok(UniformWeightTable {
            p,
            beta,
            max_degree,
            table,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    #[inline]
    pub fn weight(&self, treated: usize, control: usize) -> f64 {
        if treated + control <= self.max_degree {
            self.table[treated * (self.max_degree + 1) + control]
        } else {
            uniform_weight(self.p, self.beta, treated, control)
        }
    }

    pub fn estimate(&self, g: &CausalGraph, y: &[f64], z: &TreatmentVector) -> Result<f64> {
        check_len("outcome vector", g.n(), y.len())?;
        check_len("treatment vector", g.n(), z.len())?;
        let mut acc = CompensatedSum::default();
        for (i, &yi) in y.iter().enumerate() {
            let nbrs = g.neighbors(i);
            let treated = nbrs.iter().filter(|&&j| z.get(j)).count();
            acc.add(yi * self.weight(treated, nbrs.len() - treated));
        }
        Ok(acc.value() / g.n() as f64)
    }
}

/// Closed-form weight for a neighborhood with `treated` treated and
/// `control` control units under common probability `p`.
///
/// A subset with `k` treated and `l` control members contributes
/// `((1-p)/p)^k (-1)^l - (-1)^k (p/(1-p))^l`, and there are
/// `C(treated, k) C(control, l)` of them.
pub fn uniform_weight(p: f64, beta: usize, treated: usize, control: usize) -> f64 {
    let odds_t = (1.0 - p) / p;
    let odds_c = p / (1.0 - p);
    let sign = |e: usize| if e % 2 == 0 { 1.0 } else { -1.0 };
    let mut acc = CompensatedSum::default();
    for k in 0..=beta.min(treated) {
        let ck = binomial(treated, k);
        for l in 0..=(beta - k).min(control) {
            if k + l == 0 {
                continue;
            }
            let term = odds_t.powi(k as i32) * sign(l) - sign(k) * odds_c.powi(l as i32);
            acc.add(ck * binomial(control, l) * term);
        }
    }
    acc.value()
}

/// Total treatment effect estimate under a uniform design, from treated and
/// control neighbor counts only.
pub fn snipe_tte_uniform(
    g: &CausalGraph,
    y: &[f64],
    z: &TreatmentVector,
    p: f64,
    beta: usize,
) -> Result<f64> {
    UniformWeightTable::new(p, beta, g.d_in())?.estimate(g, y, z)
}

/// Subsets of `neigh` (as unit ids) with at most `beta` elements, in
/// size-major lexicographic order; index 0 is the empty set.
pub fn subset_index(neigh: &[usize], beta: usize) -> Result<Vec<Vec<usize>>> {
    let size = count_upto(neigh.len(), beta);
    if size > DESIGN_MATRIX_LIMIT || neigh.len() > 64 {
        return Err(Error::SizeGuard {
            size,
            limit: DESIGN_MATRIX_LIMIT,
        });
    }
    let mut out = Vec::with_capacity(size);
    for_each_upto(neigh.len(), 0, beta, |pos| {
        out.push(pos.iter().map(|&k| neigh[k]).collect())
    });
    Ok(out)
}

fn position_masks(neigh: &[usize], beta: usize) -> Result<Vec<u64>> {
    subset_index(neigh, beta)?;
    let mut out = Vec::new();
    for_each_upto(neigh.len(), 0, beta, |pos| {
        out.push(pos.iter().fold(0u64, |m, &k| m | 1 << k))
    });
    Ok(out)
}

fn check_neigh(neigh: &[usize], design: &Design) -> Result<()> {
    if let Some(&j) = neigh.iter().find(|&&j| j >= design.n()) {
        return Err(Error::NodeOutOfRange {
            index: j,
            n: design.n(),
        });
    }
    if neigh.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("neighborhood must be sorted and distinct".into()));
    }
    Ok(())
}

/// `E[z~ z~^T]` with entries `prod_{j in S cup T} p_j`.
pub fn design_matrix(neigh: &[usize], design: &Design, beta: usize) -> Result<DMatrix<f64>> {
    check_neigh(neigh, design)?;
    let masks = position_masks(neigh, beta)?;
    let prod = |mask: u64| -> f64 {
        (0..neigh.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| design.p(neigh[k]))
            .product()
    };
    let m = masks.len();
    Ok(DMatrix::from_fn(m, m, |r, c| prod(masks[r] | masks[c])))
}

/// Closed-form inverse of the design matrix for one neighborhood.
#[derive(Debug, Clone)]
pub struct DesignMatrixInverse {
    pub subsets: Vec<Vec<usize>>,
    pub matrix: DMatrix<f64>,
}

/// `A_{S,T} = prod_S (-1/p) prod_T (-1/p) sum_{U in index, S cup T in U} prod_U p/(1-p)`.
pub fn design_matrix_inverse(
    neigh: &[usize],
    design: &Design,
    beta: usize,
) -> Result<DesignMatrixInverse> {
    check_neigh(neigh, design)?;
    let subsets = subset_index(neigh, beta)?;
    let masks = position_masks(neigh, beta)?;
    let d = neigh.len();
    let odds: Vec<f64> = neigh.iter().map(|&j| design.p(j) / (1.0 - design.p(j))).collect();
    let inv: Vec<f64> = neigh.iter().map(|&j| -1.0 / design.p(j)).collect();
    let over = |mask: u64, v: &[f64]| -> f64 {
        (0..d).filter(|k| mask >> k & 1 == 1).map(|k| v[k]).product()
    };

    // sum over supersets U of W with |U| <= beta of prod_U odds
    let mut superset_sums: HashMap<u64, f64> = HashMap::new();
    let mut superset_sum = |w: u64| -> f64 {
        *superset_sums.entry(w).or_insert_with(|| {
            let size = w.count_ones() as usize;
            if size > beta {
                return 0.0;
            }
            let room = beta - size;
            let mut e = vec![0.0; room + 1];
            e[0] = 1.0;
            for k in (0..d).filter(|k| w >> k & 1 == 0) {
                for m in (1..=room).rev() {
                    e[m] += e[m - 1] * odds[k];
                }
            }
            over(w, &odds) * e.iter().sum::<f64>()
        })
    };

    let m = masks.len();
    let scale: Vec<f64> = masks.iter().map(|&s| over(s, &inv)).collect();
    let mut matrix = DMatrix::zeros(m, m);
    for r in 0..m {
        for c in r..m {
            let v = scale[r] * scale[c] * superset_sum(masks[r] | masks[c]);
            matrix[(r, c)] = v;
            matrix[(c, r)] = v;
        }
    }
    Ok(DesignMatrixInverse { subsets, matrix })
}

/// `<A (1 - e_1), z~>`, the weight obtained by inverting the design matrix.
pub fn implicit_tte_weight(
    neigh: &[usize],
    z: &TreatmentVector,
    design: &Design,
    beta: usize,
) -> Result<f64> {
    check_len("treatment vector", design.n(), z.len())?;
    let inv = design_matrix_inverse(neigh, design, beta)?;
    let m = inv.subsets.len();
    let mut acc = CompensatedSum::default();
    for (r, s) in inv.subsets.iter().enumerate() {
        if s.iter().all(|&j| z.get(j)) {
            for c in 1..m {
                acc.add(inv.matrix[(r, c)]);
            }
        }
    }
    Ok(acc.value())
}

/// Weight of unit `i` targeting effects of subsets of size exactly `alpha`:
/// `sum_{U, alpha <= |U| <= beta} prod_U (p_j - z_j)/(1 - p_j) * e_alpha({-1/p_k}_{k in U})`.
fn te_alpha_weight_of(
    nbrs: &[usize],
    z: &TreatmentVector,
    design: &Design,
    beta: usize,
    alpha: usize,
) -> f64 {
    let f: Vec<f64> = nbrs
        .iter()
        .map(|&j| (design.p(j) - z.value(j)) / (1.0 - design.p(j)))
        .collect();
    let inv: Vec<f64> = nbrs.iter().map(|&j| -1.0 / design.p(j)).collect();
    let mut acc = CompensatedSum::default();
    let mut e = vec![0.0; alpha + 1];
    for_each_upto(nbrs.len(), alpha, beta, |pos| {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[0] = 1.0;
        for &k in pos {
            for m in (1..=alpha).rev() {
                e[m] += e[m - 1] * inv[k];
            }
        }
        let prod: f64 = pos.iter().map(|&k| f[k]).product();
        acc.add(prod * e[alpha]);
    });
    acc.value()
}

/// `(-1/p_i) sum_{U in S_i^beta, i in U} prod_U (p_j - z_j)/(1 - p_j)`.
fn ate_weight_of(i: usize, nbrs: &[usize], z: &TreatmentVector, design: &Design, beta: usize) -> Result<f64> {
    let own = nbrs
        .binary_search(&i)
        .map_err(|_| Error::MissingSelfLoop { node: i })?;
    let f: Vec<f64> = nbrs
        .iter()
        .map(|&j| (design.p(j) - z.value(j)) / (1.0 - design.p(j)))
        .collect();
    let mut acc = CompensatedSum::default();
    for_each_upto(nbrs.len(), 1, beta, |pos| {
        if pos.binary_search(&own).is_ok() {
            acc.add(pos.iter().map(|&k| f[k]).product());
        }
    });
    Ok(-acc.value() / design.p(i))
}

/// Per-unit weights of the direct-effect estimator.
pub fn ate_weights(g: &CausalGraph, z: &TreatmentVector, design: &Design, beta: usize) -> Result<Vec<f64>> {
    check_beta(beta)?;
    check_len("treatment vector", g.n(), z.len())?;
    design.check_units(g.n())?;
    (0..g.n())
        .map(|i| ate_weight_of(i, g.neighbors(i), z, design, beta))
        .collect()
}

/// Average direct effect estimate.
pub fn snipe_ate(
    g: &CausalGraph,
    y: &[f64],
    z: &TreatmentVector,
    design: &Design,
    beta: usize,
) -> Result<f64> {
    check_inputs(g, y, z, design)?;
    let w = ate_weights(g, z, design, beta)?;
    Ok(compensated_sum(y.iter().zip(&w).map(|(y, w)| y * w)) / g.n() as f64)
}

/// Direct effect estimate averaged over the units in `demographic`.
pub fn snipe_cate(
    g: &CausalGraph,
    y: &[f64],
    z: &TreatmentVector,
    design: &Design,
    beta: usize,
    demographic: &[usize],
) -> Result<f64> {
    check_beta(beta)?;
    check_inputs(g, y, z, design)?;
    if demographic.is_empty() {
        return Err(Error::InvalidParameter("demographic must be nonempty".into()));
    }
    let mut acc = CompensatedSum::default();
    for &i in demographic {
        let nbrs = g.in_neighborhood(i)?;
        acc.add(y[i] * ate_weight_of(i, nbrs, z, design, beta)?);
    }
    Ok(acc.value() / demographic.len() as f64)
}

/// Estimate of the effect carried by subsets of size exactly `alpha`.
pub fn snipe_te_alpha(
    g: &CausalGraph,
    y: &[f64],
    z: &TreatmentVector,
    design: &Design,
    beta: usize,
    alpha: usize,
) -> Result<f64> {
    check_beta(beta)?;
    check_inputs(g, y, z, design)?;
    if alpha == 0 || alpha > beta {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in 1..={beta}, got {alpha}"
        )));
    }
    let total = compensated_sum(
        (0..g.n()).map(|i| y[i] * te_alpha_weight_of(g.neighbors(i), z, design, beta, alpha)),
    );
    Ok(total / g.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::uniform_design;
    use crate::graph::gen_erdos_renyi;
    use proptest::prelude::*;

    fn single() -> (CausalGraph, Design) {
        (
            CausalGraph::from_edges(1, true, &[]).unwrap(),
            uniform_design(1, 0.5).unwrap(),
        )
    }

    #[test]
    fn g_coeff_examples() {
        let d = uniform_design(3, 0.2).unwrap();
        assert_eq!(g_coeff(&[], &d), 0.0);
        assert!((g_coeff(&[1], &d) - 1.0).abs() < 1e-15);
        assert!((g_coeff(&[0, 2], &d) - 0.60).abs() < 1e-15);
        let half = uniform_design(2, 0.5).unwrap();
        assert_eq!(g_coeff(&[0, 1], &half), 0.0);
    }

    #[test]
    fn weight_examples() {
        let (g, d) = single();
        let one = TreatmentVector::all(1, true);
        let zero = TreatmentVector::all(1, false);
        assert_eq!(snipe_weight(&g, 0, &one, &d, 1).unwrap(), 2.0);
        assert_eq!(snipe_weight(&g, 0, &zero, &d, 1).unwrap(), -2.0);
        assert!(snipe_weight(&g, 0, &one, &d, 0).is_err());

        // all control, beta = 1: -|N_i| / (1 - p)
        let g = gen_erdos_renyi(30, 0.2, true, 1).unwrap();
        let d = uniform_design(30, 0.3).unwrap();
        let z = TreatmentVector::all(30, false);
        for i in 0..30 {
            let w = snipe_weight(&g, i, &z, &d, 1).unwrap();
            assert!((w + g.in_degree(i) as f64 / 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn full_degree_weight_is_horvitz_thompson() {
        let g = gen_erdos_renyi(12, 0.25, true, 5).unwrap();
        let d = Design::new((0..12).map(|i| 0.2 + 0.05 * i as f64).collect()).unwrap();
        for seed in 0..50 {
            let z = d.sample(seed);
            for i in 0..12 {
                let nb = g.neighbors(i);
                let treat: f64 = nb.iter().map(|&j| z.value(j) / d.p(j)).product();
                let ctrl: f64 = nb.iter().map(|&j| (1.0 - z.value(j)) / (1.0 - d.p(j))).product();
                let w = snipe_weight(&g, i, &z, &d, nb.len()).unwrap();
                assert!((w - (treat - ctrl)).abs() < 1e-12 * (1.0 + treat.abs() + ctrl.abs()));
            }
        }
    }

    #[test]
    fn estimate_examples() {
        let (g, d) = single();
        assert_eq!(snipe_tte(&g, &[3.0], &TreatmentVector::all(1, true), &d, 1).unwrap(), 6.0);
        assert_eq!(snipe_tte(&g, &[1.0], &TreatmentVector::all(1, false), &d, 1).unwrap(), -2.0);
        assert!(snipe_tte(&g, &[1.0, 2.0], &TreatmentVector::all(1, false), &d, 1).is_err());

        let g = gen_erdos_renyi(40, 0.1, true, 2).unwrap();
        let d = uniform_design(40, 0.2).unwrap();
        let z = d.sample(3);
        assert_eq!(snipe_tte(&g, &[0.0; 40], &z, &d, 2).unwrap(), 0.0);
        assert_eq!(snipe_tte_uniform(&g, &[0.0; 40], &z, 0.2, 2).unwrap(), 0.0);
    }

    #[test]
    fn uniform_path_matches_general() {
        for seed in 0..200u64 {
            let n = 20 + (seed % 30) as usize;
            let g = gen_erdos_renyi(n, 0.15, true, seed).unwrap();
            let p = 0.1 + 0.8 * ((seed * 37 % 100) as f64 / 100.0);
            let beta = 1 + (seed % 4) as usize;
            let d = uniform_design(n, p).unwrap();
            let z = d.sample(seed + 7);
            let y: Vec<f64> = (0..n).map(|i| ((i * 13 + seed as usize) % 7) as f64 - 3.0).collect();
            let a = snipe_tte(&g, &y, &z, &d, beta).unwrap();
            let b = snipe_tte_uniform(&g, &y, &z, p, beta).unwrap();
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn uniform_beta_one_counts() {
        // beta = 1: each treated neighbor contributes (1-p)/p + 1, each control -1 - p/(1-p)
        let p = 0.3;
        for t in 0..6 {
            for c in 0..6 {
                let expected = t as f64 / p - c as f64 / (1.0 - p);
                assert!((uniform_weight(p, 1, t, c) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn design_matrix_examples() {
        let d = Design::new(vec![0.3, 0.6]).unwrap();
        let m = design_matrix(&[1], &d, 1).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 0.6]));

        let inv = design_matrix_inverse(&[1], &d, 1).unwrap();
        let p = 0.6;
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[1.0 + p / (1.0 - p), -1.0 / (1.0 - p), -1.0 / (1.0 - p), 1.0 / (p * (1.0 - p))],
        );
        assert!((inv.matrix - expected).amax() < 1e-12);

        let m = design_matrix(&[0, 1], &d, 2).unwrap();
        assert_eq!(m.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.3, 0.6, 0.3 * 0.6]);
        assert!(m.clone().transpose() == m);
    }

    #[test]
    fn inverse_is_inverse() {
        let d = Design::new(vec![0.15, 0.4, 0.7, 0.25, 0.5]).unwrap();
        for (neigh, beta) in [(vec![0, 2, 3], 2), (vec![0, 1, 2, 3], 3), (vec![1, 2, 3, 4], 2)] {
            let m = design_matrix(&neigh, &d, beta).unwrap();
            let a = design_matrix_inverse(&neigh, &d, beta).unwrap().matrix;
            let id = DMatrix::<f64>::identity(m.nrows(), m.ncols());
            assert!((&m * &a - &id).amax() < 1e-9);
            assert!((a.clone() - a.transpose()).amax() == 0.0);
        }
    }

    #[test]
    fn implicit_weight_edge_cases() {
        let d = uniform_design(3, 0.4).unwrap();
        let z = TreatmentVector::new(vec![true, false, true]);
        assert_eq!(implicit_tte_weight(&[], &z, &d, 2).unwrap(), 0.0);
        let w = implicit_tte_weight(&[0, 1, 2], &z, &d, 3).unwrap();
        let ht = 0.0 - 0.0;
        assert!((w - ht).abs() < 1e-9);
        let all = TreatmentVector::all(3, true);
        let w = implicit_tte_weight(&[0, 1, 2], &all, &d, 3).unwrap();
        assert!((w - 0.4f64.powi(-3)).abs() < 1e-9);
    }

    #[test]
    fn size_guard() {
        let d = uniform_design(40, 0.3).unwrap();
        let neigh: Vec<usize> = (0..40).collect();
        assert!(matches!(design_matrix(&neigh, &d, 4), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn ate_examples() {
        let (g, d) = single();
        assert_eq!(snipe_ate(&g, &[3.0], &TreatmentVector::all(1, true), &d, 1).unwrap(), 6.0);
        assert_eq!(snipe_ate(&g, &[1.0], &TreatmentVector::all(1, false), &d, 1).unwrap(), -2.0);

        let g = gen_erdos_renyi(25, 0.15, true, 4).unwrap();
        let d = uniform_design(25, 0.3).unwrap();
        let z = d.sample(1);
        let y: Vec<f64> = (0..25).map(|i| i as f64 * 0.1).collect();
        let all: Vec<usize> = (0..25).collect();
        let ate = snipe_ate(&g, &y, &z, &d, 2).unwrap();
        assert!((snipe_cate(&g, &y, &z, &d, 2, &all).unwrap() - ate).abs() < 1e-12);
        assert_eq!(snipe_ate(&g, &[0.0; 25], &z, &d, 2).unwrap(), 0.0);
        let w = ate_weights(&g, &z, &d, 2).unwrap();
        assert!((snipe_cate(&g, &y, &z, &d, 2, &[7]).unwrap() - y[7] * w[7]).abs() < 1e-15);
        assert!(snipe_cate(&g, &y, &z, &d, 2, &[]).is_err());

        let no_loops = CausalGraph::from_edges(2, false, &[(0, 1)]).unwrap();
        let d2 = uniform_design(2, 0.5).unwrap();
        assert!(matches!(
            snipe_ate(&no_loops, &[1.0, 1.0], &TreatmentVector::all(2, true), &d2, 1),
            Err(Error::MissingSelfLoop { .. })
        ));
    }

    #[test]
    fn te_alpha_examples() {
        let g = CausalGraph::from_edges(6, true, &[]).unwrap();
        let d = Design::new(vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7]).unwrap();
        let z = d.sample(2);
        let y = [1.0, -2.0, 0.5, 3.0, 1.5, -1.0];
        let te = snipe_te_alpha(&g, &y, &z, &d, 1, 1).unwrap();
        assert!((te - snipe_ate(&g, &y, &z, &d, 1).unwrap()).abs() < 1e-12);
        assert_eq!(snipe_te_alpha(&g, &[0.0; 6], &z, &d, 2, 2).unwrap(), 0.0);
        assert!(snipe_te_alpha(&g, &y, &z, &d, 2, 3).is_err());
        assert!(snipe_te_alpha(&g, &y, &z, &d, 2, 0).is_err());
    }

    proptest! {
        #[test]
        fn g_coeff_bounded(probs in proptest::collection::vec(0.001f64..0.999, 1..12), mask in any::<u16>()) {
            let d = Design::new(probs.clone()).unwrap();
            let subset: Vec<usize> = (0..probs.len()).filter(|k| mask >> k & 1 == 1).collect();
            prop_assert!(g_coeff(&subset, &d).abs() <= 1.0 + 1e-15);
        }

        #[test]
        fn weight_bound(seed in 0u64..10_000, beta in 1usize..4, p in 0.05f64..0.95) {
            let g = gen_erdos_renyi(30, 0.15, true, seed).unwrap();
            let d = uniform_design(30, p).unwrap();
            let z = d.sample(seed ^ 0xABCD);
            let bound = (g.d_in() as f64 / d.p_floor()).powi(beta as i32);
            for w in snipe_weights(&g, &z, &d, beta).unwrap().weights {
                prop_assert!(w.abs() <= bound * (1.0 + 1e-12));
            }
        }

        #[test]
        fn implicit_matches_explicit(seed in 0u64..10_000, size in 0usize..=8, beta in 1usize..=3) {
            let n = 10;
            let g_probs: Vec<f64> = (0..n).map(|k| 0.1 + 0.8 * (((seed >> k) & 7) as f64 / 7.0)).collect();
            let d = Design::new(g_probs).unwrap();
            let neigh: Vec<usize> = (0..size).collect();
            let z = d.sample(seed);
            let edges: Vec<(usize, usize)> = neigh.iter().filter(|&&j| j != 9).map(|&j| (j, 9)).collect();
            let g = CausalGraph::from_edges(n, false, &edges).unwrap();
            let explicit = snipe_weight(&g, 9, &z, &d, beta).unwrap();
            let implicit = implicit_tte_weight(&neigh, &z, &d, beta).unwrap();
            prop_assert!((explicit - implicit).abs() <= 1e-9 * explicit.abs().max(1.0));
        }
    }
}

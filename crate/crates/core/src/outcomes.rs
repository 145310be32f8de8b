//! Polynomial potential outcomes of bounded degree.
//!
//! Unit `i`'s outcome is `Y_i(z) = sum_S c_{i,S} prod_{j in S} z_j` over
//! subsets `S` of `N_i` with `|S| <= beta`. The sparse coefficient map is the
//! canonical representation; the experiment generator expands its closed
//! form into it.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::TreatmentVector;
use crate::error::{check_len, Error, Result};
use crate::graph::CausalGraph;
use crate::numeric::compensated_sum;
use crate::rng::rng_from_seed;

/// A subset of units in ascending order.
pub type Subset = Vec<usize>;

/// Sparse coefficient map `c_{i,S}` for every unit.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomesModel {
    beta: usize,
    node_offsets: Vec<usize>,
    term_offsets: Vec<usize>,
    members: Vec<usize>,
    coeffs: Vec<f64>,
}

/// Exact estimands of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub tte: f64,
    pub ate: f64,
    /// `te_alpha[a - 1]` is the effect of size-`a` subsets, `a = 1..=beta`.
    pub te_alpha: Vec<f64>,
    pub y_max: f64,
}

impl GroundTruth {
    pub fn te(&self, alpha: usize) -> Option<f64> {
        alpha.checked_sub(1).and_then(|a| self.te_alpha.get(a).copied())
    }
}

fn size_major(a: &[usize], b: &[usize]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl OutcomesModel {
    /// Builds a model from per-unit `(subset, coefficient)` lists, validating
    /// each subset against the graph.
    pub fn new(g: &CausalGraph, beta: usize, terms: Vec<Vec<(Subset, f64)>>) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidParameter("beta must be at least 1".into()));
        }
        check_len("model units", g.n(), terms.len())?;
        let mut node_offsets = Vec::with_capacity(g.n() + 1);
        node_offsets.push(0);
        let mut term_offsets = vec![0];
        let mut members = Vec::new();
        let mut coeffs = Vec::new();
        for (i, mut node_terms) in terms.into_iter().enumerate() {
            let nbrs = g.neighbors(i);
            for (subset, coeff) in &node_terms {
                if subset.len() > beta {
                    return Err(Error::InvalidModel(format!(
                        "unit {i}: subset {subset:?} has more than {beta} elements"
                    )));
                }
                if subset.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidModel(format!(
                        "unit {i}: subset {subset:?} is not sorted and duplicate-free"
                    )));
                }
                if let Some(j) = subset.iter().find(|j| nbrs.binary_search(j).is_err()) {
                    return Err(Error::InvalidModel(format!(
                        "unit {i}: subset {subset:?} contains {j}, which is not an in-neighbor"
                    )));
                }
                if !coeff.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "unit {i}: non-finite coefficient for {subset:?}"
                    )));
                }
            }
            node_terms.sort_by(|a, b| size_major(&a.0, &b.0));
            if node_terms.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidModel(format!("unit {i}: repeated subset key")));
            }
            for (subset, coeff) in node_terms {
                members.extend_from_slice(&subset);
                term_offsets.push(members.len());
                coeffs.push(coeff);
            }
            node_offsets.push(coeffs.len());
        }
        Ok(OutcomesModel {
            beta,
            node_offsets,
            term_offsets,
            members,
            coeffs,
        })
    }

    /// The model with every coefficient zero.
    pub fn zero(g: &CausalGraph, beta: usize) -> Result<Self> {
        Self::new(g, beta, vec![Vec::new(); g.n()])
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.node_offsets.len() - 1
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Terms of unit `i` in size-major lexicographic order.
    pub fn terms(&self, i: usize) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        (self.node_offsets[i]..self.node_offsets[i + 1]).map(move |t| {
            (
                &self.members[self.term_offsets[t]..self.term_offsets[t + 1]],
                self.coeffs[t],
            )
        })
    }

    /// `c_{i,S}`, zero when absent.
    pub fn coefficient(&self, i: usize, subset: &[usize]) -> f64 {
        self.terms(i)
            .find(|(s, _)| *s == subset)
            .map_or(0.0, |(_, c)| c)
    }

    /// `Y_i(z)` for one unit.
    #[inline]
    pub fn evaluate_unit(&self, i: usize, z: &TreatmentVector) -> f64 {
        let mut y = 0.0;
        for (subset, c) in self.terms(i) {
            if subset.iter().all(|&j| z.get(j)) {
                y += c;
            }
        }
        y
    }

    /// Outcome vector `Y(z)`.
    pub fn evaluate(&self, z: &TreatmentVector) -> Result<Vec<f64>> {
        check_len("treatment vector", self.n(), z.len())?;
        Ok((0..self.n()).map(|i| self.evaluate_unit(i, z)).collect())
    }

    /// Exact estimands, cross-checking the coefficient form of the total
    /// effect against `mean(Y(1) - Y(0))`.
    pub fn ground_truth(&self) -> Result<GroundTruth> {
        let n = self.n() as f64;
        let tte = compensated_sum(
            (0..self.n()).flat_map(|i| self.terms(i).filter(|(s, _)| !s.is_empty()).map(|(_, c)| c)),
        ) / n;
        let ate = compensated_sum((0..self.n()).map(|i| self.coefficient(i, &[i]))) / n;
        let te_alpha = (1..=self.beta)
            .map(|alpha| {
                compensated_sum((0..self.n()).flat_map(|i| {
                    self.terms(i).filter(move |(s, _)| s.len() == alpha).map(|(_, c)| c)
                })) / n
            })
            .collect();
        let y_max = self.y_max();

        let all = self.evaluate(&TreatmentVector::all(self.n(), true))?;
        let none = self.evaluate(&TreatmentVector::all(self.n(), false))?;
        let direct = compensated_sum(all.iter().zip(&none).map(|(a, b)| a - b)) / n;
        if (direct - tte).abs() > 1e-10 * tte.abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "coefficient total effect {tte} disagrees with evaluated {direct}"
            )));
        }
        Ok(GroundTruth {
            tte,
            ate,
            te_alpha,
            y_max,
        })
    }

    /// `max_i sum_S |c_{i,S}|`, a bound on every realizable outcome.
    pub fn y_max(&self) -> f64 {
        (0..self.n())
            .map(|i| self.terms(i).map(|(_, c)| c.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Conditional average direct effect over `demographic`.
    pub fn cate(&self, demographic: &[usize]) -> Result<f64> {
        if demographic.is_empty() {
            return Err(Error::InvalidParameter("demographic must be nonempty".into()));
        }
        let total = compensated_sum(demographic.iter().map(|&i| self.coefficient(i, &[i])));
        Ok(total / demographic.len() as f64)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            beta: self.beta,
            nodes: (0..self.n())
                .map(|i| ModelNode {
                    i,
                    terms: self
                        .terms(i)
                        .map(|(s, c)| ModelTerm {
                            subset: s.to_vec(),
                            coeff: c,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_file())?)?;
        Ok(())
    }

    /// Loads a model and revalidates it against `g`.
    pub fn load_json(path: &Path, g: &CausalGraph) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        file.into_model(g)
    }
}

/// `{ "beta": int, "nodes": [ { "i": int, "terms": [ { "subset": [...], "coeff": float } ] } ] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub beta: usize,
    pub nodes: Vec<ModelNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelNode {
    pub i: usize,
    pub terms: Vec<ModelTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTerm {
    pub subset: Vec<usize>,
    pub coeff: f64,
}

impl ModelFile {
    pub fn into_model(self, g: &CausalGraph) -> Result<OutcomesModel> {
        let mut terms: Vec<Option<Vec<(Subset, f64)>>> = vec![None; g.n()];
        for node in self.nodes {
            if node.i >= g.n() {
                return Err(Error::NodeOutOfRange { index: node.i, n: g.n() });
            }
            if terms[node.i].is_some() {
                return Err(Error::InvalidModel(format!("unit {} listed twice", node.i)));
            }
            terms[node.i] = Some(node.terms.into_iter().map(|t| (t.subset, t.coeff)).collect());
        }
        let terms = terms.into_iter().map(Option::unwrap_or_default).collect();
        OutcomesModel::new(g, self.beta, terms)
    }
}

/// Coefficients of `(sum_j w_j z_j)^ell` over binary `z`, using `z_j^2 = z_j`.
///
/// Every subset in the result has at most `ell` elements.
pub fn expand_power(weights: &[(usize, f64)], ell: usize) -> BTreeMap<Subset, f64> {
    let mut acc: BTreeMap<Subset, f64> = BTreeMap::new();
    acc.insert(Vec::new(), 1.0);
    for _ in 0..ell {
        let mut next: BTreeMap<Subset, f64> = BTreeMap::new();
        for (subset, &c) in &acc {
            for &(j, w) in weights {
                let key = match subset.binary_search(&j) {
                    Ok(_) => subset.clone(),
                    Err(at) => {
                        let mut s = Vec::with_capacity(subset.len() + 1);
                        s.extend_from_slice(&subset[..at]);
                        s.push(j);
                        s.extend_from_slice(&subset[at..]);
                        s
                    }
                };
                *next.entry(key).or_insert(0.0) += c * w;
            }
        }
        acc = next;
    }
    if ell == 0 {
        return acc;
    }
    acc.remove(&Vec::new());
    acc
}

/// The simulation model
///
/// `Y_i(z) = c_{i,0} + sum_j c~_ij z_j + sum_{l=2..beta} (sum_j c~_ij z_j / sum_j c~_ij)^l`
///
/// with `c_{i,0}, c~_ii ~ U[0,1]` and, for `j != i`,
/// `c~_ij = v_j |N_i| / sum_{k in out(j)} |N_k|`, `v_j ~ U[0, r]`. Unit `j`'s
/// influence `v_j` is split among its out-neighbors in proportion to their
/// in-degrees.
pub fn gen_experiment_model(g: &CausalGraph, beta: usize, r: f64, seed: u64) -> Result<OutcomesModel> {
    if beta == 0 {
        return Err(Error::InvalidParameter("beta must be at least 1".into()));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r must be a nonnegative real, got {r}")));
    }
    let n = g.n();
    if let Some(i) = (0..n).find(|&i| g.neighbors(i).binary_search(&i).is_err()) {
        return Err(Error::MissingSelfLoop { node: i });
    }
    let mut rng = rng_from_seed(seed);
    let mut baseline = Vec::with_capacity(n);
    let mut direct = Vec::with_capacity(n);
    for _ in 0..n {
        baseline.push(rng.random::<f64>());
        direct.push(rng.random::<f64>());
    }
    let influence: Vec<f64> = (0..n).map(|_| r * rng.random::<f64>()).collect();
    let share_denominator: Vec<f64> = (0..n)
        .map(|j| g.out_neighbors(j).iter().map(|&k| g.in_degree(k) as f64).sum())
        .collect();

    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let deg = g.in_degree(i) as f64;
        let weights: Vec<(usize, f64)> = g
            .neighbors(i)
            .iter()
            .map(|&j| {
                let c = if j == i {
                    direct[i]
                } else {
                    influence[j] * deg / share_denominator[j]
                };
                (j, c)
            })
            .collect();
        let mut coeffs: BTreeMap<Subset, f64> = BTreeMap::new();
        coeffs.insert(Vec::new(), baseline[i]);
        for &(j, c) in &weights {
            coeffs.insert(vec![j], c);
        }
        if beta >= 2 {
            let total: f64 = weights.iter().map(|&(_, c)| c).sum();
            if total == 0.0 {
                return Err(Error::DegenerateModel { node: i });
            }
            let normalized: Vec<(usize, f64)> =
                weights.iter().map(|&(j, c)| (j, c / total)).collect();
            for ell in 2..=beta {
                for (subset, c) in expand_power(&normalized, ell) {
                    *coeffs.entry(subset).or_insert(0.0) += c;
                }
            }
        }
        terms.push(coeffs.into_iter().collect());
    }
    OutcomesModel::new(g, beta, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::uniform_design;
    use crate::graph::gen_erdos_renyi;
    use proptest::prelude::*;

    fn single_node() -> CausalGraph {
        CausalGraph::from_edges(1, true, &[]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let g = single_node();
        let m = OutcomesModel::new(&g, 1, vec![vec![(vec![], 1.0), (vec![0], 2.0)]]).unwrap();
        assert_eq!(m.evaluate(&TreatmentVector::all(1, true)).unwrap(), vec![3.0]);
        assert_eq!(m.evaluate(&TreatmentVector::all(1, false)).unwrap(), vec![1.0]);

        let zero = OutcomesModel::zero(&g, 2).unwrap();
        assert_eq!(zero.evaluate(&TreatmentVector::all(1, true)).unwrap(), vec![0.0]);

        // unit 2 with neighbors a = 0, b = 1
        let g = CausalGraph::from_edges(3, true, &[(0, 2), (1, 2)]).unwrap();
        let mut terms = vec![Vec::new(), Vec::new()];
        terms.push(vec![
            (vec![], 1.0),
            (vec![0], 1.0),
            (vec![1], 1.0),
            (vec![0, 1], 4.0),
        ]);
        let m = OutcomesModel::new(&g, 2, terms).unwrap();
        let z = TreatmentVector::new(vec![true, true, false]);
        assert_eq!(m.evaluate(&z).unwrap()[2], 7.0);
        assert!(m.evaluate(&TreatmentVector::all(2, true)).is_err());
    }

    #[test]
    fn model_validation() {
        let g = CausalGraph::from_edges(3, true, &[(0, 2)]).unwrap();
        let bad_member = vec![vec![(vec![1], 1.0)], vec![], vec![]];
        assert!(OutcomesModel::new(&g, 1, bad_member).is_err());
        let too_big = vec![vec![], vec![], vec![(vec![0, 2], 1.0)]];
        assert!(OutcomesModel::new(&g, 1, too_big).is_err());
        let unsorted = vec![vec![], vec![], vec![(vec![2, 0], 1.0)]];
        assert!(OutcomesModel::new(&g, 2, unsorted).is_err());
        let repeated = vec![vec![(vec![0], 1.0), (vec![0], 2.0)], vec![], vec![]];
        assert!(OutcomesModel::new(&g, 1, repeated).is_err());
    }

    #[test]
    fn expand_power_examples() {
        let w = [(3, 0.5), (7, 2.0)];
        let one = expand_power(&w, 1);
        assert_eq!(one.len(), 2);
        assert_eq!(one[&vec![3]], 0.5);
        assert_eq!(one[&vec![7]], 2.0);

        let two = expand_power(&[(0, 1.0), (1, 1.0)], 2);
        assert_eq!(two[&vec![0]], 1.0);
        assert_eq!(two[&vec![1]], 1.0);
        assert_eq!(two[&vec![0, 1]], 2.0);
        assert_eq!(two.len(), 3);

        let three = expand_power(&[(4, 1.0)], 3);
        assert_eq!(three.len(), 1);
        assert_eq!(three[&vec![4]], 1.0);
    }

    #[test]
    fn experiment_model_without_spillovers_is_sutva() {
        let g = gen_erdos_renyi(50, 0.1, true, 1).unwrap();
        let m = gen_experiment_model(&g, 1, 0.0, 2).unwrap();
        for i in 0..50 {
            for (s, c) in m.terms(i) {
                if s.len() == 1 && s[0] != i {
                    assert_eq!(c, 0.0);
                }
                if s == [i] {
                    assert!((0.0..=1.0).contains(&c));
                }
            }
        }
    }

    #[test]
    fn quadratic_expansion_single_node() {
        let g = single_node();
        let m1 = gen_experiment_model(&g, 1, 1.0, 9).unwrap();
        let m2 = gen_experiment_model(&g, 2, 1.0, 9).unwrap();
        let a = m1.coefficient(0, &[0]);
        assert!((m2.coefficient(0, &[0]) - (a + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn quadratic_expansion_two_neighbors() {
        let g = CausalGraph::from_edges(2, true, &[(1, 0)]).unwrap();
        let m1 = gen_experiment_model(&g, 1, 2.0, 5).unwrap();
        let m2 = gen_experiment_model(&g, 2, 2.0, 5).unwrap();
        let (ci, cj) = (m1.coefficient(0, &[0]), m1.coefficient(0, &[1]));
        let (wi, wj) = (ci / (ci + cj), cj / (ci + cj));
        assert!((m2.coefficient(0, &[0]) - (ci + wi * wi)).abs() < 1e-14);
        assert!((m2.coefficient(0, &[1]) - (cj + wj * wj)).abs() < 1e-14);
        assert!((m2.coefficient(0, &[0, 1]) - 2.0 * wi * wj).abs() < 1e-14);
    }

    #[test]
    fn cross_effects_split_total_influence() {
        // sum_i c~_ij over out-neighbors i != j equals v_j (1 - |N_j| / D_j)
        let g = gen_erdos_renyi(80, 0.08, true, 3).unwrap();
        let m = gen_experiment_model(&g, 1, 2.0, 4).unwrap();
        for j in 0..80 {
            let d_j: f64 = g.out_neighbors(j).iter().map(|&k| g.in_degree(k) as f64).sum();
            let others: f64 = g
                .out_neighbors(j)
                .iter()
                .filter(|&&i| i != j)
                .map(|&i| m.coefficient(i, &[j]))
                .sum();
            if let Some(&i) = g.out_neighbors(j).iter().find(|&&i| i != j) {
                let v_j = m.coefficient(i, &[j]) * d_j / g.in_degree(i) as f64;
                let expected = v_j * (1.0 - g.in_degree(j) as f64 / d_j);
                assert!((others - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn missing_self_loop_rejected() {
        let g = CausalGraph::from_edges(2, false, &[(0, 1)]).unwrap();
        assert!(matches!(
            gen_experiment_model(&g, 1, 1.0, 0),
            Err(Error::MissingSelfLoop { node: 0 })
        ));
    }

    #[test]
    fn ground_truth_examples() {
        let g = single_node();
        let zero = OutcomesModel::zero(&g, 2).unwrap().ground_truth().unwrap();
        assert_eq!((zero.tte, zero.ate, zero.y_max), (0.0, 0.0, 0.0));
        assert_eq!(zero.te_alpha, vec![0.0, 0.0]);

        let m = OutcomesModel::new(&g, 1, vec![vec![(vec![], 1.0), (vec![0], 2.0)]]).unwrap();
        let gt = m.ground_truth().unwrap();
        assert_eq!((gt.tte, gt.ate, gt.y_max), (2.0, 2.0, 3.0));
        assert_eq!(gt.te(1), Some(2.0));

        // node 0 has {0, 1} as neighborhood, node 1 only itself
        let g = CausalGraph::from_edges(2, true, &[(1, 0)]).unwrap();
        let terms = vec![
            vec![(vec![], 1.0), (vec![0], 1.0), (vec![0, 1], 3.0)],
            vec![(vec![], 0.0), (vec![1], 1.0)],
        ];
        let gt = OutcomesModel::new(&g, 2, terms).unwrap().ground_truth().unwrap();
        assert_eq!(gt.tte, 2.5);
        assert_eq!(gt.te(2), Some(1.5));
        assert_eq!(gt.te(1), Some(1.0));
        assert_eq!(gt.te(3), None);
    }

    #[test]
    fn json_round_trip_revalidates() {
        let g = gen_erdos_renyi(15, 0.2, true, 8).unwrap();
        let m = gen_experiment_model(&g, 2, 1.5, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save_json(&path).unwrap();
        assert_eq!(OutcomesModel::load_json(&path, &g).unwrap(), m);
        let other = gen_erdos_renyi(15, 0.2, true, 9).unwrap();
        assert!(OutcomesModel::load_json(&path, &other).is_err());
    }

    #[test]
    fn evaluated_total_effect_matches_coefficients_on_random_models() {
        for seed in 0..500u64 {
            let n = 5 + (seed % 20) as usize;
            let g = gen_erdos_renyi(n, 0.25, true, seed).unwrap();
            let beta = 1 + (seed % 3) as usize;
            let m = gen_experiment_model(&g, beta, 0.5 + (seed % 4) as f64, seed + 1000).unwrap();
            let gt = m.ground_truth().unwrap();
            let all = m.evaluate(&TreatmentVector::all(n, true)).unwrap();
            let none = m.evaluate(&TreatmentVector::all(n, false)).unwrap();
            let direct: f64 = all.iter().zip(&none).map(|(a, b)| a - b).sum::<f64>() / n as f64;
            assert!((gt.tte - direct).abs() <= 1e-10);
            let decomposed: f64 = gt.te_alpha.iter().sum();
            assert!((decomposed - gt.tte).abs() <= 1e-12);
        }
    }

    #[test]
    fn outcomes_bounded_by_y_max() {
        let g = gen_erdos_renyi(60, 0.1, true, 77).unwrap();
        let m = gen_experiment_model(&g, 3, 2.0, 78).unwrap();
        let y_max = m.ground_truth().unwrap().y_max;
        let d = uniform_design(60, 0.4).unwrap();
        for s in 0..200 {
            for y in m.evaluate(&d.sample(s)).unwrap() {
                assert!(y.abs() <= y_max);
            }
        }
    }

    proptest! {
        #[test]
        fn expansion_matches_direct_power(
            w in proptest::collection::vec(-2.0f64..2.0, 1..6),
            ell in 1usize..=4,
            masks in proptest::collection::vec(any::<u8>(), 100),
        ) {
            let weights: Vec<(usize, f64)> = w.iter().copied().enumerate().collect();
            let expanded = expand_power(&weights, ell);
            prop_assert!(expanded.keys().all(|s| s.len() <= ell));
            for mask in masks {
                let on = |j: usize| mask >> j & 1 == 1;
                let base: f64 = weights.iter().filter(|(j, _)| on(*j)).map(|(_, w)| w).sum();
                let direct = base.powi(ell as i32);
                let via_map: f64 = expanded
                    .iter()
                    .filter(|(s, _)| s.iter().all(|&j| on(j)))
                    .map(|(_, c)| c)
                    .sum();
                prop_assert!((direct - via_map).abs() <= 1e-12 * direct.abs().max(1.0));
            }
        }
    }
}

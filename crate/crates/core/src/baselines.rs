//! Comparison estimators: Horvitz-Thompson, difference in means with and
//! without a neighborhood-exposure threshold, and polynomial least squares.

use nalgebra::{DMatrix, DVector};

use crate::design::{Design, TreatmentVector};
use crate::error::{check_len, Error, Result};
use crate::graph::CausalGraph;
use crate::numeric::compensated_sum;

/// `mean_i Y_i [1(N_i all treated) / prod p_j - 1(N_i all control) / prod (1 - p_j)]`.
pub fn ht_tte(g: &CausalGraph, y: &[f64], z: &TreatmentVector, design: &Design) -> Result<f64> {
    check_len("outcome vector", g.n(), y.len())?;
    check_len("treatment vector", g.n(), z.len())?;
    design.check_units(g.n())?;
    let total = compensated_sum((0..g.n()).map(|i| {
        let nbrs = g.neighbors(i);
        let treated: f64 = nbrs.iter().map(|&j| z.value(j) / design.p(j)).product();
        let control: f64 = nbrs
            .iter()
            .map(|&j| (1.0 - z.value(j)) / (1.0 - design.p(j)))
            .product();
        y[i] * (treated - control)
    }));
    Ok(total / g.n() as f64)
}

fn group_difference(y: &[f64], z: &TreatmentVector, include: impl Fn(usize) -> bool) -> Result<f64> {
    let (mut s1, mut n1, mut s0, mut n0) = (Vec::new(), 0usize, Vec::new(), 0usize);
    for (i, &yi) in y.iter().enumerate() {
        if !include(i) {
            continue;
        }
        if z.get(i) {
            s1.push(yi);
            n1 += 1;
        } else {
            s0.push(yi);
            n0 += 1;
        }
    }
    if n1 == 0 || n0 == 0 {
        return Err(Error::UndefinedEstimate(format!(
            "difference in means needs both groups, got {n1} treated and {n0} control"
        )));
    }
    Ok(compensated_sum(s1) / n1 as f64 - compensated_sum(s0) / n0 as f64)
}

/// Treated mean minus control mean.
pub fn dm_tte(y: &[f64], z: &TreatmentVector) -> Result<f64> {
    check_len("treatment vector", y.len(), z.len())?;
    group_difference(y, z, |_| true)
}

/// Difference in means restricted to units whose non-self neighbors share
/// their assignment in at least a fraction `lambda`.
///
/// Units without non-self neighbors are always included.
pub fn dm_thresh_tte(g: &CausalGraph, y: &[f64], z: &TreatmentVector, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    check_len("outcome vector", g.n(), y.len())?;
    check_len("treatment vector", g.n(), z.len())?;
    group_difference(y, z, |i| {
        let others = g.neighbors(i).iter().filter(|&&j| j != i);
        let (mut total, mut same) = (0usize, 0usize);
        for &j in others {
            total += 1;
            if z.get(j) == z.get(i) {
                same += 1;
            }
        }
        total == 0 || same as f64 >= lambda * total as f64
    })
}

/// Neighborhood covariate of the regression estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Covariate {
    /// Number of treated non-self neighbors.
    Count,
    /// Fraction of non-self neighbors that are treated; 0 without any.
    Proportion,
}

/// Fitted coefficients of
/// `Y ~ rho + sum_k gamma_k X^k + z (rho~ + sum_k gamma~_k X^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    /// `[rho, gamma_1..gamma_beta, rho~, gamma~_1..gamma~_{beta-1}]`.
    pub coefficients: Vec<f64>,
    pub beta: usize,
    pub covariate: Covariate,
    /// Ratio of largest to smallest Gram eigenvalue.
    pub condition: f64,
    pub ridge: f64,
}

impl RegressionFit {
    /// The fitted response surface at treatment `z` and covariate `x`.
    pub fn predict(&self, z: f64, x: f64) -> f64 {
        let row = feature_row(self.beta, z, x);
        row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum()
    }
}

fn feature_row(beta: usize, z: f64, x: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(2 * beta + 1);
    let mut pw = 1.0;
    for _ in 0..=beta {
        row.push(pw);
        pw *= x;
    }
    let mut pw = 1.0;
    for _ in 0..beta {
        row.push(z * pw);
        pw *= x;
    }
    row
}

fn covariate_value(g: &CausalGraph, z: &TreatmentVector, i: usize, kind: Covariate) -> f64 {
    let (mut total, mut treated) = (0usize, 0usize);
    for &j in g.neighbors(i).iter().filter(|&&j| j != i) {
        total += 1;
        treated += z.get(j) as usize;
    }
    match kind {
        Covariate::Count => treated as f64,
        Covariate::Proportion if total == 0 => 0.0,
        Covariate::Proportion => treated as f64 / total as f64,
    }
}

/// Least-squares fit by normal equations, with a tiny ridge when the Gram
/// matrix is numerically singular.
pub fn ls_fit(
    g: &CausalGraph,
    y: &[f64],
    z: &TreatmentVector,
    beta: usize,
    covariate: Covariate,
) -> Result<RegressionFit> {
    if beta == 0 {
        return Err(Error::InvalidParameter("beta must be at least 1".into()));
    }
    check_len("outcome vector", g.n(), y.len())?;
    check_len("treatment vector", g.n(), z.len())?;
    let n = g.n();
    let k = 2 * beta + 1;
    if n < k {
        return Err(Error::Underdetermined { rows: n, cols: k });
    }
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    for i in 0..n {
        let row = feature_row(beta, z.value(i), covariate_value(g, z, i, covariate));
        for a in 0..k {
            rhs[a] += row[a] * y[i];
            for b in a..k {
                gram[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    let eig = gram.clone().symmetric_eigen().eigenvalues;
    let max = eig.iter().copied().fold(0.0, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    let mut ridge = 0.0;
    if !(min > 1e-13 * max) {
        ridge = 1e-10 * gram.trace() / n as f64;
        for a in 0..k {
            gram[(a, a)] += ridge;
        }
    }
    let solution = gram
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| gram.lu().solve(&rhs))
        .ok_or_else(|| Error::Consistency("regression normal equations are not solvable".into()))?;
    Ok(RegressionFit {
        coefficients: solution.iter().copied().collect(),
        beta,
        covariate,
        condition,
        ridge,
    })
}

/// Plug-in total effect of a regression fit.
///
/// The count model averages `g(1, |N_i \ {i}|) - g(0, 0)`; the proportion
/// model uses `g(1, 1) - g(0, 0)`.
pub fn ls_tte(fit: &RegressionFit, g: &CausalGraph) -> f64 {
    let base = fit.predict(0.0, 0.0);
    match fit.covariate {
        Covariate::Proportion => fit.predict(1.0, 1.0) - base,
        Covariate::Count => {
            compensated_sum((0..g.n()).map(|i| {
                let others = g.neighbors(i).iter().filter(|&&j| j != i).count();
                fit.predict(1.0, others as f64) - base
            })) / g.n() as f64
        }
    }
}

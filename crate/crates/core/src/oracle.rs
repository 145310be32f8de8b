//! Exact moments by enumerating every treatment vector.
//!
//! The `2^n` assignments are split into blocks by their high bits. Within a
//! block the low bits follow a Gray code, so consecutive assignments differ
//! in one unit. `P(z)` is the product of two lookup tables over the low and
//! high halves, which avoids the drift of repeated incremental updates.
//! Block sums are reduced in block order, so results do not depend on the
//! number of worker threads.

use rayon::prelude::*;

use crate::design::{Design, TreatmentVector};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Largest population the enumeration accepts.
pub const ORACLE_MAX_N: usize = 20;

/// Exact mean and variance of an estimator over the design.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub mean: f64,
    pub variance: f64,
    pub support: u64,
    /// Total probability mass visited; 1 up to rounding.
    pub mass: f64,
}

fn check_size(design: &Design, n: usize) -> Result<()> {
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge {
            n,
            cap: ORACLE_MAX_N,
        });
    }
    design.check_units(n)
}

fn probability_table(design: &Design, offset: usize, bits: usize) -> Vec<f64> {
    let mut table = vec![1.0; 1 << bits];
    for b in 0..bits {
        let p = design.p(offset + b);
        let half = 1 << b;
        for m in (0..half).rev() {
            let base = table[m];
            table[m] = base * (1.0 - p);
            table[m | half] = base * p;
        }
    }
    table
}

/// `sum_z P(z) f(z)` for each of the `K` components of `f`, followed by the
/// total mass.
pub fn exact_weighted_sums<const K: usize, F>(design: &Design, n: usize, f: F) -> Result<([f64; K], f64)>
where
    F: Fn(&TreatmentVector) -> [f64; K] + Sync,
{
    check_size(design, n)?;
    let high_bits = n / 2;
    let low_bits = n - high_bits;
    let low = probability_table(design, 0, low_bits);
    let high = probability_table(design, low_bits, high_bits);

    let blocks: Vec<([CompensatedSum; K], CompensatedSum)> = (0..1usize << high_bits)
        .into_par_iter()
        .map(|h| {
            let mut z = TreatmentVector::from_mask(n, (h << low_bits) as u64);
            let mut sums: [CompensatedSum; K] = std::array::from_fn(|_| CompensatedSum::default());
            let mut mass = CompensatedSum::default();
            let mut gray = 0usize;
            for step in 0..1usize << low_bits {
                if step > 0 {
                    let bit = step.trailing_zeros() as usize;
                    gray ^= 1 << bit;
                    z.flip(bit);
                }
                let prob = low[gray] * high[h];
                let values = f(&z);
                for (s, v) in sums.iter_mut().zip(values) {
                    s.add(prob * v);
                }
                mass.add(prob);
            }
            (sums, mass)
        })
        .collect();

    let mut totals: [CompensatedSum; K] = std::array::from_fn(|_| CompensatedSum::default());
    let mut mass = CompensatedSum::default();
    for (sums, m) in &blocks {
        for (t, s) in totals.iter_mut().zip(sums) {
            t.merge(*s);
        }
        mass.merge(*m);
    }
    Ok((totals.map(|t| t.value()), mass.value()))
}

/// Mean and variance of `estimator(z)` with `z` drawn from `design`.
pub fn exact_moments<F>(estimator: F, design: &Design, n: usize) -> Result<ExactMoments>
where
    F: Fn(&TreatmentVector) -> f64 + Sync,
{
    check_size(design, n)?;
    // shifting by one realized value limits cancellation in E[X^2] - E[X]^2
    let shift = estimator(&TreatmentVector::all(n, false));
    let ([m1, m2], mass) = exact_weighted_sums(design, n, |z| {
        let v = estimator(z) - shift;
        [v, v * v]
    })?;
    let centered = m1 / mass;
    Ok(ExactMoments {
        mean: shift + centered,
        variance: m2 / mass - centered * centered,
        support: 1u64 << n,
        mass,
    })
}

/// `Cov(f(z), h(z))` under the design.
pub fn exact_covariance<F, H>(f: F, h: H, design: &Design, n: usize) -> Result<f64>
where
    F: Fn(&TreatmentVector) -> f64 + Sync,
    H: Fn(&TreatmentVector) -> f64 + Sync,
{
    let ([ef, eh, efh], mass) = exact_weighted_sums(design, n, |z| {
        let (a, b) = (f(z), h(z));
        [a, b, a * b]
    })?;
    Ok(efh / mass - (ef / mass) * (eh / mass))
}

/// `prod_{j in centered} (z_j - p_j) / (p_j (1 - p_j)) * prod_{j in treated} z_j`.
pub fn centered_product(centered: &[usize], treated: &[usize], z: &TreatmentVector, design: &Design) -> f64 {
    let a: f64 = centered
        .iter()
        .map(|&j| {
            let p = design.p(j);
            (z.value(j) - p) / (p * (1.0 - p))
        })
        .product();
    let b: f64 = treated.iter().map(|&j| z.value(j)).product();
    a * b
}

/// Exhaustive `E[centered_product(centered, treated, z)]`.
pub fn exact_product_expectation(centered: &[usize], treated: &[usize], design: &Design) -> Result<f64> {
    let n = design.n();
    if let Some(&j) = centered.iter().chain(treated).find(|&&j| j >= n) {
        return Err(Error::NodeOutOfRange { index: j, n });
    }
    let ([e], mass) = exact_weighted_sums(design, n, |z| [centered_product(centered, treated, z, design)])?;
    Ok(e / mass)
}

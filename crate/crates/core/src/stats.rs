//! Distribution checks for replicated estimates.

use statrs::distribution::{ContinuousCDF, Normal};

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `samples` and the standard normal.
pub fn ks_statistic_normal(samples: &[f64]) -> f64 {
    let mut xs: Vec<f64> = samples.iter().copied().filter(|x| !x.is_nan()).collect();
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let m = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(k, &x)| {
            let cdf = normal.cdf(x);
            (cdf - k as f64 / m).max((k + 1) as f64 / m - cdf)
        })
        .fold(0.0, f64::max)
}

/// `(x - center) / scale` for each sample.
pub fn studentize(samples: &[f64], center: f64, scale: f64) -> Vec<f64> {
    samples.iter().map(|x| (x - center) / scale).collect()
}

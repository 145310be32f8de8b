//! Small numerical helpers shared by the estimators.

use statrs::function::gamma::ln_gamma;

/// Neumaier (improved Kahan) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Binomial coefficient C(n, k). Exact integer arithmetic while `n <= 62`,
/// log-gamma beyond that.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 62 {
        let k = k.min(n - k) as u64;
        let n = n as u64;
        let mut acc: u128 = 1;
        for j in 1..=k {
            // C(n-k+j, j) stays integral; u128 holds the intermediate product
            acc = acc * (n - k + j) as u128 / j as u128;
        }
        acc as f64
    } else {
        let (n, k) = (n as f64, k as f64);
        (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0))
            .exp()
            .round()
    }
}

/// Mean and population variance (divide by the count).
pub fn mean_and_population_variance(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / m;
    let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / m;
    (mean, var)
}

/// Unbiased sample variance (divide by count minus one); zero for a single value.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let (mean, _) = mean_and_population_variance(xs);
    compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (xs.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_binomial(n: u64, k: u64) -> u128 {
        if k > n {
            return 0;
        }
        let mut acc: u128 = 1;
        for j in 0..k {
            acc = acc * (n - j) as u128 / (j + 1) as u128;
        }
        acc
    }

    #[test]
    fn binomial_matches_naive_up_to_62() {
        for n in 0..=62u64 {
            for k in 0..=n {
                assert_eq!(binomial(n as usize, k as usize), naive_binomial(n, k) as f64);
            }
        }
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn binomial_log_gamma_branch() {
        let exact = naive_binomial(70, 3) as f64;
        assert!((binomial(70, 3) - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn variance_helpers() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let (m, v) = mean_and_population_variance(&xs);
        assert_eq!(m, 2.5);
        assert!((v - 1.25).abs() < 1e-15);
        assert!((sample_variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(sample_variance(&[7.0]), 0.0);
    }
}

//! Independent Bernoulli randomized designs and treatment vectors.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::rng::rng_from_seed;

/// Per-unit treatment probabilities `p_i`, all inside `[p, 1 - p]` for the
/// floor `p = p_floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    probs: Vec<f64>,
    p_floor: f64,
}

impl Design {
    /// Validates that every probability lies strictly inside `(0, 1)`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("design must cover at least one unit".into()));
        }
        let mut p_floor: f64 = 0.5;
        for &p in &probs {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidProbability {
                    what: "treatment probability",
                    value: p,
                });
            }
            p_floor = p_floor.min(p.min(1.0 - p));
        }
        Ok(Design { probs, p_floor })
    }

    pub fn uniform(n: usize, p: f64) -> Result<Self> {
        uniform_design(n, p)
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn p(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn p_floor(&self) -> f64 {
        self.p_floor
    }

    /// The common probability when the design is uniform.
    pub fn uniform_probability(&self) -> Option<f64> {
        let first = self.probs[0];
        self.probs.iter().all(|&p| p == first).then_some(first)
    }

    pub fn any_above_half(&self) -> bool {
        self.probs.iter().any(|&p| p > 0.5)
    }

    /// Independent draws `z_i ~ Bernoulli(p_i)`, deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> TreatmentVector {
        let mut rng = rng_from_seed(seed);
        self.sample_with(&mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> TreatmentVector {
        TreatmentVector(self.probs.iter().map(|&p| rng.random::<f64>() < p).collect())
    }

    /// `P(z_S = x_S)` for the realized values `z` on the units `units`.
    pub fn exposure_probability(&self, units: &[usize], z: &TreatmentVector) -> f64 {
        units
            .iter()
            .map(|&k| if z.get(k) { self.probs[k] } else { 1.0 - self.probs[k] })
            .product()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = DesignFile {
            probs: self.probs.clone(),
        };
        std::fs::write(path, serde_json::to_string(&file)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file: DesignFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Design::new(file.probs)
    }

    pub(crate) fn check_units(&self, n: usize) -> Result<()> {
        check_len("design probabilities", n, self.n())
    }
}

/// On-disk design: `{ "probs": [float, ...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignFile {
    pub probs: Vec<f64>,
}

/// Uniform design with `p_i = p`; `p_floor = min(p, 1 - p)`.
pub fn uniform_design(n: usize, p: f64) -> Result<Design> {
    Design::new(vec![p; n])
}

/// Binary treatment assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreatmentVector(Vec<bool>);

impl TreatmentVector {
    pub fn new(z: Vec<bool>) -> Self {
        TreatmentVector(z)
    }

    pub fn all(n: usize, value: bool) -> Self {
        TreatmentVector(vec![value; n])
    }

    /// From the low `n` bits of `mask` (bit `i` is unit `i`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        TreatmentVector((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn from_01(values: &[u8]) -> Result<Self> {
        values
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "treatment entries must be 0 or 1, got {other}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(TreatmentVector)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        if self.0[i] {
            1.0
        } else {
            0.0
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn treated_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Single-line CSV of 0/1 values.
    pub fn to_csv_line(&self) -> String {
        let mut s = String::with_capacity(2 * self.len());
        for (k, &b) in self.0.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            s.push(if b { '1' } else { '0' });
        }
        s
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let values = line
            .trim()
            .split(',')
            .map(|tok| {
                tok.trim().parse::<u8>().map_err(|e| {
                    Error::InvalidParameter(format!("bad treatment entry {tok:?}: {e}"))
                })
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_01(&values)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_line() + "\n")?;
        Ok(())
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::from_csv_line(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_design_floors() {
        let d = uniform_design(3, 0.2).unwrap();
        assert_eq!(d.probs(), &[0.2, 0.2, 0.2]);
        assert_eq!(d.p_floor(), 0.2);
        assert_eq!(uniform_design(3, 0.5).unwrap().p_floor(), 0.5);
        assert!((uniform_design(3, 0.7).unwrap().p_floor() - 0.3).abs() < 1e-15);
        assert_eq!(d.uniform_probability(), Some(0.2));
    }

    #[test]
    fn degenerate_probabilities_rejected() {
        assert!(uniform_design(3, 0.0).is_err());
        assert!(uniform_design(3, 1.0).is_err());
        assert!(Design::new(vec![0.3, f64::NAN]).is_err());
        assert!(Design::new(vec![]).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = uniform_design(50, 0.3).unwrap();
        assert_eq!(d.sample(17), d.sample(17));
        assert_ne!(d.sample(17), d.sample(18));
    }

    #[test]
    fn marginal_calibration() {
        let n = 100_000;
        let d = uniform_design(n, 0.2).unwrap();
        let mean = d.sample(4).treated_count() as f64 / n as f64;
        assert!((0.19..=0.21).contains(&mean), "mean {mean}");
    }

    #[test]
    fn pairwise_independence() {
        let n = 20;
        let d = Design::new((0..n).map(|i| 0.1 + 0.04 * i as f64).collect()).unwrap();
        let draws: Vec<TreatmentVector> = (0..10_000).map(|s| d.sample(s)).collect();
        for (a, b) in [(0, 1), (3, 17), (5, 6), (12, 19)] {
            let m = draws.len() as f64;
            let ma = draws.iter().map(|z| z.value(a)).sum::<f64>() / m;
            let mb = draws.iter().map(|z| z.value(b)).sum::<f64>() / m;
            let cov = draws.iter().map(|z| (z.value(a) - ma) * (z.value(b) - mb)).sum::<f64>() / m;
            let corr = cov / (ma * (1.0 - ma) * mb * (1.0 - mb)).sqrt();
            assert!(corr.abs() < 0.05, "corr({a},{b}) = {corr}");
        }
    }

    #[test]
    fn csv_and_json_files() {
        let z = TreatmentVector::new(vec![true, false, true]);
        assert_eq!(z.to_csv_line(), "1,0,1");
        assert_eq!(TreatmentVector::from_csv_line("1, 0,1\n").unwrap(), z);
        assert!(TreatmentVector::from_csv_line("1,2").is_err());

        let dir = tempfile::tempdir().unwrap();
        let d = Design::new(vec![0.1, 0.6, 0.3]).unwrap();
        let path = dir.path().join("design.json");
        d.save_json(&path).unwrap();
        assert_eq!(Design::load_json(&path).unwrap(), d);
        let zpath = dir.path().join("z.csv");
        z.save_csv(&zpath).unwrap();
        assert_eq!(TreatmentVector::load_csv(&zpath).unwrap(), z);
    }
}

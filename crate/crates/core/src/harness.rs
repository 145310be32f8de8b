//! Replication engine for simulation studies.
//!
//! For each sweep point the harness samples `graphs` Erdos-Renyi graphs,
//! generates one experiment model per graph, and draws `reps` treatment
//! vectors per graph. Every draw comes from a seed derived from
//! `(base seed, domain, sweep point, graph, replication)`, and results are
//! aggregated in `(graph, replication)` order, so output is identical for
//! any number of worker threads.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{dm_thresh_tte, dm_tte, ht_tte, ls_fit, ls_tte, Covariate};
use crate::design::{uniform_design, Design};
use crate::error::{Error, Result};
use crate::graph::{gen_erdos_renyi, CausalGraph};
use crate::numeric::{mean_and_population_variance, sample_variance, CompensatedSum};
use crate::outcomes::{gen_experiment_model, OutcomesModel};
use crate::rng::{replication_seed, Domain};
use crate::snipe::{snipe_weights, UniformWeightTable};
use crate::variance::{confidence_interval, worst_case_bound, warn_if_outside_clt_range, ConservativePlan};

/// Parameter varied across sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    N,
    P,
    R,
    Beta,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::N => "n",
            SweepVar::P => "p",
            SweepVar::R => "r",
            SweepVar::Beta => "beta",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "n" => Ok(SweepVar::N),
            "p" => Ok(SweepVar::P),
            "r" => Ok(SweepVar::R),
            "beta" => Ok(SweepVar::Beta),
            other => Err(Error::Config(format!("unknown sweep variable {other:?}"))),
        }
    }
}

/// Estimators the harness can replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Snipe,
    Ht,
    Dm,
    DmThresh,
    LsNum,
    LsProp,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 6] = [
        EstimatorKind::Snipe,
        EstimatorKind::Ht,
        EstimatorKind::Dm,
        EstimatorKind::DmThresh,
        EstimatorKind::LsNum,
        EstimatorKind::LsProp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Snipe => "snipe",
            EstimatorKind::Ht => "ht",
            EstimatorKind::Dm => "dm",
            EstimatorKind::DmThresh => "dm-thresh",
            EstimatorKind::LsNum => "ls-num",
            EstimatorKind::LsProp => "ls-prop",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown estimator {s:?}")))
    }
}

/// Experiment settings. Fixed values apply to every sweep point except for
/// the swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sweep: SweepVar,
    pub sweep_values: Vec<f64>,
    pub n: usize,
    pub p: f64,
    pub r: f64,
    pub beta: usize,
    /// Expected number of non-self in-neighbors; edge probability is this over `n`.
    pub mean_degree: f64,
    pub graphs: usize,
    pub reps: usize,
    pub estimators: Vec<EstimatorKind>,
    pub lambda: f64,
    pub alpha: f64,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sweep: SweepVar::N,
            sweep_values: vec![1000.0, 2500.0, 5000.0, 7500.0, 10000.0],
            n: 5000,
            p: 0.2,
            r: 2.0,
            beta: 1,
            mean_degree: 10.0,
            graphs: 10,
            reps: 500,
            estimators: EstimatorKind::ALL.to_vec(),
            lambda: 0.75,
            alpha: 0.05,
            seed: None,
            output: None,
        }
    }
}

/// One sweep point's fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub n: usize,
    pub p: f64,
    pub r: f64,
    pub beta: usize,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("bad value {value:?} for {key}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Defaults for variance studies (`reps = 100`).
    pub fn variance_defaults() -> Self {
        ExperimentConfig {
            reps: 100,
            ..Self::default()
        }
    }

    /// Sets one `key = value` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "sweep" => self.sweep = value.parse()?,
            "values" | "sweep_values" => self.sweep_values = parse_list(key, value)?,
            "n" => self.n = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "r" => self.r = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "mean_degree" => self.mean_degree = parse(key, value)?,
            "graphs" | "G" => self.graphs = parse(key, value)?,
            "reps" | "N" => self.reps = parse(key, value)?,
            "estimators" => {
                self.estimators = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "lambda" => self.lambda = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "seed" => self.seed = Some(parse(key, value)?),
            "output" => self.output = Some(PathBuf::from(value.trim())),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_text(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<u64> {
        let seed = self
            .seed
            .ok_or_else(|| Error::Config("a base seed is required".into()))?;
        if self.graphs == 0 || self.reps == 0 {
            return Err(Error::Config("graphs and reps must be at least 1".into()));
        }
        if self.sweep_values.is_empty() {
            return Err(Error::Config("at least one sweep value is required".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("at least one estimator is required".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        for k in 0..self.sweep_values.len() {
            let pt = self.point(k)?;
            if pt.n == 0 || pt.beta == 0 {
                return Err(Error::Config("n and beta must be positive".into()));
            }
            if !(pt.p > 0.0 && pt.p < 1.0) {
                return Err(Error::Config(format!("p must lie in (0, 1), got {}", pt.p)));
            }
            if !(pt.r >= 0.0) {
                return Err(Error::Config(format!("r must be nonnegative, got {}", pt.r)));
            }
            if !(self.mean_degree >= 0.0 && self.mean_degree <= pt.n as f64) {
                return Err(Error::Config("mean degree must lie in [0, n]".into()));
            }
        }
        Ok(seed)
    }

    /// Parameters at sweep point `k`.
    pub fn point(&self, k: usize) -> Result<Point> {
        let v = *self
            .sweep_values
            .get(k)
            .ok_or_else(|| Error::Config(format!("no sweep point {k}")))?;
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("sweep value {v} must be a nonnegative integer")))
            }
        };
        let mut pt = Point {
            n: self.n,
            p: self.p,
            r: self.r,
            beta: self.beta,
        };
        match self.sweep {
            SweepVar::N => pt.n = as_count(v)?,
            SweepVar::P => pt.p = v,
            SweepVar::R => pt.r = v,
            SweepVar::Beta => pt.beta = as_count(v)?,
        }
        Ok(pt)
    }
}

/// Graph, model and exact total effect for one sampled instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: CausalGraph,
    pub model: OutcomesModel,
    pub tte: f64,
}

/// Samples the graph and model for `(sweep point, graph index)`.
pub fn sample_instance(cfg: &ExperimentConfig, seed: u64, sweep: usize, graph: usize) -> Result<Instance> {
    let pt = cfg.point(sweep)?;
    let p_edge = (cfg.mean_degree / pt.n as f64).min(1.0);
    let g = gen_erdos_renyi(
        pt.n,
        p_edge,
        true,
        replication_seed(seed, Domain::Graph, sweep as u64, graph as u64, 0),
    )?;
    let model = gen_experiment_model(
        &g,
        pt.beta,
        pt.r,
        replication_seed(seed, Domain::Model, sweep as u64, graph as u64, 0),
    )?;
    let tte = model.ground_truth()?.tte;
    Ok(Instance { graph: g, model, tte })
}

/// Aggregate relative error of one estimator at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStats {
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub estimator: EstimatorKind,
    /// Mean of `(estimate - TTE) / |TTE|`.
    pub rel_bias: f64,
    /// Population standard deviation of the normalized errors.
    pub rel_std: f64,
    /// Mean squared normalized error.
    pub rel_mse: f64,
    pub n_used: usize,
    pub n_excluded: usize,
    pub mean_estimate: f64,
    pub mean_tte: f64,
}

impl ReplicationStats {
    pub const CSV_HEADER: &'static str = "sweep_var,sweep_value,estimator,rel_bias,rel_std,rel_mse,n_excluded";

    /// Standard error of the relative bias, `rel_std / sqrt(n_used)`.
    pub fn standard_error(&self) -> f64 {
        self.rel_std / (self.n_used as f64).sqrt()
    }

    pub fn to_csv_row(&self) -> String {
        let na = |v: f64| if v.is_nan() { "NA".to_string() } else { v.to_string() };
        format!(
            "{},{},{},{},{},{},{}",
            self.sweep_var,
            self.sweep_value,
            self.estimator,
            na(self.rel_bias),
            na(self.rel_std),
            na(self.rel_mse),
            self.n_excluded
        )
    }
}

/// Estimates of the configured estimators for one treatment draw.
fn replicate(
    inst: &Instance,
    table: &UniformWeightTable,
    design: &Design,
    estimators: &[EstimatorKind],
    beta: usize,
    lambda: f64,
    seed: u64,
) -> Result<Vec<Option<f64>>> {
    let z = design.sample(seed);
    let y = inst.model.evaluate(&z)?;
    let g = &inst.graph;
    estimators
        .iter()
        .map(|kind| {
            let est = match kind {
                EstimatorKind::Snipe => table.estimate(g, &y, &z),
                EstimatorKind::Ht => ht_tte(g, &y, &z, design),
                EstimatorKind::Dm => dm_tte(&y, &z),
                EstimatorKind::DmThresh => dm_thresh_tte(g, &y, &z, lambda),
                EstimatorKind::LsNum => ls_fit(g, &y, &z, beta, Covariate::Count).map(|f| ls_tte(&f, g)),
                EstimatorKind::LsProp => {
                    ls_fit(g, &y, &z, beta, Covariate::Proportion).map(|f| ls_tte(&f, g))
                }
            };
            match est {
                Ok(v) => Ok(Some(v)),
                Err(e) if e.is_undefined_estimate() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Runs every sweep point; one row per sweep point per estimator.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReplicationStats>> {
    let seed = cfg.validate()?;
    let mut rows = Vec::new();
    for sweep in 0..cfg.sweep_values.len() {
        let pt = cfg.point(sweep)?;
        let design = uniform_design(pt.n, pt.p)?;
        let instances = (0..cfg.graphs)
            .into_par_iter()
            .map(|gi| sample_instance(cfg, seed, sweep, gi))
            .collect::<Result<Vec<_>>>()?;
        let tables = instances
            .iter()
            .map(|inst| UniformWeightTable::new(pt.p, pt.beta, inst.graph.d_in()))
            .collect::<Result<Vec<_>>>()?;

        let jobs: Vec<(usize, usize)> = (0..cfg.graphs)
            .flat_map(|gi| (0..cfg.reps).map(move |rep| (gi, rep)))
            .collect();
        let results = jobs
            .par_iter()
            .map(|&(gi, rep)| {
                let s = replication_seed(seed, Domain::Treatment, sweep as u64, gi as u64, rep as u64);
                replicate(&instances[gi], &tables[gi], &design, &cfg.estimators, pt.beta, cfg.lambda, s)
            })
            .collect::<Result<Vec<_>>>()?;

        for (e, &kind) in cfg.estimators.iter().enumerate() {
            let mut normalized = Vec::with_capacity(jobs.len());
            let mut estimates = CompensatedSum::default();
            let mut truths = CompensatedSum::default();
            let mut excluded = 0;
            for (&(gi, _), res) in jobs.iter().zip(&results) {
                let tte = instances[gi].tte;
                match res[e] {
                    Some(v) => {
                        normalized.push((v - tte) / tte.abs());
                        estimates.add(v);
                        truths.add(tte);
                    }
                    None => excluded += 1,
                }
            }
            let used = normalized.len();
            let (rel_bias, rel_var) = if used > 0 {
                mean_and_population_variance(&normalized)
            } else {
                (f64::NAN, f64::NAN)
            };
            let rel_mse = if used > 0 {
                normalized.iter().map(|x| x * x).sum::<f64>() / used as f64
            } else {
                f64::NAN
            };
            rows.push(ReplicationStats {
                sweep_var: cfg.sweep,
                sweep_value: cfg.sweep_values[sweep],
                estimator: kind,
                rel_bias,
                rel_std: rel_var.sqrt(),
                rel_mse,
                n_used: used,
                n_excluded: excluded,
                mean_estimate: estimates.value() / used as f64,
                mean_tte: truths.value() / used as f64,
            });
        }
    }
    Ok(rows)
}

pub fn experiment_csv(rows: &[ReplicationStats]) -> String {
    let mut out = String::from(ReplicationStats::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

/// Variance summary of the SNIPE estimator at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRow {
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub beta: usize,
    pub mean_estimate: f64,
    /// Mean over graphs of the sample variance of the estimates on that graph.
    pub empirical_var: f64,
    /// Mean of the single-draw conservative estimates.
    pub conservative_var: f64,
    /// Mean over graphs of the worst-case bound.
    pub bound: f64,
    /// Mean interval endpoints at level `alpha`.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Fraction of draws whose interval contains the true effect.
    pub coverage: f64,
    /// Draws with a negative conservative estimate.
    pub negative_draws: usize,
}

impl VarianceRow {
    pub const CSV_HEADER: &'static str =
        "sweep_var,sweep_value,beta,estimate,empirical_var,conservative_var,bound,ci_low,ci_high,coverage";

    pub fn to_csv_row(&self) -> String {
        let na = |v: f64| if v.is_nan() { "NA".to_string() } else { v.to_string() };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.sweep_var,
            self.sweep_value,
            self.beta,
            self.mean_estimate,
            na(self.empirical_var),
            self.conservative_var,
            self.bound,
            self.ci_low,
            self.ci_high,
            self.coverage
        )
    }
}

/// Per-draw results of a variance study on fixed instances.
#[derive(Debug, Clone)]
pub struct VarianceDraws {
    /// `estimates[g][rep]`.
    pub estimates: Vec<Vec<f64>>,
    pub conservative: Vec<Vec<f64>>,
    pub covered: Vec<Vec<bool>>,
    pub ci: Vec<Vec<(f64, f64)>>,
    pub bounds: Vec<f64>,
}

/// Draws `reps` treatments per instance and records the SNIPE estimate,
/// its conservative variance estimate and the resulting interval.
pub fn variance_draws(
    instances: &[Instance],
    p: f64,
    reps: usize,
    alpha: f64,
    seed: u64,
    sweep: usize,
) -> Result<VarianceDraws> {
    let mut out = VarianceDraws {
        estimates: Vec::new(),
        conservative: Vec::new(),
        covered: Vec::new(),
        ci: Vec::new(),
        bounds: Vec::new(),
    };
    for (gi, inst) in instances.iter().enumerate() {
        let g = &inst.graph;
        let design = uniform_design(g.n(), p)?;
        warn_if_outside_clt_range(&design);
        let plan = ConservativePlan::new(g);
        let beta = inst.model.beta();
        let draws = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let s = replication_seed(seed, Domain::Treatment, sweep as u64, gi as u64, rep as u64);
                let z = design.sample(s);
                let y = inst.model.evaluate(&z)?;
                let w = snipe_weights(g, &z, &design, beta)?;
                let est = w.estimate(&y)?;
                let var = plan.evaluate(g, &y, &z, &design, &w)?;
                let ci = confidence_interval(est, var, alpha)?;
                Ok((est, var, (ci.low, ci.high)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.estimates.push(draws.iter().map(|d| d.0).collect());
        out.conservative.push(draws.iter().map(|d| d.1).collect());
        out.ci.push(draws.iter().map(|d| d.2).collect());
        out.covered
            .push(draws.iter().map(|d| d.2 .0 <= inst.tte && inst.tte <= d.2 .1).collect());
        out.bounds.push(worst_case_bound(g, &inst.model, &design)?);
    }
    Ok(out)
}

/// Summarizes variance draws into one row.
pub fn summarize_variance(draws: &VarianceDraws, sweep_var: SweepVar, sweep_value: f64, beta: usize) -> VarianceRow {
    let mean = |xs: &mut dyn Iterator<Item = f64>| -> f64 {
        let mut acc = CompensatedSum::default();
        let mut count = 0usize;
        for x in xs {
            acc.add(x);
            count += 1;
        }
        acc.value() / count as f64
    };
    let empirical_var = mean(&mut draws.estimates.iter().map(|e| {
        if e.len() > 1 {
            sample_variance(e)
        } else {
            f64::NAN
        }
    }));
    let total: usize = draws.estimates.iter().map(Vec::len).sum();
    let covered = draws.covered.iter().flatten().filter(|&&c| c).count();
    VarianceRow {
        sweep_var,
        sweep_value,
        beta,
        mean_estimate: mean(&mut draws.estimates.iter().flatten().copied()),
        empirical_var,
        conservative_var: mean(&mut draws.conservative.iter().flatten().copied()),
        bound: mean(&mut draws.bounds.iter().copied()),
        ci_low: mean(&mut draws.ci.iter().flatten().map(|c| c.0)),
        ci_high: mean(&mut draws.ci.iter().flatten().map(|c| c.1)),
        coverage: covered as f64 / total as f64,
        negative_draws: draws.conservative.iter().flatten().filter(|&&v| v < 0.0).count(),
    }
}

/// Variance table: one row per sweep point.
pub fn run_variance_report(cfg: &ExperimentConfig) -> Result<Vec<VarianceRow>> {
    let seed = cfg.validate()?;
    let mut rows = Vec::new();
    for sweep in 0..cfg.sweep_values.len() {
        let pt = cfg.point(sweep)?;
        let instances = (0..cfg.graphs)
            .into_par_iter()
            .map(|gi| sample_instance(cfg, seed, sweep, gi))
            .collect::<Result<Vec<_>>>()?;
        let draws = variance_draws(&instances, pt.p, cfg.reps, cfg.alpha, seed, sweep)?;
        let row = summarize_variance(&draws, cfg.sweep, cfg.sweep_values[sweep], pt.beta);
        if row.negative_draws > 0 {
            log::warn!(
                "{} draws had negative conservative variance; intervals used 0",
                row.negative_draws
            );
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn variance_csv(rows: &[VarianceRow]) -> String {
    let mut out = String::from(VarianceRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use snipe::baselines::{dm_thresh_tte, dm_tte, ht_tte, ls_fit, ls_tte, Covariate};
use snipe::harness::{experiment_csv, run_experiment, run_variance_report, variance_csv, ExperimentConfig};
use snipe::oracle::exact_moments;
use snipe::snipe::{snipe_ate, snipe_cate, snipe_te_alpha, snipe_tte, snipe_tte_uniform};
use snipe::variance::VarianceReport;
use snipe::{gen_erdos_renyi, gen_experiment_model, CausalGraph, Design, Error, OutcomesModel, TreatmentVector};

#[derive(Parser)]
#[command(name = "snipe", version, about = "Network treatment effect estimation under low-order interference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a directed Erdos-Renyi graph.
    GenGraph {
        #[arg(long)]
        n: usize,
        /// Edge probability; defaults to mean_degree / n.
        #[arg(long)]
        p_edge: Option<f64>,
        #[arg(long, default_value_t = 10.0)]
        mean_degree: f64,
        #[arg(long)]
        no_self_loops: bool,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the simulation outcomes model on a graph.
    GenModel {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        beta: usize,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a treatment vector from a Bernoulli design.
    Sample {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one estimator on an observed draw.
    Estimate(EstimateArgs),
    /// Replicate estimators along a sweep and write bias / MSE rows.
    Experiment(HarnessArgs),
    /// Empirical variance, conservative estimate and bound along a sweep.
    VarianceReport(HarnessArgs),
    /// Check estimators against exhaustive enumeration on small instances.
    Verify {
        #[arg(long, default_value_t = 20)]
        instances: u64,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct DesignArgs {
    /// Design file with per-unit probabilities.
    #[arg(long, conflicts_with_all = ["p", "n"])]
    design: Option<PathBuf>,
    /// Uniform treatment probability (with --n).
    #[arg(long, requires = "n")]
    p: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
}

impl DesignArgs {
    fn load(&self) -> snipe::Result<Design> {
        match (&self.design, self.p, self.n) {
            (Some(path), _, _) => Design::load_json(path),
            (None, Some(p), Some(n)) => Design::uniform(n, p),
            _ => Err(Error::Config("give --design, or --p with --n".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Snipe,
    SnipeUniform,
    Ht,
    Dm,
    DmThresh,
    LsNum,
    LsProp,
    SnipeAte,
    SnipeCate,
    SnipeTe,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    estimator: EstimatorArg,
    #[arg(long)]
    graph: PathBuf,
    /// Treatment vector as one line of 0/1 values.
    #[arg(long)]
    z: PathBuf,
    /// Observed outcomes as one line of comma-separated values.
    #[arg(long, conflicts_with = "model")]
    outcomes: Option<PathBuf>,
    /// Outcomes model; observed outcomes are evaluated at `z`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    design: DesignArgs,
    /// Polynomial degree; defaults to the model's degree, else 1.
    #[arg(long)]
    beta: Option<usize>,
    /// Subset size targeted by snipe-te.
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long, default_value_t = 0.75)]
    lambda: f64,
    /// Unit ids for snipe-cate, separated by commas or whitespace.
    #[arg(long)]
    demographic_file: Option<PathBuf>,
    /// Also print a variance report row (snipe only; needs --model).
    #[arg(long)]
    report: bool,
    /// Level of the reported interval.
    #[arg(long, default_value_t = 0.05)]
    ci_level: f64,
}

#[derive(Args)]
struct HarnessArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    graphs: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    /// Comma-separated estimator names.
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    mean_degree: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Extra `key=value` overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl HarnessArgs {
    fn config(&self, mut cfg: ExperimentConfig) -> snipe::Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("sweep", &self.sweep),
            ("values", &self.values),
            ("n", &self.n),
            ("p", &self.p),
            ("r", &self.r),
            ("beta", &self.beta),
            ("graphs", &self.graphs),
            ("reps", &self.reps),
            ("estimators", &self.estimators),
            ("lambda", &self.lambda),
            ("alpha", &self.alpha),
            ("mean_degree", &self.mean_degree),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {kv:?} is not key=value")))?;
            cfg.set(k, v)?;
        }
        cfg.seed = self.seed;
        if cfg.seed.is_none() {
            return Err(Error::Config("--seed is required".into()));
        }
        if let Some(out) = &self.output {
            cfg.output = Some(out.clone());
        }
        Ok(cfg)
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> snipe::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read_outcomes(path: &Path) -> snipe::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.trim()
        .split(',')
        .map(|t| {
            t.trim().parse().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: format!("bad outcome {t:?}: {e}"),
            })
        })
        .collect()
}

fn read_units(path: &Path) -> snipe::Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: format!("bad unit id {t:?}: {e}"),
            })
        })
        .collect()
}

fn estimate(args: &EstimateArgs) -> snipe::Result<()> {
    let g = CausalGraph::load_json(&args.graph)?;
    let z = TreatmentVector::load_csv(&args.z)?;
    // dm, dm-thresh and the regressions never look at the design
    let needs_design = !matches!(
        args.estimator,
        EstimatorArg::Dm | EstimatorArg::DmThresh | EstimatorArg::LsNum | EstimatorArg::LsProp
    );
    let design = if needs_design || args.report {
        args.design.load()?
    } else {
        Design::uniform(g.n(), 0.5)?
    };
    let model = args
        .model
        .as_ref()
        .map(|p| OutcomesModel::load_json(p, &g))
        .transpose()?;
    let y = match (&args.outcomes, &model) {
        (Some(path), _) => read_outcomes(path)?,
        (None, Some(m)) => m.evaluate(&z)?,
        (None, None) => return Err(Error::Config("give --outcomes or --model".into())),
    };
    let beta = args.beta.or(model.as_ref().map(|m| m.beta())).unwrap_or(1);
    let value = match args.estimator {
        EstimatorArg::Snipe => snipe_tte(&g, &y, &z, &design, beta)?,
        EstimatorArg::SnipeUniform => {
            let p = design
                .uniform_probability()
                .ok_or_else(|| Error::Config("snipe-uniform needs a uniform design".into()))?;
            snipe_tte_uniform(&g, &y, &z, p, beta)?
        }
        EstimatorArg::Ht => ht_tte(&g, &y, &z, &design)?,
        EstimatorArg::Dm => dm_tte(&y, &z)?,
        EstimatorArg::DmThresh => dm_thresh_tte(&g, &y, &z, args.lambda)?,
        EstimatorArg::LsNum => ls_tte(&ls_fit(&g, &y, &z, beta, Covariate::Count)?, &g),
        EstimatorArg::LsProp => ls_tte(&ls_fit(&g, &y, &z, beta, Covariate::Proportion)?, &g),
        EstimatorArg::SnipeAte => snipe_ate(&g, &y, &z, &design, beta)?,
        EstimatorArg::SnipeCate => {
            let path = args
                .demographic_file
                .as_ref()
                .ok_or_else(|| Error::Config("snipe-cate needs --demographic-file".into()))?;
            snipe_cate(&g, &y, &z, &design, beta, &read_units(path)?)?
        }
        EstimatorArg::SnipeTe => {
            let alpha = args
                .alpha
                .ok_or_else(|| Error::Config("snipe-te needs --alpha".into()))?;
            snipe_te_alpha(&g, &y, &z, &design, beta, alpha)?
        }
    };
    println!("{value}");
    if args.report {
        let model = model.ok_or_else(|| Error::Config("--report needs --model".into()))?;
        let report = VarianceReport::single_draw(&g, &model, &design, &z, args.ci_level)?;
        println!("{}", VarianceReport::CSV_HEADER);
        println!("{}", report.to_csv_row());
    }
    Ok(())
}

/// Exhaustive unbiasedness checks on random small instances.
fn verify(instances: u64, max_n: usize, seed: u64) -> snipe::Result<bool> {
    let mut all_ok = true;
    for k in 0..instances {
        let s = snipe::rng::stream_seed(seed, &[k]);
        let n = 3 + (s % (max_n.saturating_sub(2).max(1) as u64)) as usize;
        let beta = 1 + (s >> 8) as usize % 3;
        let g = gen_erdos_renyi(n, 0.3, true, s)?;
        let model = gen_experiment_model(&g, beta, 2.0, s ^ 0x5eed)?;
        let truth = model.ground_truth()?;
        let probs = (0..n).map(|i| 0.15 + 0.7 * ((s >> (i % 40)) & 15) as f64 / 15.0).collect();
        let design = Design::new(probs)?;
        let est = |f: &(dyn Fn(&[f64], &TreatmentVector) -> snipe::Result<f64> + Sync)| {
            exact_moments(
                |z| f(&model.evaluate(z).expect("sizes match"), z).expect("valid inputs"),
                &design,
                n,
            )
        };
        let checks = [
            ("snipe_tte", est(&|y, z| snipe_tte(&g, y, z, &design, beta))?.mean, truth.tte),
            ("ht_tte", est(&|y, z| ht_tte(&g, y, z, &design))?.mean, truth.tte),
            ("snipe_ate", est(&|y, z| snipe_ate(&g, y, z, &design, beta))?.mean, truth.ate),
        ];
        for (name, mean, target) in checks {
            let ok = (mean - target).abs() <= 1e-8 * target.abs().max(1.0);
            all_ok &= ok;
            println!(
                "{} instance={k} n={n} beta={beta} {name}: exact mean {mean:.12} target {target:.12}",
                if ok { "PASS" } else { "FAIL" }
            );
        }
    }
    Ok(all_ok)
}

fn run(cli: Cli) -> snipe::Result<ExitCode> {
    match cli.command {
        Command::GenGraph {
            n,
            p_edge,
            mean_degree,
            no_self_loops,
            seed,
            out,
        } => {
            let p = p_edge.unwrap_or((mean_degree / n as f64).min(1.0));
            gen_erdos_renyi(n, p, !no_self_loops, seed)?.save_json(&out)?;
        }
        Command::GenModel {
            graph,
            beta,
            r,
            seed,
            out,
        } => {
            let g = CausalGraph::load_json(&graph)?;
            gen_experiment_model(&g, beta, r, seed)?.save_json(&out)?;
        }
        Command::Sample { design, seed, out } => design.load()?.sample(seed).save_csv(&out)?,
        Command::Estimate(args) => estimate(&args)?,
        Command::Experiment(args) => {
            let cfg = args.config(ExperimentConfig::default())?;
            let rows = run_experiment(&cfg)?;
            write_or_print(cfg.output.as_deref(), &experiment_csv(&rows))?;
            if rows.iter().all(|r| r.n_used == 0) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::VarianceReport(args) => {
            let cfg = args.config(ExperimentConfig::variance_defaults())?;
            let rows = run_variance_report(&cfg)?;
            write_or_print(cfg.output.as_deref(), &variance_csv(&rows))?;
        }
        Command::Verify {
            instances,
            max_n,
            seed,
        } => {
            if !verify(instances, max_n.min(snipe::oracle::ORACLE_MAX_N), seed)? {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_undefined_estimate() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

//! Unbiased estimation of network treatment effects under polynomial
//! potential outcomes and Bernoulli randomization.
//!
//! The central estimator is [`snipe::snipe_tte`], a weighted mean of observed
//! outcomes whose weights depend only on the causal graph, the design and the
//! realized treatment. Exact enumeration in [`oracle`] checks it, and
//! [`harness`] runs the simulation studies.

pub mod baselines;
pub mod design;
pub mod error;
pub mod graph;
pub mod harness;
pub mod numeric;
pub mod oracle;
pub mod outcomes;
pub mod rng;
pub mod snipe;
pub mod stats;
pub mod subsets;
pub mod variance;

pub use design::{uniform_design, Design, TreatmentVector};
pub use error::{Error, Result};
pub use graph::{dependency_index, gen_erdos_renyi, CausalGraph, DependencyIndex};
pub use outcomes::{expand_power, gen_experiment_model, GroundTruth, OutcomesModel};

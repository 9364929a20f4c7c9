//! Weak resource distillation: sampling from a target distribution that is
//! only accessible through a two-term quasiprobability decomposition, via
//! rejection sampling with empirically estimated acceptance ratios.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod distill;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod quantum;
pub mod quasiprob;
pub mod scenario;

pub use distill::{
    estimate_ratios, ideal_ratios, retry_budget, tvd_error_bound, AcceptanceTable, SignedCounts,
    WeakSampler,
};
pub use distributions::{
    renyi_entropy, tvd, DiscreteDistribution, Outcome, SignedDistribution, StreamRng,
};
pub use error::{Error, Result};
pub use estimation::{estimate_distribution, EmpiricalSignedEstimate};
pub use harness::{run_experiment, ExperimentConfig, Method, TvdCurve};
pub use quasiprob::{QuasiDecomposition, Sign, SignedSample};
pub use scenario::{ScenarioInstance, ScenarioParams};

//! Sample-budget sweeps comparing the two methods, bound curves, and the
//! CSV/JSON writers behind the command-line tool.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_alternative, bound_estimation, bound_rejection, implied_epsilon, BoundInputs,
    BoundReport, RejectionVariant,
};
use crate::distill::{AcceptanceTable, SignedCounts, WeakSampler};
use crate::distributions::{tvd, DiscreteDistribution, StreamRng};
use crate::error::{Error, Result};
use crate::estimation::EmpiricalSignedEstimate;
use crate::quasiprob::QuasiDecomposition;
use crate::scenario::{ScenarioInstance, ScenarioParams};

pub const RAW_HEADER: &str = "scenario,method,n_samples,trial,seed,tvd";
pub const AGGREGATE_HEADER: &str = "scenario,method,n_samples,mean_tvd";
pub const BOUNDS_HEADER: &str = "scenario,method,n_samples,implied_epsilon";

/// Bisection tolerance on `ε` when inverting bounds.
pub const INVERSION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rejection,
    Estimation,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rejection => "rejection",
            Self::Estimation => "estimation",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_trials() -> u32 {
    20
}
fn default_delta() -> f64 {
    0.1
}
fn default_methods() -> Vec<Method> {
    vec![Method::Rejection, Method::Estimation]
}
fn default_grid() -> Vec<u64> {
    vec![0, 10, 100, 1_000, 10_000, 100_000]
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_grid")]
    pub sample_grid: Vec<u64>,
    /// Accuracies at which `bounds` writes a full report.
    #[serde(default)]
    pub epsilon_grid: Option<Vec<f64>>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker cap; all cores when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    pub scenario: ScenarioParams,
}

impl ExperimentConfig {
    /// Benchmark configuration for a scenario.
    pub fn new(scenario: ScenarioParams) -> Self {
        Self {
            seed: 0,
            trials: default_trials(),
            delta: default_delta(),
            methods: default_methods(),
            sample_grid: default_grid(),
            epsilon_grid: None,
            output_dir: default_output_dir(),
            threads: None,
            scenario,
        }
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta = {} must lie in (0, 1)", self.delta));
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        let mut methods = self.methods.clone();
        methods.sort_unstable();
        methods.dedup();
        if methods.len() != self.methods.len() {
            return bad("methods contains duplicates".into());
        }
        if self.sample_grid.is_empty() || self.sample_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample_grid must be non-empty and strictly increasing".into());
        }
        if let Some(grid) = &self.epsilon_grid {
            if grid.is_empty() || grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                return bad("epsilon_grid entries must be positive".into());
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn build_scenario(&self) -> Result<ScenarioInstance> {
        self.scenario.build(self.seed)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = self.threads {
            builder = builder.num_threads(k);
        }
        builder
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvdRow {
    pub scenario: String,
    pub method: Method,
    pub n_samples: u64,
    pub trial: u32,
    pub seed: u64,
    pub tvd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub scenario: String,
    pub method: Method,
    pub n_samples: u64,
    pub mean_tvd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvdCurve {
    pub rows: Vec<TvdRow>,
    pub aggregates: Vec<AggregateRow>,
}

/// Twelve significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

impl TvdCurve {
    pub fn mean(&self, method: Method, n_samples: u64) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.n_samples == n_samples)
            .map(|a| a.mean_tvd)
    }

    pub fn raw_csv(&self) -> String {
        let mut out = format!("{RAW_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.scenario,
                r.method,
                r.n_samples,
                r.trial,
                r.seed,
                format_float(r.tvd)
            );
        }
        out
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = format!("{AGGREGATE_HEADER}\n");
        for a in &self.aggregates {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                a.scenario,
                a.method,
                a.n_samples,
                format_float(a.mean_tvd)
            );
        }
        out
    }
}

/// TVD of the rejection sampler built from a count table. A table that
/// rejects everything never emits a sample and is scored as maximal error.
fn rejection_tvd(
    d: &QuasiDecomposition,
    target: &DiscreteDistribution,
    counts: &SignedCounts,
) -> Result<f64> {
    let table = AcceptanceTable::from_counts(counts.clone())?;
    let sampler = WeakSampler::from_table(d.clone(), table)?;
    match sampler.output_distribution() {
        Ok(out) => tvd(target, &out),
        Err(Error::DegenerateTable(_)) => Ok(1.0),
        Err(e) => Err(e),
    }
}

fn estimation_tvd(
    d: &QuasiDecomposition,
    target: &DiscreteDistribution,
    counts: &SignedCounts,
) -> Result<f64> {
    let est = EmpiricalSignedEstimate::from_counts(d.gamma(), counts)?;
    tvd(target, est.clipped_normalized())
}

/// One trial: draws accumulate along the grid on stream `trial`, and both
/// methods are scored on the same tallies at every budget.
fn run_trial(
    cfg: &ExperimentConfig,
    d: &QuasiDecomposition,
    target: &DiscreteDistribution,
    trial: u32,
) -> Result<Vec<TvdRow>> {
    let mut rng = StreamRng::new(cfg.seed, u64::from(trial));
    let mut counts = SignedCounts::zeros(d.len());
    let mut drawn = 0;
    let mut rows = Vec::with_capacity(cfg.sample_grid.len() * cfg.methods.len());
    for &n in &cfg.sample_grid {
        counts.extend(d, n - drawn, &mut rng);
        drawn = n;
        for &method in &cfg.methods {
            let value = match method {
                Method::Rejection => rejection_tvd(d, target, &counts)?,
                // No estimate exists before the first sample.
                Method::Estimation if n == 0 => continue,
                Method::Estimation => estimation_tvd(d, target, &counts)?,
            };
            rows.push(TvdRow {
                scenario: cfg.scenario.name().to_owned(),
                method,
                n_samples: n,
                trial,
                seed: cfg.seed,
                tvd: value,
            });
        }
    }
    Ok(rows)
}

/// Runs every (trial, budget, method) cell on a prepared decomposition.
pub fn run_on(cfg: &ExperimentConfig, d: &QuasiDecomposition) -> Result<TvdCurve> {
    cfg.validate()?;
    let target = d.target_distribution()?;
    let per_trial: Vec<Vec<TvdRow>> = cfg.pool()?.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, d, &target, t))
            .collect::<Result<_>>()
    })?;
    let mut rows: Vec<TvdRow> = per_trial.into_iter().flatten().collect();
    rows.sort_by_key(|a| (a.method, a.n_samples, a.trial));
    let aggregates = rows
        .chunk_by(|a, b| a.method == b.method && a.n_samples == b.n_samples)
        .map(|group| AggregateRow {
            scenario: group[0].scenario.clone(),
            method: group[0].method,
            n_samples: group[0].n_samples,
            mean_tvd: group.iter().map(|r| r.tvd).sum::<f64>() / group.len() as f64,
        })
        .collect();
    Ok(TvdCurve { rows, aggregates })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TvdCurve> {
    cfg.validate()?;
    run_on(cfg, &cfg.build_scenario()?.decomposition)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub scenario: String,
    pub method: Method,
    pub n_samples: u64,
    pub implied_epsilon: f64,
}

/// Tightest rejection-method sample bound at accuracy `ε`.
pub fn tightest_rejection_bound(inputs: &BoundInputs, epsilon: f64) -> f64 {
    let Ok(i) = inputs.with_epsilon(epsilon) else {
        return f64::INFINITY;
    };
    RejectionVariant::ALL
        .iter()
        .map(|&v| bound_rejection(&i, v))
        .chain(std::iter::once(bound_alternative(&i)))
        .filter_map(|b| b.ok().map(|b| b.value))
        .fold(f64::INFINITY, f64::min)
}

fn estimation_bound_at(inputs: &BoundInputs, epsilon: f64) -> f64 {
    inputs
        .with_epsilon(epsilon)
        .map(|i| bound_estimation(&i))
        .unwrap_or(f64::INFINITY)
}

/// Smallest accuracy each method's bounds certify at every grid budget,
/// clamped to 1.
pub fn bound_curves_on(cfg: &ExperimentConfig, d: &QuasiDecomposition) -> Result<Vec<BoundRow>> {
    cfg.validate()?;
    let inputs = BoundInputs::from_decomposition(d, 1.0, cfg.delta)?;
    let mut methods = cfg.methods.clone();
    methods.sort_unstable();
    let cells: Vec<(Method, u64)> = methods
        .iter()
        .flat_map(|&m| cfg.sample_grid.iter().map(move |&n| (m, n)))
        .collect();
    let rows = cfg.pool()?.install(|| {
        cells
            .par_iter()
            .map(|&(method, n)| {
                let eps = match method {
                    Method::Rejection => implied_epsilon(
                        |e| tightest_rejection_bound(&inputs, e),
                        n as f64,
                        INVERSION_TOL,
                    ),
                    Method::Estimation => implied_epsilon(
                        |e| estimation_bound_at(&inputs, e),
                        n as f64,
                        INVERSION_TOL,
                    ),
                };
                BoundRow {
                    scenario: cfg.scenario.name().to_owned(),
                    method,
                    n_samples: n,
                    implied_epsilon: eps,
                }
            })
            .collect()
    });
    Ok(rows)
}

pub fn bound_curves(cfg: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    cfg.validate()?;
    bound_curves_on(cfg, &cfg.build_scenario()?.decomposition)
}

pub fn bounds_csv(rows: &[BoundRow]) -> String {
    let mut out = format!("{BOUNDS_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.scenario,
            r.method,
            r.n_samples,
            format_float(r.implied_epsilon)
        );
    }
    out
}

/// Full bound reports at each configured accuracy (default `ε = 0.1`).
pub fn bound_reports(cfg: &ExperimentConfig, d: &QuasiDecomposition) -> Result<Vec<BoundReport>> {
    let grid = cfg.epsilon_grid.clone().unwrap_or_else(|| vec![0.1]);
    grid.iter()
        .map(|&eps| BoundReport::evaluate(&BoundInputs::from_decomposition(d, eps, cfg.delta)?))
        .collect()
}

/// Output file names for a scenario.
pub struct OutputPaths {
    pub raw: PathBuf,
    pub aggregate: PathBuf,
    pub bounds: PathBuf,
    pub report: PathBuf,
}

impl OutputPaths {
    pub fn new(dir: &Path, scenario: &str) -> Self {
        Self {
            raw: dir.join(format!("{scenario}_raw.csv")),
            aggregate: dir.join(format!("{scenario}_aggregate.csv")),
            bounds: dir.join(format!("{scenario}_bounds.csv")),
            report: dir.join(format!("{scenario}_bound_report.json")),
        }
    }
}

/// Runs the sweep and writes raw and aggregate CSVs.
pub fn write_experiment(cfg: &ExperimentConfig) -> Result<OutputPaths> {
    let curve = run_experiment(cfg)?;
    let paths = OutputPaths::new(&cfg.output_dir, cfg.scenario.name());
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(&paths.raw, curve.raw_csv())?;
    fs::write(&paths.aggregate, curve.aggregate_csv())?;
    Ok(paths)
}

/// Writes bound curves as CSV and the bound reports as JSON.
pub fn write_bounds(cfg: &ExperimentConfig) -> Result<OutputPaths> {
    cfg.validate()?;
    let d = cfg.build_scenario()?.decomposition;
    let rows = bound_curves_on(cfg, &d)?;
    let reports = bound_reports(cfg, &d)?;
    let paths = OutputPaths::new(&cfg.output_dir, cfg.scenario.name());
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(&paths.bounds, bounds_csv(&rows))?;
    fs::write(&paths.report, serde_json::to_string_pretty(&reports)?)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::tvd;

    fn small(scenario: ScenarioParams) -> ExperimentConfig {
        ExperimentConfig {
            trials: 4,
            sample_grid: vec![0, 1, 10, 100],
            ..ExperimentConfig::new(scenario)
        }
    }

    fn iso() -> ScenarioParams {
        ScenarioParams::Isotropic { pairs: 2, p: 0.05 }
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = ExperimentConfig::from_toml("[scenario]\nname = \"iqp\"\n").unwrap();
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.delta, 0.1);
        assert_eq!(cfg.sample_grid, default_grid());
        assert_eq!(cfg.scenario, ScenarioParams::default_for("iqp").unwrap());

        for bad in [
            "trials = 0\n[scenario]\nname = \"iqp\"",
            "sample_grid = [10, 10]\n[scenario]\nname = \"iqp\"",
            "delta = 1.5\n[scenario]\nname = \"iqp\"",
            "methods = []\n[scenario]\nname = \"iqp\"",
            "typo = 1\n[scenario]\nname = \"iqp\"",
            "[scenario]\nname = \"ghz\"",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn zero_budget_rejection_is_mixture_distance() {
        let cfg = small(iso());
        let d = cfg.build_scenario().unwrap().decomposition;
        let curve = run_on(&cfg, &d).unwrap();
        let expected = tvd(&d.target_distribution().unwrap(), &d.mixture()).unwrap();
        for r in curve.rows.iter().filter(|r| r.n_samples == 0) {
            assert_eq!(r.method, Method::Rejection);
            assert_eq!(r.tvd, expected);
        }
    }

    #[test]
    fn free_scenario_rejection_is_exact() {
        let cfg = small(ScenarioParams::Isotropic { pairs: 2, p: 0.0 });
        let curve = run_experiment(&cfg).unwrap();
        assert!(curve
            .rows
            .iter()
            .filter(|r| r.method == Method::Rejection)
            .all(|r| r.tvd == 0.0));
    }

    #[test]
    fn aggregates_are_trial_means() {
        let cfg = small(iso());
        let curve = run_experiment(&cfg).unwrap();
        assert_eq!(curve.rows.len(), 4 * (4 + 3));
        for a in &curve.aggregates {
            let vals: Vec<f64> = curve
                .rows
                .iter()
                .filter(|r| r.method == a.method && r.n_samples == a.n_samples)
                .map(|r| r.tvd)
                .collect();
            assert_eq!(vals.len(), 4);
            let mean = vals.iter().sum::<f64>() / 4.0;
            assert!((mean - a.mean_tvd).abs() < 1e-12);
        }
    }

    #[test]
    fn output_is_independent_of_thread_count() {
        let one = ExperimentConfig {
            threads: Some(1),
            ..small(iso())
        };
        let many = ExperimentConfig {
            threads: Some(4),
            ..small(iso())
        };
        let a = run_experiment(&one).unwrap();
        let b = run_experiment(&many).unwrap();
        assert_eq!(a.raw_csv(), b.raw_csv());
        assert_eq!(a.aggregate_csv(), b.aggregate_csv());
    }

    #[test]
    fn csv_headers_and_format() {
        let curve = run_experiment(&small(iso())).unwrap();
        let raw = curve.raw_csv();
        assert_eq!(raw.lines().next().unwrap(), RAW_HEADER);
        assert!(raw
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("isotropic,rejection,0,0,0,"));
        assert_eq!(
            curve.aggregate_csv().lines().next().unwrap(),
            AGGREGATE_HEADER
        );
        assert_eq!(format_float(0.25), "2.50000000000e-1");
        assert_eq!(format_float(1.0 / 3.0), "3.33333333333e-1");
    }

    #[test]
    fn bound_curves_clamp_and_decrease() {
        let cfg = ExperimentConfig {
            sample_grid: vec![0, 10, 1_000, 100_000, 10_000_000],
            ..ExperimentConfig::new(iso())
        };
        let rows = bound_curves(&cfg).unwrap();
        for method in [Method::Rejection, Method::Estimation] {
            let eps: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == method)
                .map(|r| r.implied_epsilon)
                .collect();
            assert_eq!(eps.len(), 5);
            assert_eq!(eps[0], 1.0);
            assert!(eps.windows(2).all(|w| w[1] <= w[0]));
            assert!(eps[4] < 1.0);
        }
        assert_eq!(bounds_csv(&rows).lines().next().unwrap(), BOUNDS_HEADER);
    }
}

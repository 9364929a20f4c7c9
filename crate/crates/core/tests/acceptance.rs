//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use weak_distill::bounds::{
    bound_estimation, bound_rejection, rejection_estimation_term, BoundInputs, RejectionVariant,
};
use weak_distill::distill::{retry_budget, tvd_error_bound, AcceptanceTable};
use weak_distill::estimation::{
    estimate_expectation, hoeffding_sample_count, raw_variance, EmpiricalSignedEstimate,
};
use weak_distill::harness::{
    run_experiment, write_experiment, ExperimentConfig, Method, OutputPaths,
};
use weak_distill::quantum::{depolarizing_instance, scenario_iqp, scenario_isotropic};
use weak_distill::{
    tvd, DiscreteDistribution, QuasiDecomposition, ScenarioParams, SignedCounts, StreamRng,
    WeakSampler,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed < limit;
    let pass = out.pass && in_time;
    println!(
        "{} {name}: {} [{:.2} s, limit {} s]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn random_distribution(len: usize, rng: &mut StreamRng) -> DiscreteDistribution {
    loop {
        let w: Vec<f64> = (0..len)
            .map(|_| {
                if rng.bernoulli(0.2) {
                    0.0
                } else {
                    -rng.uniform().max(1e-300).ln()
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return DiscreteDistribution::new(w.into_iter().map(|x| x / total).collect()).unwrap();
        }
    }
}

/// Physical decomposition on at most four bits: pick the target `p`, `σ₋` and
/// `c₋`, then `σ₊ = (p + c₋σ₋)/c₊` is a distribution by construction.
fn random_decomposition(rng: &mut StreamRng) -> QuasiDecomposition {
    let bits = 1 + rng.below(4) as u32;
    let len = 1usize << bits;
    let p = random_distribution(len, rng);
    let sm = random_distribution(len, rng);
    let c_minus = 2.0 * rng.uniform();
    let c_plus = 1.0 + c_minus;
    let sp: Vec<f64> = p
        .probs()
        .iter()
        .zip(sm.probs())
        .map(|(a, b)| (a + c_minus * b) / c_plus)
        .collect();
    QuasiDecomposition::new(c_plus, c_minus, DiscreteDistribution::new(sp).unwrap(), sm).unwrap()
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.toml"))
}

fn load_config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&config_path(name)).expect("shipped config parses")
}

fn exact_ratio_correctness() -> Outcome {
    let mut rng = StreamRng::new(2024, 0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = random_decomposition(&mut rng);
        let out = WeakSampler::ideal(d.clone())
            .unwrap()
            .output_distribution()
            .unwrap();
        worst = worst.max(tvd(&out, &d.target_distribution().unwrap()).unwrap());
    }
    Outcome {
        pass: worst < 1e-12,
        detail: format!("max tvd over 200 decompositions = {worst:.3e} (< 1e-12)"),
    }
}

fn free_state_degeneracy() -> Outcome {
    let mut max_tvd = 0.0f64;
    for scenario in [
        ScenarioParams::Depolarizing { qubits: 4, p: 0.0 },
        ScenarioParams::Isotropic { pairs: 5, p: 0.0 },
        ScenarioParams::Iqp {
            qubits: 5,
            t_count: 5,
            p: 0.0,
        },
    ] {
        let cfg = ExperimentConfig {
            trials: 3,
            sample_grid: vec![0, 10, 100, 1_000],
            methods: vec![Method::Rejection],
            ..ExperimentConfig::new(scenario)
        };
        let curve = run_experiment(&cfg).unwrap();
        max_tvd = curve.rows.iter().map(|r| r.tvd).fold(max_tvd, f64::max);
    }
    let m = retry_budget(1.0, 0.0, 0.1, 0.1).unwrap();
    let d = QuasiDecomposition::free(DiscreteDistribution::uniform(3).unwrap()).unwrap();
    let inputs = BoundInputs::from_decomposition(&d, 0.1, 0.1).unwrap();
    let b = bound_rejection(&inputs, RejectionVariant::NegativeEntropy).unwrap();
    Outcome {
        pass: max_tvd == 0.0 && m == 1 && b.value <= 2.0,
        detail: format!(
            "max rejection tvd = {max_tvd:e}, retry_budget = {m}, negative-entropy bound = {} (<= 2)",
            b.value
        ),
    }
}

fn tvd_bound_soundness() -> Outcome {
    let mut rng = StreamRng::new(77, 0);
    let (mut finite, mut worst_margin) = (0, f64::INFINITY);
    for i in 0..500 {
        let d = random_decomposition(&mut rng);
        // Half the tables come from actual draws, half are arbitrary tallies.
        let counts = if i % 2 == 0 {
            let n = rng.below(400) as u64;
            SignedCounts::collect(&d, n, &mut rng)
        } else {
            SignedCounts {
                plus: (0..d.len()).map(|_| rng.below(20) as u64).collect(),
                minus: (0..d.len()).map(|_| rng.below(20) as u64).collect(),
            }
        };
        let table = AcceptanceTable::from_counts(counts).unwrap();
        let bound = tvd_error_bound(&d, table.ratios()).unwrap();
        if !bound.is_finite() {
            continue;
        }
        let sampler = WeakSampler::from_table(d.clone(), table).unwrap();
        let out = sampler.output_distribution().unwrap();
        let dist = tvd(&d.target_distribution().unwrap(), &out).unwrap();
        finite += 1;
        worst_margin = worst_margin.min(bound - dist);
    }
    Outcome {
        pass: worst_margin >= -1e-9 && finite > 0,
        detail: format!(
            "{finite}/500 finite bounds, min(bound - tvd) = {worst_margin:.3e} (>= -1e-9)"
        ),
    }
}

fn estimator_unbiasedness() -> Outcome {
    let d = QuasiDecomposition::new(
        1.5,
        0.5,
        DiscreteDistribution::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap(),
        DiscreteDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
    )
    .unwrap();
    let (runs, n) = (200u64, 10_000u64);
    let mut sums = vec![0.0; d.len()];
    for run in 0..runs {
        let counts = SignedCounts::collect(&d, n, &mut StreamRng::new(5, run));
        let e = EmpiricalSignedEstimate::from_counts(d.gamma(), &counts).unwrap();
        sums.iter_mut().zip(e.raw()).for_each(|(s, r)| *s += r);
    }
    let target = d.target_values();
    let worst = (0..d.len())
        .map(|x| {
            let sigma = (raw_variance(&d, x, n) / runs as f64).sqrt();
            (sums[x] / runs as f64 - target[x]).abs() / sigma
        })
        .fold(0.0f64, f64::max);
    Outcome {
        pass: worst < 5.0,
        detail: format!("max |mean - p_x| / sigma = {worst:.2} (< 5)"),
    }
}

fn bound_regression() -> Outcome {
    let inputs = BoundInputs::new(1.0, 0.0, 0.1, 0.1, 2.0, 0.0, 2.0, 0.0).unwrap();
    let est = bound_estimation(&inputs);
    let expected = 25.0 * (2.0 + (8.0 * 20f64.ln()).sqrt()).powi(2);
    let rel = (est - expected).abs() / expected;
    let m = retry_budget(2.0, 0.5, 0.1, 0.1).unwrap();

    let mut rng = StreamRng::new(31, 0);
    let mut ordered = 0;
    for _ in 0..100 {
        let d = random_decomposition(&mut rng);
        let eps = 0.01 + 0.5 * rng.uniform();
        let delta = 0.01 + 0.5 * rng.uniform();
        let i = BoundInputs::from_decomposition(&d, eps, delta).unwrap();
        let d1 = delta * (0.01 + 0.98 * rng.uniform());
        let [v1, v2, v3] = RejectionVariant::ALL.map(|v| rejection_estimation_term(&i, v, d1));
        if v1 <= v2 * (1.0 + 1e-12) && v2 <= v3 * (1.0 + 1e-12) {
            ordered += 1;
        }
    }
    Outcome {
        pass: rel < 1e-6 && m == 3 && ordered == 100,
        detail: format!(
            "estimation bound = {est:.10} (rel err {rel:.1e}), retry_budget = {m}, variant order held {ordered}/100"
        ),
    }
}

fn scenario_closed_forms() -> Outcome {
    let iso = scenario_isotropic(5, 0.01).unwrap();
    let iso_err = (iso.gamma() - 101.0 / 99.0).abs();
    let p = 0.005f64;
    let dep = depolarizing_instance(4, p, &mut StreamRng::new(1, u64::MAX)).unwrap();
    let factor = ((1.0 + p) / (1.0 - p)).powi(4);
    let dep_err = (dep.decomposition.c_minus() - (factor - 1.0) / 2.0).abs();
    let iqp = scenario_iqp(5, 5, 0.1, &mut StreamRng::new(1, u64::MAX)).unwrap();
    let iqp_err = (iqp.gamma() - 0.9f64.powi(-5)).abs();
    Outcome {
        pass: iso_err < 1e-12 && dep_err < 1e-6 && iqp_err < 1e-12,
        detail: format!(
            "isotropic gamma err {iso_err:.1e}, depolarizing c- = {:.6} (err {dep_err:.1e}), iqp Gamma err {iqp_err:.1e}",
            dep.decomposition.c_minus()
        ),
    }
}

fn figure_shape() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for name in ScenarioParams::NAMES {
        let cfg = load_config(name);
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.delta, 0.1);
        let curve = run_experiment(&cfg).unwrap();
        let mean = |m, n| curve.mean(m, n).unwrap();
        let ordered = cfg
            .sample_grid
            .iter()
            .filter(|&&n| (1..=1_000).contains(&n))
            .all(|&n| mean(Method::Rejection, n) <= mean(Method::Estimation, n));
        let last = *cfg.sample_grid.last().unwrap();
        let decays = mean(Method::Rejection, last) < mean(Method::Rejection, 100);
        pass &= ordered && decays;
        notes.push(format!(
            "{name}: rejection<=estimation for N<=1e3 {ordered}, rejection({last})={:.3e} < rejection(100)={:.3e} {decays}",
            mean(Method::Rejection, last),
            mean(Method::Rejection, 100)
        ));
    }
    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn expectation_confidence() -> Outcome {
    let (eps, delta) = (0.1, 0.1);
    let d = scenario_isotropic(5, 0.01).unwrap();
    let n = hoeffding_sample_count(d.gamma(), eps, delta).unwrap();
    let mut rng = StreamRng::new(8, 0);
    let obs: Vec<f64> = (0..d.len()).map(|_| rng.uniform() - 0.5).collect();
    let exact: f64 = d.target_values().iter().zip(&obs).map(|(p, o)| p * o).sum();
    let failures = (0..100)
        .filter(|&r| {
            let est = estimate_expectation(&d, &obs, n, &mut StreamRng::new(9, r)).unwrap();
            (est - exact).abs() > eps
        })
        .count();
    let rate = failures as f64 / 100.0;
    Outcome {
        pass: rate <= delta,
        detail: format!("n = {n}, failure rate {rate:.2} over 100 repeats (<= {delta})"),
    }
}

fn determinism() -> Outcome {
    let base = std::env::temp_dir().join(format!("wd-acceptance-{}", std::process::id()));
    let read = |dir: &PathBuf, threads| {
        let cfg = ExperimentConfig {
            output_dir: dir.clone(),
            threads: Some(threads),
            ..load_config("isotropic")
        };
        let paths: OutputPaths = write_experiment(&cfg).unwrap();
        (
            fs::read(paths.raw).unwrap(),
            fs::read(paths.aggregate).unwrap(),
        )
    };
    let a = read(&base.join("a"), 1);
    let b = read(&base.join("b"), 4);
    let _ = fs::remove_dir_all(&base);
    Outcome {
        pass: a == b && !a.0.is_empty(),
        detail: format!(
            "raw CSV {} bytes, aggregate CSV {} bytes, identical across runs and thread counts: {}",
            a.0.len(),
            a.1.len(),
            a == b
        ),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        check("exact_ratio_correctness", secs(5), exact_ratio_correctness),
        check("free_state_degeneracy", secs(1), free_state_degeneracy),
        check("tvd_bound_soundness", secs(10), tvd_bound_soundness),
        check("estimator_unbiasedness", secs(30), estimator_unbiasedness),
        check("bound_regression", secs(1), bound_regression),
        check("scenario_closed_forms", secs(5), scenario_closed_forms),
        check("figure_shape_reproduction", secs(600), figure_shape),
        check("expectation_confidence", secs(30), expectation_confidence),
        check("determinism", secs(600), determinism),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!(
        "{} of {} acceptance criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

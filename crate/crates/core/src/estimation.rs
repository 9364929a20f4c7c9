//! Probability-estimation baseline: estimate the target distribution from
//! signed samples, clip and renormalize, then sample from the estimate. Also
//! the importance-sampling estimator for diagonal observables.

use crate::distill::SignedCounts;
use crate::distributions::{DiscreteDistribution, Outcome, StreamRng};
use crate::error::{Error, Result};
use crate::quasiprob::QuasiDecomposition;

/// Signed empirical estimate of the target and its clipped, normalized form.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSignedEstimate {
    raw: Vec<f64>,
    clipped_normalized: DiscreteDistribution,
    n_samples: u64,
}

impl EmpiricalSignedEstimate {
    /// Builds `raw_x = γ(N⁺_x − N⁻_x)/N` from tallies with `N ≥ 1`.
    pub fn from_counts(gamma: f64, counts: &SignedCounts) -> Result<Self> {
        let n = counts.total();
        if n == 0 {
            return Err(Error::param("n", "at least one sample is required"));
        }
        let raw: Vec<f64> = counts
            .plus
            .iter()
            .zip(&counts.minus)
            .map(|(&p, &m)| gamma * (p as f64 - m as f64) / n as f64)
            .collect();
        let clipped_normalized = clip_and_normalize(&raw)?;
        Ok(Self {
            raw,
            clipped_normalized,
            n_samples: n,
        })
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn clipped_normalized(&self) -> &DiscreteDistribution {
        &self.clipped_normalized
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Outcome {
        self.clipped_normalized.sample(rng)
    }
}

/// `max(v_x, 0) / Σ_y max(v_y, 0)`, or uniform when nothing survives clipping.
pub fn clip_and_normalize(values: &[f64]) -> Result<DiscreteDistribution> {
    let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total > 0.0 {
        DiscreteDistribution::new(clipped.into_iter().map(|v| v / total).collect())
    } else {
        DiscreteDistribution::uniform(crate::distributions::bits_for_len(values.len())?)
    }
}

/// Draws `n ≥ 1` signed samples and forms the clipped estimate.
pub fn estimate_distribution(
    d: &QuasiDecomposition,
    n: u64,
    rng: &mut StreamRng,
) -> Result<EmpiricalSignedEstimate> {
    if n == 0 {
        return Err(Error::param("n", "at least one sample is required"));
    }
    EmpiricalSignedEstimate::from_counts(d.gamma(), &SignedCounts::collect(d, n, rng))
}

pub fn sample_from_estimate(e: &EmpiricalSignedEstimate, rng: &mut StreamRng) -> Outcome {
    e.sample(rng)
}

/// Sampling variance of one `raw_x` estimate from `n` draws:
/// `(γ² q_x − p_x²)/n`, which is at most `γ² q_x / n`.
pub fn raw_variance(d: &QuasiDecomposition, x: usize, n: u64) -> f64 {
    let q = d.mixture().prob(x);
    let p = d.target_values()[x];
    let g = d.gamma();
    ((g * g * q - p * p) / n as f64).max(0.0)
}

/// Importance-sampling estimate of `Σ_x p_x·obs_x` for an observable that is
/// diagonal in the computational basis with entries in `[−½, ½]`.
pub fn estimate_expectation(
    d: &QuasiDecomposition,
    observable: &[f64],
    n: u64,
    rng: &mut StreamRng,
) -> Result<f64> {
    if observable.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: d.len(),
            actual: observable.len(),
        });
    }
    if let Some(v) = observable.iter().find(|v| !(-0.5..=0.5).contains(*v)) {
        return Err(Error::param(
            "observable",
            format!("entry {v} outside [-1/2, 1/2]"),
        ));
    }
    if n == 0 {
        return Err(Error::param("n", "at least one sample is required"));
    }
    let gamma = d.gamma();
    let sum: f64 = (0..n)
        .map(|_| {
            let s = d.draw_signed(rng);
            gamma * s.sign.value() * observable[s.outcome.index()]
        })
        .sum();
    Ok(sum / n as f64)
}

/// Hoeffding sample count for [`estimate_expectation`]: each term lies in an
/// interval of width `γ`, so `n = ⌈γ² ln(2/δ) / (2ε²)⌉` gives error at most
/// `ε` with probability `1 − δ`.
pub fn hoeffding_sample_count(gamma: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) || !(gamma >= 1.0) {
        return Err(Error::param(
            "gamma/epsilon/delta",
            format!("({gamma}, {epsilon}, {delta})"),
        ));
    }
    Ok(
        ((gamma * gamma * (2.0 / delta).ln()) / (2.0 * epsilon * epsilon))
            .ceil()
            .max(1.0) as u64,
    )
}

/// Two-sided Hoeffding half-width `γ √(ln(2/δ) / (2n))`.
pub fn hoeffding_tolerance(gamma: f64, n: u64, delta: f64) -> f64 {
    gamma * ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

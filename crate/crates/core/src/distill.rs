//! Weak distillation by rejection sampling with estimated acceptance ratios.
//!
//! The estimation stage draws signed samples from the decomposition and keeps
//! per-outcome counts `N⁺_x`, `N⁻_x`. The acceptance ratio of outcome `x` is
//! the clipped empirical mean of the signs, `max(0, (N⁺ − N⁻)/(N⁺ + N⁻))`,
//! with unvisited outcomes accepted outright. The rejection stage then draws
//! from the mixture `q` and keeps `x` with probability `R_x`.
//!
//! The normalizing constant is fixed to `K = γ` throughout, which is always an
//! upper bound on `sup_x p_x/q_x`.

use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDistribution, Outcome, StreamRng, NORM_TOL};
use crate::error::{Error, Result};
use crate::quasiprob::{QuasiDecomposition, Sign};

/// Per-outcome tallies of `+1` and `−1` draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedCounts {
    pub plus: Vec<u64>,
    pub minus: Vec<u64>,
}

impl SignedCounts {
    pub fn zeros(len: usize) -> Self {
        Self {
            plus: vec![0; len],
            minus: vec![0; len],
        }
    }

    /// Draws `n` signed samples from `d` and tallies them.
    pub fn collect(d: &QuasiDecomposition, n: u64, rng: &mut StreamRng) -> Self {
        let mut counts = Self::zeros(d.len());
        counts.extend(d, n, rng);
        counts
    }

    /// Adds `n` further draws to the existing tallies.
    pub fn extend(&mut self, d: &QuasiDecomposition, n: u64, rng: &mut StreamRng) {
        assert_eq!(
            self.len(),
            d.len(),
            "tally length differs from decomposition"
        );
        for _ in 0..n {
            let s = d.draw_signed(rng);
            match s.sign {
                Sign::Plus => self.plus[s.outcome.index()] += 1,
                Sign::Minus => self.minus[s.outcome.index()] += 1,
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.plus.iter().chain(&self.minus).sum()
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }
}

/// Unclipped sign average `(N⁺ − N⁻)/(N⁺ + N⁻)`, defined as 1 for an empty cell.
pub fn sign_average(plus: u64, minus: u64) -> f64 {
    let total = plus + minus;
    if total == 0 {
        1.0
    } else {
        (plus as f64 - minus as f64) / total as f64
    }
}

/// Acceptance ratio: the sign average clipped at zero.
pub fn clipped_ratio(plus: u64, minus: u64) -> f64 {
    sign_average(plus, minus).max(0.0)
}

/// Estimated acceptance ratios together with the counts they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableWire", into = "TableWire")]
pub struct AcceptanceTable {
    counts: SignedCounts,
    ratios: Vec<f64>,
    n_samples_used: u64,
}

impl AcceptanceTable {
    pub fn from_counts(counts: SignedCounts) -> Result<Self> {
        if counts.plus.len() != counts.minus.len() {
            return Err(Error::DimensionMismatch {
                expected: counts.plus.len(),
                actual: counts.minus.len(),
            });
        }
        crate::distributions::bits_for_len(counts.len())?;
        let ratios = counts
            .plus
            .iter()
            .zip(&counts.minus)
            .map(|(&p, &m)| clipped_ratio(p, m))
            .collect();
        let n_samples_used = counts.total();
        Ok(Self {
            counts,
            ratios,
            n_samples_used,
        })
    }

    pub fn counts_plus(&self) -> &[u64] {
        &self.counts.plus
    }

    pub fn counts_minus(&self) -> &[u64] {
        &self.counts.minus
    }

    pub fn counts(&self) -> &SignedCounts {
        &self.counts
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn n_samples_used(&self) -> u64 {
        self.n_samples_used
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Serialize, Deserialize)]
struct TableWire {
    counts_plus: Vec<u64>,
    counts_minus: Vec<u64>,
    ratios: Vec<f64>,
    n_samples_used: u64,
}

impl From<AcceptanceTable> for TableWire {
    fn from(t: AcceptanceTable) -> Self {
        Self {
            counts_plus: t.counts.plus,
            counts_minus: t.counts.minus,
            ratios: t.ratios,
            n_samples_used: t.n_samples_used,
        }
    }
}

impl TryFrom<TableWire> for AcceptanceTable {
    type Error = Error;

    fn try_from(w: TableWire) -> Result<Self> {
        let table = AcceptanceTable::from_counts(SignedCounts {
            plus: w.counts_plus,
            minus: w.counts_minus,
        })?;
        // Ratios are derived data; reject files whose ratios disagree with their counts.
        let consistent = w.ratios.len() == table.ratios.len()
            && w.ratios
                .iter()
                .zip(&table.ratios)
                .all(|(a, b)| (a - b).abs() <= 1e-12)
            && w.n_samples_used == table.n_samples_used;
        if !consistent {
            return Err(Error::InvalidDistribution(
                "acceptance table ratios do not match its counts".into(),
            ));
        }
        Ok(table)
    }
}

/// Runs the estimation stage: `n` signed draws tallied into an acceptance table.
pub fn estimate_ratios(d: &QuasiDecomposition, n: u64, rng: &mut StreamRng) -> AcceptanceTable {
    AcceptanceTable::from_counts(SignedCounts::collect(d, n, rng))
        .expect("counts sized from the decomposition")
}

/// Exact acceptance ratios `p_x/(γ q_x)`, zero where `q_x = 0`.
pub fn ideal_ratios(d: &QuasiDecomposition) -> Result<Vec<f64>> {
    let gamma = d.gamma();
    let q = d.mixture();
    d.target_values()
        .iter()
        .zip(q.probs())
        .enumerate()
        .map(|(index, (&p, &q))| {
            if p < -NORM_TOL {
                return Err(Error::Unphysical { index, value: p });
            }
            Ok(if q > 0.0 {
                (p.max(0.0) / (gamma * q)).min(1.0)
            } else {
                0.0
            })
        })
        .collect()
}

/// Per-outcome deviations of estimated ratios from the ideal ones.
///
/// `eps` is measured against the clipped ratios, `eps_prime` against the raw
/// sign averages, so `|eps_prime| ≥ |eps|` entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioError {
    pub eps: Vec<f64>,
    pub eps_prime: Vec<f64>,
}

impl RatioError {
    pub fn compute(d: &QuasiDecomposition, table: &AcceptanceTable) -> Result<Self> {
        check_len(d.len(), table.len())?;
        let ideal = ideal_ratios(d)?;
        let eps = ideal
            .iter()
            .zip(table.ratios())
            .map(|(i, r)| i - r)
            .collect();
        let eps_prime = ideal
            .iter()
            .zip(table.counts_plus().iter().zip(table.counts_minus()))
            .map(|(i, (&p, &m))| i - sign_average(p, m))
            .collect();
        Ok(Self { eps, eps_prime })
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(Error::DimensionMismatch { expected, actual })
    } else {
        Ok(())
    }
}

/// Result of one successful rejection-sampling run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accepted {
    pub outcome: Outcome,
    /// Draws consumed, including the accepted one.
    pub attempts: u64,
}

/// Rejection sampler over the mixture of a decomposition.
#[derive(Debug, Clone)]
pub struct WeakSampler {
    decomposition: QuasiDecomposition,
    table: Option<AcceptanceTable>,
    ratios: Vec<f64>,
    mixture: DiscreteDistribution,
    k_constant: f64,
}

impl WeakSampler {
    /// Sampler driven by an estimated acceptance table.
    pub fn from_table(d: QuasiDecomposition, table: AcceptanceTable) -> Result<Self> {
        check_len(d.len(), table.len())?;
        let ratios = table.ratios().to_vec();
        Ok(Self::build(d, Some(table), ratios))
    }

    /// Sampler with explicitly supplied ratios in `[0, 1]`.
    pub fn with_ratios(d: QuasiDecomposition, ratios: Vec<f64>) -> Result<Self> {
        check_len(d.len(), ratios.len())?;
        if let Some(r) = ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::param("ratios", format!("{r} is outside [0, 1]")));
        }
        Ok(Self::build(d, None, ratios))
    }

    /// Sampler with the exact ratios; its output law is the target itself.
    pub fn ideal(d: QuasiDecomposition) -> Result<Self> {
        let ratios = ideal_ratios(&d)?;
        Ok(Self::build(d, None, ratios))
    }

    /// Estimation stage followed by sampler construction.
    pub fn estimate(d: QuasiDecomposition, n: u64, rng: &mut StreamRng) -> Self {
        let table = estimate_ratios(&d, n, rng);
        let ratios = table.ratios().to_vec();
        Self::build(d, Some(table), ratios)
    }

    fn build(d: QuasiDecomposition, table: Option<AcceptanceTable>, ratios: Vec<f64>) -> Self {
        let mixture = d.mixture();
        let k_constant = d.gamma();
        Self {
            decomposition: d,
            table,
            ratios,
            mixture,
            k_constant,
        }
    }

    pub fn decomposition(&self) -> &QuasiDecomposition {
        &self.decomposition
    }

    pub fn table(&self) -> Option<&AcceptanceTable> {
        self.table.as_ref()
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn k_constant(&self) -> f64 {
        self.k_constant
    }

    /// Per-draw acceptance probability `Σ_x R_x q_x`.
    pub fn acceptance_probability(&self) -> f64 {
        self.ratios
            .iter()
            .zip(self.mixture.probs())
            .map(|(r, q)| r * q)
            .sum()
    }

    /// Draws from the mixture until an outcome is accepted or the budget runs out.
    pub fn run_rejection(&self, max_attempts: u64, rng: &mut StreamRng) -> Result<Accepted> {
        if max_attempts == 0 {
            return Err(Error::param("max_attempts", "must be positive"));
        }
        for attempt in 1..=max_attempts {
            let outcome = self.decomposition.draw_signed(rng).outcome;
            if rng.bernoulli(self.ratios[outcome.index()]) {
                return Ok(Accepted {
                    outcome,
                    attempts: attempt,
                });
            }
        }
        Err(Error::RejectionExhausted {
            attempts: max_attempts,
        })
    }

    /// Exact law of an accepted sample, `R_x q_x / Σ_y R_y q_y`.
    pub fn output_distribution(&self) -> Result<DiscreteDistribution> {
        let mass = self.acceptance_probability();
        if mass <= MIN_ACCEPTANCE {
            return Err(Error::DegenerateTable(mass));
        }
        DiscreteDistribution::new(
            self.ratios
                .iter()
                .zip(self.mixture.probs())
                .map(|(r, q)| r * q / mass)
                .collect(),
        )
    }

    /// [`tvd_error_bound`] for this sampler's ratios.
    pub fn tvd_error_bound(&self) -> Result<f64> {
        tvd_error_bound(&self.decomposition, &self.ratios)
    }
}

/// Acceptance mass below which a table counts as rejecting everything.
const MIN_ACCEPTANCE: f64 = 1e-12;

/// `KΣ|ε_x|q_x / (1 − KΣ|ε_x|q_x)` with `K = γ`, or `+∞` when the
/// denominator is not positive. Denominators within rounding of zero count as
/// zero, since the acceptance mass is then at least as small.
pub fn tvd_error_bound(d: &QuasiDecomposition, ratios: &[f64]) -> Result<f64> {
    let weighted = weighted_ratio_error(d, ratios)?;
    Ok(if 1.0 - weighted > MIN_ACCEPTANCE {
        weighted / (1.0 - weighted)
    } else {
        f64::INFINITY
    })
}

/// `K Σ_x |ε_x| q_x` with `K = γ`.
pub fn weighted_ratio_error(d: &QuasiDecomposition, ratios: &[f64]) -> Result<f64> {
    check_len(d.len(), ratios.len())?;
    let ideal = ideal_ratios(d)?;
    let q = d.mixture();
    let sum: f64 = ideal
        .iter()
        .zip(ratios)
        .zip(q.probs())
        .map(|((i, r), q)| (i - r).abs() * q)
        .sum();
    Ok(d.gamma() * sum)
}

/// Number of rejection draws `M` that secures at least one acceptance with
/// probability `1 − δ₂` once the ratios meet accuracy `ε`:
/// `M = ⌈ln(1/δ₂) / ln((1+ε)γ / ((1+ε)c₋ + εγ))⌉`, and never less than 1.
pub fn retry_budget(gamma: f64, c_minus: f64, epsilon: f64, delta2: f64) -> Result<u64> {
    if !(gamma >= 1.0) || !(c_minus >= 0.0) {
        return Err(Error::param(
            "gamma/c_minus",
            format!("({gamma}, {c_minus})"),
        ));
    }
    if !(epsilon > 0.0) {
        return Err(Error::param(
            "epsilon",
            format!("{epsilon} must be positive"),
        ));
    }
    if !(delta2 > 0.0 && delta2 < 1.0) {
        return Err(Error::param(
            "delta2",
            format!("{delta2} must lie in (0, 1)"),
        ));
    }
    let ratio = (1.0 + epsilon) * gamma / ((1.0 + epsilon) * c_minus + epsilon * gamma);
    if !(ratio > 1.0) {
        return Err(Error::param(
            "epsilon",
            format!("acceptance guarantee is vacuous (log argument {ratio} <= 1)"),
        ));
    }
    let m = ((1.0 / delta2).ln() / ratio.ln()).ceil();
    if !m.is_finite() || m > u64::MAX as f64 {
        return Err(Error::param("delta2", "retry budget overflows"));
    }
    Ok((m as u64).max(1))
}

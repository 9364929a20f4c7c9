//! Discrete distributions over computational-basis outcomes, distance and
//! entropy functionals, and the seeded random stream used by every sampler.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Normalization tolerance below which deviations are treated as float noise.
pub const NORM_TOL: f64 = 1e-9;
/// Largest normalization deviation accepted (and renormalized) on construction.
pub const BUILD_TOL: f64 = 1e-6;
/// Largest register handled with exact probability vectors.
pub const MAX_BITS: u32 = 12;

/// Deviation of a sum from one attributable to floating-point rounding.
const ROUNDING_TOL: f64 = 1e-12;

/// A computational-basis measurement label `x` on `n_bits` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    index: usize,
    n_bits: u32,
}

impl Outcome {
    pub fn new(index: usize, n_bits: u32) -> Result<Self> {
        check_bits(n_bits)?;
        if index >= 1usize << n_bits {
            return Err(Error::param(
                "index",
                format!("{index} out of range for {n_bits} bits"),
            ));
        }
        Ok(Self { index, n_bits })
    }

    pub fn index(self) -> usize {
        self.index
    }

    pub fn n_bits(self) -> u32 {
        self.n_bits
    }
}

pub(crate) fn check_bits(n_bits: u32) -> Result<()> {
    if n_bits > MAX_BITS {
        Err(Error::DimensionOverflow(n_bits))
    } else {
        Ok(())
    }
}

/// Number of qubits for a vector of length `len`, which must be a power of two.
pub(crate) fn bits_for_len(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidDistribution(format!(
            "length {len} is not a power of two"
        )));
    }
    let n_bits = len.trailing_zeros();
    check_bits(n_bits)?;
    Ok(n_bits)
}

/// A probability vector over the `2^n` outcomes of an `n`-qubit measurement.
///
/// The cumulative table is built once so that [`DiscreteDistribution::sample`]
/// is a binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
    cdf: Vec<f64>,
    n_bits: u32,
}

impl DiscreteDistribution {
    /// Builds a distribution, clamping negatives no smaller than `-NORM_TOL`
    /// to zero and renormalizing when the total is within `BUILD_TOL` of one.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        let n_bits = bits_for_len(probs.len())?;
        for (x, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "entry {x} is not finite"
                )));
            }
            if *p < 0.0 {
                if *p < -NORM_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "entry {x} is negative ({p})"
                    )));
                }
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > BUILD_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        if total != 1.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Self::from_normalized(probs, n_bits))
    }

    /// Rebuilds a previously normalized distribution verbatim, so stored
    /// instances replay bit for bit. Falls back to [`Self::new`] when the
    /// total is off by more than rounding.
    pub(crate) fn from_stored(probs: Vec<f64>) -> Result<Self> {
        let n_bits = bits_for_len(probs.len())?;
        let total: f64 = probs.iter().sum();
        let clean = probs.iter().all(|p| p.is_finite() && *p >= 0.0);
        if clean && (total - 1.0).abs() <= ROUNDING_TOL {
            Ok(Self::from_normalized(probs, n_bits))
        } else {
            Self::new(probs)
        }
    }

    fn from_normalized(probs: Vec<f64>, n_bits: u32) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // Pin the last supported bucket so a uniform draw in [0, 1) always lands.
        if let Some(last) = probs.iter().rposition(|&p| p > 0.0) {
            cdf[last..].fill(f64::INFINITY);
        }
        Self { probs, cdf, n_bits }
    }

    pub fn uniform(n_bits: u32) -> Result<Self> {
        check_bits(n_bits)?;
        let len = 1usize << n_bits;
        Ok(Self::from_normalized(vec![1.0 / len as f64; len], n_bits))
    }

    pub fn point_mass(outcome: Outcome) -> Self {
        let mut probs = vec![0.0; 1usize << outcome.n_bits];
        probs[outcome.index] = 1.0;
        Self::from_normalized(probs, outcome.n_bits)
    }

    /// Empirical distribution of a histogram; all-zero histograms are rejected.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("empty histogram".into()));
        }
        Self::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    /// Draws an outcome with probability `p_x`.
    pub fn sample(&self, rng: &mut StreamRng) -> Outcome {
        let u: f64 = rng.uniform();
        let index = self.cdf.partition_point(|&c| c <= u);
        Outcome {
            index: index.min(self.probs.len() - 1),
            n_bits: self.n_bits,
        }
    }

    /// Tensor product; `self` occupies the high-order bits of the result.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let n_bits = self.n_bits + other.n_bits;
        check_bits(n_bits)?;
        let probs = self
            .probs
            .iter()
            .flat_map(|a| other.probs.iter().map(move |b| a * b))
            .collect();
        Ok(Self::from_normalized(probs, n_bits))
    }
}

/// A signed quasi-probability vector whose entries sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDistribution {
    values: Vec<f64>,
    n_bits: u32,
}

impl SignedDistribution {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n_bits = bits_for_len(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite entry".into()));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > BUILD_TOL {
            return Err(Error::InvalidDistribution(format!(
                "quasi-probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { values, n_bits })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every entry is at least `-NORM_TOL`.
    pub fn is_physical(&self) -> bool {
        self.values.iter().all(|&v| v >= -NORM_TOL)
    }

    /// Converts to a probability vector; fails if any entry is below `-NORM_TOL`.
    pub fn to_distribution(&self) -> Result<DiscreteDistribution> {
        if let Some((index, &value)) = self.values.iter().enumerate().find(|(_, &v)| v < -NORM_TOL)
        {
            return Err(Error::Unphysical { index, value });
        }
        DiscreteDistribution::new(self.values.iter().map(|v| v.max(0.0)).collect())
    }
}

fn check_same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch {
            expected: a,
            actual: b,
        })
    } else {
        Ok(())
    }
}

/// Total variation distance `½ Σ_x |p_x − q_x|`.
pub fn tvd(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    tvd_slices(p.probs(), q.probs())
}

/// Total variation distance on raw slices of equal length.
pub fn tvd_slices(p: &[f64], q: &[f64]) -> Result<f64> {
    check_same_len(p.len(), q.len())?;
    let d: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * d).min(1.0))
}

/// Rényi entropy of order `alpha` in bits.
pub fn renyi_entropy(p: &DiscreteDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::param(
            "alpha",
            format!("{alpha} must be > 0 and != 1"),
        ));
    }
    let s: f64 = p
        .probs()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x.powf(alpha))
        .sum();
    Ok((s.log2() / (1.0 - alpha)).max(0.0))
}

/// `2^{H_{1/2}(p)/2} = Σ_x √p_x`, the form in which the order-½ entropy
/// enters every sample-cost bound.
pub fn sqrt_mass(p: &DiscreteDistribution) -> f64 {
    p.probs().iter().map(|x| x.sqrt()).sum()
}

/// Reproducible random stream identified by `(seed, stream)`.
///
/// Backed by ChaCha8 with an explicit stream id, so every trial can own an
/// independent sequence that is identical across runs and platforms.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

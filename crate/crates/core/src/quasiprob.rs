//! Two-term quasi-probability decompositions `ρ = c₊σ₊ − c₋σ₋` and the
//! signed sampling primitive built on them.

use serde::{Deserialize, Serialize};

use crate::distributions::{
    check_bits, DiscreteDistribution, Outcome, SignedDistribution, StreamRng, NORM_TOL,
};
use crate::error::{Error, Result};

/// Sign attached to a draw: `+1` from `σ₊`, `−1` from `σ₋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedSample {
    pub outcome: Outcome,
    pub sign: Sign,
}

/// Quasi-probability decomposition with exact measurement distributions
/// `p⁺ = diag(σ₊)` and `p⁻ = diag(σ₋)`.
///
/// A free decomposition has `c₋ = 0` and carries a uniform placeholder for
/// `σ₋`, which [`QuasiDecomposition::draw_signed`] never selects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecompositionWire", into = "DecompositionWire")]
pub struct QuasiDecomposition {
    c_plus: f64,
    c_minus: f64,
    sigma_plus: DiscreteDistribution,
    sigma_minus: DiscreteDistribution,
}

impl QuasiDecomposition {
    pub fn new(
        c_plus: f64,
        c_minus: f64,
        sigma_plus: DiscreteDistribution,
        sigma_minus: DiscreteDistribution,
    ) -> Result<Self> {
        if !(c_plus >= 0.0 && c_minus >= 0.0) || !c_plus.is_finite() || !c_minus.is_finite() {
            return Err(Error::param(
                "c_plus/c_minus",
                format!("coefficients must be finite and nonnegative ({c_plus}, {c_minus})"),
            ));
        }
        if (c_plus - c_minus - 1.0).abs() > NORM_TOL {
            return Err(Error::param(
                "c_plus/c_minus",
                format!("c_plus - c_minus = {} != 1", c_plus - c_minus),
            ));
        }
        if sigma_plus.len() != sigma_minus.len() {
            return Err(Error::DimensionMismatch {
                expected: sigma_plus.len(),
                actual: sigma_minus.len(),
            });
        }
        Ok(Self {
            c_plus,
            c_minus,
            sigma_plus,
            sigma_minus,
        })
    }

    /// Decomposition with `c_minus` determined by `c_plus − c_minus = 1`.
    pub fn from_negativity(
        c_minus: f64,
        sigma_plus: DiscreteDistribution,
        sigma_minus: DiscreteDistribution,
    ) -> Result<Self> {
        Self::new(1.0 + c_minus, c_minus, sigma_plus, sigma_minus)
    }

    /// A free state: `c₊ = 1`, `c₋ = 0`.
    pub fn free(sigma: DiscreteDistribution) -> Result<Self> {
        let dummy = DiscreteDistribution::uniform(sigma.n_bits())?;
        Self::new(1.0, 0.0, sigma, dummy)
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    /// `γ = c₊ + c₋`.
    pub fn gamma(&self) -> f64 {
        self.c_plus + self.c_minus
    }

    pub fn sigma_plus(&self) -> &DiscreteDistribution {
        &self.sigma_plus
    }

    pub fn sigma_minus(&self) -> &DiscreteDistribution {
        &self.sigma_minus
    }

    pub fn n_bits(&self) -> u32 {
        self.sigma_plus.n_bits()
    }

    pub fn len(&self) -> usize {
        self.sigma_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma_plus.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.c_minus == 0.0
    }

    /// Probability that the coin selects `σ₊`.
    pub fn plus_weight(&self) -> f64 {
        self.c_plus / self.gamma()
    }

    /// The samplable mixture `q_x = (c₊/γ)p⁺_x + (c₋/γ)p⁻_x`.
    pub fn mixture(&self) -> DiscreteDistribution {
        let (wp, wm) = (self.c_plus / self.gamma(), self.c_minus / self.gamma());
        let probs = self
            .sigma_plus
            .probs()
            .iter()
            .zip(self.sigma_minus.probs())
            .map(|(a, b)| wp * a + wm * b)
            .collect();
        DiscreteDistribution::new(probs).expect("convex combination of distributions")
    }

    /// Raw entries `c₊p⁺_x − c₋p⁻_x`.
    pub fn target_values(&self) -> Vec<f64> {
        self.sigma_plus
            .probs()
            .iter()
            .zip(self.sigma_minus.probs())
            .map(|(a, b)| self.c_plus * a - self.c_minus * b)
            .collect()
    }

    /// The quasi-probability `p_x = c₊p⁺_x − c₋p⁻_x`.
    pub fn target(&self) -> SignedDistribution {
        SignedDistribution::new(self.target_values()).expect("affine combination sums to one")
    }

    /// The target as a probability vector, for physical decompositions.
    pub fn target_distribution(&self) -> Result<DiscreteDistribution> {
        self.target().to_distribution()
    }

    /// Flips the `c₊/γ` coin and measures the selected state.
    pub fn draw_signed(&self, rng: &mut StreamRng) -> SignedSample {
        if self.c_minus == 0.0 || rng.bernoulli(self.plus_weight()) {
            SignedSample {
                outcome: self.sigma_plus.sample(rng),
                sign: Sign::Plus,
            }
        } else {
            SignedSample {
                outcome: self.sigma_minus.sample(rng),
                sign: Sign::Minus,
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Groups a family of signed terms into a two-term decomposition.
///
/// Factor `g` contributes either `+c₊ᵍ·(branch +)` or `−c₋ᵍ·(branch −)`;
/// `term` maps a full branch pattern to its measurement distribution. Terms
/// with an even number of minus branches are averaged into `σ₊`, the rest into
/// `σ₋`, and the coefficients become `c₊ = (Γ+1)/2`, `c₋ = (Γ−1)/2` with
/// `Γ = ∏γᵍ`. Patterns whose weight vanishes are never evaluated.
pub fn combine_sign_patterns<F>(
    coefficients: &[(f64, f64)],
    n_bits: u32,
    mut term: F,
) -> Result<QuasiDecomposition>
where
    F: FnMut(&[Sign]) -> Result<DiscreteDistribution>,
{
    check_bits(n_bits)?;
    let k = coefficients.len();
    if k > 20 {
        return Err(Error::param(
            "factors",
            format!("{k} factors is too many terms"),
        ));
    }
    for &(cp, cm) in coefficients {
        if !(cp >= 0.0 && cm >= 0.0) || (cp - cm - 1.0).abs() > NORM_TOL {
            return Err(Error::param(
                "factors",
                format!("factor coefficients ({cp}, {cm}) are not a valid decomposition"),
            ));
        }
    }
    let len = 1usize << n_bits;
    let mut plus = vec![0.0; len];
    let mut minus = vec![0.0; len];
    let mut plus_mass = 0.0;
    let mut minus_mass = 0.0;
    let mut pattern = vec![Sign::Plus; k];
    for mask in 0u64..(1u64 << k) {
        let mut weight = 1.0;
        let mut negative = false;
        for (g, &(cp, cm)) in coefficients.iter().enumerate() {
            if mask >> g & 1 == 1 {
                pattern[g] = Sign::Minus;
                weight *= cm;
                negative = !negative;
            } else {
                pattern[g] = Sign::Plus;
                weight *= cp;
            }
        }
        if weight == 0.0 {
            continue;
        }
        let dist = term(&pattern)?;
        if dist.n_bits() != n_bits {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: dist.len(),
            });
        }
        let (acc, mass) = if negative {
            (&mut minus, &mut minus_mass)
        } else {
            (&mut plus, &mut plus_mass)
        };
        for (a, p) in acc.iter_mut().zip(dist.probs()) {
            *a += weight * p;
        }
        *mass += weight;
    }
    let normalize = |v: Vec<f64>, mass: f64| {
        DiscreteDistribution::new(v.into_iter().map(|x| x / mass).collect())
    };
    let sigma_plus = normalize(plus, plus_mass)?;
    if minus_mass == 0.0 {
        return QuasiDecomposition::free(sigma_plus);
    }
    let sigma_minus = normalize(minus, minus_mass)?;
    // Exact identity: Σ positive weights − Σ negative weights = ∏(c₊ − c₋) = 1.
    let big_gamma: f64 = coefficients.iter().map(|(cp, cm)| cp + cm).product();
    QuasiDecomposition::new(
        (big_gamma + 1.0) / 2.0,
        (big_gamma - 1.0) / 2.0,
        sigma_plus,
        sigma_minus,
    )
}

/// Tensor product of decompositions acting on disjoint qubit blocks, regrouped
/// into a single two-term decomposition. Factor 0 occupies the high-order bits.
pub fn combine_factors(factors: &[QuasiDecomposition]) -> Result<QuasiDecomposition> {
    match factors {
        [] => Err(Error::param("factors", "at least one factor is required")),
        [single] => Ok(single.clone()),
        _ => {
            let total_bits: u32 = factors.iter().map(|f| f.n_bits()).sum();
            check_bits(total_bits)?;
            let coefficients: Vec<_> = factors.iter().map(|f| (f.c_plus, f.c_minus)).collect();
            combine_sign_patterns(&coefficients, total_bits, |pattern| {
                let mut terms = factors.iter().zip(pattern).map(|(f, s)| match s {
                    Sign::Plus => &f.sigma_plus,
                    Sign::Minus => &f.sigma_minus,
                });
                let first = terms.next().expect("non-empty").clone();
                terms.try_fold(first, |acc, d| acc.kron(d))
            })
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DecompositionWire {
    n_bits: u32,
    c_plus: f64,
    c_minus: f64,
    sigma_plus: Vec<f64>,
    sigma_minus: Vec<f64>,
}

impl TryFrom<DecompositionWire> for QuasiDecomposition {
    type Error = Error;

    fn try_from(w: DecompositionWire) -> Result<Self> {
        let sigma_plus = DiscreteDistribution::from_stored(w.sigma_plus)?;
        let sigma_minus = DiscreteDistribution::from_stored(w.sigma_minus)?;
        if sigma_plus.n_bits() != w.n_bits {
            return Err(Error::DimensionMismatch {
                expected: 1usize << w.n_bits.min(63),
                actual: sigma_plus.len(),
            });
        }
        QuasiDecomposition::new(w.c_plus, w.c_minus, sigma_plus, sigma_minus)
    }
}

impl From<QuasiDecomposition> for DecompositionWire {
    fn from(d: QuasiDecomposition) -> Self {
        Self {
            n_bits: d.n_bits(),
            c_plus: d.c_plus,
            c_minus: d.c_minus,
            sigma_plus: d.sigma_plus.probs().to_vec(),
            sigma_minus: d.sigma_minus.probs().to_vec(),
        }
    }
}

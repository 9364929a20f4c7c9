//! Closed-form sample-cost upper bounds for both weak simulators and the
//! minimizer over the failure-probability split `(1−δ₁)(1−δ₂) = 1−δ`.
//!
//! Entropies are in bits and enter only through `2^{H_{1/2}/2} = Σ√P_x`;
//! every other logarithm is natural.

use serde::Serialize;

use crate::distill::retry_budget;
use crate::distributions::{renyi_entropy, NORM_TOL};
use crate::error::{Error, Result};
use crate::quasiprob::QuasiDecomposition;

/// Sub-Gaussian variance constant of the alternative bound, `v = 1 − e^{−1/2}`.
pub fn v_constant() -> f64 {
    1.0 - (-0.5f64).exp()
}

/// Every scalar entering the bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    pub gamma: f64,
    pub c_minus: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub h_half_q: f64,
    pub h_half_p_minus: f64,
    pub h_half_p_plus: f64,
    pub s_quantity: f64,
}

impl BoundInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gamma: f64,
        c_minus: f64,
        epsilon: f64,
        delta: f64,
        h_half_q: f64,
        h_half_p_minus: f64,
        h_half_p_plus: f64,
        s_quantity: f64,
    ) -> Result<Self> {
        if !(c_minus >= 0.0) || (gamma - 1.0 - 2.0 * c_minus).abs() > NORM_TOL {
            return Err(Error::param(
                "gamma",
                format!("gamma = {gamma} is inconsistent with c_minus = {c_minus}"),
            ));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::param(
                "epsilon",
                format!("{epsilon} must be positive"),
            ));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("{delta} must lie in (0, 1)")));
        }
        for (name, v) in [
            ("h_half_q", h_half_q),
            ("h_half_p_minus", h_half_p_minus),
            ("h_half_p_plus", h_half_p_plus),
            ("s_quantity", s_quantity),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(
                    name,
                    format!("{v} must be finite and nonnegative"),
                ));
            }
        }
        Ok(Self {
            gamma,
            c_minus,
            epsilon,
            delta,
            h_half_q,
            h_half_p_minus,
            h_half_p_plus,
            s_quantity,
        })
    }

    /// Evaluates all entropies and `S` exactly from a decomposition.
    pub fn from_decomposition(d: &QuasiDecomposition, epsilon: f64, delta: f64) -> Result<Self> {
        let h_minus = if d.is_free() {
            0.0
        } else {
            renyi_entropy(d.sigma_minus(), 0.5)?
        };
        Self::new(
            1.0 + 2.0 * d.c_minus(),
            d.c_minus(),
            epsilon,
            delta,
            renyi_entropy(&d.mixture(), 0.5)?,
            h_minus,
            renyi_entropy(d.sigma_plus(), 0.5)?,
            s_quantity(d),
        )
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(
            self.gamma,
            self.c_minus,
            epsilon,
            self.delta,
            self.h_half_q,
            self.h_half_p_minus,
            self.h_half_p_plus,
            self.s_quantity,
        )
    }

    pub fn c_plus(&self) -> f64 {
        1.0 + self.c_minus
    }

    /// `((1+ε)/ε)²`, the inverse square of the ratio-error budget `ε/(1+ε)`.
    fn accuracy_factor(&self) -> f64 {
        ((1.0 + self.epsilon) / self.epsilon).powi(2)
    }
}

/// `S = (Σ_x √(c₊c₋p⁺_x p⁻_x / (c₊p⁺_x + c₋p⁻_x)))²`.
pub fn s_quantity(d: &QuasiDecomposition) -> f64 {
    let (cp, cm) = (d.c_plus(), d.c_minus());
    let root_sum: f64 = d
        .sigma_plus()
        .probs()
        .iter()
        .zip(d.sigma_minus().probs())
        .map(|(&a, &b)| {
            let den = cp * a + cm * b;
            if den > 0.0 {
                (cp * cm * a * b / den).sqrt()
            } else {
                0.0
            }
        })
        .sum();
    root_sum * root_sum
}

/// Samples sufficient for the probability-estimation method:
/// `(γ²/4ε²)(2^{H_{1/2}(q)/2} + √(8 ln(2/δ)))²`.
pub fn bound_estimation(inputs: &BoundInputs) -> f64 {
    let g = inputs.gamma;
    let e = inputs.epsilon;
    let head = 2f64.powf(inputs.h_half_q / 2.0);
    let tail = (8.0 * (2.0 / inputs.delta).ln()).sqrt();
    g * g / (4.0 * e * e) * (head + tail).powi(2)
}

/// The three nested forms of the rejection-method bound, tightest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionVariant {
    /// Uses the overlap quantity `S`.
    Overlap,
    /// Uses `c₋` and `H_{1/2}(p⁻)`.
    NegativeEntropy,
    /// Uses `c₊` and `H_{1/2}(p⁺)`.
    PositiveEntropy,
}

impl RejectionVariant {
    pub const ALL: [RejectionVariant; 3] = [
        RejectionVariant::Overlap,
        RejectionVariant::NegativeEntropy,
        RejectionVariant::PositiveEntropy,
    ];

    pub fn index(self) -> u8 {
        match self {
            RejectionVariant::Overlap => 1,
            RejectionVariant::NegativeEntropy => 2,
            RejectionVariant::PositiveEntropy => 3,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.index() == i)
    }
}

/// Ratio-estimation cost of the rejection method at a given `δ₁`, without `M`.
pub fn rejection_estimation_term(
    inputs: &BoundInputs,
    variant: RejectionVariant,
    delta1: f64,
) -> f64 {
    let g = inputs.gamma;
    let cm = inputs.c_minus;
    let cp = inputs.c_plus();
    let k = 8.0 * g * inputs.accuracy_factor();
    match variant {
        RejectionVariant::Overlap => k * (inputs.s_quantity.sqrt() + (cm / delta1).sqrt()).powi(2),
        RejectionVariant::NegativeEntropy => {
            k * cm * (2f64.powf(inputs.h_half_p_minus / 2.0) + delta1.powf(-0.5)).powi(2)
        }
        RejectionVariant::PositiveEntropy => {
            k * cp * (2f64.powf(inputs.h_half_p_plus / 2.0) + (cm / (cp * delta1)).sqrt()).powi(2)
        }
    }
}

/// Ratio-estimation cost of the logarithmic-confidence bound at a given `δ₁`.
pub fn alternative_estimation_term(inputs: &BoundInputs, delta1: f64) -> f64 {
    let g = inputs.gamma;
    let head = 2f64.powf(inputs.h_half_q / 2.0);
    let tail = (2.0 / v_constant() * (1.0 / delta1).ln()).sqrt();
    2.0 * g * g * inputs.accuracy_factor() * (head + tail).powi(2)
}

/// A failure-probability split with `(1−δ₁)(1−δ₂) = 1−δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Split {
    pub delta1: f64,
    pub delta2: f64,
}

/// `δ₂` completing `δ₁` to total failure probability `δ`.
pub fn complementary_delta(delta: f64, delta1: f64) -> f64 {
    (delta - delta1) / (1.0 - delta1)
}

/// A bound minimized over the split, with the rejection budget at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitBound {
    pub value: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub retry_m: u64,
}

const LOGIT_SPAN: f64 = 21.0;
const COARSE_POINTS: usize = 401;
const FALLBACK_POINTS: usize = 10_000;

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Minimizes `objective(δ₁)` over `δ₁ ∈ (0, δ)`.
///
/// The search runs in logit coordinates of `δ₁/δ` so both ends of the
/// interval are resolved. A coarse scan brackets the minimum, golden-section
/// search refines it to relative tolerance 1e−6, and a 10⁴-point scan takes
/// over when the coarse minimum sits on the boundary or is not finite.
pub fn optimize_split<F>(objective: F, delta: f64) -> Result<Split>
where
    F: Fn(f64) -> f64,
{
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InfeasibleSplit(format!(
            "delta = {delta} is not in (0, 1)"
        )));
    }
    let f = |t: f64| {
        let v = objective(delta * logistic(t));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let grid = |points: usize| -> (usize, f64, Vec<f64>) {
        let ts: Vec<f64> = (0..points)
            .map(|i| -LOGIT_SPAN + 2.0 * LOGIT_SPAN * i as f64 / (points - 1) as f64)
            .collect();
        let (best, value) =
            ts.iter()
                .map(|&t| f(t))
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                );
        (best, value, ts)
    };

    let (best, best_value, ts) = grid(COARSE_POINTS);
    let interior = best > 0 && best + 1 < ts.len();
    let t_opt = if interior && best_value.is_finite() {
        let (mut a, mut b) = (ts[best - 1], ts[best + 1]);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            let (lo, hi) = (delta * logistic(a), delta * logistic(b));
            if hi - lo <= 1e-6 * hi {
                break;
            }
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d);
            }
        }
        let refined = if fc <= fd { c } else { d };
        if f(refined) <= best_value {
            refined
        } else {
            ts[best]
        }
    } else {
        let (fine_best, fine_value, fine_ts) = grid(FALLBACK_POINTS);
        if !fine_value.is_finite() && !best_value.is_finite() {
            return Err(Error::InfeasibleSplit(
                "objective is not finite anywhere on the split interval".into(),
            ));
        }
        if fine_value <= best_value {
            fine_ts[fine_best]
        } else {
            ts[best]
        }
    };
    let delta1 = delta * logistic(t_opt);
    Ok(Split {
        delta1,
        delta2: complementary_delta(delta, delta1),
    })
}

fn minimize_with_retry<F>(inputs: &BoundInputs, term: F) -> Result<SplitBound>
where
    F: Fn(f64) -> f64,
{
    let total = |delta1: f64| {
        let delta2 = complementary_delta(inputs.delta, delta1);
        match retry_budget(inputs.gamma, inputs.c_minus, inputs.epsilon, delta2) {
            Ok(m) => term(delta1) + m as f64,
            Err(_) => f64::INFINITY,
        }
    };
    let split = optimize_split(total, inputs.delta)?;
    let retry_m = retry_budget(inputs.gamma, inputs.c_minus, inputs.epsilon, split.delta2)
        .map_err(|e| Error::InfeasibleSplit(e.to_string()))?;
    Ok(SplitBound {
        value: term(split.delta1) + retry_m as f64,
        delta1: split.delta1,
        delta2: split.delta2,
        retry_m,
    })
}

/// Rejection-method bound of the given variant, minimized over the split.
pub fn bound_rejection(inputs: &BoundInputs, variant: RejectionVariant) -> Result<SplitBound> {
    minimize_with_retry(inputs, |d1| rejection_estimation_term(inputs, variant, d1))
}

/// Logarithmic-confidence rejection bound, minimized over the split.
pub fn bound_alternative(inputs: &BoundInputs) -> Result<SplitBound> {
    minimize_with_retry(inputs, |d1| alternative_estimation_term(inputs, d1))
}

/// Rejection bound of one variant evaluated at a fixed split.
pub fn bound_rejection_at(
    inputs: &BoundInputs,
    variant: RejectionVariant,
    delta1: f64,
) -> Result<f64> {
    let delta2 = complementary_delta(inputs.delta, delta1);
    let m = retry_budget(inputs.gamma, inputs.c_minus, inputs.epsilon, delta2)?;
    Ok(rejection_estimation_term(inputs, variant, delta1) + m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariantBound {
    pub variant: RejectionVariant,
    #[serde(flatten)]
    pub bound: SplitBound,
}

/// Every bound for one set of inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub estimation_bound: f64,
    pub rejection_bounds: [VariantBound; 3],
    pub alt_bound: SplitBound,
    /// Rejection budget at the optimum of the main (negative-entropy) bound.
    pub retry_m: u64,
}

impl BoundReport {
    pub fn evaluate(inputs: &BoundInputs) -> Result<Self> {
        let mut rejection = Vec::with_capacity(3);
        for variant in RejectionVariant::ALL {
            rejection.push(VariantBound {
                variant,
                bound: bound_rejection(inputs, variant)?,
            });
        }
        let rejection_bounds: [VariantBound; 3] =
            rejection.try_into().expect("three rejection variants");
        Ok(Self {
            inputs: *inputs,
            estimation_bound: bound_estimation(inputs),
            retry_m: rejection_bounds[1].bound.retry_m,
            rejection_bounds,
            alt_bound: bound_alternative(inputs)?,
        })
    }

    /// Smallest of the rejection-method bounds.
    pub fn tightest_rejection(&self) -> f64 {
        self.rejection_bounds
            .iter()
            .map(|b| b.bound.value)
            .chain(std::iter::once(self.alt_bound.value))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Smallest `ε ∈ (0, 1]` for which `bound(ε) ≤ n`, found by bisection to
/// absolute tolerance `tol`; returns 1 when even `ε = 1` needs more samples.
/// `bound` must be non-increasing in `ε`.
pub fn implied_epsilon<F>(bound: F, n: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let fits = |eps: f64| bound(eps) <= n;
    if !fits(1.0) {
        return 1.0;
    }
    let mut lo = tol.min(1e-9);
    if fits(lo) {
        return lo;
    }
    let mut hi = 1.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

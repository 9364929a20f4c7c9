//! Small dense quantum backend and the three benchmark scenario generators.
//!
//! Qubit `q` of an `n`-qubit register is bit `n − 1 − q` of the basis index,
//! so basis labels read left to right as `|q₀ q₁ … q_{n−1}⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distributions::{check_bits, DiscreteDistribution, StreamRng, NORM_TOL};
use crate::error::{Error, Result};
use crate::quasiprob::{combine_sign_patterns, QuasiDecomposition, Sign};

fn mask(n_bits: u32, qubit: usize) -> usize {
    1usize << (n_bits as usize - 1 - qubit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    n_bits: u32,
}

impl StateVector {
    /// `|0…0⟩` on `n_bits` qubits.
    pub fn zero(n_bits: u32) -> Result<Self> {
        check_bits(n_bits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_bits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, n_bits })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_bits = crate::distributions::bits_for_len(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "state norm is {norm}, not 1"
            )));
        }
        Ok(Self { amplitudes, n_bits })
    }

    /// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
    pub fn haar_random(n_bits: u32, rng: &mut StreamRng) -> Result<Self> {
        check_bits(n_bits)?;
        let mut amplitudes: Vec<Complex64> = (0..1usize << n_bits)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amplitudes, n_bits })
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    fn check_qubit(&self, q: usize) {
        assert!(q < self.n_bits as usize, "qubit {q} out of range");
    }

    pub fn h(&mut self, q: usize) {
        self.check_qubit(q);
        let m = mask(self.n_bits, q);
        for i in 0..self.amplitudes.len() {
            if i & m == 0 {
                let (a, b) = (self.amplitudes[i], self.amplitudes[i | m]);
                self.amplitudes[i] = (a + b) * FRAC_1_SQRT_2;
                self.amplitudes[i | m] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    /// `diag(1, phase)` on qubit `q`.
    pub fn phase(&mut self, q: usize, phase: Complex64) {
        self.check_qubit(q);
        let m = mask(self.n_bits, q);
        self.amplitudes
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| i & m != 0)
            .for_each(|(_, a)| *a *= phase);
    }

    pub fn z(&mut self, q: usize) {
        self.phase(q, Complex64::new(-1.0, 0.0));
    }

    pub fn s(&mut self, q: usize) {
        self.phase(q, Complex64::i());
    }

    pub fn t(&mut self, q: usize) {
        self.phase(q, Complex64::from_polar(1.0, FRAC_PI_4));
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.check_qubit(a);
        self.check_qubit(b);
        let m = mask(self.n_bits, a) | mask(self.n_bits, b);
        self.amplitudes
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| i & m == m)
            .for_each(|(_, amp)| *amp = -*amp);
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        self.check_qubit(control);
        self.check_qubit(target);
        let (mc, mt) = (mask(self.n_bits, control), mask(self.n_bits, target));
        for i in 0..self.amplitudes.len() {
            if i & mc != 0 && i & mt == 0 {
                self.amplitudes.swap(i, i | mt);
            }
        }
    }

    /// Born-rule distribution in the computational basis.
    pub fn probabilities(&self) -> Result<DiscreteDistribution> {
        DiscreteDistribution::new(self.amplitudes.iter().map(|a| a.norm_sqr()).collect())
    }
}

/// A mixed state given as an ensemble of pure states.
#[derive(Debug, Clone)]
pub struct PureMixture {
    components: Vec<(f64, StateVector)>,
}

impl PureMixture {
    pub fn new(components: Vec<(f64, StateVector)>) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(Error::param("components", "mixture is empty"));
        };
        let n_bits = first.n_bits();
        if let Some((_, s)) = components.iter().find(|(_, s)| s.n_bits() != n_bits) {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_bits,
                actual: 1 << s.n_bits(),
            });
        }
        if components.iter().any(|(w, _)| !(0.0..=1.0).contains(w)) {
            return Err(Error::param("weights", "weights must lie in [0, 1]"));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::param("weights", format!("weights sum to {total}")));
        }
        Ok(Self { components })
    }

    pub fn pure(state: StateVector) -> Self {
        Self {
            components: vec![(1.0, state)],
        }
    }

    pub fn components(&self) -> &[(f64, StateVector)] {
        &self.components
    }

    pub fn n_bits(&self) -> u32 {
        self.components[0].1.n_bits()
    }
}

/// Exact measurement distribution `Σ_i w_i |⟨x|ψ_i⟩|²`.
pub fn measurement_distribution(m: &PureMixture) -> Result<DiscreteDistribution> {
    check_bits(m.n_bits())?;
    let mut probs = vec![0.0; 1 << m.n_bits()];
    for (w, s) in m.components() {
        for (p, a) in probs.iter_mut().zip(s.amplitudes()) {
            *p += w * a.norm_sqr();
        }
    }
    DiscreteDistribution::new(probs)
}

/// Dense density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: Vec<Complex64>,
    n_bits: u32,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let data = amps
            .iter()
            .flat_map(|a| amps.iter().map(move |b| a * b.conj()))
            .collect();
        Self {
            data,
            n_bits: state.n_bits(),
        }
    }

    fn dim(&self) -> usize {
        1 << self.n_bits
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    /// `Tr_q(ρ) ⊗ I/2` with the identity placed back on qubit `q`.
    fn replaced(&self, q: usize) -> Vec<Complex64> {
        let dim = self.dim();
        let m = mask(self.n_bits, q);
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                if (i ^ j) & m == 0 {
                    let (i0, j0) = (i & !m, j & !m);
                    let avg =
                        0.5 * (self.data[i0 * dim + j0] + self.data[(i0 | m) * dim + (j0 | m)]);
                    out[i * dim + j] = avg;
                }
            }
        }
        out
    }

    /// Replaces qubit `q` by the maximally mixed state.
    pub fn replace_with_maximally_mixed(&mut self, q: usize) {
        assert!(q < self.n_bits as usize, "qubit {q} out of range");
        self.data = self.replaced(q);
    }

    /// Depolarizing channel `(1−p)ρ + p·Tr_q(ρ)⊗I/2` on qubit `q`.
    pub fn depolarize(&mut self, q: usize, p: f64) {
        assert!(q < self.n_bits as usize, "qubit {q} out of range");
        let replaced = self.replaced(q);
        for (a, r) in self.data.iter_mut().zip(replaced) {
            *a = *a * (1.0 - p) + r * p;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    pub fn diagonal_distribution(&self) -> Result<DiscreteDistribution> {
        DiscreteDistribution::new((0..self.dim()).map(|i| self.entry(i, i).re).collect())
    }
}

/// Random depolarizing-mitigation instance: the ideal state and its decomposition.
#[derive(Debug, Clone)]
pub struct DepolarizingInstance {
    pub state: StateVector,
    pub decomposition: QuasiDecomposition,
}

/// Largest register for the depolarizing scenario.
pub const DEPOLARIZING_MAX_QUBITS: u32 = 6;

fn check_noise(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::param("p", format!("{p} must lie in [0, 1)")));
    }
    Ok(())
}

/// Per-qubit inverse depolarizing channel `id = E/(1−p) − (p/(1−p))·R`
/// applied to a Haar-random state, regrouped into two terms.
pub fn depolarizing_instance(n: u32, p: f64, rng: &mut StreamRng) -> Result<DepolarizingInstance> {
    if n == 0 || n > DEPOLARIZING_MAX_QUBITS {
        return Err(Error::param(
            "qubits",
            format!("{n} must lie in 1..={DEPOLARIZING_MAX_QUBITS}"),
        ));
    }
    check_noise(p)?;
    let state = StateVector::haar_random(n, rng)?;
    let rho = DensityMatrix::from_pure(&state);
    let coeffs = vec![(1.0 / (1.0 - p), p / (1.0 - p)); n as usize];
    let decomposition = combine_sign_patterns(&coeffs, n, |pattern| {
        let mut r = rho.clone();
        for (q, s) in pattern.iter().enumerate() {
            match s {
                Sign::Plus => r.depolarize(q, p),
                Sign::Minus => r.replace_with_maximally_mixed(q),
            }
        }
        r.diagonal_distribution()
    })?;
    Ok(DepolarizingInstance {
        state,
        decomposition,
    })
}

pub fn scenario_depolarizing(n: u32, p: f64, rng: &mut StreamRng) -> Result<QuasiDecomposition> {
    Ok(depolarizing_instance(n, p, rng)?.decomposition)
}

/// `|Φ⟩^{⊗n}` on `2n` qubits, pair `k` on qubits `(2k, 2k+1)`.
pub fn bell_pairs(n_pairs: u32) -> Result<StateVector> {
    let mut s = StateVector::zero(2 * n_pairs)?;
    for k in 0..n_pairs as usize {
        s.h(2 * k);
        s.cnot(2 * k, 2 * k + 1);
    }
    Ok(s)
}

/// `Φ^{⊗n} = ρ_p/(1−p) − (p/(1−p))·(I − Φ^{⊗n})/(4ⁿ − 1)` with `ρ_p` the
/// isotropic state.
pub fn scenario_isotropic(n_pairs: u32, p: f64) -> Result<QuasiDecomposition> {
    if n_pairs == 0 || 2 * n_pairs > crate::distributions::MAX_BITS {
        return Err(Error::param(
            "pairs",
            format!(
                "{n_pairs} pairs do not fit in {} qubits",
                crate::distributions::MAX_BITS
            ),
        ));
    }
    check_noise(p)?;
    let phi = bell_pairs(n_pairs)?.probabilities()?;
    let complement_dim = (1u64 << (2 * n_pairs)) as f64 - 1.0;
    let complement: Vec<f64> = phi
        .probs()
        .iter()
        .map(|f| (1.0 - f) / complement_dim)
        .collect();
    let isotropic: Vec<f64> = phi
        .probs()
        .iter()
        .zip(&complement)
        .map(|(f, c)| (1.0 - p) * f + p * c)
        .collect();
    QuasiDecomposition::new(
        1.0 / (1.0 - p),
        p / (1.0 - p),
        DiscreteDistribution::new(isotropic)?,
        DiscreteDistribution::new(complement)?,
    )
}

/// Resource state fed to one T-gate injection gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injected {
    /// `|T⟩`: the gadget applies `T`.
    T,
    /// `|T̄⟩ = Z|T⟩`: the gadget applies `Z·T`.
    TBar,
}

/// IQP circuit `H^{⊗n} · D · H^{⊗n}` on `|0…0⟩` with diagonal `D` made of CZs,
/// powers of `S`, and injected T gates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IqpCircuit {
    pub n_bits: u32,
    pub cz_pairs: Vec<(usize, usize)>,
    /// Power of `S` (0 to 3) on each qubit.
    pub s_powers: Vec<u8>,
    pub t_positions: Vec<usize>,
}

pub const IQP_MAX_QUBITS: u32 = 8;
pub const IQP_MAX_T: usize = 6;

impl IqpCircuit {
    /// Each pair gets a CZ with probability ½, each qubit a uniform power of
    /// `S`, and the T gates sit on distinct uniformly chosen qubits.
    pub fn random(n_bits: u32, t_count: usize, rng: &mut StreamRng) -> Result<Self> {
        if n_bits == 0 || n_bits > IQP_MAX_QUBITS {
            return Err(Error::param(
                "qubits",
                format!("{n_bits} must lie in 1..={IQP_MAX_QUBITS}"),
            ));
        }
        if t_count == 0 || t_count > IQP_MAX_T || t_count > n_bits as usize {
            return Err(Error::param(
                "t_count",
                format!(
                    "{t_count} must lie in 1..={} and not exceed the qubit count",
                    IQP_MAX_T
                ),
            ));
        }
        let n = n_bits as usize;
        let mut cz_pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.bernoulli(0.5) {
                    cz_pairs.push((a, b));
                }
            }
        }
        let s_powers = (0..n).map(|_| rng.below(4) as u8).collect();
        // Partial Fisher-Yates for distinct positions.
        let mut qubits: Vec<usize> = (0..n).collect();
        for i in 0..t_count {
            let j = i + rng.below(n - i);
            qubits.swap(i, j);
        }
        let mut t_positions = qubits[..t_count].to_vec();
        t_positions.sort_unstable();
        Ok(Self {
            n_bits,
            cz_pairs,
            s_powers,
            t_positions,
        })
    }

    pub fn t_count(&self) -> usize {
        self.t_positions.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_bits as usize;
        check_bits(self.n_bits)?;
        let bad = self
            .cz_pairs
            .iter()
            .any(|&(a, b)| a >= n || b >= n || a == b)
            || self.s_powers.len() != n
            || self.t_positions.iter().any(|&q| q >= n);
        if bad {
            Err(Error::param("circuit", "gate acts outside the register"))
        } else {
            Ok(())
        }
    }

    /// Final state with the given resource state injected at each T gate.
    pub fn run(&self, injections: &[Injected]) -> Result<StateVector> {
        self.validate()?;
        if injections.len() != self.t_count() {
            return Err(Error::param(
                "injections",
                format!(
                    "{} injections for {} T gates",
                    injections.len(),
                    self.t_count()
                ),
            ));
        }
        let n = self.n_bits as usize;
        let mut s = StateVector::zero(self.n_bits)?;
        (0..n).for_each(|q| s.h(q));
        for &(a, b) in &self.cz_pairs {
            s.cz(a, b);
        }
        for (q, &k) in self.s_powers.iter().enumerate() {
            (0..k).for_each(|_| s.s(q));
        }
        for (&q, inj) in self.t_positions.iter().zip(injections) {
            s.t(q);
            if *inj == Injected::TBar {
                s.z(q);
            }
        }
        (0..n).for_each(|q| s.h(q));
        Ok(s)
    }

    /// Output distribution with ideal T gates.
    pub fn ideal_distribution(&self) -> Result<DiscreteDistribution> {
        self.run(&vec![Injected::T; self.t_count()])?
            .probabilities()
    }
}

/// Per-gate coefficients of `|T⟩⟨T| = c₊ρ_p^T − c₋ρ_p^{T̄}`.
pub fn t_state_coefficients(p: f64) -> (f64, f64) {
    ((2.0 - p) / (2.0 * (1.0 - p)), p / (2.0 * (1.0 - p)))
}

#[derive(Debug, Clone)]
pub struct IqpInstance {
    pub circuit: IqpCircuit,
    pub decomposition: QuasiDecomposition,
}

/// Output distributions for every assignment of pure resource states, indexed
/// by a bit mask where bit `g` set means `|T̄⟩` at gate `g`.
fn injection_table(circuit: &IqpCircuit) -> Result<Vec<StateVector>> {
    let t = circuit.t_count();
    (0..1usize << t)
        .map(|mask| {
            let inj: Vec<Injected> = (0..t)
                .map(|g| {
                    if mask >> g & 1 == 1 {
                        Injected::TBar
                    } else {
                        Injected::T
                    }
                })
                .collect();
            circuit.run(&inj)
        })
        .collect()
}

/// T-doped IQP sampling with dephased resource states
/// `ρ_p^T = (1−p/2)|T⟩⟨T| + (p/2)|T̄⟩⟨T̄|`, one decomposition per T gate,
/// regrouped over the `2^t` sign patterns of circuit outputs.
pub fn iqp_instance_for(circuit: IqpCircuit, p: f64) -> Result<IqpInstance> {
    check_noise(p)?;
    circuit.validate()?;
    let t = circuit.t_count();
    let runs = injection_table(&circuit)?;
    let coeffs = vec![t_state_coefficients(p); t];
    let decomposition = combine_sign_patterns(&coeffs, circuit.n_bits, |pattern| {
        let components = runs
            .iter()
            .enumerate()
            .filter_map(|(mask, state)| {
                let w: f64 = pattern
                    .iter()
                    .enumerate()
                    .map(|(g, s)| {
                        let tbar = mask >> g & 1 == 1;
                        let aligned = tbar == (*s == Sign::Minus);
                        if aligned {
                            1.0 - p / 2.0
                        } else {
                            p / 2.0
                        }
                    })
                    .product();
                (w > 0.0).then(|| (w, state.clone()))
            })
            .collect();
        let mixture = PureMixture::new(components)?;
        measurement_distribution(&mixture)
    })?;
    Ok(IqpInstance {
        circuit,
        decomposition,
    })
}

pub fn iqp_instance(n: u32, t_count: usize, p: f64, rng: &mut StreamRng) -> Result<IqpInstance> {
    iqp_instance_for(IqpCircuit::random(n, t_count, rng)?, p)
}

pub fn scenario_iqp(
    n: u32,
    t_count: usize,
    p: f64,
    rng: &mut StreamRng,
) -> Result<QuasiDecomposition> {
    Ok(iqp_instance(n, t_count, p, rng)?.decomposition)
}

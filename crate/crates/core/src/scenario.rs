//! Named, seeded scenario instances and their JSON export.

use serde::{Deserialize, Serialize};

use crate::distributions::StreamRng;
use crate::error::{Error, Result};
use crate::quantum::{depolarizing_instance, iqp_instance, scenario_isotropic, IqpCircuit};
use crate::quasiprob::QuasiDecomposition;

/// Stream reserved for scenario generation; trial streams count up from 0.
pub const SCENARIO_STREAM: u64 = u64::MAX;

fn depolarizing_qubits() -> u32 {
    4
}
fn depolarizing_p() -> f64 {
    0.005
}
fn isotropic_pairs() -> u32 {
    5
}
fn isotropic_p() -> f64 {
    0.01
}
fn iqp_qubits() -> u32 {
    5
}
fn iqp_t_count() -> usize {
    5
}
fn iqp_p() -> f64 {
    0.1
}

/// Generator name and parameters. Omitted parameters take the benchmark values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScenarioParams {
    Depolarizing {
        #[serde(default = "depolarizing_qubits")]
        qubits: u32,
        #[serde(default = "depolarizing_p")]
        p: f64,
    },
    Isotropic {
        #[serde(default = "isotropic_pairs")]
        pairs: u32,
        #[serde(default = "isotropic_p")]
        p: f64,
    },
    Iqp {
        #[serde(default = "iqp_qubits")]
        qubits: u32,
        #[serde(default = "iqp_t_count")]
        t_count: usize,
        #[serde(default = "iqp_p")]
        p: f64,
    },
}

impl ScenarioParams {
    pub const NAMES: [&'static str; 3] = ["depolarizing", "isotropic", "iqp"];

    /// Benchmark parameters for a generator name.
    pub fn default_for(name: &str) -> Result<Self> {
        match name {
            "depolarizing" => Ok(Self::Depolarizing {
                qubits: depolarizing_qubits(),
                p: depolarizing_p(),
            }),
            "isotropic" => Ok(Self::Isotropic {
                pairs: isotropic_pairs(),
                p: isotropic_p(),
            }),
            "iqp" => Ok(Self::Iqp {
                qubits: iqp_qubits(),
                t_count: iqp_t_count(),
                p: iqp_p(),
            }),
            other => Err(Error::Config(format!(
                "unknown scenario '{other}', expected one of {:?}",
                Self::NAMES
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Depolarizing { .. } => "depolarizing",
            Self::Isotropic { .. } => "isotropic",
            Self::Iqp { .. } => "iqp",
        }
    }

    pub fn build(&self, seed: u64) -> Result<ScenarioInstance> {
        let mut rng = StreamRng::new(seed, SCENARIO_STREAM);
        let (decomposition, circuit, state) = match *self {
            Self::Depolarizing { qubits, p } => {
                let inst = depolarizing_instance(qubits, p, &mut rng)?;
                let amps = inst
                    .state
                    .amplitudes()
                    .iter()
                    .map(|a| [a.re, a.im])
                    .collect();
                (inst.decomposition, None, Some(amps))
            }
            Self::Isotropic { pairs, p } => (scenario_isotropic(pairs, p)?, None, None),
            Self::Iqp { qubits, t_count, p } => {
                let inst = iqp_instance(qubits, t_count, p, &mut rng)?;
                (inst.decomposition, Some(inst.circuit), None)
            }
        };
        Ok(ScenarioInstance {
            generator: self.name().to_owned(),
            params: *self,
            seed,
            circuit,
            state,
            decomposition,
        })
    }
}

/// A generated instance with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInstance {
    pub generator: String,
    pub params: ScenarioParams,
    pub seed: u64,
    /// IQP circuit, when the generator draws one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<IqpCircuit>,
    /// Random pure state as `[re, im]` pairs, when the generator draws one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<[f64; 2]>>,
    pub decomposition: QuasiDecomposition,
}

impl ScenarioInstance {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_benchmarks() {
        for name in ScenarioParams::NAMES {
            assert_eq!(ScenarioParams::default_for(name).unwrap().name(), name);
        }
        assert!(matches!(
            ScenarioParams::default_for("ghz"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn builds_are_seeded() {
        let params = ScenarioParams::Iqp {
            qubits: 3,
            t_count: 2,
            p: 0.1,
        };
        assert_eq!(params.build(4).unwrap(), params.build(4).unwrap());
        assert_ne!(
            params.build(4).unwrap().circuit,
            params.build(5).unwrap().circuit
        );
    }

    #[test]
    fn json_round_trip() {
        let inst = ScenarioParams::Depolarizing { qubits: 2, p: 0.01 }
            .build(9)
            .unwrap();
        let back = ScenarioInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn params_parse_from_toml_with_defaults() {
        let params: ScenarioParams = toml::from_str("name = \"isotropic\"\npairs = 3").unwrap();
        assert_eq!(params, ScenarioParams::Isotropic { pairs: 3, p: 0.01 });
        assert!(toml::from_str::<ScenarioParams>("name = \"isotropic\"\nqubits = 3").is_err());
    }
}

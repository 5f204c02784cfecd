use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cost::DEFAULT_SHOTS;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::optimizer::{SpsaConfig, DEFAULT_SAMPLES_PER_EPSILON};
use crate::sequences::{DDKind, DDSequenceSpec, EulerAngles, GateDurations, DEFAULT_DT_NS, DEFAULT_LDD_GATES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Mcm,
    Deep,
    Scan,
    Robustness,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Mcm => "mcm",
            ExperimentKind::Deep => "deep",
            ExperimentKind::Scan => "scan",
            ExperimentKind::Robustness => "robustness",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Mcm, Self::Deep, Self::Scan, Self::Robustness]
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// How each sequence kind is laid into an idle window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DdSettings {
    pub cpmg_reps: usize,
    pub xy4_reps: usize,
    pub ur6_reps: usize,
    pub ldd_reps: usize,
    pub ldd_gates: usize,
    /// One angle triple per decoupled qubit instead of a shared one.
    pub per_qubit_ldd: bool,
}

impl Default for DdSettings {
    fn default() -> Self {
        Self {
            cpmg_reps: 2,
            xy4_reps: 2,
            ur6_reps: 1,
            ldd_reps: 1,
            ldd_gates: DEFAULT_LDD_GATES,
            per_qubit_ldd: false,
        }
    }
}

impl DdSettings {
    pub fn spec(&self, kind: DDKind, ldd: Option<EulerAngles>) -> DDSequenceSpec {
        match kind {
            DDKind::None | DDKind::Delay => DDSequenceSpec::new(kind, 1),
            DDKind::Cpmg => DDSequenceSpec::new(kind, self.cpmg_reps),
            DDKind::Xy4 => DDSequenceSpec::new(kind, self.xy4_reps),
            DDKind::Ur6 => DDSequenceSpec::new(kind, self.ur6_reps),
            DDKind::Ldd => DDSequenceSpec::ldd(ldd.unwrap_or_default(), self.ldd_reps, self.ldd_gates),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCandidate {
    pub label: String,
    pub noise: NoiseModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceSettings {
    /// Readout-assignment factor on the reference decay curves.
    pub spam: f64,
}

impl Default for ReferenceSettings {
    fn default() -> Self {
        Self { spam: 0.987 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Cycle time shared by every duration in the file.
    #[serde(default = "default_dt_ns")]
    pub dt_ns: f64,
    #[serde(default)]
    pub seed: u64,
    pub noise: NoiseModel,
    #[serde(default)]
    pub durations: GateDurations,
    #[serde(default = "default_shots")]
    pub shots: u32,
    /// Exact expectations instead of shot sampling.
    #[serde(default)]
    pub exact: bool,
    #[serde(default = "default_r_values")]
    pub r_values: Vec<usize>,
    #[serde(default = "default_chain_lengths")]
    pub chain_lengths: Vec<usize>,
    #[serde(default = "default_sequences")]
    pub sequences: Vec<DDKind>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub dd: DdSettings,
    #[serde(default)]
    pub spsa: SpsaConfig,
    #[serde(default)]
    pub reference: ReferenceSettings,
    #[serde(default)]
    pub scan_candidates: Vec<ScanCandidate>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_samples_per_epsilon")]
    pub samples_per_epsilon: usize,
    /// MCM count used by the robustness study.
    #[serde(default = "one")]
    pub robustness_r: usize,
}

fn default_dt_ns() -> f64 {
    DEFAULT_DT_NS
}

fn default_shots() -> u32 {
    DEFAULT_SHOTS
}

fn default_r_values() -> Vec<usize> {
    vec![1, 3, 5, 7, 9, 11, 13, 15]
}

fn default_chain_lengths() -> Vec<usize> {
    (0..=8).collect()
}

fn default_sequences() -> Vec<DDKind> {
    DDKind::ALL.to_vec()
}

fn default_replicas() -> usize {
    10
}

fn default_epsilons() -> Vec<f64> {
    vec![0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0]
}

fn default_samples_per_epsilon() -> usize {
    DEFAULT_SAMPLES_PER_EPSILON
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(experiment: ExperimentKind, noise: NoiseModel) -> Self {
        let mut cfg = Self {
            experiment,
            dt_ns: DEFAULT_DT_NS,
            seed: 0,
            noise,
            durations: GateDurations::default(),
            shots: DEFAULT_SHOTS,
            exact: false,
            r_values: default_r_values(),
            chain_lengths: default_chain_lengths(),
            sequences: default_sequences(),
            replicas: default_replicas(),
            dd: DdSettings::default(),
            spsa: SpsaConfig::default(),
            reference: ReferenceSettings::default(),
            scan_candidates: Vec::new(),
            epsilons: default_epsilons(),
            samples_per_epsilon: default_samples_per_epsilon(),
            robustness_r: 1,
        };
        cfg.propagate_dt();
        cfg
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text)?;
        cfg.propagate_dt();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Pushes the single `dt_ns` into every struct that converts dt to time.
    pub fn propagate_dt(&mut self) {
        self.durations.dt_ns = self.dt_ns;
        self.noise.dt_ns = self.dt_ns;
        for c in &mut self.scan_candidates {
            c.noise.dt_ns = self.dt_ns;
        }
    }

    pub fn shots(&self) -> Option<u32> {
        (!self.exact).then_some(self.shots)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_ns > 0.0 && self.dt_ns.is_finite()) {
            return Err(Error::Config(format!("dt_ns = {} must be positive", self.dt_ns)));
        }
        if self.durations.x_dt == 0 && self.durations.sx_dt == 0 && self.durations.cx_dt == 0 {
            return Err(Error::Config("gate durations are all zero".into()));
        }
        if self.shots == 0 && !self.exact {
            return Err(Error::Config("shots must be positive".into()));
        }
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.sequences.is_empty() {
            return Err(Error::Config("no sequences selected".into()));
        }
        self.noise.validate()?;
        self.spsa.validate()?;
        for kind in &self.sequences {
            self.dd.spec(*kind, Some(EulerAngles::default())).validate()?;
        }
        match self.experiment {
            ExperimentKind::Mcm if self.r_values.is_empty() => {
                return Err(Error::Config("r_values is empty".into()));
            }
            ExperimentKind::Deep if self.chain_lengths.is_empty() => {
                return Err(Error::Config("chain_lengths is empty".into()));
            }
            ExperimentKind::Scan if self.scan_candidates.is_empty() => {
                return Err(Error::Config("scan needs candidate triples".into()));
            }
            ExperimentKind::Robustness => {
                if self.epsilons.is_empty() || self.epsilons[0] != 0.0 {
                    return Err(Error::Config("epsilons must start at 0".into()));
                }
                if self.epsilons.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Config("epsilons must be ascending".into()));
                }
                if self.robustness_r == 0 || self.samples_per_epsilon == 0 {
                    return Err(Error::Config("robustness needs r >= 1 and samples >= 1".into()));
                }
            }
            _ => {}
        }
        for c in &self.scan_candidates {
            c.noise.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        let digest = Sha256::digest(&bytes);
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Noise for an `n`-qubit register; a single entry is copied to every qubit.
pub fn noise_for_register(noise: &NoiseModel, n: usize) -> Result<NoiseModel> {
    let mut m = noise.clone();
    match m.qubits.len() {
        0 => return Err(Error::Config("noise model lists no qubits".into())),
        1 => m.qubits = vec![m.qubits[0]; n],
        k if k < n => {
            return Err(Error::Config(format!(
                "noise model lists {k} qubits, circuit needs {n}"
            )));
        }
        _ => {}
    }
    Ok(m)
}

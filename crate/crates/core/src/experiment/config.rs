//! TOML experiment configuration. Every field has a default equal to the
//! device values, so an empty file is a valid configuration.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{CollapseSet, NoiseModel};
use crate::gates::GateSpec;
use crate::pulse::{DEFAULT_TIME_STEP, DEVICE_LENGTH, DEVICE_SIGMA};
use crate::tomography::design::DEFAULT_GAP;
use crate::tomography::Shots;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    /// Gaussian width, ns.
    pub sigma: f64,
    /// Pulse length, ns.
    pub length: f64,
    /// Integrator step, ns.
    pub dt: f64,
    /// Separation between consecutive pulses, ns.
    pub gap: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            sigma: DEVICE_SIGMA,
            length: DEVICE_LENGTH,
            dt: DEFAULT_TIME_STEP,
            gap: DEFAULT_GAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub enabled: bool,
    /// μs.
    pub t1: f64,
    pub t2_0e: f64,
    pub t2_e1: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            t1: 7.0,
            t2_0e: 8.0,
            t2_e1: 3.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpamMode {
    /// Exact preparation and analysis unitaries.
    Ideal,
    /// Calibrated pulses under the noise model.
    Pulsed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyConfig {
    /// Shots per setting; `0` means exact probabilities.
    pub shots: u64,
    pub seed: u64,
    /// How preparation and analysis pulses are realized on noisy runs.
    pub spam: SpamMode,
    pub mle_max_iterations: usize,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            shots: 1000,
            seed: 1,
            spam: SpamMode::Pulsed,
            mle_max_iterations: 100_000,
        }
    }
}

impl TomographyConfig {
    pub fn shots(&self) -> Shots {
        if self.shots == 0 {
            Shots::Exact
        } else {
            Shots::Sampled(self.shots)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// rad.
    pub theta: Vec<f64>,
    pub phi: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            theta: (0..9).map(|k| k as f64 * FRAC_PI_2 / 8.0).collect(),
            phi: PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub label: String,
    pub theta: f64,
    pub phi: f64,
}

fn default_gates() -> Vec<GateConfig> {
    [GateSpec::hadamard(), GateSpec::not()]
        .iter()
        .map(|g| GateConfig {
            label: g.label().to_string(),
            theta: g.theta(),
            phi: g.phi(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceConfig {
    /// Gate labels in application order.
    pub gates: Vec<String>,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self {
            gates: vec!["H".into(), "NOT".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlochConfig {
    /// One of `0`, `1`, `+`, `-`, `+i`, `-i`.
    pub initial: String,
    /// Gate labels in application order; empty means the sequence gates.
    pub gates: Vec<String>,
    /// Write every `stride`-th integrator step.
    pub stride: usize,
}

impl Default for BlochConfig {
    fn default() -> Self {
        Self {
            initial: "0".into(),
            gates: Vec::new(),
            stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pulse: PulseConfig,
    pub noise: NoiseConfig,
    pub tomography: TomographyConfig,
    pub sweep: SweepConfig,
    #[serde(default = "default_gates")]
    pub gates: Vec<GateConfig>,
    pub sequence: SequenceConfig,
    pub bloch: BlochConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pulse: PulseConfig::default(),
            noise: NoiseConfig::default(),
            tomography: TomographyConfig::default(),
            sweep: SweepConfig::default(),
            gates: default_gates(),
            sequence: SequenceConfig::default(),
            bloch: BlochConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates TOML text; `origin` names the source in errors.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: describe_toml_error(text, &e),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("must be a positive time, got {v}")))
            }
        };
        positive("pulse.sigma", self.pulse.sigma)?;
        positive("pulse.length", self.pulse.length)?;
        positive("pulse.dt", self.pulse.dt)?;
        if !(self.pulse.gap >= 0.0 && self.pulse.gap.is_finite()) {
            return Err(invalid("pulse.gap", format!("must be nonnegative, got {}", self.pulse.gap)));
        }
        if self.pulse.dt > self.pulse.length {
            return Err(invalid("pulse.dt", "must not exceed pulse.length"));
        }
        positive("noise.t1", self.noise.t1)?;
        positive("noise.t2_0e", self.noise.t2_0e)?;
        positive("noise.t2_e1", self.noise.t2_e1)?;
        if self.noise.enabled {
            NoiseModel::new(self.noise.t1, self.noise.t2_0e, self.noise.t2_e1)
                .map_err(|e| invalid("noise", e.to_string()))?;
        }
        if self.tomography.mle_max_iterations == 0 {
            return Err(invalid("tomography.mle_max_iterations", "must be at least 1"));
        }
        for (k, &theta) in self.sweep.theta.iter().enumerate() {
            if !(0.0..=PI).contains(&theta) {
                return Err(invalid(format!("sweep.theta[{k}]"), format!("{theta} is outside [0, π]")));
            }
        }
        if !self.sweep.phi.is_finite() {
            return Err(invalid("sweep.phi", "must be finite"));
        }
        for (k, g) in self.gates.iter().enumerate() {
            GateSpec::new(g.theta, g.phi, g.label.clone())
                .map_err(|e| invalid(format!("gates[{k}]"), e.to_string()))?;
            if self.gates[..k].iter().any(|other| other.label == g.label) {
                return Err(invalid(format!("gates[{k}].label"), format!("duplicate label {}", g.label)));
            }
        }
        if self.sequence.gates.is_empty() {
            return Err(invalid("sequence.gates", "must name at least one gate"));
        }
        for (k, label) in self.sequence.gates.iter().enumerate() {
            self.gate(label)
                .ok_or_else(|| invalid(format!("sequence.gates[{k}]"), format!("unknown gate {label}")))?;
        }
        for (k, label) in self.bloch.gates.iter().enumerate() {
            self.gate(label)
                .ok_or_else(|| invalid(format!("bloch.gates[{k}]"), format!("unknown gate {label}")))?;
        }
        if self.bloch.stride == 0 {
            return Err(invalid("bloch.stride", "must be at least 1"));
        }
        super::runner::initial_state(&self.bloch.initial)
            .ok_or_else(|| invalid("bloch.initial", format!("unknown state {}", self.bloch.initial)))?;
        Ok(())
    }

    pub fn gate(&self, label: &str) -> Option<GateSpec> {
        self.gates
            .iter()
            .find(|g| g.label == label)
            .map(|g| GateSpec::new(g.theta, g.phi, g.label.clone()).expect("validated"))
    }

    pub fn noise_model(&self) -> Option<NoiseModel> {
        self.noise
            .enabled
            .then(|| NoiseModel::new(self.noise.t1, self.noise.t2_0e, self.noise.t2_e1).expect("validated"))
    }

    pub fn collapse_set(&self) -> CollapseSet {
        self.noise_model()
            .map_or_else(CollapseSet::empty, |n| n.collapse_set())
    }
}

/// Prefixes a TOML error with its 1-based line number.
fn describe_toml_error(text: &str, e: &toml::de::Error) -> String {
    let message = e.message().to_string();
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {message}")
        }
        None => message,
    }
}

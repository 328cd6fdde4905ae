//! Sweep, gate-sequence and Bloch-trajectory experiments.

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, SpamMode};
use crate::evolution::{
    channel_of, lindblad_trajectory, lindblad_superoperator, propagate_with, CollapseSet,
    EvolutionError, Idle, InteractionHamiltonian, Superoperator,
};
use crate::gates::{
    commutation_overlap, compose_sequence, logical_bloch, GateError, GateSpec, LogicalUnitary,
};
use crate::pulse::{calibrate_peak, GaussianEnvelope, PulseError, PulseSpec};
use crate::qutrit::{c, DensityMatrix, Mat3, QutritState, LEVEL_0, LEVEL_1, LEVEL_E};
use crate::tomography::design::PulsedSpam;
use crate::tomography::mle::MleOptions;
use crate::tomography::process::{linear_inversion, MeasurementRecord, RecordData};
use crate::tomography::{
    mle_reconstruct, process_fidelity, ProcessMatrix, ProcessTomography, ReducedProcessMatrix,
    Shots, Spam, TomographyError,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("initial state has |e⟩ population {0:e}")]
    InitialStateLeaked(f64),
    #[error("maximum likelihood did not converge after {0} iterations")]
    NotConverged(usize),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error("output error: {0}")]
    Output(String),
}

impl ExperimentError {
    /// Process exit status: 2 for configuration errors, 3 for numerical
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::InitialStateLeaked(_) => 2,
            ExperimentError::Output(_) => 1,
            ExperimentError::Tomography(TomographyError::InvalidRecord(_)) => 2,
            _ => 3,
        }
    }
}

/// Which simulation a result row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Unitary gate, exact tomography with ideal preparation and analysis.
    Noiseless,
    /// Master-equation gate with the configured tomography.
    Noisy,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Noiseless => "noiseless",
            Model::Noisy => "noisy",
        }
    }
}

/// Logical states by name: `0`, `1`, `+`, `-`, `+i`, `-i`.
pub fn initial_state(name: &str) -> Option<QutritState> {
    let s = |phase: (f64, f64)| QutritState::superposition(LEVEL_0, LEVEL_1, c(phase.0, phase.1));
    Some(match name {
        "0" => QutritState::basis(LEVEL_0),
        "1" => QutritState::basis(LEVEL_1),
        "+" => s((1.0, 0.0)),
        "-" => s((-1.0, 0.0)),
        "+i" => s((0.0, 1.0)),
        "-i" => s((0.0, -1.0)),
        _ => return None,
    })
}

/// Shared pulses, noise and tomography design for one configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: ExperimentConfig,
    envelope: GaussianEnvelope,
    noise: CollapseSet,
    ideal: ProcessTomography,
    noisy: ProcessTomography,
}

impl Simulator {
    pub fn new(config: &ExperimentConfig) -> Result<Self, ExperimentError> {
        config.validate()?;
        let envelope = calibrate_peak(config.pulse.sigma, config.pulse.length)?;
        let noise = config.collapse_set();
        let spam = match config.tomography.spam {
            SpamMode::Ideal => Spam::Ideal,
            SpamMode::Pulsed => Spam::Pulsed(Box::new(PulsedSpam::new(
                &envelope,
                &noise,
                config.pulse.dt,
                config.pulse.gap,
            )?)),
        };
        Ok(Self {
            config: config.clone(),
            envelope,
            noise,
            ideal: ProcessTomography::standard(Spam::Ideal),
            noisy: ProcessTomography::standard(spam),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn envelope(&self) -> &GaussianEnvelope {
        &self.envelope
    }

    pub fn noise(&self) -> &CollapseSet {
        &self.noise
    }

    /// Whether a noisy model distinct from the noiseless one is configured.
    pub fn models(&self) -> Vec<Model> {
        if self.config.noise.enabled {
            vec![Model::Noiseless, Model::Noisy]
        } else {
            vec![Model::Noiseless]
        }
    }

    pub fn pulse_spec(&self, gate: &GateSpec) -> Result<PulseSpec, ExperimentError> {
        Ok(PulseSpec::new(self.envelope, gate.drive(), self.config.pulse.dt)?)
    }

    pub fn hamiltonian(&self, gate: &GateSpec) -> InteractionHamiltonian {
        InteractionHamiltonian::new(self.envelope, gate.drive())
    }

    /// Gate channel; the noiseless model conjugates by the propagator.
    pub fn gate_channel(&self, gate: &GateSpec, model: Model) -> Result<Superoperator, ExperimentError> {
        let noise = match model {
            Model::Noiseless => CollapseSet::empty(),
            Model::Noisy => self.noise.clone(),
        };
        Ok(channel_of(&self.hamiltonian(gate), &noise, self.config.pulse.dt)?)
    }

    /// Gates applied in order with the configured gap between pulses.
    pub fn sequence_channel(&self, gates: &[GateSpec], model: Model) -> Result<Superoperator, ExperimentError> {
        let gap = match model {
            Model::Noisy if !self.noise.is_noiseless() && self.config.pulse.gap > 0.0 => lindblad_superoperator(
                &Idle {
                    duration: self.config.pulse.gap,
                },
                &self.noise,
                self.config.pulse.gap,
                self.config.pulse.dt,
            )?,
            _ => Superoperator::identity(),
        };
        let mut total = Superoperator::identity();
        for (k, g) in gates.iter().enumerate() {
            if k > 0 {
                total = total.then(&gap);
            }
            total = total.then(&self.gate_channel(g, model)?);
        }
        Ok(total)
    }

    /// Process tomography of `channel`. The noiseless model always uses
    /// exact records and ideal preparation; the noisy model follows the
    /// tomography section of the configuration.
    pub fn tomography(
        &self,
        channel: &Superoperator,
        model: Model,
        seed: u64,
    ) -> Result<ProcessMatrix, ExperimentError> {
        let apply = |r: &Mat3| channel.apply(r);
        match model {
            Model::Noiseless => {
                let record = self.ideal.acquire(&apply, Shots::Exact, seed);
                Ok(linear_inversion(&self.ideal, &record)?)
            }
            Model::Noisy => {
                let record = self.noisy.acquire(&apply, self.config.tomography.shots(), seed);
                self.reconstruct(&record)
            }
        }
    }

    /// Linear inversion for exact records, maximum likelihood for counts.
    pub fn reconstruct(&self, record: &MeasurementRecord) -> Result<ProcessMatrix, ExperimentError> {
        match record.data {
            RecordData::Probabilities(_) => Ok(linear_inversion(&self.noisy, record)?),
            RecordData::Counts(_) => {
                let options = MleOptions {
                    max_iterations: self.config.tomography.mle_max_iterations,
                    ..MleOptions::default()
                };
                let out = mle_reconstruct(&self.noisy, record, &options)?;
                if !out.converged {
                    return Err(ExperimentError::NotConverged(out.iterations));
                }
                Ok(out.process)
            }
        }
    }

    pub fn design(&self) -> &ProcessTomography {
        &self.noisy
    }
}

/// Summary of one reconstructed logical process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSummary {
    pub model: Model,
    pub chi: ProcessMatrix,
    pub reduced: ReducedProcessMatrix,
    /// Fidelity of `χ̃` to the analytic target.
    pub fidelity: f64,
}

impl ProcessSummary {
    fn new(model: Model, chi: ProcessMatrix, target: &LogicalUnitary) -> Self {
        let reduced = chi.reduce();
        let fidelity = process_fidelity(&reduced, &ReducedProcessMatrix::from_unitary(target));
        Self {
            model,
            chi,
            reduced,
            fidelity,
        }
    }

    pub fn trace(&self) -> f64 {
        self.reduced.trace()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub phi: f64,
    pub summary: ProcessSummary,
}

fn point_seed(base: u64, index: usize, model: Model) -> u64 {
    base.wrapping_add(2 * index as u64 + matches!(model, Model::Noisy) as u64)
}

/// Process tomography of the gate at every `θ` of the sweep grid, once per
/// configured model. Rows are ordered by grid point, then model.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    let sim = Simulator::new(config)?;
    let phi = config.sweep.phi;
    let jobs: Vec<(usize, f64, Model)> = config
        .sweep
        .theta
        .iter()
        .enumerate()
        .flat_map(|(k, &t)| sim.models().into_iter().map(move |m| (k, t, m)))
        .collect();
    jobs.par_iter()
        .map(|&(k, theta, model)| {
            let gate = GateSpec::new(theta, phi, format!("theta{k}"))?;
            let channel = sim.gate_channel(&gate, model)?;
            let chi = sim.tomography(&channel, model, point_seed(config.tomography.seed, k, model))?;
            Ok(SweepRow {
                theta,
                phi: gate.phi(),
                summary: ProcessSummary::new(model, chi, &gate.unitary()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateResult {
    pub gate: GateSpec,
    pub summary: ProcessSummary,
}

/// Full and reduced process matrices of every configured gate.
pub fn run_gates(config: &ExperimentConfig) -> Result<Vec<GateResult>, ExperimentError> {
    let sim = Simulator::new(config)?;
    let jobs: Vec<(usize, GateSpec, Model)> = config
        .gates
        .iter()
        .enumerate()
        .flat_map(|(k, _)| {
            let g = config.gate(&config.gates[k].label).expect("validated");
            sim.models().into_iter().map(move |m| (k, g.clone(), m))
        })
        .collect();
    jobs.par_iter()
        .map(|(k, gate, model)| {
            let channel = sim.gate_channel(gate, *model)?;
            let seed = point_seed(config.tomography.seed, 1000 + k, *model);
            let chi = sim.tomography(&channel, *model, seed)?;
            Ok(GateResult {
                gate: gate.clone(),
                summary: ProcessSummary::new(*model, chi, &gate.unitary()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRow {
    /// Gate labels in application order.
    pub order: Vec<String>,
    pub analytic: LogicalUnitary,
    /// `max |U_pulse − U_analytic|` on the logical block of the noiseless
    /// concatenated propagator.
    pub pulse_error: f64,
    pub summary: ProcessSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    pub rows: Vec<SequenceRow>,
    /// Overlap of the two orderings when exactly two gates are given.
    pub commutation_overlap: Option<f64>,
}

/// Composite of the configured gate sequence, and of its reverse when it
/// has exactly two gates.
pub fn run_sequence(config: &ExperimentConfig) -> Result<SequenceResult, ExperimentError> {
    let sim = Simulator::new(config)?;
    let forward: Vec<GateSpec> = config
        .sequence
        .gates
        .iter()
        .map(|l| config.gate(l).expect("validated"))
        .collect();
    let mut orders = vec![forward.clone()];
    if forward.len() == 2 {
        orders.push(forward.iter().rev().cloned().collect());
    }
    let overlap = (orders.len() == 2).then(|| {
        let a = compose_sequence(orders[0].iter().map(|g| g.unitary()).collect::<Vec<_>>().iter());
        let b = compose_sequence(orders[1].iter().map(|g| g.unitary()).collect::<Vec<_>>().iter());
        commutation_overlap(&a, &b)
    });

    let jobs: Vec<(usize, Model)> = (0..orders.len())
        .flat_map(|k| sim.models().into_iter().map(move |m| (k, m)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(k, model)| {
            let gates = &orders[k];
            let units: Vec<LogicalUnitary> = gates.iter().map(GateSpec::unitary).collect();
            let analytic = compose_sequence(units.iter());
            let mut u = Mat3::identity();
            for g in gates {
                u = sim.pulse_spec(g).and_then(|s| Ok(crate::evolution::propagator(&s)?))? * u;
            }
            let pulse_error = analytic.max_distance(&LogicalUnitary(LogicalUnitary::from_qutrit_block(&u)));
            let channel = sim.sequence_channel(gates, model)?;
            let seed = point_seed(config.tomography.seed, 2000 + k, model);
            let chi = sim.tomography(&channel, model, seed)?;
            Ok(SequenceRow {
                order: gates.iter().map(|g| g.label().to_string()).collect(),
                analytic: analytic.clone(),
                pulse_error,
                summary: ProcessSummary::new(model, chi, &analytic),
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(SequenceResult {
        rows,
        commutation_overlap: overlap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSample {
    /// ns from the start of the first pulse.
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// `⟨e|ρ|e⟩`.
    pub aux_population: f64,
}

impl BlochSample {
    fn of(time: f64, rho: &Mat3) -> Self {
        let v = logical_bloch(rho);
        Self {
            time,
            x: v.x,
            y: v.y,
            z: v.z,
            aux_population: rho[(LEVEL_E, LEVEL_E)].re,
        }
    }
}

/// Logical Bloch vector during the pulsed gate sequence of the `bloch`
/// section (falling back to the `sequence` gates), sampled every `stride`
/// integrator steps and at the end of each pulse. Uses the master equation
/// when noise is enabled.
pub fn export_bloch(config: &ExperimentConfig, initial: &QutritState) -> Result<Vec<BlochSample>, ExperimentError> {
    let leak = initial.population(LEVEL_E);
    if leak > 1e-12 {
        return Err(ExperimentError::InitialStateLeaked(leak));
    }
    let sim = Simulator::new(config)?;
    let labels = if config.bloch.gates.is_empty() {
        &config.sequence.gates
    } else {
        &config.bloch.gates
    };
    let dt = config.pulse.dt;
    let stride = config.bloch.stride;
    let mut rho = *initial.density().matrix();
    let mut offset = 0.0;
    let mut samples = vec![BlochSample::of(0.0, &rho)];

    let mut segments: Vec<Box<dyn crate::evolution::Hamiltonian>> = Vec::new();
    for (k, label) in labels.iter().enumerate() {
        if k > 0 && config.pulse.gap > 0.0 {
            segments.push(Box::new(Idle {
                duration: config.pulse.gap,
            }));
        }
        let gate = config.gate(label).expect("validated");
        segments.push(Box::new(sim.hamiltonian(&gate)));
    }

    for h in &segments {
        let duration = h.duration();
        let mut step = 0usize;
        if sim.noise().is_noiseless() {
            let start = rho;
            let mut last = rho;
            propagate_with(h.as_ref(), dt, |k, t, u| {
                if k == 0 {
                    return;
                }
                last = u * start * u.adjoint();
                if k % stride == 0 {
                    samples.push(BlochSample::of(offset + t, &last));
                }
                step = k;
            })?;
            rho = last;
        } else {
            let start = DensityMatrix::from_matrix_unchecked(rho);
            let out = lindblad_trajectory(&start, h.as_ref(), sim.noise(), duration, dt, |t, r| {
                step += 1;
                if step % stride == 0 {
                    samples.push(BlochSample::of(offset + t, r));
                }
            })?;
            rho = *out.matrix();
        }
        offset += duration;
        if step % stride != 0 {
            samples.push(BlochSample::of(offset, &rho));
        }
    }
    Ok(samples)
}

/// Analytic endpoint of [`export_bloch`] for a noiseless run.
pub fn analytic_bloch_endpoint(config: &ExperimentConfig, initial: &QutritState) -> nalgebra::Vector3<f64> {
    let labels = if config.bloch.gates.is_empty() {
        &config.sequence.gates
    } else {
        &config.bloch.gates
    };
    let units: Vec<LogicalUnitary> = labels
        .iter()
        .map(|l| config.gate(l).expect("validated").unitary())
        .collect();
    let u = compose_sequence(units.iter());
    let psi = initial.amplitudes();
    let a = u.0[(0, 0)] * psi[LEVEL_0] + u.0[(0, 1)] * psi[LEVEL_1];
    let b = u.0[(1, 0)] * psi[LEVEL_0] + u.0[(1, 1)] * psi[LEVEL_1];
    let mut rho = Mat3::zeros();
    let v = [a, b];
    let idx = [LEVEL_0, LEVEL_1];
    for i in 0..2 {
        for j in 0..2 {
            rho[(idx[i], idx[j])] = v[i] * v[j].conj();
        }
    }
    logical_bloch(&rho)
}

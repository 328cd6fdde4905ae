//! Process tomography: data acquisition through preparation, channel and
//! analysis, and linear inversion of the resulting record.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::design::{prepare_input, InputStateSet, MeasurementSettings, Spam, ANALYSIS_SLOTS};
use super::mle::{mle_reconstruct, MleOptions, MleOutcome};
use super::state::{sample_counts, StateTomography};
use super::{Mat9, ProcessMatrix, ReducedProcessMatrix, Shots, TomographyError};
use crate::evolution::{vec_rm, Superoperator};
use crate::qutrit::{DensityMatrix, Mat3};

/// Outcome table indexed `[input][setting][outcome]`.
#[derive(Debug, Clone, PartialEq)]
pub enum RecordData {
    Probabilities(Vec<Vec<[f64; 3]>>),
    Counts(Vec<Vec<[u64; 3]>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub data: RecordData,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

/// Tolerance on `Σ_o p_so = 1` for exact records.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

impl MeasurementRecord {
    pub fn shape(&self) -> (usize, usize) {
        match &self.data {
            RecordData::Probabilities(p) => (p.len(), p.first().map_or(0, Vec::len)),
            RecordData::Counts(n) => (n.len(), n.first().map_or(0, Vec::len)),
        }
    }

    pub fn validate(&self, inputs: usize, settings: usize) -> Result<(), TomographyError> {
        let bad = |msg: String| Err(TomographyError::InvalidRecord(msg));
        let rows_ok = match &self.data {
            RecordData::Probabilities(p) => p.len() == inputs && p.iter().all(|r| r.len() == settings),
            RecordData::Counts(n) => n.len() == inputs && n.iter().all(|r| r.len() == settings),
        };
        if !rows_ok {
            return bad(format!("expected {inputs}×{settings}×3 outcomes"));
        }
        match &self.data {
            RecordData::Probabilities(p) => {
                for (k, row) in p.iter().enumerate() {
                    for (s, probs) in row.iter().enumerate() {
                        if probs.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                            return bad(format!("probability outside [0, 1] at input {k}, setting {s}"));
                        }
                        let sum: f64 = probs.iter().sum();
                        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
                            return bad(format!("probabilities sum to {sum} at input {k}, setting {s}"));
                        }
                    }
                }
            }
            RecordData::Counts(n) => {
                let Some(shots) = self.shots else {
                    return bad("count records need a shot number".into());
                };
                for (k, row) in n.iter().enumerate() {
                    for (s, counts) in row.iter().enumerate() {
                        if counts.iter().sum::<u64>() != shots {
                            return bad(format!("counts do not sum to {shots} at input {k}, setting {s}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Relative frequencies `[input][setting][outcome]`.
    pub fn frequencies(&self) -> Vec<Vec<[f64; 3]>> {
        match &self.data {
            RecordData::Probabilities(p) => p.clone(),
            RecordData::Counts(n) => n
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| {
                            let total = c.iter().sum::<u64>().max(1) as f64;
                            c.map(|x| x as f64 / total)
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Likelihood weights: raw counts, or probabilities for exact records.
    pub fn weights(&self) -> Vec<Vec<[f64; 3]>> {
        match &self.data {
            RecordData::Probabilities(p) => p.clone(),
            RecordData::Counts(n) => n
                .iter()
                .map(|row| row.iter().map(|c| c.map(|x| x as f64)).collect())
                .collect(),
        }
    }
}

/// Inputs, analysis settings and how they are physically realized.
#[derive(Debug, Clone)]
pub struct ProcessTomography {
    inputs: InputStateSet,
    settings: MeasurementSettings,
    state: StateTomography,
    spam: Spam,
    input_inverse: Mat9,
}

impl ProcessTomography {
    pub fn new(
        inputs: InputStateSet,
        settings: MeasurementSettings,
        spam: Spam,
    ) -> Result<Self, TomographyError> {
        let state = StateTomography::new(&settings)?;
        let densities = inputs.densities();
        let rin = Mat9::from_fn(|row, k| vec_rm(densities[k].matrix())[row]);
        let rank = rin.rank(1e-10);
        if rank < 9 {
            return Err(TomographyError::ReconstructionSingular(rank));
        }
        let input_inverse = rin.try_inverse().ok_or(TomographyError::ReconstructionSingular(rank))?;
        Ok(Self {
            inputs,
            settings,
            state,
            spam,
            input_inverse,
        })
    }

    pub fn standard(spam: Spam) -> Self {
        Self::new(InputStateSet::standard(), MeasurementSettings::standard(), spam)
            .expect("standard design is informationally complete")
    }

    pub fn inputs(&self) -> &InputStateSet {
        &self.inputs
    }

    pub fn settings(&self) -> &MeasurementSettings {
        &self.settings
    }

    pub fn state_tomography(&self) -> &StateTomography {
        &self.state
    }

    pub fn spam(&self) -> &Spam {
        &self.spam
    }

    /// Outcome probabilities for every input and setting after `channel`.
    pub fn probabilities<C>(&self, channel: &C) -> Vec<Vec<[f64; 3]>>
    where
        C: Fn(&Mat3) -> Mat3 + Sync,
    {
        (0..9)
            .into_par_iter()
            .map(|k| {
                let rho_in = prepare_input(&self.inputs, k, &self.spam);
                match &self.spam {
                    Spam::Ideal => {
                        let out = channel(rho_in.matrix());
                        self.state.probabilities(&out).into_iter().map(clean).collect()
                    }
                    Spam::Pulsed(p) => {
                        let out = p.gap().apply(&channel(&p.gap().apply(rho_in.matrix())));
                        self.settings
                            .recipes()
                            .iter()
                            .map(|r| {
                                let rho = p.recipe_channel(r, ANALYSIS_SLOTS).apply(&out);
                                clean(std::array::from_fn(|o| rho[(o, o)].re))
                            })
                            .collect()
                    }
                }
            })
            .collect()
    }

    /// Simulated record. Sampled records draw each input's counts from its
    /// own stream of a ChaCha generator seeded with `seed`.
    pub fn acquire<C>(&self, channel: &C, shots: Shots, seed: u64) -> MeasurementRecord
    where
        C: Fn(&Mat3) -> Mat3 + Sync,
    {
        let probs = self.probabilities(channel);
        match shots {
            Shots::Exact => MeasurementRecord {
                data: RecordData::Probabilities(probs),
                shots: None,
                seed: None,
            },
            Shots::Sampled(n) => {
                let counts = probs
                    .par_iter()
                    .enumerate()
                    .map(|(k, row)| {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(k as u64);
                        row.iter().map(|p| sample_counts(p, n, &mut rng)).collect()
                    })
                    .collect();
                MeasurementRecord {
                    data: RecordData::Counts(counts),
                    shots: Some(n),
                    seed: Some(seed),
                }
            }
        }
    }

    /// Output states reconstructed by unconstrained least squares.
    pub fn output_states(&self, record: &MeasurementRecord) -> Result<Vec<Mat3>, TomographyError> {
        record.validate(9, self.settings.recipes().len())?;
        record
            .frequencies()
            .iter()
            .map(|f| self.state.invert(f))
            .collect()
    }

    /// Superoperator fitted to the reconstructed outputs of the ideal inputs.
    pub fn fitted_superoperator(&self, record: &MeasurementRecord) -> Result<Superoperator, TomographyError> {
        let outputs = self.output_states(record)?;
        let sout = Mat9::from_fn(|row, k| vec_rm(&outputs[k])[row]);
        Ok(Superoperator(sout * self.input_inverse))
    }

    pub fn ideal_input(&self, index: usize) -> DensityMatrix {
        self.inputs.states()[index].density()
    }
}

/// Rounds away integration noise so each setting is a probability vector.
fn clean(p: [f64; 3]) -> [f64; 3] {
    let clipped = p.map(|x| x.max(0.0));
    let sum: f64 = clipped.iter().sum();
    clipped.map(|x| (x / sum).min(1.0))
}

/// `χ` by linear inversion of a record.
pub fn linear_inversion(
    tomo: &ProcessTomography,
    record: &MeasurementRecord,
) -> Result<ProcessMatrix, TomographyError> {
    Ok(ProcessMatrix::from_superoperator(&tomo.fitted_superoperator(record)?))
}

#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub record: MeasurementRecord,
    pub chi: ProcessMatrix,
    pub reduced: ReducedProcessMatrix,
    /// Present when the estimate came from maximum likelihood.
    pub mle: Option<MleOutcome>,
}

/// Acquires a record for `channel` and reconstructs `χ`: linear inversion
/// for exact probabilities, maximum likelihood for sampled counts.
pub fn process_tomography<C>(
    tomo: &ProcessTomography,
    channel: &C,
    shots: Shots,
    seed: u64,
) -> Result<TomographyResult, TomographyError>
where
    C: Fn(&Mat3) -> Mat3 + Sync,
{
    let record = tomo.acquire(channel, shots, seed);
    reconstruct(tomo, record)
}

/// Reconstruction step of [`process_tomography`] for an existing record.
pub fn reconstruct(
    tomo: &ProcessTomography,
    record: MeasurementRecord,
) -> Result<TomographyResult, TomographyError> {
    let (chi, mle) = match record.data {
        RecordData::Probabilities(_) => (linear_inversion(tomo, &record)?, None),
        RecordData::Counts(_) => {
            let outcome = mle_reconstruct(tomo, &record, &MleOptions::default())?;
            (outcome.process, Some(outcome))
        }
    };
    Ok(TomographyResult {
        reduced: chi.reduce(),
        record,
        chi,
        mle,
    })
}

//! Maximum-likelihood process reconstruction over completely positive,
//! trace-preserving maps, by the diluted `RρR` iteration on the Choi matrix.

use super::process::{linear_inversion, MeasurementRecord, ProcessTomography};
use super::{conjugate_input, partial_trace_output, Mat9, ProcessMatrix, TomographyError};
use crate::qutrit::{c, Mat3, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once the relative log-likelihood gain of an accepted step drops
    /// below this.
    pub tolerance: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleOutcome {
    pub process: ProcessMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every accepted iteration, starting at the seed.
    pub log_likelihood: Vec<f64>,
}

struct Term {
    weight: f64,
    operator: Mat9,
}

fn trace_product(a: &Mat9, b: &Mat9) -> f64 {
    let mut acc = 0.0;
    for i in 0..9 {
        for j in 0..9 {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

fn hermitian(m: &Mat9) -> Mat9 {
    (m + m.adjoint()) * c(0.5, 0.0)
}

fn inverse_sqrt(m: &Mat3) -> Option<Mat3> {
    let eig = ((m + m.adjoint()) * c(0.5, 0.0)).symmetric_eigen();
    let mut out = Mat3::zeros();
    for k in 0..3 {
        let l = eig.eigenvalues[k];
        if l <= 1e-14 {
            return None;
        }
        let v = eig.eigenvectors.column(k);
        out += v * v.adjoint() * C64::new(1.0 / l.sqrt(), 0.0);
    }
    Some(out)
}

/// Rescales `J` so that `Tr_out J = I`.
fn trace_normalize(j: &Mat9) -> Option<Mat9> {
    let x = inverse_sqrt(&partial_trace_output(j))?;
    Some(hermitian(&conjugate_input(&x, j)))
}

fn log_likelihood(terms: &[Term], j: &Mat9) -> Option<f64> {
    let mut total = 0.0;
    for t in terms {
        let p = trace_product(j, &t.operator);
        if p <= 0.0 {
            return None;
        }
        total += t.weight * p.ln();
    }
    Some(total)
}

/// Seed: the linear estimate clipped to its positive part, made trace
/// preserving, and mixed with the least amount of the depolarizing map that
/// gives every observed outcome positive probability.
fn seed(tomo: &ProcessTomography, record: &MeasurementRecord, terms: &[Term]) -> Mat9 {
    let depolarizing = Mat9::identity() * c(1.0 / 3.0, 0.0);
    let linear = linear_inversion(tomo, record)
        .map(|chi| hermitian(&chi.choi()))
        .unwrap_or(depolarizing);
    let eig = linear.symmetric_eigen();
    let mut clipped = Mat9::zeros();
    for k in 0..9 {
        let l = eig.eigenvalues[k];
        if l > 0.0 {
            let v = eig.eigenvectors.column(k);
            clipped += v * v.adjoint() * C64::new(l, 0.0);
        }
    }
    let base = trace_normalize(&clipped)
        .or_else(|| trace_normalize(&(clipped * c(1.0 - 1e-6, 0.0) + depolarizing * c(1e-6, 0.0))))
        .unwrap_or(depolarizing);
    let mut mix = 0.0;
    loop {
        let j = base * c(1.0 - mix, 0.0) + depolarizing * c(mix, 0.0);
        if log_likelihood(terms, &j).is_some() || mix >= 1.0 {
            return j;
        }
        mix = if mix == 0.0 { 1e-12 } else { (mix * 10.0).min(1.0) };
    }
}

/// Maximizes `Σ f_kso ln Tr[J (ρ_kᵀ ⊗ Π_so)]` over Choi matrices with
/// `J ⪰ 0` and `Tr_out J = I`. Every accepted step raises the likelihood;
/// a step that would lower it is retried with a smaller dilution.
pub fn mle_reconstruct(
    tomo: &ProcessTomography,
    record: &MeasurementRecord,
    options: &MleOptions,
) -> Result<MleOutcome, TomographyError> {
    record.validate(9, tomo.settings().recipes().len())?;
    let povm = tomo.state_tomography().povm();
    let weights = record.weights();
    let mut terms = Vec::new();
    for (k, row) in weights.iter().enumerate() {
        let rho_t = tomo.ideal_input(k).matrix().transpose();
        for (s, w) in row.iter().enumerate() {
            for (o, &weight) in w.iter().enumerate() {
                if weight > 0.0 {
                    let pi = &povm[s][o];
                    let operator = Mat9::from_fn(|r, col| rho_t[(r / 3, col / 3)] * pi[(r % 3, col % 3)]);
                    terms.push(Term { weight, operator });
                }
            }
        }
    }
    if terms.is_empty() {
        return Err(TomographyError::InvalidRecord("record holds no events".into()));
    }

    let mut j = seed(tomo, record, &terms);
    let mut current = log_likelihood(&terms, &j)
        .ok_or_else(|| TomographyError::MleFailed("no seed with positive likelihood".into()))?;
    let mut history = vec![current];
    let mut dilution = 100.0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let mut r = Mat9::zeros();
        for t in &terms {
            let p = trace_product(&j, &t.operator);
            r += t.operator * c(t.weight / p, 0.0);
        }
        let r = hermitian(&r);
        let scale = r.norm();
        if !(scale.is_finite() && scale > 0.0) {
            return Err(TomographyError::MleFailed("degenerate gradient".into()));
        }
        let r = r / c(scale, 0.0);

        let mut accepted = None;
        while dilution > 1e-12 {
            let step = Mat9::identity() + r * c(dilution, 0.0);
            let k = hermitian(&(step * j * step));
            if let Some(next) = trace_normalize(&k) {
                if let Some(l) = log_likelihood(&terms, &next) {
                    if l >= current {
                        accepted = Some((next, l));
                        break;
                    }
                }
            }
            dilution *= 0.5;
        }
        let Some((next, l)) = accepted else {
            // No ascent direction survives rounding: stationary point.
            converged = true;
            break;
        };
        let gain = (l - current) / current.abs().max(1.0);
        j = next;
        current = l;
        history.push(l);
        dilution = (dilution * 2.0).min(1e8);
        if gain < options.tolerance {
            converged = true;
            break;
        }
    }

    Ok(MleOutcome {
        process: ProcessMatrix::from_choi(&j),
        iterations,
        converged,
        log_likelihood: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{channel_of, InteractionHamiltonian, NoiseModel, Superoperator};
    use crate::gates::{embed_logical, GateSpec};
    use crate::pulse::PulseSpec;
    use crate::tomography::process::RecordData;
    use crate::tomography::{process_fidelity, ReducedProcessMatrix, Shots, Spam};

    #[test]
    fn likelihood_is_monotone_and_estimate_is_physical() {
        let tomo = ProcessTomography::standard(Spam::Ideal);
        let gate = GateSpec::hadamard();
        let spec = PulseSpec::calibrated(gate.drive(), 10.0, 40.0, 0.05).unwrap();
        let s = channel_of(
            &InteractionHamiltonian::from_spec(&spec),
            &NoiseModel::device().collapse_set(),
            0.05,
        )
        .unwrap();
        let record = tomo.acquire(&|r: &Mat3| s.apply(r), Shots::Sampled(1000), 3);
        let out = mle_reconstruct(&tomo, &record, &MleOptions::default()).unwrap();
        assert!(out.converged);
        assert!(out.log_likelihood.windows(2).all(|w| w[1] >= w[0]));
        assert!(out.process.min_eigenvalue() > -1e-9);
        assert!(out.process.trace_preservation_residual() < 1e-9);
        let target = ReducedProcessMatrix::from_unitary(&gate.unitary());
        let f = process_fidelity(&out.process.reduce(), &target);
        assert!(f > 0.9 && f <= 1.0 + 1e-9, "fidelity {f}");
    }

    #[test]
    fn exact_unitary_record_gives_the_unitary() {
        let tomo = ProcessTomography::standard(Spam::Ideal);
        let u = embed_logical(&GateSpec::not().unitary());
        let s = Superoperator::from_unitary(&u);
        let record = tomo.acquire(&|r: &Mat3| s.apply(r), Shots::Exact, 0);
        assert!(matches!(record.data, RecordData::Probabilities(_)));
        let out = mle_reconstruct(&tomo, &record, &MleOptions::default()).unwrap();
        let want = ProcessMatrix::from_unitary(&u);
        assert!(process_fidelity(&out.process, &want) > 1.0 - 1e-6);
    }
}

//! Density-matrix reconstruction from population measurements after
//! analysis rotations.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::design::MeasurementSettings;
use super::{Shots, TomographyError};
use crate::qutrit::{c, DensityMatrix, Mat3, C64};

/// Real Hermitian coordinates: diagonal entries, then `(Re, −Im)` of each
/// upper off-diagonal element.
fn hermitian_basis() -> [Mat3; 9] {
    let mut out = [Mat3::zeros(); 9];
    for (k, item) in out.iter_mut().enumerate().take(3) {
        item[(k, k)] = c(1.0, 0.0);
    }
    for (slot, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let x = &mut out[3 + 2 * slot];
        x[(i, j)] = c(1.0, 0.0);
        x[(j, i)] = c(1.0, 0.0);
        let y = &mut out[4 + 2 * slot];
        y[(i, j)] = c(0.0, -1.0);
        y[(j, i)] = c(0.0, 1.0);
    }
    out
}

/// Least-squares inversion of the linear map `ρ ↦ (Tr Π_so ρ)`.
#[derive(Debug, Clone)]
pub struct StateTomography {
    povm: Vec<[Mat3; 3]>,
    pseudo_inverse: DMatrix<f64>,
}

impl StateTomography {
    pub fn new(settings: &MeasurementSettings) -> Result<Self, TomographyError> {
        let povm = settings.povm();
        let basis = hermitian_basis();
        let rows = 3 * povm.len();
        let design = DMatrix::from_fn(rows, 9, |r, alpha| {
            (povm[r / 3][r % 3] * basis[alpha]).trace().re
        });
        let rank = design.rank(1e-10);
        if rank < 9 {
            return Err(TomographyError::ReconstructionSingular(rank));
        }
        let pseudo_inverse = design
            .pseudo_inverse(1e-12)
            .map_err(|e| TomographyError::InvalidRecord(e.to_string()))?;
        Ok(Self {
            povm,
            pseudo_inverse,
        })
    }

    pub fn standard() -> Self {
        Self::new(&MeasurementSettings::standard()).expect("standard settings are complete")
    }

    pub fn povm(&self) -> &[[Mat3; 3]] {
        &self.povm
    }

    /// Outcome probabilities `[setting][outcome]`.
    pub fn probabilities(&self, rho: &Mat3) -> Vec<[f64; 3]> {
        self.povm
            .iter()
            .map(|p| std::array::from_fn(|o| (p[o] * rho).trace().re))
            .collect()
    }

    /// Unconstrained Hermitian least-squares estimate with unit trace
    /// enforced only through the data.
    pub fn invert(&self, frequencies: &[[f64; 3]]) -> Result<Mat3, TomographyError> {
        if frequencies.len() != self.povm.len() {
            return Err(TomographyError::InvalidRecord(format!(
                "expected {} settings, got {}",
                self.povm.len(),
                frequencies.len()
            )));
        }
        let f = DVector::from_iterator(3 * frequencies.len(), frequencies.iter().flatten().copied());
        let r = &self.pseudo_inverse * f;
        Ok(hermitian_basis()
            .iter()
            .zip(r.iter())
            .fold(Mat3::zeros(), |acc, (h, &x)| acc + h * c(x, 0.0)))
    }
}

/// Multinomial draw of `shots` outcomes from three probabilities.
pub fn sample_counts<R: Rng + ?Sized>(p: &[f64; 3], shots: u64, rng: &mut R) -> [u64; 3] {
    let p0 = p[0].clamp(0.0, 1.0);
    let n0 = Binomial::new(shots, p0).expect("clamped probability").sample(rng);
    let rest = shots - n0;
    let tail = (1.0 - p0).max(0.0);
    let p1 = if tail > 0.0 {
        (p[1].max(0.0) / tail).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let n1 = Binomial::new(rest, p1).expect("clamped probability").sample(rng);
    [n0, n1, rest - n1]
}

/// Projects a Hermitian matrix onto the closest density matrix in the
/// Frobenius norm by clipping its spectrum onto the probability simplex.
pub fn project_to_density(m: &Mat3) -> DensityMatrix {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let lambda = project_simplex(&[eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]]);
    let mut out = Mat3::zeros();
    for (k, &l) in lambda.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        out += v * v.adjoint() * C64::new(l, 0.0);
    }
    DensityMatrix::from_matrix_unchecked(out)
}

fn project_simplex(x: &[f64; 3]) -> [f64; 3] {
    let mut sorted = *x;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if s - candidate > 0.0 {
            shift = candidate;
        }
    }
    x.map(|v| (v - shift).max(0.0))
}

/// Reconstructs `rho` from its ideal measurement statistics. Exact mode
/// returns the linear inversion; sampled mode draws multinomial counts and
/// projects the estimate onto the physical set.
pub fn state_tomography<R: Rng + ?Sized>(
    tomo: &StateTomography,
    rho: &DensityMatrix,
    shots: Shots,
    rng: &mut R,
) -> Result<DensityMatrix, TomographyError> {
    let p = tomo.probabilities(rho.matrix());
    match shots {
        Shots::Exact => Ok(DensityMatrix::from_matrix_unchecked(tomo.invert(&p)?)),
        Shots::Sampled(n) => {
            if n == 0 {
                return Err(TomographyError::InvalidRecord("zero shots".into()));
            }
            let freqs: Vec<[f64; 3]> = p
                .iter()
                .map(|ps| sample_counts(ps, n, rng).map(|k| k as f64 / n as f64))
                .collect();
            Ok(project_to_density(&tomo.invert(&freqs)?))
        }
    }
}

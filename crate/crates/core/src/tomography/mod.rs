//! State and process tomography over the full three-level space.
//!
//! Process matrices are expressed in [`OperatorBasis9`]:
//! `E(ρ) = Σ_mn χ_mn P_m ρ P_n†`. The logical block uses [`LogicalBasis4`].

pub mod design;
pub mod io;
pub mod mle;
pub mod process;
pub mod state;

use nalgebra::{DMatrix, Matrix4, SMatrix, SVector};
use thiserror::Error;

use crate::evolution::{EvolutionError, Superoperator};
use crate::gates::{embed_logical, LogicalUnitary};
use crate::qutrit::{c, LogicalBasis4, Mat3, OperatorBasis9, C64};

pub use design::{
    prepare_input, InputStateSet, MeasurementSettings, PulsedSpam, Rotation, Spam, Transition,
    TransitionPulse,
};
pub use mle::{mle_reconstruct, MleOptions, MleOutcome};
pub use process::{linear_inversion, process_tomography, ProcessTomography, TomographyResult};
pub use state::{state_tomography, StateTomography};

pub type Mat9 = SMatrix<C64, 9, 9>;

#[derive(Debug, Error)]
pub enum TomographyError {
    #[error("measurement design is not informationally complete (rank {0} < 9)")]
    ReconstructionSingular(usize),
    #[error("invalid measurement record: {0}")]
    InvalidRecord(String),
    #[error("maximum-likelihood iteration failed: {0}")]
    MleFailed(String),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

/// Number of shots per setting, or exact probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Sampled(u64),
}

/// Column `m` is the Choi vector of `P_m`: `v_{3i+a} = (P_m)_{ai}`.
fn choi_vectors() -> Mat9 {
    let basis = OperatorBasis9::standard();
    Mat9::from_fn(|row, m| basis.operators()[m][(row % 3, row / 3)])
}

/// Process matrix on the full qutrit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessMatrix {
    chi: Mat9,
}

impl ProcessMatrix {
    pub fn new(chi: Mat9) -> Self {
        Self { chi }
    }

    pub fn chi(&self) -> &Mat9 {
        &self.chi
    }

    /// `χ = c c†` with `c` the basis coefficients of `u`. For an embedded
    /// logical unitary the phase of the `E` component is part of the
    /// channel, so compare gates on the logical block with
    /// [`ReducedProcessMatrix`].
    pub fn from_unitary(u: &Mat3) -> Self {
        let coeffs = SVector::<C64, 9>::from(OperatorBasis9::standard().decompose(u));
        Self::new(coeffs * coeffs.adjoint())
    }

    /// From the Choi matrix `J = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, indexed `3·in + out`.
    pub fn from_choi(choi: &Mat9) -> Self {
        let v = choi_vectors();
        let v_inv = v.try_inverse().expect("operator basis is linearly independent");
        Self::new(v_inv * choi * v_inv.adjoint())
    }

    pub fn choi(&self) -> Mat9 {
        let v = choi_vectors();
        v * self.chi * v.adjoint()
    }

    pub fn from_superoperator(s: &Superoperator) -> Self {
        Self::from_choi(&superoperator_to_choi(s))
    }

    pub fn to_superoperator(&self) -> Superoperator {
        choi_to_superoperator(&self.choi())
    }

    pub fn apply(&self, rho: &Mat3) -> Mat3 {
        let ops = OperatorBasis9::standard();
        let mut out = Mat3::zeros();
        for m in 0..9 {
            for n in 0..9 {
                let w = self.chi[(m, n)];
                if w.norm() > 0.0 {
                    out += ops.operators()[m] * rho * ops.operators()[n].adjoint() * w;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.chi.trace().re
    }

    /// `max |Tr_out J − I|`; zero for a trace-preserving map.
    pub fn trace_preservation_residual(&self) -> f64 {
        let lambda = partial_trace_output(&self.choi());
        (lambda - Mat3::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (self.chi - self.chi.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part of `χ`.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.chi + self.chi.adjoint()) * c(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The logical 4×4 block `χ̃`, rows and columns `{I₀₁, X₀₁, −iY₀₁, Z₀₁}`.
    pub fn reduce(&self) -> ReducedProcessMatrix {
        ReducedProcessMatrix::new(Matrix4::from_fn(|m, n| self.chi[(m, n)]))
    }
}

/// Free-function form of [`ProcessMatrix::reduce`].
pub fn reduce_chi(chi: &ProcessMatrix) -> ReducedProcessMatrix {
    chi.reduce()
}

/// Process matrix restricted to the logical subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedProcessMatrix {
    chi: Matrix4<C64>,
}

impl ReducedProcessMatrix {
    pub fn new(chi: Matrix4<C64>) -> Self {
        Self { chi }
    }

    pub fn chi(&self) -> &Matrix4<C64> {
        &self.chi
    }

    /// Ideal logical map `ρ ↦ UρU†` on the `{|0⟩, |1⟩}` block.
    pub fn from_unitary(u: &LogicalUnitary) -> Self {
        let coeffs = nalgebra::Vector4::from(LogicalBasis4::standard().decompose(&embed_logical(u)));
        Self::new(coeffs * coeffs.adjoint())
    }

    pub fn trace(&self) -> f64 {
        self.chi.trace().re
    }

    /// Real diagonal `(χ̃_II, χ̃_XX, χ̃_ỸỸ, χ̃_ZZ)`.
    pub fn diagonal(&self) -> [f64; 4] {
        std::array::from_fn(|k| self.chi[(k, k)].re)
    }
}

/// Square process matrices that can be compared by [`process_fidelity`].
pub trait ChiMatrix {
    fn chi_dynamic(&self) -> DMatrix<C64>;
}

impl ChiMatrix for ProcessMatrix {
    fn chi_dynamic(&self) -> DMatrix<C64> {
        DMatrix::from_fn(9, 9, |m, n| self.chi[(m, n)])
    }
}

impl ChiMatrix for ReducedProcessMatrix {
    fn chi_dynamic(&self) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |m, n| self.chi[(m, n)])
    }
}

/// `Re tr(χ_exp χ_th) / (tr χ_th)²`, equal to one when `χ_exp = χ_th` for a
/// unitary target.
pub fn process_fidelity<A: ChiMatrix, B: ChiMatrix>(experimental: &A, theoretical: &B) -> f64 {
    let a = experimental.chi_dynamic();
    let b = theoretical.chi_dynamic();
    assert_eq!(a.shape(), b.shape(), "process matrices must share a basis");
    let norm = b.trace().re;
    (a * &b).trace().re / (norm * norm)
}

pub(crate) fn superoperator_to_choi(s: &Superoperator) -> Mat9 {
    // J_{(i,a),(j,b)} = E(|i⟩⟨j|)_{ab} = S_{(a,b),(i,j)}.
    Mat9::from_fn(|row, col| {
        let (i, a) = (row / 3, row % 3);
        let (j, b) = (col / 3, col % 3);
        s.0[(3 * a + b, 3 * i + j)]
    })
}

pub(crate) fn choi_to_superoperator(j: &Mat9) -> Superoperator {
    Superoperator(Mat9::from_fn(|row, col| {
        let (a, b) = (row / 3, row % 3);
        let (i, jj) = (col / 3, col % 3);
        j[(3 * i + a, 3 * jj + b)]
    }))
}

/// `Tr_out J` as a 3×3 matrix on the input space.
pub(crate) fn partial_trace_output(j: &Mat9) -> Mat3 {
    Mat3::from_fn(|i, k| (0..3).map(|a| j[(3 * i + a, 3 * k + a)]).sum())
}

/// `(X ⊗ I)·J·(X ⊗ I)†`, `X` acting on the input factor.
pub(crate) fn conjugate_input(x: &Mat3, j: &Mat9) -> Mat9 {
    let big = Mat9::from_fn(|row, col| {
        if row % 3 == col % 3 {
            x[(row / 3, col / 3)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    big * j * big.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{channel_of, NoiseModel};
    use crate::gates::GateSpec;
    use crate::qutrit::{max_abs, matrix_unit};

    #[test]
    fn identity_channel_splits_between_logical_identity_and_e() {
        let chi = ProcessMatrix::from_superoperator(&Superoperator::identity());
        for m in 0..9 {
            for n in 0..9 {
                let want = if (m == 0 || m == 8) && (n == 0 || n == 8) { 1.0 } else { 0.0 };
                assert!((chi.chi()[(m, n)] - c(want, 0.0)).norm() < 1e-14, "({m},{n})");
            }
        }
        assert!((chi.trace() - 2.0).abs() < 1e-14);
        assert!((chi.reduce().trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn choi_and_superoperator_round_trip() {
        let noise = NoiseModel::device().collapse_set();
        let gate = GateSpec::hadamard();
        let spec = crate::pulse::PulseSpec::calibrated(gate.drive(), 10.0, 40.0, 0.05).unwrap();
        let h = crate::evolution::InteractionHamiltonian::from_spec(&spec);
        let s = channel_of(&h, &noise, 0.05).unwrap();
        let chi = ProcessMatrix::from_superoperator(&s);
        let back = chi.to_superoperator();
        assert!((back.0 - s.0).iter().all(|z| z.norm() < 1e-12));
        for (i, j) in [(0, 0), (0, 2), (1, 2), (2, 1)] {
            let rho = matrix_unit(i, j);
            assert!(max_abs(&(chi.apply(&rho) - s.apply(&rho))) < 1e-12);
        }
        assert!(chi.trace_preservation_residual() < 1e-9);
        assert!(chi.hermiticity_deviation() < 1e-12);
        assert!(chi.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn unitary_chi_matches_superoperator_chi() {
        let u = embed_logical(&GateSpec::not().unitary());
        let a = ProcessMatrix::from_unitary(&u);
        let b = ProcessMatrix::from_superoperator(&Superoperator::from_unitary(&u));
        assert!((a.chi() - b.chi()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn fidelity_of_target_with_itself_is_one() {
        for gate in [GateSpec::hadamard(), GateSpec::not()] {
            let red = ReducedProcessMatrix::from_unitary(&gate.unitary());
            assert!((process_fidelity(&red, &red) - 1.0).abs() < 1e-14);
            let full = ProcessMatrix::from_unitary(&embed_logical(&gate.unitary()));
            assert!((process_fidelity(&full, &full) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn orthogonal_logical_gates_have_zero_overlap() {
        let x = ReducedProcessMatrix::from_unitary(&GateSpec::not().unitary());
        let z = ReducedProcessMatrix::from_unitary(&GateSpec::sigma_z().unitary());
        assert!(process_fidelity(&x, &z).abs() < 1e-14);
        // NOT is X up to phase: all weight on χ̃_XX.
        let d = x.diagonal();
        assert!((d[1] - 1.0).abs() < 1e-14 && d[0].abs() < 1e-14);
    }
}

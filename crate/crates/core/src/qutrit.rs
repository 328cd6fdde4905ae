//! Three-level states, operators and the fixed operator bases.
//!
//! Every matrix in the crate uses the level order `(|0⟩, |e⟩, |1⟩)`: the
//! ground state, the auxiliary first excited state and the second excited
//! state of the transmon ladder. The logical qubit lives on `|0⟩, |1⟩`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type Mat3 = Matrix3<C64>;
pub type Vec3 = Vector3<C64>;

/// Index of the ground state `|0⟩`.
pub const LEVEL_0: usize = 0;
/// Index of the auxiliary state `|e⟩`.
pub const LEVEL_E: usize = 1;
/// Index of the second excited state `|1⟩`.
pub const LEVEL_1: usize = 2;

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;
const EIGEN_FLOOR: f64 = -1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QutritError {
    #[error("state is not normalized: norm² = {0}")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian: max |m - m†| = {0:e}")]
    NonHermitianInput(f64),
    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),
    #[error("operator basis Gram matrix is numerically singular")]
    SingularBasis,
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `|i⟩⟨j|`.
pub fn matrix_unit(i: usize, j: usize) -> Mat3 {
    let mut m = Mat3::zeros();
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

pub fn dagger(m: &Mat3) -> Mat3 {
    m.adjoint()
}

pub fn commutator(a: &Mat3, b: &Mat3) -> Mat3 {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &Mat3) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `max |U†U − I|`.
pub fn unitarity_deviation(u: &Mat3) -> f64 {
    max_abs(&(u.adjoint() * u - Mat3::identity()))
}

/// `exp(−i·s·h)` for Hermitian `h`, computed from its eigendecomposition.
pub fn expm_hermitian(h: &Mat3, s: f64) -> Result<Mat3, QutritError> {
    let dev = hermiticity_deviation(h);
    if dev > HERMITIAN_TOL {
        return Err(QutritError::NonHermitianInput(dev));
    }
    Ok(expm_hermitian_unchecked(h, s))
}

/// Same as [`expm_hermitian`] without the input check. The caller
/// guarantees `h` is Hermitian (used in the propagator inner loop).
pub(crate) fn expm_hermitian_unchecked(h: &Mat3, s: f64) -> Mat3 {
    // Symmetrize so rounding noise in the lower triangle is ignored consistently.
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let phases = Vector3::from_iterator(
        eig.eigenvalues
            .iter()
            .map(|&lambda| C64::from_polar(1.0, -s * lambda)),
    );
    let v = &eig.eigenvectors;
    v * Mat3::from_diagonal(&phases) * v.adjoint()
}

/// Pure state of the three-level atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritState {
    amplitudes: Vec3,
}

impl QutritState {
    pub fn new(amplitudes: Vec3) -> Result<Self, QutritError> {
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(QutritError::NotNormalized(norm_sqr));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vec3) -> Result<Self, QutritError> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QutritError::NotNormalized(norm * norm));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn basis(level: usize) -> Self {
        let mut amplitudes = Vec3::zeros();
        amplitudes[level] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `(|i⟩ + phase·|j⟩)/√2`.
    pub fn superposition(i: usize, j: usize, phase: C64) -> Self {
        let mut amplitudes = Vec3::zeros();
        amplitudes[i] += C64::new(1.0, 0.0);
        amplitudes[j] += phase;
        Self::normalized(amplitudes).expect("distinct levels give a nonzero vector")
    }

    pub fn amplitudes(&self) -> &Vec3 {
        &self.amplitudes
    }

    pub fn amplitude(&self, level: usize) -> C64 {
        self.amplitudes[level]
    }

    pub fn population(&self, level: usize) -> f64 {
        self.amplitudes[level].norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QutritState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Applies a unitary and renormalizes away rounding drift.
    pub fn evolve(&self, u: &Mat3) -> Self {
        Self::normalized(u * self.amplitudes).expect("unitary image of a unit vector is nonzero")
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            elements: self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Mixed state of the three-level atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    elements: Mat3,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(elements: Mat3) -> Result<Self, QutritError> {
        let dev = hermiticity_deviation(&elements);
        if dev > NORM_TOL {
            return Err(QutritError::NonHermitianInput(dev));
        }
        let tr = elements.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(QutritError::BadTrace(tr.re));
        }
        let min = min_eigenvalue(&elements);
        if min < EIGEN_FLOOR {
            return Err(QutritError::NegativeEigenvalue(min));
        }
        Ok(Self { elements })
    }

    /// Wraps a matrix produced by trusted dynamics without validation.
    pub fn from_matrix_unchecked(elements: Mat3) -> Self {
        Self { elements }
    }

    pub fn pure(state: &QutritState) -> Self {
        state.density()
    }

    pub fn maximally_mixed() -> Self {
        Self {
            elements: Mat3::identity() / C64::new(3.0, 0.0),
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.elements
    }

    pub fn population(&self, level: usize) -> f64 {
        self.elements[(level, level)].re
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        let sym = (self.elements + self.elements.adjoint()) * C64::new(0.5, 0.0);
        let ev = sym.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2]];
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_to_pure(&self, state: &QutritState) -> f64 {
        let a = state.amplitudes();
        a.dotc(&(self.elements * a)).re
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &Mat3) -> Self {
        Self {
            elements: u * self.elements * u.adjoint(),
        }
    }
}

pub(crate) fn min_eigenvalue(m: &Mat3) -> f64 {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Pauli triple `(σˣ, σʸ, σᶻ)` acting on levels `i` and `j`, with `|i⟩` the
/// `+1` eigenstate of `σᶻ`.
pub fn pauli_pair(i: usize, j: usize) -> (Mat3, Mat3, Mat3) {
    let ij = matrix_unit(i, j);
    let ji = matrix_unit(j, i);
    let x = ij + ji;
    let y = ij * C64::new(0.0, -1.0) + ji * C64::new(0.0, 1.0);
    let z = matrix_unit(i, i) - matrix_unit(j, j);
    (x, y, z)
}

/// An ordered, linearly independent set of `N` operators on the qutrit with
/// a precomputed Hilbert–Schmidt Gram matrix.
#[derive(Debug, Clone)]
pub struct OperatorBasis<const N: usize> {
    operators: [Mat3; N],
    names: [&'static str; N],
    gram_inverse: DMatrix<C64>,
}

/// `{I₀₁, σ₀₁ˣ, −iσ₀₁ʸ, σ₀₁ᶻ, σ₀ₑˣ, −iσ₀ₑʸ, σ₁ₑˣ, −iσ₁ₑʸ, E}`.
pub type OperatorBasis9 = OperatorBasis<9>;
/// `{I, X, Ỹ, Z} = {I₀₁, σ₀₁ˣ, −iσ₀₁ʸ, σ₀₁ᶻ}`.
pub type LogicalBasis4 = OperatorBasis<4>;

pub const BASIS9_NAMES: [&str; 9] = ["I01", "X01", "-iY01", "Z01", "X0e", "-iY0e", "X1e", "-iY1e", "E"];
pub const LOGICAL4_NAMES: [&str; 4] = ["I", "X", "-iY", "Z"];

fn hs_inner(a: &Mat3, b: &Mat3) -> C64 {
    (a.adjoint() * b).trace()
}

impl<const N: usize> OperatorBasis<N> {
    pub fn new(operators: [Mat3; N], names: [&'static str; N]) -> Result<Self, QutritError> {
        let gram = DMatrix::from_fn(N, N, |k, l| hs_inner(&operators[k], &operators[l]));
        let scale = gram.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let svd = gram.clone().svd(false, false);
        let smallest = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        if scale == 0.0 || smallest < 1e-12 * scale {
            return Err(QutritError::SingularBasis);
        }
        let gram_inverse = gram.try_inverse().ok_or(QutritError::SingularBasis)?;
        Ok(Self {
            operators,
            names,
            gram_inverse,
        })
    }

    pub fn operators(&self) -> &[Mat3; N] {
        &self.operators
    }

    pub fn names(&self) -> &[&'static str; N] {
        &self.names
    }

    pub fn len(&self) -> usize {
        N
    }

    pub fn is_empty(&self) -> bool {
        N == 0
    }

    /// Hilbert–Schmidt Gram matrix `G_kl = tr(P_k† P_l)`.
    pub fn gram(&self) -> DMatrix<C64> {
        DMatrix::from_fn(N, N, |k, l| hs_inner(&self.operators[k], &self.operators[l]))
    }

    /// Coefficients `c` with `Σ c_k P_k = op`, solved through the Gram
    /// matrix. For `N < 9` this is the orthogonal projection onto the span.
    pub fn decompose(&self, op: &Mat3) -> [C64; N] {
        let rhs = DVector::from_iterator(N, self.operators.iter().map(|p| hs_inner(p, op)));
        let sol = &self.gram_inverse * rhs;
        std::array::from_fn(|k| sol[k])
    }

    pub fn recompose(&self, coefficients: &[C64; N]) -> Mat3 {
        self.operators
            .iter()
            .zip(coefficients)
            .fold(Mat3::zeros(), |acc, (p, &ck)| acc + p * ck)
    }
}

impl OperatorBasis<9> {
    pub fn standard() -> Self {
        let (x01, y01, z01) = pauli_pair(LEVEL_0, LEVEL_1);
        let (x0e, y0e, _) = pauli_pair(LEVEL_0, LEVEL_E);
        let (x1e, y1e, _) = pauli_pair(LEVEL_1, LEVEL_E);
        let mi = C64::new(0.0, -1.0);
        let i01 = matrix_unit(LEVEL_0, LEVEL_0) + matrix_unit(LEVEL_1, LEVEL_1);
        let e = matrix_unit(LEVEL_E, LEVEL_E);
        Self::new(
            [i01, x01, y01 * mi, z01, x0e, y0e * mi, x1e, y1e * mi, e],
            BASIS9_NAMES,
        )
        .expect("standard basis is linearly independent")
    }
}

impl OperatorBasis<4> {
    pub fn standard() -> Self {
        let full = OperatorBasis9::standard();
        let ops = full.operators();
        Self::new([ops[0], ops[1], ops[2], ops[3]], LOGICAL4_NAMES)
            .expect("logical basis is linearly independent")
    }
}

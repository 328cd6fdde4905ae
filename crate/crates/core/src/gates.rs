//! Closed-form holonomies, composition, and the Bloch-sphere rotation
//! picture of logical gates.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector3};
use thiserror::Error;

use crate::pulse::{DriveConfig, PulseError};
use crate::qutrit::{Mat3, C64, LEVEL_0, LEVEL_1, LEVEL_E};

pub type Mat2 = Matrix2<C64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("gate angle {name} = {value} outside its allowed range")]
    InvalidAngle { name: &'static str, value: f64 },
    #[error("rotation is proportional to the identity; its axis is undefined")]
    DegenerateRotation,
    #[error("matrix is not unitary: max |U†U − I| = {0:e}")]
    NotUnitary(f64),
}

impl From<PulseError> for GateError {
    fn from(e: PulseError) -> Self {
        match e {
            PulseError::InvalidAngle { name, value } => GateError::InvalidAngle { name, value },
            other => unreachable!("drive construction from valid angles cannot fail: {other}"),
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

/// Holonomy parameters `(θ, φ)` of one closed loop, with a display label.
///
/// Under the two-tone Hamiltonian `(Ω/2)(a|e⟩⟨0| + b|e⟩⟨1| + h.c.)` the
/// cyclic evolution acts on the logical block as `1 − 2|B⟩⟨B|` with bright
/// state `|B⟩ = a*|0⟩ + b*|1⟩`. Reaching the holonomy `(θ, φ)` therefore
/// needs the drive ratio `a/b = e^{i(π−φ)}·tan(θ/2)`; see [`GateSpec::drive`].
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    theta: f64,
    phi: f64,
    label: String,
}

impl GateSpec {
    /// `θ ∈ [0, π]`; `φ` is reduced into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64, label: impl Into<String>) -> Result<Self, GateError> {
        if !(0.0..=PI).contains(&theta) {
            return Err(GateError::InvalidAngle {
                name: "theta",
                value: theta,
            });
        }
        if !phi.is_finite() {
            return Err(GateError::InvalidAngle {
                name: "phi",
                value: phi,
            });
        }
        Ok(Self {
            theta,
            phi: phi.rem_euclid(TAU),
            label: label.into(),
        })
    }

    /// `θ = 0`: phase flip.
    pub fn sigma_z() -> Self {
        Self::new(0.0, 0.0, "Z").expect("valid angles")
    }

    /// `θ = π/4, φ = π`: `H = (σᶻ − σˣ)/√2`.
    pub fn hadamard() -> Self {
        Self::new(PI / 4.0, PI, "H").expect("valid angles")
    }

    /// `θ = π/2, φ = 0`: `σˣ`.
    pub fn not() -> Self {
        Self::new(PI / 2.0, 0.0, "NOT").expect("valid angles")
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Drive amplitudes whose 2π loop produces this holonomy.
    pub fn drive(&self) -> DriveConfig {
        DriveConfig::from_angles(self.theta, PI - self.phi)
            .expect("theta validated at construction")
    }

    pub fn unitary(&self) -> LogicalUnitary {
        analytic_unitary(self)
    }
}

/// Operator on the logical basis `(|0⟩, |1⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalUnitary(pub Mat2);

impl LogicalUnitary {
    pub fn new(m: Mat2) -> Result<Self, GateError> {
        let dev = max_abs2(&(m.adjoint() * m - Mat2::identity()));
        if dev > 1e-10 {
            return Err(GateError::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// Logical block (rows and columns `|0⟩, |1⟩`) of a qutrit operator.
    pub fn from_qutrit_block(m: &Mat3) -> Mat2 {
        let idx = [LEVEL_0, LEVEL_1];
        Mat2::from_fn(|r, k| m[(idx[r], idx[k])])
    }

    pub fn max_distance(&self, other: &LogicalUnitary) -> f64 {
        max_abs2(&(self.0 - other.0))
    }
}

pub(crate) fn max_abs2(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `[[cos θ, e^{iφ} sin θ], [e^{−iφ} sin θ, −cos θ]]`.
pub fn analytic_unitary(g: &GateSpec) -> LogicalUnitary {
    let (s, co) = g.theta.sin_cos();
    LogicalUnitary(Mat2::new(
        c(co, 0.0),
        C64::from_polar(s, g.phi),
        C64::from_polar(s, -g.phi),
        c(-co, 0.0),
    ))
}

/// Embeds a logical operator with `⟨e|U|e⟩ = 1`.
pub fn embed_logical(u: &LogicalUnitary) -> Mat3 {
    let idx = [LEVEL_0, LEVEL_1];
    let mut m = Mat3::zeros();
    for r in 0..2 {
        for k in 0..2 {
            m[(idx[r], idx[k])] = u.0[(r, k)];
        }
    }
    m[(LEVEL_E, LEVEL_E)] = c(1.0, 0.0);
    m
}

/// `first` is applied first: returns `second · first`.
pub fn compose(first: &LogicalUnitary, second: &LogicalUnitary) -> LogicalUnitary {
    LogicalUnitary(second.0 * first.0)
}

/// Composite of gates applied left to right.
pub fn compose_sequence<'a, I>(gates: I) -> LogicalUnitary
where
    I: IntoIterator<Item = &'a LogicalUnitary>,
{
    gates
        .into_iter()
        .fold(LogicalUnitary(Mat2::identity()), |acc, g| compose(&acc, g))
}

/// `|tr(u₁† u₂)| / 2`: one exactly when the gates agree up to global phase.
pub fn commutation_overlap(u1: &LogicalUnitary, u2: &LogicalUnitary) -> f64 {
    (u1.0.adjoint() * u2.0).trace().norm() / 2.0
}

/// `u ∝ exp(−i·(angle/2)·n̂·σ⃗)`.
///
/// The axis is normalized so its first nonzero component is positive, and
/// the angle is signed in `(−π, π]`: a negative angle is a rotation in the
/// opposite sense about the same axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub axis: Vector3<f64>,
    pub angle: f64,
}

pub fn axis_angle(u: &LogicalUnitary) -> Result<AxisAngle, GateError> {
    let det = u.0.determinant();
    let su2 = u.0 / det.sqrt();
    // su2 = cos(α/2)·1 − i·sin(α/2)·n̂·σ⃗
    let half_cos = 0.5 * su2.trace();
    let pauli = [sigma_x(), sigma_y(), sigma_z()];
    let mut n = Vector3::from_fn(|k, _| (0.5 * (pauli[k] * su2).trace() * c(0.0, 1.0)).re);
    let mut cos_half = half_cos.re;
    // ±su2 are the same rotation; pick the branch with α ∈ [0, π].
    if cos_half < 0.0 {
        cos_half = -cos_half;
        n = -n;
    }
    let sin_half = n.norm();
    if sin_half < 1e-12 {
        return Err(GateError::DegenerateRotation);
    }
    let mut angle = 2.0 * sin_half.atan2(cos_half);
    let mut axis = n / sin_half;
    let leading = axis.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(0.0);
    if leading < 0.0 {
        axis = -axis;
        angle = -angle;
    }
    if (angle + PI).abs() < 1e-12 {
        angle = PI;
    }
    Ok(AxisAngle { axis, angle })
}

/// Bloch vector `(x, y, z)` of the logical block of a qutrit density
/// matrix, with `z = +1` for `|0⟩`. Leakage shrinks the vector.
pub fn logical_bloch(rho: &Mat3) -> Vector3<f64> {
    let r01 = rho[(LEVEL_0, LEVEL_1)];
    Vector3::new(
        2.0 * r01.re,
        -2.0 * r01.im,
        rho[(LEVEL_0, LEVEL_0)].re - rho[(LEVEL_1, LEVEL_1)].re,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        max_abs2(&(a - b)) < tol
    }

    fn hadamard_matrix() -> Mat2 {
        (sigma_z() - sigma_x()) * c(FRAC_1_SQRT_2, 0.0)
    }

    #[test]
    fn named_gates() {
        assert!(close(&GateSpec::sigma_z().unitary().0, &sigma_z(), 1e-15));
        assert!(close(&GateSpec::hadamard().unitary().0, &hadamard_matrix(), 1e-15));
        assert!(close(&GateSpec::not().unitary().0, &sigma_x(), 1e-15));
    }

    #[test]
    fn embedding() {
        let id = embed_logical(&LogicalUnitary(Mat2::identity()));
        assert_eq!(id, Mat3::identity());
        let z = embed_logical(&LogicalUnitary(sigma_z()));
        assert_eq!(z, Mat3::from_diagonal(&nalgebra::Vector3::new(c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0))));
        let h = embed_logical(&GateSpec::hadamard().unitary());
        assert_eq!(h[(LEVEL_E, LEVEL_E)], c(1.0, 0.0));
        assert!(close(&LogicalUnitary::from_qutrit_block(&h), &hadamard_matrix(), 1e-15));
    }

    #[test]
    fn non_commuting_composites() {
        let h = GateSpec::hadamard().unitary();
        let not = GateSpec::not().unitary();
        let iy = sigma_y() * c(0.0, 1.0);
        let not_h = compose(&h, &not);
        let h_not = compose(&not, &h);
        let want_not_h = -(iy + Mat2::identity()) * c(FRAC_1_SQRT_2, 0.0);
        let want_h_not = (iy - Mat2::identity()) * c(FRAC_1_SQRT_2, 0.0);
        assert!(close(&not_h.0, &want_not_h, 1e-15));
        assert!(close(&h_not.0, &want_h_not, 1e-15));
        // Oracle: tr((NOT·H)†(H·NOT)) computed from the explicit products.
        let direct = (want_not_h.adjoint() * want_h_not).trace().norm() / 2.0;
        assert!(direct < 1e-15);
        assert!(commutation_overlap(&not_h, &h_not) < 1e-10);
        assert!((commutation_overlap(&h, &h) - 1.0).abs() < 1e-15);
        assert!(commutation_overlap(&LogicalUnitary(sigma_z()), &LogicalUnitary(sigma_x())) < 1e-15);
        let seq = compose_sequence([&h, &not]);
        assert!(close(&seq.0, &not_h.0, 1e-15));
    }

    #[test]
    fn axis_angle_examples() {
        let x = axis_angle(&LogicalUnitary(sigma_x())).unwrap();
        assert!((x.axis - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((x.angle - PI).abs() < 1e-12);

        let h = GateSpec::hadamard().unitary();
        let not = GateSpec::not().unitary();
        let a = axis_angle(&compose(&h, &not)).unwrap();
        let b = axis_angle(&compose(&not, &h)).unwrap();
        assert!((a.axis - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
        assert!((b.axis - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
        assert!((a.angle.abs() - PI / 2.0).abs() < 1e-12);
        assert!((a.angle + b.angle).abs() < 1e-12, "opposite senses");
        // NOT·H sends |0⟩ (z = +1) to (|0⟩ − |1⟩)/√2 (x = −1): a right-handed
        // quarter turn about −y, reported as a negative angle about +y.
        assert!((a.angle + PI / 2.0).abs() < 1e-12);
        let psi = compose(&h, &not).0 * nalgebra::Vector2::new(c(1.0, 0.0), c(0.0, 0.0));
        let rho = psi * psi.adjoint();
        let mut rho3 = Mat3::zeros();
        rho3[(LEVEL_0, LEVEL_0)] = rho[(0, 0)];
        rho3[(LEVEL_0, LEVEL_1)] = rho[(0, 1)];
        rho3[(LEVEL_1, LEVEL_0)] = rho[(1, 0)];
        rho3[(LEVEL_1, LEVEL_1)] = rho[(1, 1)];
        assert!((logical_bloch(&rho3) - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!(matches!(
            axis_angle(&LogicalUnitary(Mat2::identity() * c(0.0, 1.0))),
            Err(GateError::DegenerateRotation)
        ));
    }

    #[test]
    fn compositions_cover_all_axes() {
        let grid = [(PI / 4.0, PI), (PI / 2.0, 0.0), (PI / 2.0, PI / 2.0), (PI / 3.0, 1.0), (0.0, 0.0)];
        let gates: Vec<_> = grid
            .iter()
            .map(|&(t, p)| GateSpec::new(t, p, "g").unwrap().unitary())
            .collect();
        let mut reach = [0.0f64; 3];
        for g1 in &gates {
            for g2 in &gates {
                if let Ok(aa) = axis_angle(&compose(g1, g2)) {
                    for k in 0..3 {
                        reach[k] = reach[k].max(aa.axis[k].abs());
                    }
                }
            }
        }
        assert!(reach.iter().all(|&r| r > 0.99), "axis coverage {reach:?}");
    }

    #[test]
    fn bloch_poles() {
        let rho0 = crate::qutrit::matrix_unit(LEVEL_0, LEVEL_0);
        assert_eq!(logical_bloch(&rho0), Vector3::new(0.0, 0.0, 1.0));
        let rho1 = crate::qutrit::matrix_unit(LEVEL_1, LEVEL_1);
        assert_eq!(logical_bloch(&rho1), Vector3::new(0.0, 0.0, -1.0));
    }

    proptest! {
        #[test]
        fn holonomies_are_hermitian_involutions(theta in 0.0..PI, phi in 0.0..TAU) {
            let u = GateSpec::new(theta, phi, "g").unwrap().unitary();
            prop_assert!(max_abs2(&(u.0 - u.0.adjoint())) < 1e-12);
            prop_assert!(max_abs2(&(u.0 * u.0 - Mat2::identity())) < 1e-12);
            prop_assert!(compose(&u, &u).max_distance(&LogicalUnitary(Mat2::identity())) < 1e-12);
            prop_assert!(u.0.trace().norm() < 1e-12);
        }

        #[test]
        fn axis_angle_reconstructs_rotation(theta in 0.05..(PI - 0.05), phi in 0.0..TAU) {
            let h = GateSpec::hadamard().unitary();
            let u = compose(&h, &GateSpec::new(theta, phi, "g").unwrap().unitary());
            if let Ok(aa) = axis_angle(&u) {
                let gen = sigma_x() * c(aa.axis[0], 0.0) + sigma_y() * c(aa.axis[1], 0.0) + sigma_z() * c(aa.axis[2], 0.0);
                let half = 0.5 * aa.angle;
                let rot = Mat2::identity() * c(half.cos(), 0.0) - gen * c(0.0, half.sin());
                prop_assert!((commutation_overlap(&LogicalUnitary(rot), &u) - 1.0).abs() < 1e-10);
                prop_assert!(aa.angle > -PI && aa.angle <= PI);
            }
        }
    }
}

//! Time-dependent Hamiltonians, time-ordered propagators and Lindblad
//! evolution.
//!
//! Units: ħ = 1, time in ns, angular frequencies in rad/ns. Coherence times
//! are quoted in μs and converted with 1 μs = 1000 ns.

use nalgebra::SMatrix;
use thiserror::Error;

use crate::pulse::{gauss_nodes, step_count, DriveConfig, GaussianEnvelope, PulseSpec};
use crate::qutrit::{
    c, commutator, expm_hermitian_unchecked, matrix_unit, max_abs, pauli_pair, unitarity_deviation,
    DensityMatrix, Mat3, C64, LEVEL_0, LEVEL_1, LEVEL_E,
};

const NS_PER_US: f64 = 1000.0;
const UNITARITY_TOL: f64 = 1e-8;
const TRACE_DRIFT_TOL: f64 = 1e-6;
/// Largest step accepted by the master-equation integrator, ns.
pub const MAX_LINDBLAD_STEP: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("propagator lost unitarity: max |U†U − I| = {0:e}")]
    NonUnitaryResult(f64),
    #[error("master-equation step too coarse: trace drift {0:e}")]
    StepTooCoarse(f64),
    #[error("invalid time step {0} ns")]
    InvalidStep(f64),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
}

/// A Hermitian generator `h(t)` supported on `[0, duration]`.
pub trait Hamiltonian: Sync {
    fn at(&self, t: f64) -> Mat3;
    fn duration(&self) -> f64;
}

/// `h(t) = (Ω(t)/2)·(a|e⟩⟨0| + b|e⟩⟨1| + h.c.)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionHamiltonian {
    pub envelope: GaussianEnvelope,
    pub drive: DriveConfig,
}

impl InteractionHamiltonian {
    pub fn new(envelope: GaussianEnvelope, drive: DriveConfig) -> Self {
        Self { envelope, drive }
    }

    pub fn from_spec(spec: &PulseSpec) -> Self {
        Self::new(spec.envelope, spec.drive)
    }

    /// Time-independent coupling structure `M`, with `h(t) = (Ω(t)/2)·M`.
    pub fn coupling(&self) -> Mat3 {
        coupling_matrix(self.drive.a(), self.drive.b())
    }
}

fn coupling_matrix(a: C64, b: C64) -> Mat3 {
    let mut m = Mat3::zeros();
    m[(LEVEL_E, LEVEL_0)] = a;
    m[(LEVEL_E, LEVEL_1)] = b;
    m[(LEVEL_0, LEVEL_E)] = a.conj();
    m[(LEVEL_1, LEVEL_E)] = b.conj();
    m
}

impl Hamiltonian for InteractionHamiltonian {
    fn at(&self, t: f64) -> Mat3 {
        self.coupling() * c(0.5 * self.envelope.value(t), 0.0)
    }

    fn duration(&self) -> f64 {
        self.envelope.total_length()
    }
}

pub fn hamiltonian_at(h: &InteractionHamiltonian, t: f64) -> Mat3 {
    h.at(t)
}

/// Resonant drive on a single transition `lower ↔ upper`:
/// `h(t) = (Ω(t)/2)·(cos φ·σˣ + sin φ·σʸ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionDrive {
    pub envelope: GaussianEnvelope,
    pub lower: usize,
    pub upper: usize,
    pub axis_phase: f64,
}

impl Hamiltonian for TransitionDrive {
    fn at(&self, t: f64) -> Mat3 {
        let (x, y, _) = pauli_pair(self.lower, self.upper);
        let generator = x * c(self.axis_phase.cos(), 0.0) + y * c(self.axis_phase.sin(), 0.0);
        generator * c(0.5 * self.envelope.value(t), 0.0)
    }

    fn duration(&self) -> f64 {
        self.envelope.total_length()
    }
}

/// Free evolution (no drive) for a fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Idle {
    pub duration: f64,
}

impl Hamiltonian for Idle {
    fn at(&self, _t: f64) -> Mat3 {
        Mat3::zeros()
    }

    fn duration(&self) -> f64 {
        self.duration
    }
}

/// Diagnostic drive whose real amplitude `a(t)` is swept linearly from
/// `a_start` to `a_end` across the pulse, with `b(t) = √(1 − a²)`. The ratio
/// `a/b` is not constant, so parallel transport is broken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampedDrive {
    pub envelope: GaussianEnvelope,
    pub a_start: f64,
    pub a_end: f64,
}

impl Hamiltonian for RampedDrive {
    fn at(&self, t: f64) -> Mat3 {
        let frac = (t / self.envelope.total_length()).clamp(0.0, 1.0);
        let a = self.a_start + (self.a_end - self.a_start) * frac;
        let b = (1.0 - a * a).max(0.0).sqrt();
        coupling_matrix(c(a, 0.0), c(b, 0.0)) * c(0.5 * self.envelope.value(t), 0.0)
    }

    fn duration(&self) -> f64 {
        self.envelope.total_length()
    }
}

/// One fourth-order Magnus step over `[t, t + dt]` using the two Gauss
/// nodes. Exact up to quadrature when `h` commutes with itself in time.
fn magnus_step<H: Hamiltonian + ?Sized>(h: &H, t: f64, dt: f64) -> Mat3 {
    let (t1, t2) = gauss_nodes(t, dt);
    let h1 = h.at(t1);
    let h2 = h.at(t2);
    let correction = commutator(&h2, &h1) * c(0.0, -(3f64.sqrt() / 12.0) * dt * dt);
    let generator = (h1 + h2) * c(0.5 * dt, 0.0) + correction;
    expm_hermitian_unchecked(&generator, 1.0)
}

/// Steps the time-ordered propagator across `[0, duration]`, calling
/// `visit(step_index, t, U(t))` after every step (and once at `t = 0`).
pub fn propagate_with<H, F>(h: &H, dt: f64, mut visit: F) -> Result<Mat3, EvolutionError>
where
    H: Hamiltonian + ?Sized,
    F: FnMut(usize, f64, &Mat3),
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EvolutionError::InvalidStep(dt));
    }
    let duration = h.duration();
    let mut u = Mat3::identity();
    visit(0, 0.0, &u);
    if duration <= 0.0 {
        return Ok(u);
    }
    let n = step_count(duration, dt);
    let step = duration / n as f64;
    for k in 0..n {
        let t = k as f64 * step;
        u = magnus_step(h, t, step) * u;
        visit(k + 1, (k + 1) as f64 * step, &u);
    }
    let dev = unitarity_deviation(&u);
    if dev > UNITARITY_TOL {
        return Err(EvolutionError::NonUnitaryResult(dev));
    }
    Ok(u)
}

pub fn time_ordered_propagator<H: Hamiltonian + ?Sized>(
    h: &H,
    dt: f64,
) -> Result<Mat3, EvolutionError> {
    propagate_with(h, dt, |_, _, _| {})
}

/// `T exp(−i ∫₀^τ h(t) dt)` for a two-tone pulse.
pub fn propagator(spec: &PulseSpec) -> Result<Mat3, EvolutionError> {
    time_ordered_propagator(&InteractionHamiltonian::from_spec(spec), spec.time_step)
}

/// `max_{t, i, j ∈ {0,1}} |⟨ψᵢ(t)|h(t)|ψⱼ(t)⟩|` over `samples` evenly
/// spaced times, where `|ψᵢ(t)⟩ = U(t)|i⟩`.
pub fn parallel_transport_residual<H: Hamiltonian + ?Sized>(
    h: &H,
    dt: f64,
    samples: usize,
) -> Result<f64, EvolutionError> {
    let samples = samples.max(2);
    let n = step_count(h.duration().max(f64::MIN_POSITIVE), dt);
    let wanted: Vec<usize> = (0..samples)
        .map(|j| ((j * n) as f64 / (samples - 1) as f64).round() as usize)
        .collect();
    let logical = [LEVEL_0, LEVEL_1];
    let mut residual = 0.0f64;
    propagate_with(h, dt, |k, t, u| {
        if wanted.binary_search(&k).is_ok() {
            let rotated = u.adjoint() * h.at(t) * u;
            for &i in &logical {
                for &j in &logical {
                    residual = residual.max(rotated[(i, j)].norm());
                }
            }
        }
    })?;
    Ok(residual)
}

/// Relaxation and dephasing of the two transitions.
///
/// Both excited states decay down the ladder at `1/T1`. Two diagonal
/// dephasing channels `|e⟩⟨e| − |0⟩⟨0|` and `|1⟩⟨1| − |e⟩⟨e|` get rates chosen
/// so the `0↔e` and `e↔1` coherences decay at exactly `1/T2` of their
/// transition once relaxation and cross-dephasing are included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    t1: f64,
    t2_0e: f64,
    t2_e1: f64,
    kappa_0e: f64,
    kappa_e1: f64,
}

impl NoiseModel {
    /// Times in μs.
    pub fn new(t1: f64, t2_0e: f64, t2_e1: f64) -> Result<Self, EvolutionError> {
        for (name, v) in [("t1", t1), ("t2_0e", t2_0e), ("t2_e1", t2_e1)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(EvolutionError::InvalidNoise(format!("{name} = {v} must be positive")));
            }
        }
        let gamma = 1.0 / t1;
        let pure_0e = 1.0 / t2_0e - 0.5 * gamma;
        let pure_e1 = 1.0 / t2_e1 - gamma;
        if pure_0e < 0.0 {
            return Err(EvolutionError::InvalidNoise(format!(
                "T2(0e) = {t2_0e} μs exceeds the relaxation limit 2·T1 = {} μs",
                2.0 * t1
            )));
        }
        if pure_e1 < 0.0 {
            return Err(EvolutionError::InvalidNoise(format!(
                "T2(e1) = {t2_e1} μs exceeds the relaxation limit T1 = {t1} μs \
                 (both levels of the transition decay)"
            )));
        }
        // Coherence decay of (0,e) and (e,1) under the two diagonal channels:
        // [2   1/2] [κ0e]   [γφ(0e)]
        // [1/2   2] [κe1] = [γφ(e1)]
        let det = 4.0 - 0.25;
        let kappa_0e = (2.0 * pure_0e - 0.5 * pure_e1) / det;
        let kappa_e1 = (2.0 * pure_e1 - 0.5 * pure_0e) / det;
        if kappa_0e < 0.0 || kappa_e1 < 0.0 {
            return Err(EvolutionError::InvalidNoise(format!(
                "dephasing rates ({kappa_0e}, {kappa_e1}) /μs would be negative"
            )));
        }
        Ok(Self {
            t1,
            t2_0e,
            t2_e1,
            kappa_0e,
            kappa_e1,
        })
    }

    /// T1 = 7 μs, T2(0e) = 8.0 μs, T2(e1) = 3.9 μs.
    pub fn device() -> Self {
        Self::new(7.0, 8.0, 3.9).expect("device parameters are consistent")
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2_0e(&self) -> f64 {
        self.t2_0e
    }

    pub fn t2_e1(&self) -> f64 {
        self.t2_e1
    }

    /// Ladder decay rate, 1/μs.
    pub fn decay_rate(&self) -> f64 {
        1.0 / self.t1
    }

    /// Coherence decay of the `0↔e` pair beyond relaxation, 1/μs.
    pub fn pure_dephasing_0e(&self) -> f64 {
        1.0 / self.t2_0e - 0.5 * self.decay_rate()
    }

    /// Coherence decay of the `e↔1` pair beyond relaxation, 1/μs.
    pub fn pure_dephasing_e1(&self) -> f64 {
        1.0 / self.t2_e1 - self.decay_rate()
    }

    /// Rates of the two dephasing operators, 1/μs.
    pub fn dephasing_operator_rates(&self) -> (f64, f64) {
        (self.kappa_0e, self.kappa_e1)
    }

    pub fn collapse_set(&self) -> CollapseSet {
        let per_ns = |rate_per_us: f64| rate_per_us / NS_PER_US;
        let e_minus_0 = matrix_unit(LEVEL_E, LEVEL_E) - matrix_unit(LEVEL_0, LEVEL_0);
        let one_minus_e = matrix_unit(LEVEL_1, LEVEL_1) - matrix_unit(LEVEL_E, LEVEL_E);
        CollapseSet::new(vec![
            CollapseChannel::new("decay e->0", matrix_unit(LEVEL_0, LEVEL_E), per_ns(self.decay_rate())),
            CollapseChannel::new("decay 1->e", matrix_unit(LEVEL_E, LEVEL_1), per_ns(self.decay_rate())),
            CollapseChannel::new("dephasing 0e", e_minus_0, per_ns(self.kappa_0e)),
            CollapseChannel::new("dephasing e1", one_minus_e, per_ns(self.kappa_e1)),
        ])
        .expect("noise model rates are validated at construction")
    }
}

/// A collapse operator `L` with rate `γ` (1/ns), contributing
/// `γ(LρL† − ½{L†L, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseChannel {
    pub label: String,
    pub operator: Mat3,
    pub rate: f64,
}

impl CollapseChannel {
    pub fn new(label: &str, operator: Mat3, rate: f64) -> Self {
        Self {
            label: label.to_string(),
            operator,
            rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CollapseSet {
    channels: Vec<CollapseChannel>,
    /// `Σ γ L†L`.
    decay_sum: Mat3,
}

impl CollapseSet {
    pub fn new(channels: Vec<CollapseChannel>) -> Result<Self, EvolutionError> {
        let mut decay_sum = Mat3::zeros();
        for ch in &channels {
            if !(ch.rate >= 0.0 && ch.rate.is_finite()) {
                return Err(EvolutionError::InvalidNoise(format!(
                    "channel '{}' has rate {}",
                    ch.label, ch.rate
                )));
            }
            decay_sum += ch.operator.adjoint() * ch.operator * c(ch.rate, 0.0);
        }
        Ok(Self { channels, decay_sum })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn channels(&self) -> &[CollapseChannel] {
        &self.channels
    }

    pub fn is_noiseless(&self) -> bool {
        self.channels.iter().all(|ch| ch.rate == 0.0)
    }

    /// `−i[h, ρ] + Σ γ(LρL† − ½{L†L, ρ})`.
    pub fn lindblad_rhs(&self, h: &Mat3, rho: &Mat3) -> Mat3 {
        let h_eff = h - self.decay_sum * c(0.0, 0.5);
        let mut out = (h_eff * rho - rho * h_eff.adjoint()) * c(0.0, -1.0);
        for ch in &self.channels {
            if ch.rate > 0.0 {
                out += ch.operator * rho * ch.operator.adjoint() * c(ch.rate, 0.0);
            }
        }
        out
    }
}

/// Fixed-step RK4 over `[0, t_final]`, applied to a batch of matrices that
/// share the same generator. `visit(t, states)` runs after every step.
fn rk4_batch<H, F, const N: usize>(
    states: &mut [Mat3; N],
    h: &H,
    noise: &CollapseSet,
    t_final: f64,
    dt: f64,
    mut visit: F,
) -> Result<(), EvolutionError>
where
    H: Hamiltonian + ?Sized,
    F: FnMut(f64, &[Mat3; N]),
{
    if !(dt > 0.0 && dt <= MAX_LINDBLAD_STEP) {
        return Err(EvolutionError::InvalidStep(dt));
    }
    if t_final <= 0.0 {
        return Ok(());
    }
    let n = step_count(t_final, dt);
    let step = t_final / n as f64;
    let half = c(0.5 * step, 0.0);
    let full = c(step, 0.0);
    let sixth = c(step / 6.0, 0.0);
    for k in 0..n {
        let t = k as f64 * step;
        let h0 = h.at(t);
        let hm = h.at(t + 0.5 * step);
        let h1 = h.at(t + step);
        for rho in states.iter_mut() {
            let k1 = noise.lindblad_rhs(&h0, rho);
            let k2 = noise.lindblad_rhs(&hm, &(*rho + k1 * half));
            let k3 = noise.lindblad_rhs(&hm, &(*rho + k2 * half));
            let k4 = noise.lindblad_rhs(&h1, &(*rho + k3 * full));
            *rho += (k1 + (k2 + k3) * c(2.0, 0.0) + k4) * sixth;
        }
        visit(t + step, states);
    }
    Ok(())
}

/// Integrates the master equation from `rho0` for `t_final` ns.
pub fn lindblad_evolve<H: Hamiltonian + ?Sized>(
    rho0: &DensityMatrix,
    h: &H,
    noise: &CollapseSet,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix, EvolutionError> {
    lindblad_trajectory(rho0, h, noise, t_final, dt, |_, _| {})
}

/// As [`lindblad_evolve`], calling `visit(t, ρ(t))` after every step.
pub fn lindblad_trajectory<H, F>(
    rho0: &DensityMatrix,
    h: &H,
    noise: &CollapseSet,
    t_final: f64,
    dt: f64,
    mut visit: F,
) -> Result<DensityMatrix, EvolutionError>
where
    H: Hamiltonian + ?Sized,
    F: FnMut(f64, &Mat3),
{
    let mut states = [*rho0.matrix()];
    rk4_batch(&mut states, h, noise, t_final, dt, |t, s| visit(t, &s[0]))?;
    let rho = states[0];
    let drift = (rho.trace().re - 1.0).abs().max(rho.trace().im.abs());
    if drift > TRACE_DRIFT_TOL {
        return Err(EvolutionError::StepTooCoarse(drift));
    }
    Ok(DensityMatrix::from_matrix_unchecked(rho))
}

/// Linear map on 3×3 matrices in the row-major vectorization
/// `vec(ρ)[3i + j] = ρ_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superoperator(pub SMatrix<C64, 9, 9>);

pub(crate) fn vec_rm(m: &Mat3) -> nalgebra::SVector<C64, 9> {
    nalgebra::SVector::<C64, 9>::from_fn(|k, _| m[(k / 3, k % 3)])
}

pub(crate) fn unvec_rm(v: &nalgebra::SVector<C64, 9>) -> Mat3 {
    Mat3::from_fn(|i, j| v[3 * i + j])
}

impl Superoperator {
    pub fn identity() -> Self {
        Self(SMatrix::identity())
    }

    /// `ρ ↦ UρU†`.
    pub fn from_unitary(u: &Mat3) -> Self {
        Self(SMatrix::from_fn(|row, col| {
            let (i, j) = (row / 3, row % 3);
            let (k, l) = (col / 3, col % 3);
            u[(i, k)] * u[(j, l)].conj()
        }))
    }

    pub fn apply(&self, rho: &Mat3) -> Mat3 {
        unvec_rm(&(self.0 * vec_rm(rho)))
    }

    pub fn apply_density(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.apply(rho.matrix()))
    }

    /// The map "`self` first, then `next`".
    pub fn then(&self, next: &Superoperator) -> Superoperator {
        Superoperator(next.0 * self.0)
    }
}

/// Master-equation superoperator over `[0, t_final]`, built by evolving the
/// nine matrix units together.
pub fn lindblad_superoperator<H: Hamiltonian + ?Sized>(
    h: &H,
    noise: &CollapseSet,
    t_final: f64,
    dt: f64,
) -> Result<Superoperator, EvolutionError> {
    let mut units: [Mat3; 9] = std::array::from_fn(|k| matrix_unit(k / 3, k % 3));
    rk4_batch(&mut units, h, noise, t_final, dt, |_, _| {})?;
    let mut drift = 0.0f64;
    for (k, m) in units.iter().enumerate() {
        let want = if k / 3 == k % 3 { 1.0 } else { 0.0 };
        drift = drift.max((m.trace() - c(want, 0.0)).norm());
    }
    if drift > TRACE_DRIFT_TOL {
        return Err(EvolutionError::StepTooCoarse(drift));
    }
    Ok(Superoperator(SMatrix::from_fn(|row, col| {
        units[col][(row / 3, row % 3)]
    })))
}

/// Superoperator of `h` under `noise`: the master equation when any rate is
/// nonzero, otherwise conjugation by the time-ordered propagator.
pub fn channel_of<H: Hamiltonian + ?Sized>(
    h: &H,
    noise: &CollapseSet,
    dt: f64,
) -> Result<Superoperator, EvolutionError> {
    if noise.is_noiseless() {
        Ok(Superoperator::from_unitary(&time_ordered_propagator(h, dt)?))
    } else {
        lindblad_superoperator(h, noise, h.duration(), dt)
    }
}

/// Closed form `exp(−i·(area/2)·M)` for a pulse whose ratio `a/b` is fixed.
pub fn commuting_closed_form(spec: &PulseSpec) -> Mat3 {
    let h = InteractionHamiltonian::from_spec(spec);
    expm_hermitian_unchecked(&h.coupling(), 0.5 * spec.area())
}

/// `max |U₁ − U₂|`.
pub fn propagator_distance(a: &Mat3, b: &Mat3) -> f64 {
    max_abs(&(a - b))
}

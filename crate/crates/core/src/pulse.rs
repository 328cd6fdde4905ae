//! Truncated-Gaussian envelopes, pulse-area calibration and the two-tone
//! drive amplitudes.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

/// Default integration and quadrature step, ns.
pub const DEFAULT_TIME_STEP: f64 = 0.01;
/// Envelope width used on the device, ns.
pub const DEVICE_SIGMA: f64 = 10.0;
/// Total pulse length used on the device, ns.
pub const DEVICE_LENGTH: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("degenerate envelope: {0}")]
    DegenerateEnvelope(String),
    #[error("angle {name} = {value} outside its allowed range")]
    InvalidAngle { name: &'static str, value: f64 },
    #[error("drive amplitudes not normalized: |a|² + |b|² = {0}")]
    NotNormalized(f64),
    #[error("invalid time step {0} ns")]
    InvalidTimeStep(f64),
}

/// `Ω(t) = peak·[exp(−(t−τ/2)²/2σ²) − exp(−τ²/8σ²)]` on `[0, τ]`, zero
/// elsewhere. Without offset subtraction the second term is dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEnvelope {
    sigma: f64,
    total_length: f64,
    peak: f64,
    offset_subtracted: bool,
}

impl GaussianEnvelope {
    pub fn new(
        sigma: f64,
        total_length: f64,
        peak: f64,
        offset_subtracted: bool,
    ) -> Result<Self, PulseError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(PulseError::DegenerateEnvelope(format!("sigma = {sigma}")));
        }
        if !(total_length > 0.0 && total_length.is_finite()) {
            return Err(PulseError::DegenerateEnvelope(format!(
                "total_length = {total_length}"
            )));
        }
        if !peak.is_finite() {
            return Err(PulseError::DegenerateEnvelope(format!("peak = {peak}")));
        }
        Ok(Self {
            sigma,
            total_length,
            peak,
            offset_subtracted,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn offset_subtracted(&self) -> bool {
        self.offset_subtracted
    }

    /// Same shape with the peak multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            peak: self.peak * factor,
            ..*self
        }
    }

    /// Envelope value in rad/ns.
    pub fn value(&self, t: f64) -> f64 {
        if !(0.0..=self.total_length).contains(&t) {
            return 0.0;
        }
        let two_var = 2.0 * self.sigma * self.sigma;
        let x = (t - 0.5 * self.total_length).powi(2) / two_var;
        if self.offset_subtracted {
            let edge = self.total_length * self.total_length / (4.0 * two_var);
            // exp(−x) − exp(−edge) written to keep precision when σ ≫ τ.
            let shape = (-edge).exp() * (edge - x).exp_m1();
            self.peak * shape.max(0.0)
        } else {
            self.peak * (-x).exp()
        }
    }

    /// `∫₀^τ Ω dt` at the default step.
    pub fn area(&self) -> f64 {
        self.area_with_step(DEFAULT_TIME_STEP)
    }

    /// Composite two-point Gauss–Legendre quadrature with `ceil(τ/dt)`
    /// equal panels. The propagator samples the envelope at the same nodes.
    pub fn area_with_step(&self, dt: f64) -> f64 {
        let n = step_count(self.total_length, dt);
        let h = self.total_length / n as f64;
        (0..n)
            .map(|k| {
                let (t1, t2) = gauss_nodes(k as f64 * h, h);
                0.5 * h * (self.value(t1) + self.value(t2))
            })
            .sum()
    }

    /// Rescales the peak so the area is exactly 2π.
    pub fn recalibrated(&self) -> Result<Self, PulseError> {
        let unit = Self {
            peak: 1.0,
            ..*self
        };
        let area = unit.area();
        if !(area > 0.0 && area.is_finite()) {
            return Err(PulseError::DegenerateEnvelope(format!(
                "unit-peak area {area} is not positive"
            )));
        }
        Ok(unit.scaled(TAU / area))
    }
}

/// Number of integration panels covering `length` with step at most `dt`.
pub(crate) fn step_count(length: f64, dt: f64) -> usize {
    ((length / dt) - 1e-9).ceil().max(1.0) as usize
}

/// Two-point Gauss–Legendre nodes of the panel `[start, start + h]`.
pub(crate) fn gauss_nodes(start: f64, h: f64) -> (f64, f64) {
    let offset = h / (2.0 * 3f64.sqrt());
    let mid = start + 0.5 * h;
    (mid - offset, mid + offset)
}

/// Offset-subtracted truncated Gaussian whose area is 2π.
pub fn calibrate_peak(sigma: f64, total_length: f64) -> Result<GaussianEnvelope, PulseError> {
    calibrate_envelope(sigma, total_length, true)
}

pub fn calibrate_envelope(
    sigma: f64,
    total_length: f64,
    offset_subtracted: bool,
) -> Result<GaussianEnvelope, PulseError> {
    GaussianEnvelope::new(sigma, total_length, 1.0, offset_subtracted)?.recalibrated()
}

pub fn pulse_area(env: &GaussianEnvelope) -> f64 {
    env.area()
}

/// Complex amplitudes `(a, b)` of the two tones, `|a|² + |b|² = 1`, with
/// `e^{iφ}·tan(θ/2) = a/b` and `b` real and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    a: Complex64,
    b: Complex64,
    theta: f64,
    phi: f64,
}

impl DriveConfig {
    /// `a = e^{iφ}·sin(θ/2)`, `b = cos(θ/2)`. `φ` is reduced mod 2π.
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self, PulseError> {
        if !(0.0..=PI).contains(&theta) {
            return Err(PulseError::InvalidAngle {
                name: "theta",
                value: theta,
            });
        }
        if !phi.is_finite() {
            return Err(PulseError::InvalidAngle {
                name: "phi",
                value: phi,
            });
        }
        let phi = phi.rem_euclid(TAU);
        let half = 0.5 * theta;
        Ok(Self {
            a: Complex64::from_polar(half.sin(), phi),
            b: Complex64::new(half.cos(), 0.0),
            theta,
            phi,
        })
    }

    /// Accepts any normalized pair and moves it to the `b ≥ 0` gauge.
    pub fn from_amplitudes(a: Complex64, b: Complex64) -> Result<Self, PulseError> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(PulseError::NotNormalized(norm));
        }
        let (a, b) = if b.norm() > 0.0 {
            let gauge = b.conj() / b.norm();
            (a * gauge, Complex64::new(b.norm(), 0.0))
        } else {
            (a, Complex64::new(0.0, 0.0))
        };
        let theta = 2.0 * a.norm().atan2(b.re);
        let phi = if a.norm() == 0.0 { 0.0 } else { a.arg().rem_euclid(TAU) };
        Ok(Self { a, b, theta, phi })
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

pub fn drive_from_angles(theta: f64, phi: f64) -> Result<DriveConfig, PulseError> {
    DriveConfig::from_angles(theta, phi)
}

/// A two-tone pulse: shared envelope, tone amplitudes, integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub envelope: GaussianEnvelope,
    pub drive: DriveConfig,
    pub time_step: f64,
}

impl PulseSpec {
    pub fn new(
        envelope: GaussianEnvelope,
        drive: DriveConfig,
        time_step: f64,
    ) -> Result<Self, PulseError> {
        if !(time_step > 0.0 && time_step <= envelope.total_length()) {
            return Err(PulseError::InvalidTimeStep(time_step));
        }
        Ok(Self {
            envelope,
            drive,
            time_step,
        })
    }

    /// 2π-area pulse with the given drive and envelope geometry.
    pub fn calibrated(
        drive: DriveConfig,
        sigma: f64,
        total_length: f64,
        time_step: f64,
    ) -> Result<Self, PulseError> {
        Self::new(calibrate_peak(sigma, total_length)?, drive, time_step)
    }

    pub fn duration(&self) -> f64 {
        self.envelope.total_length()
    }

    pub fn area(&self) -> f64 {
        self.envelope.area_with_step(self.time_step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Fine-grid trapezoid oracle, independent of the Gauss–Legendre rule.
    fn trapezoid(env: &GaussianEnvelope, points: usize) -> f64 {
        let tau = env.total_length();
        let h = tau / (points - 1) as f64;
        let interior: f64 = (1..points - 1).map(|k| env.value(k as f64 * h)).sum();
        h * (interior + 0.5 * (env.value(0.0) + env.value(tau)))
    }

    #[test]
    fn envelope_support_and_edges() {
        let env = calibrate_peak(10.0, 40.0).unwrap();
        assert_eq!(env.value(-1.0), 0.0);
        assert_eq!(env.value(40.5), 0.0);
        assert_eq!(env.value(0.0), 0.0);
        assert_eq!(env.value(40.0), 0.0);
        let mid = env.peak() * (1.0 - (-40.0f64 * 40.0 / (8.0 * 100.0)).exp());
        assert!((env.value(20.0) - mid).abs() < 1e-15);
        for k in 0..=400 {
            assert!(env.value(k as f64 * 0.1) >= 0.0);
        }
    }

    #[test]
    fn zero_peak_has_zero_area() {
        let env = GaussianEnvelope::new(10.0, 40.0, 0.0, true).unwrap();
        assert_eq!(env.area(), 0.0);
    }

    #[test]
    fn calibrated_area_is_two_pi_and_linear() {
        let env = calibrate_peak(10.0, 40.0).unwrap();
        assert!((env.area() - TAU).abs() / TAU < 1e-9);
        assert!((env.scaled(2.0).area() - 2.0 * TAU).abs() / TAU < 1e-9);
    }

    #[test]
    fn calibrated_peak_matches_trapezoid_oracle() {
        let unit = GaussianEnvelope::new(10.0, 40.0, 1.0, true).unwrap();
        let oracle_peak = TAU / trapezoid(&unit, 1_000_000);
        let env = calibrate_peak(10.0, 40.0).unwrap();
        assert!((env.peak() - oracle_peak).abs() / oracle_peak < 1e-9);
    }

    #[test]
    fn flat_top_limit() {
        let tau = 40.0;
        let env = calibrate_envelope(1e6 * tau, tau, false).unwrap();
        let rectangle = TAU / tau;
        assert!((env.peak() - rectangle).abs() / rectangle < 1e-3);
    }

    #[test]
    fn time_rescaling_halves_peak() {
        let a = calibrate_peak(10.0, 40.0).unwrap();
        let b = calibrate_peak(20.0, 80.0).unwrap();
        assert!((b.peak() - 0.5 * a.peak()).abs() / a.peak() < 1e-9);
    }

    #[test]
    fn quadrature_converges_under_step_halving() {
        let env = calibrate_peak(10.0, 40.0).unwrap();
        let coarse = env.area_with_step(DEFAULT_TIME_STEP);
        let fine = env.area_with_step(0.5 * DEFAULT_TIME_STEP);
        assert!((coarse - fine).abs() / fine < 1e-10);
    }

    #[test]
    fn calibration_is_idempotent() {
        let env = calibrate_peak(10.0, 40.0).unwrap();
        let again = env.recalibrated().unwrap();
        assert!((again.peak() - env.peak()).abs() / env.peak() < 1e-12);
    }

    #[test]
    fn degenerate_envelopes_are_rejected() {
        assert!(matches!(calibrate_peak(10.0, 0.0), Err(PulseError::DegenerateEnvelope(_))));
        assert!(matches!(calibrate_peak(0.0, 40.0), Err(PulseError::DegenerateEnvelope(_))));
        // σ so small that the offset-subtracted shape underflows to zero.
        assert!(matches!(calibrate_peak(1e-3, 40.0), Err(PulseError::DegenerateEnvelope(_))));
    }

    #[test]
    fn drive_examples() {
        let z = drive_from_angles(0.0, 0.0).unwrap();
        assert!(z.a().norm() < 1e-15 && (z.b().re - 1.0).abs() < 1e-15);
        let eq = drive_from_angles(PI / 2.0, 0.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((eq.a() - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((eq.b() - Complex64::new(s, 0.0)).norm() < 1e-15);
        let pole = drive_from_angles(PI, 0.0).unwrap();
        assert!((pole.a() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(pole.b().norm() < 1e-15);
        assert!(drive_from_angles(-0.1, 0.0).is_err());
        assert!(drive_from_angles(PI + 0.1, 0.0).is_err());
    }

    #[test]
    fn amplitudes_are_gauge_fixed() {
        let phase = Complex64::from_polar(1.0, 0.7);
        let d = DriveConfig::from_amplitudes(phase * 0.6, phase * 0.8).unwrap();
        assert!(d.b().im == 0.0 && d.b().re > 0.0);
        assert!((d.a() - Complex64::new(0.6, 0.0)).norm() < 1e-14);
        assert!(DriveConfig::from_amplitudes(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn drive_invariants_and_round_trip(theta in 1e-3..(PI - 1e-3), phi in 0.0..TAU) {
            let d = drive_from_angles(theta, phi).unwrap();
            prop_assert!((d.a().norm_sqr() + d.b().norm_sqr() - 1.0).abs() < 1e-12);
            let ratio = d.a() / d.b();
            let want = Complex64::from_polar((0.5 * theta).tan(), phi);
            prop_assert!((ratio - want).norm() < 1e-10 * (1.0 + want.norm()));
            let theta_back = 2.0 * d.a().norm().atan2(d.b().norm());
            let phi_back = ratio.arg().rem_euclid(TAU);
            prop_assert!((theta_back - theta).abs() < 1e-10);
            let dphi = (phi_back - phi).rem_euclid(TAU);
            prop_assert!(dphi.min(TAU - dphi) < 1e-10);
            let again = DriveConfig::from_amplitudes(d.a(), d.b()).unwrap();
            prop_assert!((again.theta() - theta).abs() < 1e-10);
        }

        #[test]
        fn area_is_linear_in_peak(scale in 0.01f64..50.0) {
            let env = calibrate_peak(10.0, 40.0).unwrap();
            let scaled = env.scaled(scale).area();
            prop_assert!((scaled - scale * env.area()).abs() <= 1e-12 * scale * TAU);
        }
    }
}

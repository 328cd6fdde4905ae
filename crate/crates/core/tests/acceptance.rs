//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qutrit_holonomy::evolution::{
    lindblad_evolve, parallel_transport_residual, propagator, Idle, InteractionHamiltonian,
    NoiseModel, Superoperator,
};
use qutrit_holonomy::experiment::config::ExperimentConfig;
use qutrit_holonomy::experiment::{run_gates, run_sequence, run_sweep, Model, Simulator};
use qutrit_holonomy::gates::{commutation_overlap, compose, GateSpec, Mat2};
use qutrit_holonomy::pulse::{calibrate_peak, PulseSpec, DEFAULT_TIME_STEP};
use qutrit_holonomy::qutrit::{
    c, expm_hermitian, DensityMatrix, Mat3, QutritState, C64, LEVEL_0, LEVEL_1, LEVEL_E,
};
use qutrit_holonomy::tomography::process::linear_inversion;
use qutrit_holonomy::tomography::{
    mle_reconstruct, process_fidelity, MleOptions, ProcessTomography, ReducedProcessMatrix, Shots,
    Spam,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// `[[cos θ, e^{iφ} sin θ], [e^{−iφ} sin θ, −cos θ]]`, written out here
/// independently of the library.
fn holonomy_closed_form(theta: f64, phi: f64) -> Mat2 {
    Mat2::new(
        c(theta.cos(), 0.0),
        C64::from_polar(theta.sin(), phi),
        C64::from_polar(theta.sin(), -phi),
        c(-theta.cos(), 0.0),
    )
}

fn logical_block(u: &Mat3) -> Mat2 {
    Mat2::new(
        u[(LEVEL_0, LEVEL_0)],
        u[(LEVEL_0, LEVEL_1)],
        u[(LEVEL_1, LEVEL_0)],
        u[(LEVEL_1, LEVEL_1)],
    )
}

fn max2(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn noiseless_config() -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.noise.enabled = false;
    config.tomography.shots = 0;
    config
}

fn noisy_exact_config() -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.tomography.shots = 0;
    config
}

fn criterion_1() -> Outcome {
    let env = calibrate_peak(10.0, 40.0).unwrap();
    let mut worst = 0.0f64;
    let mut leak = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            let theta = i as f64 * PI / 4.0;
            let phi = j as f64 * TAU / 5.0;
            let gate = GateSpec::new(theta, phi, "grid").unwrap();
            let spec = PulseSpec::new(env, gate.drive(), DEFAULT_TIME_STEP).unwrap();
            let u = propagator(&spec).unwrap();
            worst = worst.max(max2(&(logical_block(&u) - holonomy_closed_form(theta, phi))));
            leak = leak
                .max(u[(LEVEL_E, LEVEL_0)].norm_sqr())
                .max(u[(LEVEL_E, LEVEL_1)].norm_sqr());
        }
    }
    outcome(
        worst < 1e-8 && leak < 1e-6,
        format!("max entry error {worst:.2e} (< 1e-8), leakage {leak:.2e} (< 1e-6)"),
    )
}

fn criterion_2() -> Outcome {
    let env = calibrate_peak(10.0, 40.0).unwrap();
    let mut worst = 0.0f64;
    for (theta, phi) in [(0.0, 0.0), (PI / 4.0, PI), (PI / 2.0, 0.0), (1.1, 2.3), (PI, 0.5)] {
        let gate = GateSpec::new(theta, phi, "pt").unwrap();
        let h = InteractionHamiltonian::new(env, gate.drive());
        let r = parallel_transport_residual(&h, DEFAULT_TIME_STEP, 4001).unwrap();
        worst = worst.max(r / env.peak());
    }
    outcome(worst < 1e-10, format!("max residual / peak = {worst:.2e} (< 1e-10)"))
}

fn criterion_3() -> Outcome {
    let config = noiseless_config();
    let sim = Simulator::new(&config).unwrap();
    let s = FRAC_1_SQRT_2;
    let named = [
        (GateSpec::sigma_z(), Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))),
        (GateSpec::hadamard(), Mat2::new(c(s, 0.0), c(-s, 0.0), c(-s, 0.0), c(-s, 0.0))),
        (GateSpec::not(), Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (gate, want) in named {
        let u = propagator(&sim.pulse_spec(&gate).unwrap()).unwrap();
        let err = max2(&(logical_block(&u) - want));
        let chi = sim
            .tomography(&sim.gate_channel(&gate, Model::Noiseless).unwrap(), Model::Noiseless, 0)
            .unwrap();
        let target = ReducedProcessMatrix::new({
            let v = nalgebra::Vector4::from(
                qutrit_holonomy::qutrit::LogicalBasis4::standard().decompose(&embed(&want)),
            );
            v * v.adjoint()
        });
        let f = process_fidelity(&chi.reduce(), &target);
        let extra = if gate.theta() == 0.0 {
            let zz = chi.reduce().diagonal()[3];
            pass &= (zz - 1.0).abs() < 1e-6;
            format!(", chi_ZZ {zz:.9}")
        } else {
            String::new()
        };
        pass &= err < 1e-8 && f >= 1.0 - 1e-6;
        parts.push(format!("{}: block error {err:.1e}, F {f:.9}{extra}", gate.label()));
    }
    outcome(pass, parts.join("; "))
}

fn embed(m: &Mat2) -> Mat3 {
    let mut out = Mat3::zeros();
    let idx = [LEVEL_0, LEVEL_1];
    for i in 0..2 {
        for j in 0..2 {
            out[(idx[i], idx[j])] = m[(i, j)];
        }
    }
    out[(LEVEL_E, LEVEL_E)] = c(1.0, 0.0);
    out
}

fn criterion_4() -> Outcome {
    let results = run_gates(&noisy_exact_config()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in results.iter().filter(|r| r.summary.model == Model::Noisy) {
        let f = r.summary.fidelity;
        let tr = r.summary.trace();
        pass &= (f - 0.976).abs() <= 0.010 && (0.95..=0.99).contains(&tr);
        parts.push(format!(
            "{}: F {f:.4} (0.976 ± 0.010), tr chi~ {tr:.4} ([0.95, 0.99])",
            r.gate.label()
        ));
    }
    outcome(pass && parts.len() == 2, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let h = GateSpec::hadamard().unitary();
    let not = GateSpec::not().unitary();
    let not_h = compose(&h, &not);
    let h_not = compose(&not, &h);
    let iy = Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0));
    let one = Mat2::identity();
    let s = c(FRAC_1_SQRT_2, 0.0);
    let want_not_h = -(iy + one) * s;
    let want_h_not = (iy - one) * s;
    let analytic = max2(&(not_h.0 - want_not_h)).max(max2(&(h_not.0 - want_h_not)));
    let overlap = commutation_overlap(&not_h, &h_not);

    let clean = run_sequence(&noiseless_config()).unwrap();
    let pulse = clean.rows.iter().map(|r| r.pulse_error).fold(0.0, f64::max);
    let noisy = run_sequence(&noisy_exact_config()).unwrap();
    let fids: Vec<f64> = noisy
        .rows
        .iter()
        .filter(|r| r.summary.model == Model::Noisy)
        .map(|r| r.summary.fidelity)
        .collect();
    let pass = overlap < 1e-10
        && analytic < 1e-15
        && pulse < 1e-6
        && fids.len() == 2
        && fids.iter().all(|f| (f - 0.95).abs() <= 0.02);
    outcome(
        pass,
        format!(
            "overlap {overlap:.1e}, analytic error {analytic:.1e}, pulse error {pulse:.1e}, \
             noisy composite F {:.4}/{:.4} (0.95 ± 0.02)",
            fids[0], fids[1]
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut config = noiseless_config();
    config.sweep.theta = (0..=16).map(|k| k as f64 * PI / 32.0).collect();
    let rows = run_sweep(&config).unwrap();
    let mut worst = 0.0f64;
    for r in &rows {
        let d = r.summary.reduced.diagonal();
        let (s, co) = r.theta.sin_cos();
        worst = worst.max((d[3] - co * co).abs()).max((d[1] + d[2] - s * s).abs());
    }
    outcome(
        worst < 1e-8 && rows.len() == 17,
        format!("{} grid points, max deviation {worst:.2e} (< 1e-8)", rows.len()),
    )
}

fn random_unitary(rng: &mut ChaCha8Rng) -> Mat3 {
    let a = Mat3::from_fn(|_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    expm_hermitian(&((a + a.adjoint()) * c(1.5, 0.0)), 1.0).unwrap()
}

fn random_density(rng: &mut ChaCha8Rng) -> Mat3 {
    let a = Mat3::from_fn(|_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = a * a.adjoint();
    m / m.trace()
}

fn criterion_7() -> Outcome {
    let tomo = ProcessTomography::standard(Spam::Ideal);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut action = 0.0f64;
    let mut agreement = 0.0f64;
    for _ in 0..50 {
        let u = random_unitary(&mut rng);
        let s = Superoperator::from_unitary(&u);
        let record = tomo.acquire(&|r: &Mat3| s.apply(r), Shots::Exact, 0);
        let lin = linear_inversion(&tomo, &record).unwrap();
        for _ in 0..20 {
            let rho = random_density(&mut rng);
            let want = u * rho * u.adjoint();
            action = action.max((lin.apply(&rho) - want).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        let mle = mle_reconstruct(&tomo, &record, &MleOptions::default()).unwrap();
        agreement = agreement.max((mle.process.chi() - lin.chi()).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }

    let noise = NoiseModel::device().collapse_set();
    let mut min_eig = f64::INFINITY;
    let mut lin_min_eig = f64::INFINITY;
    let mut monotone = true;
    let mut converged = true;
    for seed in 0..6u64 {
        let u = random_unitary(&mut rng);
        let s = Superoperator::from_unitary(&u);
        let channel = if seed % 2 == 0 {
            s
        } else {
            let env = calibrate_peak(10.0, 40.0).unwrap();
            let h = InteractionHamiltonian::new(env, GateSpec::hadamard().drive());
            qutrit_holonomy::evolution::channel_of(&h, &noise, 0.05).unwrap()
        };
        let record = tomo.acquire(&|r: &Mat3| channel.apply(r), Shots::Sampled(1000), seed);
        let mle = mle_reconstruct(&tomo, &record, &MleOptions::default()).unwrap();
        monotone &= mle.log_likelihood.windows(2).all(|w| w[1] >= w[0]);
        converged &= mle.converged;
        min_eig = min_eig.min(mle.process.min_eigenvalue());
        lin_min_eig = lin_min_eig.min(linear_inversion(&tomo, &record).unwrap().min_eigenvalue());
    }
    outcome(
        action < 1e-8 && agreement < 1e-6 && min_eig >= -1e-8 && monotone && converged,
        format!(
            "linear action error {action:.1e} (< 1e-8), MLE vs linear {agreement:.1e} (< 1e-6), \
             sampled MLE min eigenvalue {min_eig:.1e} (linear {lin_min_eig:.1e}), monotone {monotone}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let model = NoiseModel::device();
    let noise = model.collapse_set();
    let dt = 1.0;
    let mut t1_err = 0.0f64;
    let excited = QutritState::basis(LEVEL_E).density();
    for t_us in [1.0, 3.5, 7.0] {
        let t = t_us * 1000.0;
        let rho = lindblad_evolve(&excited, &Idle { duration: t }, &noise, t, dt).unwrap();
        let want = (-t_us / model.t1()).exp();
        t1_err = t1_err.max((rho.population(LEVEL_E) / want - 1.0).abs());
    }

    let mut t2_err = 0.0f64;
    for (lower, upper, t2) in [(LEVEL_0, LEVEL_E, model.t2_0e()), (LEVEL_E, LEVEL_1, model.t2_e1())] {
        let plus = QutritState::superposition(lower, upper, c(1.0, 0.0)).density();
        for fraction in [0.5, 1.0, 1.5] {
            let t = fraction * t2 * 1000.0;
            let rho: DensityMatrix = lindblad_evolve(&plus, &Idle { duration: t }, &noise, t, dt).unwrap();
            let ratio = rho.matrix()[(lower, upper)].norm() / 0.5;
            let fitted = -(t / 1000.0) / ratio.ln();
            t2_err = t2_err.max((fitted / t2 - 1.0).abs());
        }
    }
    outcome(
        t1_err < 0.01 && t2_err < 0.02,
        format!("T1 relative error {t1_err:.1e} (< 1%), Ramsey T2 relative error {t2_err:.1e} (< 2%)"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 holonomy reproduction", criterion_1),
        ("2 parallel transport", criterion_2),
        ("3 named gates", criterion_3),
        ("4 dissipative fidelity", criterion_4),
        ("5 non-commutativity", criterion_5),
        ("6 theta-sweep shape", criterion_6),
        ("7 tomography oracle equivalence", criterion_7),
        ("8 Lindblad sanity", criterion_8),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failures} failed", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

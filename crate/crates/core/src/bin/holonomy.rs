//! Command-line runner for the holonomic-gate experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qutrit_holonomy::experiment::config::ExperimentConfig;
use qutrit_holonomy::experiment::runner::{initial_state, Model};
use qutrit_holonomy::experiment::{
    export_bloch, output, run_gates, run_sequence, run_sweep, ConfigError, ExperimentError, Simulator,
};
use qutrit_holonomy::tomography::io::{read_record, write_json, ChiJson, RecordJson};
use qutrit_holonomy::tomography::{process_fidelity, ReducedProcessMatrix};

#[derive(Debug, Parser)]
#[command(name = "holonomy", version, about = "Holonomic qutrit gate simulator with process tomography")]
struct Cli {
    /// TOML configuration; defaults to the device parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Tomography seed, overriding `tomography.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use exact probabilities instead of sampled shots.
    #[arg(long, global = true)]
    exact: bool,
    /// Disable decoherence.
    #[arg(long, global = true)]
    no_noise: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Diagonal of χ̃ across the θ grid, plus χ of every configured gate.
    Sweep,
    /// Composite of the configured gate sequence and its reverse.
    Sequence,
    /// Logical Bloch trajectory during the pulsed sequence.
    Bloch {
        /// Initial logical state, overriding `bloch.initial`.
        #[arg(long)]
        initial: Option<String>,
    },
    /// Reconstruct χ from a records file, or simulate records for a gate.
    Tomography {
        /// Records JSON to reconstruct.
        #[arg(long, conflicts_with = "gate")]
        records: Option<PathBuf>,
        /// Configured gate to simulate when no records are given.
        #[arg(long, default_value = "H")]
        gate: String,
        /// Gate label whose ideal process is the fidelity target.
        #[arg(long)]
        target: Option<String>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, ExperimentError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = &cli.output {
        config.output.dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        config.tomography.seed = seed;
    }
    if cli.exact {
        config.tomography.shots = 0;
    }
    if cli.no_noise {
        config.noise.enabled = false;
    }
    config.validate()?;
    Ok(config)
}

fn unknown(field: &str, label: &str) -> ExperimentError {
    ExperimentError::Config(ConfigError::Invalid {
        field: field.to_string(),
        message: format!("unknown gate {label}"),
    })
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}

fn run(cli: &Cli) -> Result<(), ExperimentError> {
    let config = load_config(cli)?;
    let dir = config.output.dir.clone();
    match &cli.command {
        Command::Sweep => {
            report(&output::write_sweep(&dir, &run_sweep(&config)?)?);
            report(&output::write_gates(&dir, &run_gates(&config)?)?);
        }
        Command::Sequence => {
            let result = run_sequence(&config)?;
            if let Some(o) = result.commutation_overlap {
                println!("commutation overlap {o:.3e}");
            }
            report(&output::write_sequence(&dir, &result)?);
        }
        Command::Bloch { initial } => {
            let name = initial.as_deref().unwrap_or(&config.bloch.initial);
            let state = initial_state(name).ok_or_else(|| {
                ExperimentError::Config(ConfigError::Invalid {
                    field: "--initial".into(),
                    message: format!("unknown state {name}"),
                })
            })?;
            report(&output::write_bloch(&dir, &export_bloch(&config, &state)?)?);
        }
        Command::Tomography { records, gate, target } => {
            let sim = Simulator::new(&config)?;
            std::fs::create_dir_all(&dir).map_err(|e| ExperimentError::Output(e.to_string()))?;
            let (record, stem) = match records {
                Some(path) => (read_record(path, sim.design())?, "records".to_string()),
                None => {
                    let g = config.gate(gate).ok_or_else(|| unknown("--gate", gate))?;
                    let channel = sim.gate_channel(&g, Model::Noisy)?;
                    let record = sim.design().acquire(
                        &|r: &qutrit_holonomy::qutrit::Mat3| channel.apply(r),
                        config.tomography.shots(),
                        config.tomography.seed,
                    );
                    let path = dir.join(format!("records_{gate}.json"));
                    write_json(&path, &RecordJson::from_record(&record, sim.design()))
                        .map_err(|e| ExperimentError::Output(e.to_string()))?;
                    report(&path);
                    (record, gate.clone())
                }
            };
            let chi = sim.reconstruct(&record)?;
            let reduced = chi.reduce();
            for (name, json) in [
                (format!("chi_{stem}.json"), ChiJson::from_full(&chi, Some(stem.clone()))),
                (format!("chi_tilde_{stem}.json"), ChiJson::from_reduced(&reduced, Some(stem.clone()))),
            ] {
                let path = dir.join(name);
                write_json(&path, &json).map_err(|e| ExperimentError::Output(e.to_string()))?;
                report(&path);
            }
            println!("trace of reduced chi {:.6}", reduced.trace());
            let target = target.clone().or_else(|| records.is_none().then(|| gate.clone()));
            if let Some(label) = target {
                let g = config.gate(&label).ok_or_else(|| unknown("--target", &label))?;
                let f = process_fidelity(&reduced, &ReducedProcessMatrix::from_unitary(&g.unitary()));
                println!("fidelity to {label} {f:.6}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

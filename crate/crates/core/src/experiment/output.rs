//! CSV tables and JSON process matrices.

use std::fs;
use std::path::{Path, PathBuf};

use super::runner::{BlochSample, ExperimentError, GateResult, ProcessSummary, SequenceResult, SweepRow};
use crate::tomography::io::{write_json, ChiJson};

fn num(x: f64) -> String {
    // Avoid printing "-0.0000000000" for rounding noise.
    let x = if x.abs() < 5e-11 { 0.0 } else { x };
    format!("{x:.10}")
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn out_err<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> ExperimentError + '_ {
    move |e| ExperimentError::Output(format!("{}: {e}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(out_err(parent))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(out_err(path))?;
    w.write_record(header).map_err(out_err(path))?;
    for row in rows {
        w.write_record(row).map_err(out_err(path))?;
    }
    w.flush().map_err(out_err(path))?;
    Ok(())
}

fn summary_columns(s: &ProcessSummary) -> Vec<String> {
    let d = s.reduced.diagonal();
    let mut v: Vec<String> = d.iter().map(|&x| num(x)).collect();
    v.push(num(s.trace()));
    v.push(num(s.fidelity));
    v
}

const SUMMARY_HEADER: [&str; 6] = ["chi_II", "chi_XX", "chi_YY", "chi_ZZ", "trace", "fidelity"];

pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<PathBuf, ExperimentError> {
    let path = dir.join("sweep.csv");
    let mut header = vec!["model", "theta", "phi"];
    header.extend(SUMMARY_HEADER);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.summary.model.name().to_string(), num(r.theta), num(r.phi)];
            v.extend(summary_columns(&r.summary));
            v
        })
        .collect();
    write_csv(&path, &header, &table)?;
    Ok(path)
}

fn write_chi(dir: &Path, stem: &str, s: &ProcessSummary) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(out_err(dir))?;
    let full = dir.join(format!("chi_{stem}.json"));
    write_json(&full, &ChiJson::from_full(&s.chi, Some(stem.to_string()))).map_err(out_err(&full))?;
    let reduced = dir.join(format!("chi_tilde_{stem}.json"));
    write_json(&reduced, &ChiJson::from_reduced(&s.reduced, Some(stem.to_string())))
        .map_err(out_err(&reduced))?;
    Ok(())
}

pub fn write_gates(dir: &Path, results: &[GateResult]) -> Result<PathBuf, ExperimentError> {
    let path = dir.join("gates.csv");
    let mut header = vec!["label", "model", "theta", "phi"];
    header.extend(SUMMARY_HEADER);
    let mut table = Vec::new();
    for r in results {
        let mut v = vec![
            r.gate.label().to_string(),
            r.summary.model.name().to_string(),
            num(r.gate.theta()),
            num(r.gate.phi()),
        ];
        v.extend(summary_columns(&r.summary));
        table.push(v);
        write_chi(dir, &format!("{}_{}", r.gate.label(), r.summary.model.name()), &r.summary)?;
    }
    write_csv(&path, &header, &table)?;
    Ok(path)
}

pub fn write_sequence(dir: &Path, result: &SequenceResult) -> Result<PathBuf, ExperimentError> {
    let path = dir.join("sequence.csv");
    let mut header = vec!["order", "model"];
    header.extend(SUMMARY_HEADER);
    header.extend(["pulse_error", "commutation_overlap"]);
    let overlap = result.commutation_overlap.map(sci).unwrap_or_default();
    let mut table = Vec::new();
    for r in &result.rows {
        let order = r.order.join("-");
        let mut v = vec![order.clone(), r.summary.model.name().to_string()];
        v.extend(summary_columns(&r.summary));
        v.push(sci(r.pulse_error));
        v.push(overlap.clone());
        table.push(v);
        write_chi(dir, &format!("{order}_{}", r.summary.model.name()), &r.summary)?;
    }
    write_csv(&path, &header, &table)?;
    Ok(path)
}

pub fn write_bloch(dir: &Path, samples: &[BlochSample]) -> Result<PathBuf, ExperimentError> {
    let path = dir.join("bloch.csv");
    let table: Vec<Vec<String>> = samples
        .iter()
        .map(|s| vec![num(s.time), num(s.x), num(s.y), num(s.z), num(s.aux_population)])
        .collect();
    write_csv(&path, &["time_ns", "x", "y", "z", "aux_population"], &table)?;
    Ok(path)
}

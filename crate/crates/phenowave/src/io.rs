//! Run output on disk: snapshot CSVs and the JSON manifest.
//!
//! A run directory holds `manifest.json` plus one or more snapshot CSVs:
//! `snapshots.csv` for the deterministic model, `replicate_NNN.csv` and
//! `ensemble.csv` for the stochastic one. Every CSV has the header
//! `time,x,n_1,...,n_I,p` and one row per (snapshot, grid node), with all
//! floats printed at 17 significant digits so reruns can be compared
//! byte for byte and parsed values round-trip exactly.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One snapshot as the writer sees it: time, per-phenotype densities, and
/// the pressure field.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: f64,
    pub densities: Vec<Vec<f64>>,
    pub pressure: Vec<f64>,
}

impl From<&crate::pde::Snapshot> for Frame {
    fn from(s: &crate::pde::Snapshot) -> Self {
        Frame {
            time: s.time,
            densities: s.fields.clone(),
            pressure: s.pressure.clone(),
        }
    }
}

impl From<&crate::ibm::IbmSnapshot> for Frame {
    fn from(s: &crate::ibm::IbmSnapshot) -> Self {
        Frame {
            time: s.time,
            densities: s.densities.clone(),
            pressure: s.pressure.clone(),
        }
    }
}

/// Provenance record written next to the CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Subcommand that produced the run.
    pub command: String,
    /// Crate version that produced the run.
    pub code_version: String,
    /// Content hash of the resolved configuration.
    pub config_hash: String,
    /// Preset name, when the run came from a shipped preset.
    pub preset: Option<String>,
    /// RNG algorithm identifier (stochastic runs only).
    pub rng_algorithm: Option<String>,
    /// Base seed (stochastic runs only).
    pub seed: Option<u64>,
    /// RNG streams used, one per replicate (stochastic runs only).
    pub streams: Option<Vec<u64>>,
    /// Snapshot times as requested by the schedule.
    pub requested_times: Vec<f64>,
    /// Snapshot times actually attained by the stepper.
    pub actual_times: Vec<f64>,
    /// Grid spacing, recorded so readers need not re-derive it.
    pub dx: f64,
}

/// A run read back from disk.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub manifest: Manifest,
    pub frames: Vec<Frame>,
    pub dx: f64,
}

/// Full-precision float format: 17 significant digits, round-trip exact.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write one snapshot CSV with header `time,x,n_1..n_I,p`.
pub fn write_snapshots(path: &Path, dx: f64, frames: &[Frame]) -> Result<()> {
    let bands = frames
        .first()
        .map(|f| f.densities.len())
        .ok_or_else(|| Error::Structural("no snapshots to write".into()))?;
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["time".to_string(), "x".to_string()];
    header.extend((1..=bands).map(|i| format!("n_{i}")));
    header.push("p".to_string());
    w.write_record(&header).map_err(csv_err)?;
    let mut record = Vec::with_capacity(bands + 3);
    for frame in frames {
        if frame.densities.len() != bands {
            return Err(Error::Structural(format!(
                "snapshot at t = {} has {} bands, expected {bands}",
                frame.time,
                frame.densities.len()
            )));
        }
        for j in 0..frame.pressure.len() {
            record.clear();
            record.push(fmt(frame.time));
            record.push(fmt(j as f64 * dx));
            for band in &frame.densities {
                record.push(fmt(band[j]));
            }
            record.push(fmt(frame.pressure[j]));
            w.write_record(&record).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("csv: {other:?}")),
    }
}

/// Read one snapshot CSV written by `write_snapshots`.
pub fn read_snapshots(path: &Path, dx: f64) -> Result<Vec<Frame>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.len() < 4 || &header[0] != "time" || &header[1] != "x" {
        return Err(Error::Format(format!(
            "{}: expected header time,x,n_1..,p, got {:?}",
            path.display(),
            header
        )));
    }
    let bands = header.len() - 3;
    let mut frames: Vec<Frame> = Vec::new();
    for row in r.records() {
        let row = row.map_err(csv_err)?;
        let parse = |idx: usize| -> Result<f64> {
            row[idx].parse().map_err(|_| {
                Error::Format(format!(
                    "{}: field {:?} is not a number",
                    path.display(),
                    &row[idx]
                ))
            })
        };
        let time = parse(0)?;
        let fresh = frames.last().is_none_or(|f| f.time != time);
        if fresh {
            frames.push(Frame {
                time,
                densities: vec![Vec::new(); bands],
                pressure: Vec::new(),
            });
        }
        let frame = frames.last_mut().unwrap();
        for (i, band) in frame.densities.iter_mut().enumerate() {
            band.push(parse(2 + i)?);
        }
        frame.pressure.push(parse(2 + bands)?);
        // the x column is redundant given dx; verify it to catch grid drift
        let j = frame.pressure.len() - 1;
        let x = parse(1)?;
        if (x - j as f64 * dx).abs() > 1e-9 * dx.max(1.0) {
            return Err(Error::Structural(format!(
                "{}: row at t = {time} has x = {x}, expected {}",
                path.display(),
                j as f64 * dx
            )));
        }
    }
    if frames.is_empty() {
        return Err(Error::Format(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(frames)
}

/// Write `manifest.json` into the run directory.
pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Format(format!("manifest serialization: {e}")))?;
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

/// Read a run directory: its manifest plus the primary snapshot CSV
/// (`ensemble.csv` when present, else `snapshots.csv`).
pub fn read_run(dir: &Path) -> Result<StoredRun> {
    let manifest_text = std::fs::read_to_string(dir.join("manifest.json"))
        .map_err(|e| Error::Format(format!("{}: manifest.json: {e}", dir.display())))?;
    let manifest: Manifest = serde_json::from_str(&manifest_text)
        .map_err(|e| Error::Format(format!("{}: manifest.json: {e}", dir.display())))?;
    let ensemble = dir.join("ensemble.csv");
    let csv_path = if ensemble.exists() {
        ensemble
    } else {
        dir.join("snapshots.csv")
    };
    let frames = read_snapshots(&csv_path, manifest.dx)?;
    Ok(StoredRun {
        dx: manifest.dx,
        manifest,
        frames,
    })
}

//! Command implementations behind the four subcommands. Each takes a
//! resolved [`RunConfig`] plus an output location, does the work through
//! the library modules, and writes CSVs and a manifest, so the binary
//! stays a thin argument parser and other drivers (tests, examples) can
//! call the same code paths.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::{Frame, Manifest, StoredRun};
use crate::measure::{self, KinkInterface, PressureComparison, RunSummary, SpeedFit};
use crate::model::gamma_from_mu;
use crate::wave::{self, WaveNumerics, WavePrediction};
use crate::{ibm, pde};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// What `predict` writes: the wave description plus its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictReport {
    /// "analytic" (solved from the config's initial masses) or "measured"
    /// (speed relation applied to a finished run).
    pub mode: String,
    /// Content hash of the parameter set the prediction used.
    pub params_hash: String,
    pub prediction: WavePrediction,
    /// Predicted density ratios across the I-1 interfaces.
    pub jump_ratios: Vec<f64>,
}

/// One row of the interface-position comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositionRow {
    /// Band index i (2-based bands have a Z_i).
    pub band: usize,
    /// Measured X_i - X_1 from support endpoints.
    pub measured: f64,
    /// Predicted z_i from the wave description.
    pub predicted: f64,
    pub rel_err: f64,
}

/// One row of the density-jump comparison at an interface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpRow {
    /// Interface index i (between bands i and i+1), 1-based.
    pub interface: usize,
    pub measured: Option<f64>,
    pub predicted: f64,
}

/// What `compare` writes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub summary_a: RunSummary,
    pub summary_b: RunSummary,
    /// Pointwise pressure discrepancy at the final common snapshot.
    pub pressure: PressureComparison,
    /// Kink audit of run A's final pressure field.
    pub kinks_a: Vec<KinkInterface>,
    /// Interface crossover positions in run A's final snapshot.
    pub crossovers_a: Vec<Option<(usize, f64)>>,
    /// Density jump ratios at run A's interfaces vs the weight prediction.
    pub jumps_a: Vec<JumpRow>,
    /// Interface positions vs an analytic prediction, when one was given.
    pub positions: Option<Vec<PositionRow>>,
    pub speed_a: SpeedFit,
    pub speed_b: SpeedFit,
}

fn manifest_base(cfg: &RunConfig, command: &str, preset: Option<&str>) -> Manifest {
    Manifest {
        command: command.into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.content_hash(),
        preset: preset.map(str::to_owned),
        rng_algorithm: None,
        seed: None,
        streams: None,
        requested_times: cfg.snapshot_times(),
        actual_times: Vec::new(),
        dx: cfg.grid.dx(),
    }
}

/// Run the continuum model and write `snapshots.csv` + `manifest.json`.
pub fn cmd_pde(cfg: &RunConfig, preset: Option<&str>, out_dir: &Path) -> Result<pde::RunResult> {
    std::fs::create_dir_all(out_dir)?;
    let settings = pde::Settings {
        cfl_safety: cfg.run.cfl_safety,
        dt_max: cfg.run.dt_max,
        ..pde::Settings::default()
    };
    let initial = crate::model::build_initial(&cfg.grid, &cfg.initial, &cfg.phenotypes)?;
    let result = pde::run(
        &cfg.phenotypes,
        &cfg.grid,
        initial,
        &cfg.snapshot_times(),
        &settings,
    )?;
    let frames: Vec<Frame> = result.snapshots.iter().map(Frame::from).collect();
    crate::io::write_snapshots(&out_dir.join("snapshots.csv"), cfg.grid.dx(), &frames)?;
    let mut manifest = manifest_base(cfg, "pde", preset);
    manifest.actual_times = result.snapshots.iter().map(|s| s.time).collect();
    crate::io::write_manifest(out_dir, &manifest)?;
    Ok(result)
}

/// Run the lattice model ensemble (replicates in parallel), write one CSV
/// per replicate plus `ensemble.csv` and `manifest.json`.
pub fn cmd_ibm(
    cfg: &RunConfig,
    preset: Option<&str>,
    out_dir: &Path,
) -> Result<Vec<ibm::IbmRunResult>> {
    std::fs::create_dir_all(out_dir)?;
    let times = cfg.snapshot_times();
    let runs: Vec<ibm::IbmRunResult> = (0..cfg.run.replicates as u64)
        .into_par_iter()
        .map(|stream| {
            ibm::run(
                &cfg.phenotypes,
                &cfg.grid,
                &cfg.initial,
                &times,
                cfg.run.seed,
                stream,
            )
        })
        .collect::<Result<_>>()?;
    for run in &runs {
        let frames: Vec<Frame> = run.snapshots.iter().map(Frame::from).collect();
        let name = format!("replicate_{:03}.csv", run.stream);
        crate::io::write_snapshots(&out_dir.join(name), cfg.grid.dx(), &frames)?;
    }
    let ensemble = ibm::ensemble_average(&runs)?;
    let frames: Vec<Frame> = ensemble.iter().map(Frame::from).collect();
    crate::io::write_snapshots(&out_dir.join("ensemble.csv"), cfg.grid.dx(), &frames)?;
    let mut manifest = manifest_base(cfg, "ibm", preset);
    manifest.rng_algorithm = Some(ibm::RNG_ALGORITHM.into());
    manifest.seed = Some(cfg.run.seed);
    manifest.streams = Some((0..cfg.run.replicates as u64).collect());
    manifest.actual_times = ensemble.iter().map(|s| s.time).collect();
    crate::io::write_manifest(out_dir, &manifest)?;
    Ok(runs)
}

/// Fully analytic prediction: band masses from the config's initial
/// condition, then the shooting solver.
pub fn predict_analytic(cfg: &RunConfig) -> Result<PredictReport> {
    let fields = crate::model::build_initial(&cfg.grid, &cfg.initial, &cfg.phenotypes)?;
    let masses = measure::band_masses(&fields, cfg.grid.dx());
    let prediction = wave::solve_wave(&masses[1..], &cfg.phenotypes, &WaveNumerics::default())?;
    Ok(PredictReport {
        mode: "analytic".into(),
        params_hash: cfg.content_hash(),
        jump_ratios: wave::density_jump_ratios(&cfg.phenotypes),
        prediction,
    })
}

/// Pressure at an interpolated crossover position.
fn pressure_at(p: &[f64], crossover: (usize, f64), dx: f64) -> f64 {
    let (m, xc) = crossover;
    let theta = (xc / dx - m as f64).clamp(0.0, 1.0);
    p[m] * (1.0 - theta) + p[m + 1] * theta
}

/// Measured-mode prediction: extract p(0) at the first interface and the
/// band masses from a finished run's final snapshot, then apply the speed
/// relation and position formulas.
pub fn predict_measured(run: &StoredRun, cfg: &RunConfig) -> Result<PredictReport> {
    let frame = run
        .frames
        .last()
        .ok_or_else(|| Error::Structural("run has no snapshots".into()))?;
    if frame.densities.len() != cfg.phenotypes.count() {
        return Err(Error::Structural(format!(
            "run has {} bands but the config names {} phenotypes",
            frame.densities.len(),
            cfg.phenotypes.count()
        )));
    }
    let crossovers = measure::interface_crossovers(&frame.densities, run.dx);
    let first = crossovers
        .first()
        .copied()
        .flatten()
        .ok_or_else(|| {
            Error::Domain(
                "no crossover between bands 1 and 2 in the final snapshot; \
                 cannot measure the rear interface pressure"
                    .into(),
            )
        })?;
    let p0 = pressure_at(&frame.pressure, first, run.dx);
    let masses = measure::band_masses(&frame.densities, run.dx);
    let c = wave::speed_from_p0(p0, &masses[1..], &cfg.phenotypes)?;
    let pressures = wave::interface_pressures(c, &masses[1..], &cfg.phenotypes)?;
    let tail = wave::interface_positions(c, &masses[1..], &cfg.phenotypes)?;
    let mut positions = vec![0.0];
    positions.extend(tail);
    let mut pressures_full = pressures;
    pressures_full.push(0.0);
    Ok(PredictReport {
        mode: "measured".into(),
        params_hash: cfg.content_hash(),
        jump_ratios: wave::density_jump_ratios(&cfg.phenotypes),
        prediction: WavePrediction {
            speed: c,
            positions,
            pressures: pressures_full,
            masses: masses[1..].to_vec(),
        },
    })
}

/// Support thresholds per band: the configured relative threshold for the
/// continuum model; half a cell per site for lattice runs, where the field
/// is quantized.
pub fn support_thresholds(cfg: &RunConfig, command: &str) -> Vec<f64> {
    if command == "ibm" {
        vec![0.5 / cfg.grid.dx(); cfg.phenotypes.count()]
    } else {
        cfg.initial
            .amplitudes()
            .iter()
            .map(|&a| cfg.run.support_threshold_rel * a)
            .collect()
    }
}

fn summarize(run: &StoredRun, cfg: &RunConfig) -> Result<RunSummary> {
    let times: Vec<f64> = run.frames.iter().map(|f| f.time).collect();
    let snapshots: Vec<Vec<Vec<f64>>> =
        run.frames.iter().map(|f| f.densities.clone()).collect();
    let t_last = *times.last().unwrap();
    measure::summarize_run(
        &times,
        &snapshots,
        run.dx,
        cfg.phenotypes.p_bar(),
        cfg.phenotypes.omega(),
        &support_thresholds(cfg, &run.manifest.command),
        (t_last / 3.0, t_last),
        0.0,
    )
}

/// Largest tolerable snapshot-time skew between two runs being compared:
/// each stepper lands within one step of the requested time.
const TIME_SKEW: f64 = 1e-2;

/// Cross-model comparison: summaries of both runs, pointwise pressure
/// error at the final snapshot (written to `pressure_error.csv`), kink and
/// jump audits of run A, and an interface-position table when an analytic
/// prediction is supplied.
pub fn cmd_compare(
    a: &StoredRun,
    b: &StoredRun,
    cfg: &RunConfig,
    prediction: Option<&WavePrediction>,
    out_dir: &Path,
) -> Result<CompareReport> {
    if (a.dx - b.dx).abs() > 1e-12 * a.dx {
        return Err(Error::Structural(format!(
            "grid spacing differs: {} vs {}",
            a.dx, b.dx
        )));
    }
    if a.frames.len() != b.frames.len() {
        return Err(Error::Structural(format!(
            "snapshot counts differ: {} vs {}",
            a.frames.len(),
            b.frames.len()
        )));
    }
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        if (fa.time - fb.time).abs() > TIME_SKEW {
            return Err(Error::Structural(format!(
                "snapshot times diverge: {} vs {}",
                fa.time, fb.time
            )));
        }
        if fa.pressure.len() != fb.pressure.len() {
            return Err(Error::Structural(format!(
                "grid sizes differ: {} vs {} nodes",
                fa.pressure.len(),
                fb.pressure.len()
            )));
        }
    }

    let summary_a = summarize(a, cfg)?;
    let summary_b = summarize(b, cfg)?;
    let last_a = a.frames.last().unwrap();
    let last_b = b.frames.last().unwrap();

    // exclusion set for the pressure comparison: interface crossovers and
    // leading support edges of both runs
    let crossovers_a = measure::interface_crossovers(&last_a.densities, a.dx);
    let crossovers_b = measure::interface_crossovers(&last_b.densities, b.dx);
    let mut interface_cells: Vec<usize> = crossovers_a
        .iter()
        .chain(&crossovers_b)
        .flatten()
        .map(|&(m, _)| m)
        .collect();
    let thr_a = support_thresholds(cfg, &a.manifest.command);
    let thr_b = support_thresholds(cfg, &b.manifest.command);
    for (frame, thr) in [(last_a, &thr_a), (last_b, &thr_b)] {
        for (band, &t) in frame.densities.iter().zip(thr) {
            if let Some(edge) = measure::support_endpoint(band, t)? {
                interface_cells.push(edge);
            }
        }
    }
    let pressure = measure::compare_pressure(
        &last_a.pressure,
        &last_b.pressure,
        cfg.phenotypes.p_bar(),
        &interface_cells,
        5,
    )?;

    let kink_interfaces: Vec<(usize, f64)> =
        crossovers_a.iter().copied().flatten().collect();
    let kinks_a = measure::kink_audit(
        &last_a.pressure,
        &kink_interfaces,
        cfg.phenotypes.mu(),
        summary_a.c_fit.slope,
        a.dx,
    )?;

    let jumps_a = crossovers_a
        .iter()
        .enumerate()
        .map(|(i, cr)| JumpRow {
            interface: i + 1,
            measured: cr.and_then(|c| {
                measure::jump_ratio(
                    &last_a.densities[i],
                    &last_a.densities[i + 1],
                    c,
                    4,
                    4,
                    a.dx,
                )
            }),
            predicted: wave::density_jump_ratios(&cfg.phenotypes)[i],
        })
        .collect();

    let positions = prediction
        .map(|pred| {
            let supports = summary_a.supports.last().unwrap();
            let x1 = supports[0].ok_or_else(|| {
                Error::Domain("band 1 has empty support in the final snapshot".into())
            })?;
            let mut rows = Vec::new();
            for (i, sup) in supports.iter().enumerate().skip(1) {
                let Some(xi) = sup else { continue };
                let measured = xi - x1;
                let predicted = pred.positions[i];
                rows.push(PositionRow {
                    band: i + 1,
                    measured,
                    predicted,
                    rel_err: (measured - predicted).abs() / predicted,
                });
            }
            Ok::<_, Error>(rows)
        })
        .transpose()?;

    let report = CompareReport {
        speed_a: summary_a.c_fit.clone(),
        speed_b: summary_b.c_fit.clone(),
        summary_a,
        summary_b,
        pressure,
        kinks_a,
        crossovers_a,
        jumps_a,
        positions,
    };

    std::fs::create_dir_all(out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("pressure_error.csv"))
        .map_err(|e| Error::Format(format!("pressure_error.csv: {e}")))?;
    w.write_record(["x", "p_a", "p_b", "rel_err"])
        .map_err(|e| Error::Format(format!("pressure_error.csv: {e}")))?;
    for j in 0..last_a.pressure.len() {
        w.write_record([
            format!("{:.16e}", j as f64 * a.dx),
            format!("{:.16e}", last_a.pressure[j]),
            format!("{:.16e}", last_b.pressure[j]),
            format!("{:.16e}", report.pressure.error[j]),
        ])
        .map_err(|e| Error::Format(format!("pressure_error.csv: {e}")))?;
    }
    w.flush()?;
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Format(format!("report serialization: {e}")))?;
    std::fs::write(out_dir.join("report.json"), text + "\n")?;
    Ok(report)
}

/// Movement sensitivities implied by a config, exposed for examples and
/// diagnostics.
pub fn lattice_sensitivities(cfg: &RunConfig) -> Result<Vec<f64>> {
    gamma_from_mu(
        cfg.phenotypes.mu(),
        cfg.grid.tau(),
        cfg.phenotypes.p_bar(),
        cfg.grid.dx(),
    )
}

//! Run both models on the same small configuration, write their run
//! directories, and produce the cross-model comparison report.
//!
//!     cargo run --release --example model_comparison

use phenowave::cli::{cmd_compare, cmd_ibm, cmd_pde, predict_measured};
use phenowave::config::RunConfig;
use phenowave::io::read_run;

const CONFIG: &str = "\
[phenotypes]
alpha = 10, 0, 0
mu = 1e-4, 2e-4, 3e-4
omega = 1, 2, 3
p_bar = 4e4

[grid]
length = 50
dx = 0.1
tau = 1e-4

[initial]
amplitudes = 38600, 19300, 12866.666666666666
decay = 6e-2
boundaries = 0, 10, 20, 50

[run]
t_end = 30
snapshot_start = 10
snapshot_interval = 2.5
seed = 5
replicates = 3
cfl_safety = 0.9
dt_max = 4e-4
support_threshold_rel = 1e-8
";

fn main() -> phenowave::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    let dir = std::env::temp_dir().join("phenowave_model_comparison");
    let pde_dir = dir.join("pde");
    let ibm_dir = dir.join("ibm");
    let cmp_dir = dir.join("compare");

    cmd_pde(&cfg, None, &pde_dir)?;
    cmd_ibm(&cfg, None, &ibm_dir)?;
    let pde_run = read_run(&pde_dir)?;
    let ibm_run = read_run(&ibm_dir)?;

    let prediction = predict_measured(&pde_run, &cfg)?;
    let report = cmd_compare(
        &pde_run,
        &ibm_run,
        &cfg,
        Some(&prediction.prediction),
        &cmp_dir,
    )?;

    println!(
        "front speeds: continuum {:.4}, lattice ensemble {:.4}",
        report.speed_a.slope, report.speed_b.slope
    );
    println!(
        "pressure error at t = {:.1}: {:.3e} near interfaces, {:.3e} away",
        pde_run.frames.last().unwrap().time,
        report.pressure.max_near,
        report.pressure.max_far
    );
    for row in &report.jumps_a {
        println!(
            "interface {}: density ratio {} vs predicted {:.4}",
            row.interface,
            row.measured
                .map_or("unmeasurable".into(), |m| format!("{m:.4}")),
            row.predicted
        );
    }
    if let Some(rows) = &report.positions {
        for row in rows {
            println!(
                "band {}: interface offset {:.2} vs predicted {:.2} ({:.1}% off)",
                row.band,
                row.measured,
                row.predicted,
                100.0 * row.rel_err
            );
        }
    }
    println!("full report: {}", cmp_dir.join("report.json").display());
    Ok(())
}

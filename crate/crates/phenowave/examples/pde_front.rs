//! Run a short continuum simulation and fit the front speed.
//!
//!     cargo run --release --example pde_front

use phenowave::config::RunConfig;
use phenowave::measure::{band_masses, fit_speed, track_level, TRACK_LEVELS};
use phenowave::model::{build_initial, pressure};
use phenowave::pde::{run, Settings};

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
seed = 1
replicates = 1
cfl_safety = 0.9
dt_max = 4e-4
support_threshold_rel = 1e-8
";

fn main() -> phenowave::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    let initial = build_initial(&cfg.grid, &cfg.initial, &cfg.phenotypes)?;
    let settings = Settings {
        dt_max: cfg.run.dt_max,
        ..Settings::default()
    };
    let result = run(
        &cfg.phenotypes,
        &cfg.grid,
        initial,
        &cfg.snapshot_times(),
        &settings,
    )?;
    println!(
        "{} steps, min dt {:.2e}, clipped mass {:.2e}",
        result.steps, result.min_dt, result.clipped_mass
    );

    let times: Vec<f64> = result.snapshots.iter().map(|s| s.time).collect();
    let pressures: Vec<Vec<f64>> = result
        .snapshots
        .iter()
        .map(|s| pressure(&s.fields, cfg.phenotypes.omega()))
        .collect::<phenowave::Result<_>>()?;
    let t_end = *times.last().unwrap();
    for level in TRACK_LEVELS {
        let track = track_level(
            &times,
            &pressures,
            level,
            cfg.phenotypes.p_bar(),
            cfg.grid.dx(),
        )?;
        let fit = fit_speed(&track.points, (t_end / 3.0, t_end))?;
        println!(
            "level {:.1}: speed {:.4} (stderr {:.1e}, {} points)",
            level, fit.slope, fit.slope_stderr, fit.points_used
        );
    }

    let m0 = band_masses(&result.snapshots[0].fields, cfg.grid.dx());
    let m1 = band_masses(&result.snapshots.last().unwrap().fields, cfg.grid.dx());
    for i in 1..m0.len() {
        println!(
            "band {} mass drift: {:.2e} (passive bands are conserved)",
            i + 1,
            (m1[i] - m0[i]).abs() / m0[i]
        );
    }
    Ok(())
}

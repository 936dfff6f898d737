//! Run a small lattice-model ensemble and compare its mean front position
//! with a single replicate's.
//!
//!     cargo run --release --example ibm_ensemble

use phenowave::ibm::{ensemble_average, run};
use phenowave::measure::{fit_speed, track_level};
use phenowave::model::{Grid, InitialHumps, Phenotypes};

fn main() -> phenowave::Result<()> {
    let phen = Phenotypes::new(
        vec![10.0, 0.0, 0.0],
        vec![1e-4, 2e-4, 3e-4],
        vec![1.0, 2.0, 3.0],
        4e4,
    )?;
    let grid = Grid::new(50.0, 0.1, 1e-4)?;
    let humps = InitialHumps::new(
        vec![38600.0, 19300.0, 12866.666666666666],
        6e-2,
        vec![0.0, 10.0, 20.0, 50.0],
    )?;
    let times: Vec<f64> = (0..=8).map(|k| 10.0 + 2.5 * k as f64).collect();

    let seed = 42;
    let replicates = 3;
    let runs: Vec<_> = (0..replicates)
        .map(|stream| run(&phen, &grid, &humps, &times, seed, stream))
        .collect::<phenowave::Result<_>>()?;
    for r in &runs {
        let total: u64 = r
            .snapshots
            .last()
            .unwrap()
            .densities
            .iter()
            .flat_map(|b| b.iter())
            .map(|&v| (v * grid.dx()).round() as u64)
            .sum();
        println!(
            "replicate {} finished at t = {} with {} cells",
            r.stream,
            r.snapshots.last().unwrap().time,
            total
        );
    }

    let ensemble = ensemble_average(&runs)?;
    let actual: Vec<f64> = ensemble.iter().map(|s| s.time).collect();
    let pressures: Vec<Vec<f64>> = ensemble.iter().map(|s| s.pressure.clone()).collect();
    let track = track_level(&actual, &pressures, 0.2, phen.p_bar(), grid.dx())?;
    let t_end = *actual.last().unwrap();
    let fit = fit_speed(&track.points, (t_end / 3.0, t_end))?;
    println!(
        "ensemble front speed {:.4} over t in [{:.1}, {:.1}]",
        fit.slope,
        t_end / 3.0,
        t_end
    );
    Ok(())
}

//! Solve the travelling-wave problem for the three-band baseline and print
//! the full prediction.
//!
//!     cargo run --release --example wave_prediction

use phenowave::model::Phenotypes;
use phenowave::wave::{solve_wave, speed_from_p0, WaveNumerics};

fn main() -> phenowave::Result<()> {
    let phen = Phenotypes::new(
        vec![10.0, 0.0, 0.0],
        vec![1e-4, 2e-4, 3e-4],
        vec![1.0, 2.0, 3.0],
        4e4,
    )?;
    // band masses of the reference initial condition (density * length)
    let masses = [70752.93261209871, 47195.014043248535];

    let prediction = solve_wave(&masses, &phen, &WaveNumerics::default())?;
    println!("wave speed c = {:.4}", prediction.speed);
    for (i, (z, p)) in prediction
        .positions
        .iter()
        .zip(&prediction.pressures)
        .enumerate()
    {
        println!("interface {}: z = {:8.4}, p = {:10.1}", i + 1, z, p);
    }

    // the speed relation inverts the first interface pressure exactly
    let c_back = speed_from_p0(prediction.pressures[0], &masses, &phen)?;
    println!(
        "round trip through the speed relation: {:.6} vs {:.6}",
        c_back, prediction.speed
    );
    Ok(())
}

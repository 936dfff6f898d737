//! Shoot the rear pressure ODE at several candidate speeds: the attained
//! p(0-) decreases with c, which is what makes the bisection in
//! `solve_wave` well posed.
//!
//!     cargo run --release --example shooting_profile

use phenowave::model::Phenotypes;
use phenowave::wave::{shoot_rear, WaveNumerics};

fn main() -> phenowave::Result<()> {
    let phen = Phenotypes::new(
        vec![10.0, 0.0, 0.0],
        vec![1e-4, 2e-4, 3e-4],
        vec![1.0, 2.0, 3.0],
        4e4,
    )?;
    let num = WaveNumerics::default();

    println!("{:>6} {:>12} {:>8}", "c", "p(0-)", "steps");
    for c in [0.2, 0.3, 0.42, 0.5, 0.7, 1.0] {
        let sol = shoot_rear(c, &phen, &num, 0.0)?;
        match sol.p0_minus() {
            Some(p0) => println!("{c:>6.2} {p0:>12.1} {:>8}", sol.steps),
            None => println!("{c:>6.2} {:>12} {:>8}", "floored", sol.steps),
        }
    }

    // a short stretch of the profile behind the kink for the baseline speed
    let sol = shoot_rear(0.42, &phen, &num, 0.0)?;
    println!("\nrear profile at c = 0.42 (z measured from the kink):");
    let profile = &sol.profile;
    for (z, p) in profile.iter().rev().step_by(profile.len() / 8).rev() {
        println!("  z = {z:8.2}  p = {p:10.1}");
    }
    Ok(())
}

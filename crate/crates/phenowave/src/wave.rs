//! Travelling-wave analytics for the continuum model.
//!
//! For parameter regimes where only the least mobile phenotype proliferates
//! and mobilities increase with the phenotype index, the invading front is a
//! travelling wave in which the phenotypes occupy consecutive bands
//! separated by interfaces z_1 = 0 < z_2 < ... < z_I (wave coordinates,
//! z_1 at the rear-band edge). Ahead of z_1 the pressure profile is
//! piecewise linear with slope -c/mu_i on band i, which yields closed forms:
//!
//! * speed relation      p(0)^2 = 2 c sum_{j>=2} (omega_j/mu_j) M_j
//! * interface pressure  p(z_i)^2 = 2 c sum_{j>=i+1} (omega_j/mu_j) M_j
//! * interface position  z_i = z_{i-1} + (mu_i/c)(p(z_{i-1}) - p(z_i)),
//!   closed by z_I = z_{I-1} + sqrt(2 omega_I mu_I M_I / c)
//! * density jumps       n_{i+1}(z_i+)/n_i(z_i-) = omega_i/omega_{i+1}
//!
//! where M_j is the conserved mass of phenotype j >= 2. Behind z_1 the
//! pressure obeys the rear ODE -c p' - mu_1 (p p')' = alpha_1 G(p) p with
//! p(-inf) = p_bar and p'(0-) = -c/mu_1. [`shoot_rear`] integrates it
//! forward from the unstable manifold of the saturated state and reads off
//! p(0-); [`solve_wave`] bisects the speed until p(0-) from the rear ODE
//! meets p(0+) from the speed relation, which pins the unique wave.

use crate::error::{Error, Result};
use crate::model::{Phenotypes, growth_rate, growth_rate_deriv};
use ode_solvers::dopri5::Dopri5;
use ode_solvers::{System, Vector2};
use serde::{Deserialize, Serialize};

/// Numerical controls for [`shoot_rear`] and [`solve_wave`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveNumerics {
    /// Bisection bracket for the speed.
    pub bracket: (f64, f64),
    /// Convergence tolerance on |p(0-) - p(0+)|, relative to p_bar.
    pub match_tol_rel: f64,
    /// Per-step relative tolerance of the ODE integrator.
    pub ode_rtol: f64,
    /// The rear integration starts at p = p_bar (1 - far_field_rel), so the
    /// far end of the profile sits within far_field_rel * p_bar of p_bar.
    pub far_field_rel: f64,
    /// Abort a shot that has not met any stop condition within this span.
    pub max_span: f64,
    /// Bisection iteration cap.
    pub max_iters: u32,
}

impl Default for WaveNumerics {
    fn default() -> Self {
        Self {
            bracket: (1e-3, 1e1),
            match_tol_rel: 1e-4,
            ode_rtol: 1e-8,
            far_field_rel: 1e-6,
            max_span: 500.0,
            max_iters: 200,
        }
    }
}

/// Full analytic wave description assembled by [`solve_wave`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WavePrediction {
    /// Wave speed c.
    pub speed: f64,
    /// Interface positions z_1..z_I in wave coordinates, z_1 = 0.
    pub positions: Vec<f64>,
    /// Interface pressures p(z_1)..p(z_I); the last entry is 0.
    pub pressures: Vec<f64>,
    /// Masses M_2..M_I the prediction was built from.
    pub masses: Vec<f64>,
}

/// How a rear-ODE shot ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShootOutcome {
    /// The slope condition p' = -c/mu_1 was reached at pressure `p0_minus`.
    Matched { p0_minus: f64 },
    /// The pressure fell to the configured floor first: the candidate speed
    /// is too large to connect to the saturated state.
    Floored { pressure: f64 },
}

/// One rear-ODE integration: profile samples and the attained endpoint.
#[derive(Debug, Clone)]
pub struct RearOdeSolution {
    pub outcome: ShootOutcome,
    /// Distance integrated from the far-field seed to the stop point.
    pub span: f64,
    /// Sampled (z, p) pairs with z shifted so the stop point is z = 0;
    /// the far field is at z = -span.
    pub profile: Vec<(f64, f64)>,
    /// Accepted integrator steps.
    pub steps: u32,
}

impl RearOdeSolution {
    /// Attained p(0-), if the slope condition was reached.
    pub fn p0_minus(&self) -> Option<f64> {
        match self.outcome {
            ShootOutcome::Matched { p0_minus } => Some(p0_minus),
            ShootOutcome::Floored { .. } => None,
        }
    }
}

fn check_masses(masses: &[f64], phen: &Phenotypes) -> Result<()> {
    if masses.len() + 1 != phen.count() {
        return Err(Error::Structural(format!(
            "expected {} masses for phenotypes 2..{}, got {}",
            phen.count() - 1,
            phen.count(),
            masses.len()
        )));
    }
    if let Some(&bad) = masses.iter().find(|m| !m.is_finite() || **m <= 0.0) {
        return Err(Error::Domain(format!(
            "band masses must be positive and finite, got {bad}"
        )));
    }
    Ok(())
}

fn check_ordering(phen: &Phenotypes) -> Result<()> {
    if !phen.mobility_ordered() {
        return Err(Error::Domain(
            "wave analytics require mobilities strictly increasing with the \
             phenotype index"
                .into(),
        ));
    }
    Ok(())
}

/// Sum s = sum_{j>=2} (omega_j/mu_j) M_j appearing in the speed relation.
/// `masses[k]` is the mass of phenotype k+2 (1-based), i.e. the slice runs
/// over the non-proliferating phenotypes in order.
fn mass_pressure_sum(masses: &[f64], phen: &Phenotypes) -> f64 {
    masses
        .iter()
        .enumerate()
        .map(|(k, &m)| phen.omega()[k + 1] / phen.mu()[k + 1] * m)
        .sum()
}

/// Invert the speed relation: c = p0^2 / (2 sum_{j>=2} (omega_j/mu_j) M_j).
pub fn speed_from_p0(p0: f64, masses: &[f64], phen: &Phenotypes) -> Result<f64> {
    if !(p0.is_finite() && p0 > 0.0) {
        return Err(Error::Domain(format!(
            "interface pressure must be positive, got {p0}"
        )));
    }
    check_masses(masses, phen)?;
    check_ordering(phen)?;
    Ok(p0 * p0 / (2.0 * mass_pressure_sum(masses, phen)))
}

/// Interface pressures p(z_1)..p(z_{I-1}):
/// p(z_i) = sqrt(2 c sum_{j>=i+1} (omega_j/mu_j) M_j).
pub fn interface_pressures(c: f64, masses: &[f64], phen: &Phenotypes) -> Result<Vec<f64>> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Domain(format!("wave speed must be positive, got {c}")));
    }
    check_masses(masses, phen)?;
    // suffix sums of (omega_j/mu_j) M_j, narrowing one band per interface
    let mut out = Vec::with_capacity(masses.len());
    let mut tail = 0.0;
    let mut suffix = vec![0.0; masses.len()];
    for k in (0..masses.len()).rev() {
        tail += phen.omega()[k + 1] / phen.mu()[k + 1] * masses[k];
        suffix[k] = tail;
    }
    for s in suffix {
        out.push((2.0 * c * s).sqrt());
    }
    Ok(out)
}

/// Interface positions z_2..z_I from the piecewise-linear pressure profile:
/// each band i spans (mu_i/c) times its pressure drop, and the leading band
/// closes with z_I - z_{I-1} = sqrt(2 omega_I mu_I M_I / c).
pub fn interface_positions(c: f64, masses: &[f64], phen: &Phenotypes) -> Result<Vec<f64>> {
    check_ordering(phen)?;
    let p = interface_pressures(c, masses, phen)?;
    let count = phen.count();
    let mut z = Vec::with_capacity(count - 1);
    let mut prev = 0.0;
    // interfaces z_2..z_{I-1} (empty for I = 2)
    for i in 1..count - 1 {
        let zi = prev + phen.mu()[i] / c * (p[i - 1] - p[i]);
        z.push(zi);
        prev = zi;
    }
    let m_last = masses[masses.len() - 1];
    let i_last = count - 1;
    z.push(prev + (2.0 * phen.omega()[i_last] * phen.mu()[i_last] * m_last / c).sqrt());
    Ok(z)
}

/// Predicted density jump ratios n_{i+1}(z_i+)/n_i(z_i-) = omega_i/omega_{i+1}
/// at the I-1 interfaces.
pub fn density_jump_ratios(phen: &Phenotypes) -> Vec<f64> {
    phen.omega()
        .windows(2)
        .map(|w| w[0] / w[1])
        .collect()
}

/// Rear pressure ODE -c p' - mu_1 (p p')' = alpha_1 G(p) p as a first-order
/// system in (p, q = p'), with stop conditions checked on the dense output.
#[derive(Clone, Copy)]
struct RearSystem {
    c: f64,
    mu1: f64,
    alpha1: f64,
    p_bar: f64,
    q_stop: f64,
    floor: f64,
}

impl RearSystem {
    fn slope_event(&self, y: &Vector2<f64>) -> bool {
        y[1] <= self.q_stop
    }

    fn floor_event(&self, y: &Vector2<f64>) -> bool {
        self.floor > 0.0 && y[0] <= self.floor
    }
}

impl System<f64, Vector2<f64>> for RearSystem {
    fn system(&self, _z: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        let (p, q) = (y[0], y[1]);
        dy[0] = q;
        dy[1] = (-self.c * q - self.mu1 * q * q
            - self.alpha1 * growth_rate(p, self.p_bar) * p)
            / (self.mu1 * p);
    }

    fn solout(&mut self, _z: f64, y: &Vector2<f64>, _dy: &Vector2<f64>) -> bool {
        self.slope_event(y) || self.floor_event(y)
    }
}

/// Integrate the rear ODE forward from the unstable manifold of the
/// saturated state (p = p_bar, p' = 0) until the slope condition
/// p' = -c/mu_1 is met, and return the pressure there as p(0-).
///
/// `floor` > 0 arms the too-fast stop: if the pressure falls to `floor`
/// before the slope condition fires, the shot reports
/// [`ShootOutcome::Floored`] instead (used by [`solve_wave`], which passes
/// a tenth of the speed relation's p(0+) for the candidate speed).
///
/// The seed sits at p = p_bar (1 - far_field_rel) with the slope given by
/// the unstable eigenvalue of the linearisation, so the returned profile
/// meets the far-field condition to within far_field_rel * p_bar. Because
/// the ODE is autonomous, the choice of far_field_rel only truncates the
/// manifold; it does not move p(0-).
pub fn shoot_rear(
    c: f64,
    phen: &Phenotypes,
    num: &WaveNumerics,
    floor: f64,
) -> Result<RearOdeSolution> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Domain(format!("wave speed must be positive, got {c}")));
    }
    let alpha1 = phen.alpha()[0];
    if alpha1 <= 0.0 {
        return Err(Error::Domain(
            "rear shooting needs a proliferating rear phenotype (alpha_1 > 0)".into(),
        ));
    }
    let mu1 = phen.mu()[0];
    let p_bar = phen.p_bar();

    // unstable eigenvalue of the linearisation about (p_bar, 0):
    // u'' + b u' - a u = 0, b = c/(mu_1 p_bar), a = -alpha_1 G'(p_bar)/mu_1
    let b = c / (mu1 * p_bar);
    let a = -alpha1 * growth_rate_deriv(p_bar, p_bar) / mu1;
    debug_assert!(a > 0.0);
    let lambda = (-b + (b * b + 4.0 * a).sqrt()) / 2.0;

    let u0 = -num.far_field_rel * p_bar;
    let y0 = Vector2::new(p_bar + u0, lambda * u0);
    let system = RearSystem {
        c,
        mu1,
        alpha1,
        p_bar,
        q_stop: -c / mu1,
        floor,
    };
    let probe = system;

    // dense output spacing: fine enough that linear interpolation between
    // the two bracketing output points resolves the stop to ~1e-6 relative
    let dx_out = 0.01;
    let mut stepper = Dopri5::new(system, 0.0, num.max_span, dx_out, y0, num.ode_rtol, 1e-6);
    let stats = stepper
        .integrate()
        .map_err(|e| Error::Numerical(format!("rear ODE integration failed: {e:?}")))?;
    let steps = stats.accepted_steps;
    let xs = stepper.x_out();
    let ys = stepper.y_out();

    // the integrator stops at the first dense point meeting a condition, so
    // the last recorded sample identifies the event and its predecessor
    // brackets the crossing
    let last = ys.len() - 1;
    let (z_stop, outcome) = if probe.slope_event(&ys[last]) {
        if last == 0 {
            (xs[0], ShootOutcome::Matched { p0_minus: ys[0][0] })
        } else {
            let (za, ya) = (xs[last - 1], &ys[last - 1]);
            let (zb, yb) = (xs[last], &ys[last]);
            let dq = yb[1] - ya[1];
            let theta = if dq.abs() > 0.0 {
                ((probe.q_stop - ya[1]) / dq).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let z = za + theta * (zb - za);
            let p = ya[0] + theta * (yb[0] - ya[0]);
            (z, ShootOutcome::Matched { p0_minus: p })
        }
    } else if probe.floor_event(&ys[last]) {
        (xs[last], ShootOutcome::Floored { pressure: ys[last][0] })
    } else {
        return Err(Error::Convergence(format!(
            "rear ODE shot at c = {c} met no stop condition within span {}",
            num.max_span
        )));
    };

    let profile: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .take_while(|(z, _)| **z <= z_stop)
        .map(|(z, y)| (z - z_stop, y[0]))
        .collect();

    Ok(RearOdeSolution {
        outcome,
        span: z_stop,
        profile,
        steps,
    })
}

/// Find the travelling wave for the given band masses by bisecting the
/// speed: p(0-) from the rear ODE decreases in c while p(0+) from the speed
/// relation increases, so their difference h(c) has a single root. A shot
/// that bottoms out (too fast) counts as h < 0 for bracketing but can never
/// satisfy the convergence test itself.
pub fn solve_wave(
    masses: &[f64],
    phen: &Phenotypes,
    num: &WaveNumerics,
) -> Result<WavePrediction> {
    check_masses(masses, phen)?;
    check_ordering(phen)?;
    if !phen.is_baseline_growth() {
        return Err(Error::Domain(
            "wave analytics assume only the least mobile phenotype proliferates \
             (alpha_1 > 0, alpha_i = 0 for i >= 2)"
                .into(),
        ));
    }
    let s = mass_pressure_sum(masses, phen);
    let p0_plus = |c: f64| (2.0 * c * s).sqrt();
    let tol = num.match_tol_rel * phen.p_bar();

    // h(c) = p(0-) - p(0+); None marks a floored (too fast) shot
    let mut shots = 0u32;
    let mut h = |c: f64| -> Result<Option<f64>> {
        shots += 1;
        let sol = shoot_rear(c, phen, num, 0.1 * p0_plus(c))?;
        Ok(sol.p0_minus().map(|p| p - p0_plus(c)))
    };

    let (mut lo, mut hi) = num.bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!(
            "speed bracket must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    match h(lo)? {
        Some(v) if v > 0.0 => {}
        _ => {
            return Err(Error::Convergence(format!(
                "lower bracket c = {lo} does not undershoot; widen the bracket downwards"
            )));
        }
    }
    if let Some(v) = h(hi)?
        && v > 0.0
    {
        return Err(Error::Convergence(format!(
            "upper bracket c = {hi} still overshoots; widen the bracket upwards"
        )));
    }

    for _ in 0..num.max_iters {
        let mid = 0.5 * (lo + hi);
        match h(mid)? {
            Some(v) if v.abs() <= tol => {
                let pressures_inner = interface_pressures(mid, masses, phen)?;
                let z_tail = interface_positions(mid, masses, phen)?;
                let mut positions = Vec::with_capacity(phen.count());
                positions.push(0.0);
                positions.extend(z_tail);
                let mut pressures = pressures_inner;
                pressures.push(0.0);
                return Ok(WavePrediction {
                    speed: mid,
                    positions,
                    pressures,
                    masses: masses.to_vec(),
                });
            }
            Some(v) if v > 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    Err(Error::Convergence(format!(
        "speed bisection did not reach |p(0-) - p(0+)| <= {tol} within {} \
         iterations ({} shots); final bracket ({lo}, {hi})",
        num.max_iters, shots
    )))
}

//! Finite-volume solver for the continuum cross-diffusion system
//!
//!   dn_i/dt - mu_i d/dx(n_i dp/dx) = alpha_i G(p) n_i,     p = sum omega_i n_i
//!
//! on [0, L] with zero-flux boundaries. Space is discretised into J cells;
//! interface arrays have length J+1, with interface m sitting between cells
//! m-1 and m (interfaces 0 and J are the domain boundary and carry zero
//! flux). Each step:
//!
//! 1. MUSCL reconstruction with the ospre limiter gives n^L, n^R per
//!    phenotype at every interface (first-order in the two cells adjacent
//!    to each boundary where the stencil is incomplete).
//! 2. Interface pressures p^L, p^R are omega-weighted sums of the
//!    reconstructions; their central differences (one-sided at the domain
//!    ends) average into the interface pressure gradient.
//! 3. Upwind flux F = mu_i n^L max(0, -grad p) + mu_i n^R min(0, -grad p).
//! 4. dt from a CFL bound on the fastest phenotype and steepest gradient.
//! 5. Conservative transport update, then the reaction update
//!    n(1 + dt alpha_i G(p)) with p frozen at step start; negative values
//!    are clipped to zero and the clipped mass is reported.

use crate::error::{Error, Result};
use crate::model::{self, Grid, Phenotypes};

/// Solver controls. `dt_max` bounds the step when gradients are shallow;
/// the advective CFL bound alone does not resolve the parabolic
/// (pressure-diffusion) stiffness of near-saturated plateaus, so presets
/// aimed at long runs use a much smaller `dt_max` than this default.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub max_steps: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            cfl_safety: 0.9,
            dt_max: 1e-2,
            max_steps: 100_000_000,
        }
    }
}

impl Settings {
    fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::Config(format!(
                "CFL safety factor must be in (0,1), got {}",
                self.cfl_safety
            )));
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return Err(Error::Config(format!(
                "dt_max must be positive, got {}",
                self.dt_max
            )));
        }
        Ok(())
    }
}

/// One saved state: requested times map to the first step time at or past
/// them, so `time` records what was actually hit.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub fields: Vec<Vec<f64>>,
    pub pressure: Vec<f64>,
}

/// Full run output with audit counters.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub snapshots: Vec<Snapshot>,
    pub steps: u64,
    /// Total |mass| removed by negative-density clipping, in density*length.
    pub clipped_mass: f64,
    pub min_dt: f64,
}

/// Ospre flux limiter: phi(r) = 1.5 (r^2 + r) / (r^2 + r + 1) for r > 0,
/// clipped to 0 at extrema (r <= 0). phi(1) = 1, phi(2) = 9/7.
pub fn ospre(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let q = r * r + r;
    1.5 * q / (q + 1.0)
}

/// Limited half-slopes s_j = 0.5 phi(r_j) (n_{j+1} - n_j) per cell, zero in
/// the two cells adjacent to each boundary and wherever the denominator of
/// r_j = (n_j - n_{j-1}) / (n_{j+1} - n_j) degenerates (flat data must
/// reconstruct exactly flat).
fn limited_half_slopes(n: &[f64], s: &mut [f64]) {
    let j_count = n.len();
    s.fill(0.0);
    if j_count < 4 {
        return;
    }
    let scale = n.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let eps = 1e-14 * scale;
    for j in 2..j_count - 2 {
        let den = n[j + 1] - n[j];
        if den.abs() <= eps {
            continue;
        }
        let r = (n[j] - n[j - 1]) / den;
        s[j] = 0.5 * ospre(r) * den;
    }
}

/// MUSCL reconstruction of interface values from cell averages.
///
/// Returns (left, right) arrays of length J+1: at interface m,
/// left[m] = n_{m-1} + s_{m-1} and right[m] = n_m - s_m. The boundary
/// interfaces copy the adjacent cell value on both sides.
pub fn muscl_reconstruct(values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let j_count = values.len();
    let mut s = vec![0.0; j_count];
    limited_half_slopes(values, &mut s);
    let mut left = vec![0.0; j_count + 1];
    let mut right = vec![0.0; j_count + 1];
    reconstruct_into(values, &s, &mut left, &mut right);
    (left, right)
}

fn reconstruct_into(n: &[f64], s: &[f64], left: &mut [f64], right: &mut [f64]) {
    let j_count = n.len();
    left[0] = n[0];
    right[0] = n[0];
    for m in 1..j_count {
        left[m] = n[m - 1] + s[m - 1];
        right[m] = n[m] - s[m];
    }
    left[j_count] = n[j_count - 1];
    right[j_count] = n[j_count - 1];
}

/// Difference an interface-value array into a same-length gradient array:
/// central in the interior, one-sided at the two domain-end interfaces.
fn gradient_of_interface_array(p: &[f64], dx: f64, g: &mut [f64]) {
    let m_count = p.len();
    g[0] = (p[1] - p[0]) / dx;
    for m in 1..m_count - 1 {
        g[m] = (p[m + 1] - p[m - 1]) / (2.0 * dx);
    }
    g[m_count - 1] = (p[m_count - 1] - p[m_count - 2]) / dx;
}

/// Interface pressure gradient for a full field state: reconstruct every
/// phenotype, weight into p^L and p^R, difference each, and average.
/// Returned array has length J+1.
pub fn interface_pressure_gradient(
    fields: &[Vec<f64>],
    omega: &[f64],
    dx: f64,
) -> Result<Vec<f64>> {
    if fields.len() != omega.len() || fields.is_empty() {
        return Err(Error::Structural(format!(
            "{} fields vs {} weights",
            fields.len(),
            omega.len()
        )));
    }
    let j_count = fields[0].len();
    let mut pl = vec![0.0; j_count + 1];
    let mut pr = vec![0.0; j_count + 1];
    for (f, &w) in fields.iter().zip(omega) {
        let (l, r) = muscl_reconstruct(f);
        for m in 0..=j_count {
            pl[m] += w * l[m];
            pr[m] += w * r[m];
        }
    }
    let mut gl = vec![0.0; j_count + 1];
    let mut gr = vec![0.0; j_count + 1];
    gradient_of_interface_array(&pl, dx, &mut gl);
    gradient_of_interface_array(&pr, dx, &mut gr);
    Ok(gl.iter().zip(&gr).map(|(a, b)| 0.5 * (a + b)).collect())
}

/// Upwind flux against the pressure gradient:
/// F = mu (n^L max(0, -grad) + n^R min(0, -grad)), forced to zero at the two
/// boundary interfaces.
pub fn upwind_flux(left: &[f64], right: &[f64], grad: &[f64], mu: f64) -> Vec<f64> {
    let mut f = vec![0.0; grad.len()];
    upwind_flux_into(left, right, grad, mu, &mut f);
    f
}

fn upwind_flux_into(left: &[f64], right: &[f64], grad: &[f64], mu: f64, f: &mut [f64]) {
    let m_count = grad.len();
    f[0] = 0.0;
    for m in 1..m_count - 1 {
        let v = -grad[m];
        f[m] = mu * (left[m] * v.max(0.0) + right[m] * v.min(0.0));
    }
    f[m_count - 1] = 0.0;
}

/// CFL-limited time step: safety * dx / (mu_max * max|grad p|), capped at
/// dt_max; with a flat pressure field the cap itself is returned.
pub fn cfl_dt(max_abs_grad: f64, mu_max: f64, dx: f64, safety: f64, dt_max: f64) -> f64 {
    let denom = mu_max * max_abs_grad;
    if denom <= 0.0 {
        return dt_max;
    }
    (safety * dx / denom).min(dt_max)
}

/// Reusable per-step workspace so the hot loop never allocates.
struct Workspace {
    half_slopes: Vec<f64>,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    p_left: Vec<f64>,
    p_right: Vec<f64>,
    grad_left: Vec<f64>,
    grad_right: Vec<f64>,
    grad: Vec<f64>,
    flux: Vec<f64>,
    p_cells: Vec<f64>,
}

impl Workspace {
    fn new(phen_count: usize, j_count: usize) -> Self {
        Self {
            half_slopes: vec![0.0; j_count],
            left: vec![vec![0.0; j_count + 1]; phen_count],
            right: vec![vec![0.0; j_count + 1]; phen_count],
            p_left: vec![0.0; j_count + 1],
            p_right: vec![0.0; j_count + 1],
            grad_left: vec![0.0; j_count + 1],
            grad_right: vec![0.0; j_count + 1],
            grad: vec![0.0; j_count + 1],
            flux: vec![0.0; j_count + 1],
            p_cells: vec![0.0; j_count],
        }
    }
}

/// In-place single step. Returns the dt taken and accumulates clipped mass.
/// `p_cells` inside the workspace holds the step-start pressure afterwards.
fn step_inner(
    fields: &mut [Vec<f64>],
    phen: &Phenotypes,
    grid: &Grid,
    settings: &Settings,
    ws: &mut Workspace,
    clipped: &mut f64,
) -> Result<f64> {
    let j_count = grid.cells();
    let dx = grid.dx();
    let omega = phen.omega();
    let mu = phen.mu();
    let alpha = phen.alpha();

    // step-start cell pressure, used by the reaction term
    model::pressure_into(fields, omega, &mut ws.p_cells);

    // reconstructions and interface pressures
    ws.p_left.fill(0.0);
    ws.p_right.fill(0.0);
    for i in 0..fields.len() {
        limited_half_slopes(&fields[i], &mut ws.half_slopes);
        reconstruct_into(&fields[i], &ws.half_slopes, &mut ws.left[i], &mut ws.right[i]);
        let w = omega[i];
        for m in 0..=j_count {
            ws.p_left[m] += w * ws.left[i][m];
            ws.p_right[m] += w * ws.right[i][m];
        }
    }
    gradient_of_interface_array(&ws.p_left, dx, &mut ws.grad_left);
    gradient_of_interface_array(&ws.p_right, dx, &mut ws.grad_right);
    let mut max_abs_grad = 0.0f64;
    for m in 0..=j_count {
        let g = 0.5 * (ws.grad_left[m] + ws.grad_right[m]);
        ws.grad[m] = g;
        max_abs_grad = max_abs_grad.max(g.abs());
    }
    if !max_abs_grad.is_finite() {
        return Err(Error::Numerical(
            "non-finite pressure gradient encountered".into(),
        ));
    }

    let mu_max = mu.iter().cloned().fold(0.0, f64::max);
    let dt = cfl_dt(
        max_abs_grad,
        mu_max,
        dx,
        settings.cfl_safety,
        settings.dt_max,
    );
    if dt < 1e-15 {
        return Err(Error::Numerical(format!(
            "time step collapsed to {dt} (max |grad p| = {max_abs_grad})"
        )));
    }

    // transport, then reaction against the frozen step-start pressure
    let p_bar = phen.p_bar();
    for i in 0..fields.len() {
        upwind_flux_into(&ws.left[i], &ws.right[i], &ws.grad, mu[i], &mut ws.flux);
        let a = alpha[i];
        let n = &mut fields[i];
        for ((nj, fw), &pc) in n.iter_mut().zip(ws.flux.windows(2)).zip(&ws.p_cells) {
            let transported = *nj - dt / dx * (fw[1] - fw[0]);
            let mut updated = if a == 0.0 {
                transported
            } else {
                transported * (1.0 + dt * a * model::growth_rate(pc, p_bar))
            };
            if updated < 0.0 {
                *clipped += -updated * dx;
                updated = 0.0;
            }
            *nj = updated;
        }
    }
    Ok(dt)
}

/// Advance `initial` through every time in `snapshot_times` (ascending,
/// deduplicated by the caller). Each requested time is served by the first
/// step whose time reaches it, so no interpolation is performed and actual
/// snapshot times are recorded in the result.
pub fn run(
    phen: &Phenotypes,
    grid: &Grid,
    initial: Vec<Vec<f64>>,
    snapshot_times: &[f64],
    settings: &Settings,
) -> Result<RunResult> {
    settings.validate()?;
    if initial.len() != phen.count() {
        return Err(Error::Structural(format!(
            "{} initial fields for {} phenotypes",
            initial.len(),
            phen.count()
        )));
    }
    for (i, f) in initial.iter().enumerate() {
        if f.len() != grid.cells() {
            return Err(Error::Structural(format!(
                "initial field {i} has {} cells, grid has {}",
                f.len(),
                grid.cells()
            )));
        }
        if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(format!(
                "initial field {i} contains a negative or non-finite value"
            )));
        }
    }
    if snapshot_times.is_empty() {
        return Err(Error::Config("no snapshot times requested".into()));
    }
    if snapshot_times.windows(2).any(|w| w[0] >= w[1]) || snapshot_times[0] < 0.0 {
        return Err(Error::Config(
            "snapshot times must be non-negative and strictly increasing".into(),
        ));
    }

    let mut fields = initial;
    let mut time = 0.0f64;
    let mut steps = 0u64;
    let mut clipped = 0.0f64;
    let mut min_dt = f64::INFINITY;
    let mut ws = Workspace::new(phen.count(), grid.cells());
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut pending = snapshot_times.iter().copied().peekable();

    loop {
        while pending.peek().is_some_and(|&t| time >= t) {
            pending.next();
            snapshots.push(Snapshot {
                time,
                fields: fields.clone(),
                pressure: model::pressure(&fields, phen.omega())?,
            });
        }
        let Some(_) = pending.peek() else { break };
        if steps >= settings.max_steps {
            return Err(Error::Numerical(format!(
                "step limit {} reached at t = {time}",
                settings.max_steps
            )));
        }
        let dt = step_inner(&mut fields, phen, grid, settings, &mut ws, &mut clipped)?;
        min_dt = min_dt.min(dt);
        time += dt;
        steps += 1;
    }

    Ok(RunResult {
        snapshots,
        steps,
        clipped_mass: clipped,
        min_dt,
    })
}

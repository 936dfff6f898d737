//! On-lattice stochastic simulator for the individual-based model.
//!
//! Cells of phenotype i live as integer counts N[i][j] on the grid. In each
//! time step of length tau every cell, independently and using the pressure
//! field frozen at the start of the step, first attempts a move (left or
//! right, driven by the positive part of the pressure drop to the
//! neighbour, scaled by gamma_i/(2 p_bar)), then divides or dies with
//! probability tau (alpha_i G(p))_+ / tau (alpha_i G(p))_-, evaluated at
//! its origin site's pressure. Moves off the domain are aborted, which
//! realises the zero-flux boundary.
//!
//! Sampling is per site rather than per cell: within one step all cells of
//! a (site, phenotype) group share their movement probabilities, so the
//! group's (left, right, stay) split is a multinomial, drawn as two
//! binomials; fate outcomes are independent of movement, so each
//! destination group's division (or death) count is again a binomial.
//! This composition leaves the law of the process exactly unchanged while
//! making the per-step cost proportional to occupied sites instead of the
//! population size. The single-step expectation tests below pin the law to
//! the mean-field update the scheme must satisfy.
//!
//! Randomness comes from ChaCha8 seeded with a user seed; replicate r uses
//! stream r of the same seed, so ensembles are reproducible and replicates
//! are independent.

use crate::error::{Error, Result};
use crate::model::{Grid, InitialHumps, Phenotypes, growth_rate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// RNG identifier recorded in run manifests.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Integer cell counts per phenotype and grid site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeState {
    /// counts[i][j] = number of phenotype-i cells in cell j.
    pub counts: Vec<Vec<u64>>,
    /// Number of steps taken since the initial state.
    pub step_index: u64,
}

impl LatticeState {
    /// Densities n = N / dx.
    pub fn densities(&self, dx: f64) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| row.iter().map(|&c| c as f64 / dx).collect())
            .collect()
    }

    /// Pressure p_j = sum_i omega_i N[i][j] / dx.
    pub fn pressure(&self, omega: &[f64], dx: f64) -> Vec<f64> {
        let cells = self.counts.first().map_or(0, Vec::len);
        let mut p = vec![0.0; cells];
        for (row, &w) in self.counts.iter().zip(omega) {
            for (pj, &c) in p.iter_mut().zip(row) {
                *pj += w * c as f64 / dx;
            }
        }
        p
    }

    /// Total count per phenotype.
    pub fn totals(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }
}

/// One recorded snapshot: densities and pressure at a step time.
#[derive(Debug, Clone)]
pub struct IbmSnapshot {
    /// Requested snapshot time.
    pub requested_time: f64,
    /// Actual step time k tau at which the snapshot was taken.
    pub time: f64,
    pub densities: Vec<Vec<f64>>,
    pub pressure: Vec<f64>,
}

/// One replicate's trajectory.
#[derive(Debug, Clone)]
pub struct IbmRunResult {
    pub snapshots: Vec<IbmSnapshot>,
    pub steps: u64,
    pub seed: u64,
    pub stream: u64,
}

/// Movement probabilities (pL, pR, pStay) for one cell: each directed
/// probability is gamma (p_here - p_neighbour)_+ / (2 p_bar); `None` for a
/// neighbour marks the domain boundary, where the attempted move is aborted
/// and the probability is 0.
pub fn movement_probs(
    p_here: f64,
    p_left: Option<f64>,
    p_right: Option<f64>,
    gamma: f64,
    p_bar: f64,
) -> Result<(f64, f64, f64)> {
    let drop = |nb: Option<f64>| nb.map_or(0.0, |pn| (p_here - pn).max(0.0));
    let p_l = gamma * drop(p_left) / (2.0 * p_bar);
    let p_r = gamma * drop(p_right) / (2.0 * p_bar);
    if p_l + p_r >= 1.0 {
        return Err(Error::Config(format!(
            "movement probabilities pL + pR = {} >= 1 at pressure {p_here}; \
             the step length or pressure sensitivity is too large",
            p_l + p_r
        )));
    }
    Ok((p_l, p_r, 1.0 - p_l - p_r))
}

/// Division/death probabilities (pDiv, pDeath, pQuiet) for one cell of
/// growth sensitivity alpha at pressure p: pDiv = tau (alpha G(p))_+,
/// pDeath = tau (alpha G(p))_-.
pub fn division_death_probs(alpha: f64, p: f64, p_bar: f64, tau: f64) -> Result<(f64, f64, f64)> {
    let rate = alpha * growth_rate(p, p_bar);
    let p_div = tau * rate.max(0.0);
    let p_death = tau * (-rate).max(0.0);
    let p_quiet = 1.0 - p_div - p_death;
    if p_quiet < 0.0 {
        return Err(Error::Config(format!(
            "division/death probability tau |alpha G| = {} exceeds 1; \
             the step length tau is too large",
            p_div + p_death
        )));
    }
    Ok((p_div, p_death, p_quiet))
}

/// Initial counts N[i][j] = round(n_i(0, x_j) dx), rounding half away from
/// zero.
pub fn init_lattice(
    phen: &Phenotypes,
    grid: &Grid,
    humps: &InitialHumps,
) -> Result<LatticeState> {
    let fields = crate::model::build_initial(grid, humps, phen)?;
    let counts = fields
        .iter()
        .map(|n| n.iter().map(|&v| (v * grid.dx()).round() as u64).collect())
        .collect();
    Ok(LatticeState {
        counts,
        step_index: 0,
    })
}

/// Reusable per-step buffers.
#[derive(Debug, Clone)]
pub struct Workspace {
    pressure: Vec<f64>,
    next: Vec<Vec<u64>>,
}

impl Workspace {
    pub fn new(phenotypes: usize, cells: usize) -> Self {
        Self {
            pressure: vec![0.0; cells],
            next: vec![vec![0; cells]; phenotypes],
        }
    }
}

fn draw_binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> Result<u64> {
    if n == 0 || p <= 0.0 {
        return Ok(0);
    }
    if p >= 1.0 {
        return Ok(n);
    }
    let dist = Binomial::new(n, p)
        .map_err(|e| Error::Numerical(format!("binomial draw n={n}, p={p}: {e}")))?;
    Ok(dist.sample(rng))
}

/// Advance the lattice one step of length tau: per-site multinomial
/// movement with step-start pressures, then per-destination-group
/// division/death at the origin site's step-start pressure.
pub fn step(
    state: &mut LatticeState,
    phen: &Phenotypes,
    grid: &Grid,
    gammas: &[f64],
    rng: &mut ChaCha8Rng,
    work: &mut Workspace,
) -> Result<()> {
    let cells = grid.cells();
    let dx = grid.dx();
    let tau = grid.tau();
    let p_bar = phen.p_bar();

    // frozen step-start pressure
    work.pressure.iter_mut().for_each(|v| *v = 0.0);
    for (row, &w) in state.counts.iter().zip(phen.omega()) {
        for (pj, &c) in work.pressure.iter_mut().zip(row) {
            *pj += w * c as f64 / dx;
        }
    }
    for row in &mut work.next {
        row.iter_mut().for_each(|v| *v = 0);
    }

    let p = &work.pressure;
    for (i, row) in state.counts.iter().enumerate() {
        let gamma = gammas[i];
        let alpha = phen.alpha()[i];
        for (j, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let p_left = (j > 0).then(|| p[j - 1]);
            let p_right = (j + 1 < cells).then(|| p[j + 1]);
            let (p_l, p_r, _) = movement_probs(p[j], p_left, p_right, gamma, p_bar)?;
            let n_left = draw_binomial(rng, count, p_l)?;
            // remaining cells move right with the conditional probability
            let n_right = draw_binomial(rng, count - n_left, p_r / (1.0 - p_l))?;
            let n_stay = count - n_left - n_right;

            // fate draws use the origin site's step-start pressure; each
            // destination group is its own binomial
            let (p_div, p_death, _) = division_death_probs(alpha, p[j], p_bar, tau)?;
            let mut deliver = |dest: usize, group: u64| -> Result<()> {
                if group == 0 {
                    return Ok(());
                }
                let grown = if p_div > 0.0 {
                    group + draw_binomial(rng, group, p_div)?
                } else if p_death > 0.0 {
                    group - draw_binomial(rng, group, p_death)?
                } else {
                    group
                };
                work.next[i][dest] += grown;
                Ok(())
            };
            if n_left > 0 {
                deliver(j - 1, n_left)?;
            }
            deliver(j, n_stay)?;
            if n_right > 0 {
                deliver(j + 1, n_right)?;
            }
        }
    }

    std::mem::swap(&mut state.counts, &mut work.next);
    state.step_index += 1;
    Ok(())
}

/// Exact conditional expectation of the counts after one step from the
/// given state: every origin group contributes P(move) (1 + tau alpha G)
/// to its destination. Linear in the current counts.
pub fn expected_step(
    state: &LatticeState,
    phen: &Phenotypes,
    grid: &Grid,
    gammas: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let cells = grid.cells();
    let dx = grid.dx();
    let tau = grid.tau();
    let p_bar = phen.p_bar();
    let p = state.pressure(phen.omega(), dx);
    let mut out = vec![vec![0.0; cells]; state.counts.len()];
    for (i, row) in state.counts.iter().enumerate() {
        let gamma = gammas[i];
        let alpha = phen.alpha()[i];
        for (j, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let p_left = (j > 0).then(|| p[j - 1]);
            let p_right = (j + 1 < cells).then(|| p[j + 1]);
            let (p_l, p_r, p_stay) = movement_probs(p[j], p_left, p_right, gamma, p_bar)?;
            let growth = 1.0 + tau * alpha * growth_rate(p[j], p_bar);
            let weight = count as f64 * growth;
            if j > 0 {
                out[i][j - 1] += weight * p_l;
            }
            out[i][j] += weight * p_stay;
            if j + 1 < cells {
                out[i][j + 1] += weight * p_r;
            }
        }
    }
    Ok(out)
}

/// Run one replicate: deterministic in (seed, stream, config). Snapshots
/// are taken at the first step time k tau >= each requested time, with the
/// actual time recorded.
pub fn run(
    phen: &Phenotypes,
    grid: &Grid,
    humps: &InitialHumps,
    snapshot_times: &[f64],
    seed: u64,
    stream: u64,
) -> Result<IbmRunResult> {
    if snapshot_times.is_empty() {
        return Err(Error::Config("no snapshot times requested".into()));
    }
    if snapshot_times
        .windows(2)
        .any(|w| w[1] <= w[0] || !w[0].is_finite())
        || snapshot_times[0] < 0.0
        || !snapshot_times.last().unwrap().is_finite()
    {
        return Err(Error::Config(
            "snapshot times must be finite, non-negative, strictly increasing".into(),
        ));
    }
    let gammas = crate::model::gamma_from_mu(phen.mu(), grid.tau(), phen.p_bar(), grid.dx())?;

    let mut state = init_lattice(phen, grid, humps)?;
    let mut work = Workspace::new(phen.count(), grid.cells());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    let tau = grid.tau();
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut pending = snapshot_times.iter().copied().peekable();
    loop {
        let t = state.step_index as f64 * tau;
        while let Some(&want) = pending.peek() {
            if t >= want {
                snapshots.push(IbmSnapshot {
                    requested_time: want,
                    time: t,
                    densities: state.densities(grid.dx()),
                    pressure: state.pressure(phen.omega(), grid.dx()),
                });
                pending.next();
            } else {
                break;
            }
        }
        if pending.peek().is_none() {
            break;
        }
        step(&mut state, phen, grid, &gammas, &mut rng, &mut work)?;
    }
    Ok(IbmRunResult {
        steps: state.step_index,
        snapshots,
        seed,
        stream,
    })
}

/// Arithmetic mean of the replicate density fields per snapshot time.
pub fn ensemble_average(runs: &[IbmRunResult]) -> Result<Vec<IbmSnapshot>> {
    let first = runs
        .first()
        .ok_or_else(|| Error::Structural("ensemble average of zero replicates".into()))?;
    for r in runs {
        if r.snapshots.len() != first.snapshots.len()
            || r.snapshots
                .iter()
                .zip(&first.snapshots)
                .any(|(a, b)| a.time != b.time || a.densities.len() != b.densities.len())
        {
            return Err(Error::Structural(
                "replicates disagree on snapshot schedule or phenotype count".into(),
            ));
        }
    }
    let scale = 1.0 / runs.len() as f64;
    let mut out = Vec::with_capacity(first.snapshots.len());
    for s in 0..first.snapshots.len() {
        let mut densities = vec![vec![0.0; first.snapshots[s].densities[0].len()];
            first.snapshots[s].densities.len()];
        let mut pressure = vec![0.0; first.snapshots[s].pressure.len()];
        for r in runs {
            let snap = &r.snapshots[s];
            for (acc, src) in densities.iter_mut().zip(&snap.densities) {
                for (a, &v) in acc.iter_mut().zip(src) {
                    *a += v * scale;
                }
            }
            for (a, &v) in pressure.iter_mut().zip(&snap.pressure) {
                *a += v * scale;
            }
        }
        out.push(IbmSnapshot {
            requested_time: first.snapshots[s].requested_time,
            time: first.snapshots[s].time,
            densities,
            pressure,
        });
    }
    Ok(out)
}

//! Shared model vocabulary: phenotype parameters, lattice/grid geometry,
//! initial conditions, and the pressure/growth closures used by both the
//! stochastic and the continuum solvers.
//!
//! Conventions used throughout the crate:
//! * Phenotypes are indexed `i = 0..I-1`; index 0 is the proliferating
//!   phenotype in the baseline growth regime, higher indices are the more
//!   mobile, non-proliferating ones.
//! * Space is discretised into `J = L/dx` nodes at `x_j = j*dx`,
//!   `j = 0..J-1`. The stochastic model treats these as lattice sites, the
//!   continuum solver as finite-volume cell centres; both export fields on
//!   the same nodes so runs can be compared cell by cell.
//! * Densities are `f64` per unit length; pressure is the weighted sum
//!   `p_j = sum_i omega_i n_ij` and is always recomputed from the densities,
//!   never cached.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parameter set for a population of `I` phenotypes.
///
/// Invariants enforced at construction: `I >= 2`, `alpha_i >= 0`,
/// `mu_i > 0`, `omega_i > 0`, `p_bar > 0`. The mobility ordering
/// `mu_1 < mu_2 < ...` is *reported* by [`Phenotypes::mobility_ordered`]
/// rather than enforced, so deliberately unordered experiments stay
/// representable; the wave analytics refuse unordered inputs themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phenotypes {
    alpha: Vec<f64>,
    mu: Vec<f64>,
    omega: Vec<f64>,
    p_bar: f64,
}

impl Phenotypes {
    pub fn new(alpha: Vec<f64>, mu: Vec<f64>, omega: Vec<f64>, p_bar: f64) -> Result<Self> {
        let count = alpha.len();
        if count < 2 {
            return Err(Error::Config(format!(
                "need at least 2 phenotypes, got {count}"
            )));
        }
        if mu.len() != count || omega.len() != count {
            return Err(Error::Structural(format!(
                "phenotype arrays disagree in length: alpha {}, mu {}, omega {}",
                count,
                mu.len(),
                omega.len()
            )));
        }
        if !p_bar.is_finite() || p_bar <= 0.0 {
            return Err(Error::Config(format!(
                "saturation pressure must be positive and finite, got {p_bar}"
            )));
        }
        for (i, &a) in alpha.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::Config(format!(
                    "growth coefficient alpha[{i}] must be >= 0, got {a}"
                )));
            }
        }
        for (i, &m) in mu.iter().enumerate() {
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::Config(format!(
                    "mobility mu[{i}] must be > 0, got {m}"
                )));
            }
        }
        for (i, &w) in omega.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Config(format!(
                    "pressure weight omega[{i}] must be > 0, got {w}"
                )));
            }
        }
        Ok(Self {
            alpha,
            mu,
            omega,
            p_bar,
        })
    }

    pub fn count(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }

    /// True in the baseline growth regime: only the least mobile phenotype
    /// proliferates (`alpha_1 > 0`, `alpha_i = 0` for `i >= 2`).
    pub fn is_baseline_growth(&self) -> bool {
        self.alpha[0] > 0.0 && self.alpha[1..].iter().all(|&a| a == 0.0)
    }

    /// True when mobilities are strictly increasing with the phenotype index.
    pub fn mobility_ordered(&self) -> bool {
        self.mu.windows(2).all(|w| w[0] < w[1])
    }

    /// Growth rate of phenotype `i` at pressure `p`: `alpha_i * G(p)`.
    pub fn growth(&self, i: usize, p: f64) -> f64 {
        self.alpha[i] * growth_rate(p, self.p_bar)
    }
}

/// Spatial and temporal discretisation shared by both models.
///
/// `cells * dx` must reproduce `length` exactly (up to one part in 1e12);
/// the stochastic model additionally needs the step length `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    dx: f64,
    cells: usize,
    tau: f64,
}

impl Grid {
    pub fn new(length: f64, dx: f64, tau: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) || !(dx.is_finite() && dx > 0.0) {
            return Err(Error::Config(format!(
                "domain length and spacing must be positive, got L={length}, dx={dx}"
            )));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Config(format!(
                "time step tau must be positive, got {tau}"
            )));
        }
        let ratio = length / dx;
        let cells = ratio.round();
        if cells < 4.0 || (ratio - cells).abs() > 1e-12 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "domain length {length} is not an integer multiple of dx {dx}"
            )));
        }
        Ok(Self {
            length,
            dx,
            cells: cells as usize,
            tau,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of nodes / cells `J`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Node coordinate `x_j = j * dx`.
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    /// All node coordinates.
    pub fn xs(&self) -> Vec<f64> {
        (0..self.cells).map(|j| self.x(j)).collect()
    }
}

/// Initial condition: one truncated Gaussian hump per phenotype.
///
/// Phenotype `i` occupies the half-open segment
/// `[boundaries[i], boundaries[i+1])` with density
/// `A_i * exp(-decay * (x - boundaries[i])^2)` and is zero elsewhere, so
/// supports are pairwise disjoint by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialHumps {
    amplitudes: Vec<f64>,
    decay: f64,
    boundaries: Vec<f64>,
}

impl InitialHumps {
    pub fn new(amplitudes: Vec<f64>, decay: f64, boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() != amplitudes.len() + 1 {
            return Err(Error::Structural(format!(
                "{} amplitudes need {} segment boundaries, got {}",
                amplitudes.len(),
                amplitudes.len() + 1,
                boundaries.len()
            )));
        }
        if !decay.is_finite() || decay < 0.0 {
            return Err(Error::Config(format!(
                "decay rate must be >= 0, got {decay}"
            )));
        }
        for (i, &a) in amplitudes.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::Config(format!(
                    "amplitude A[{i}] must be >= 0, got {a}"
                )));
            }
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "segment boundaries must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            amplitudes,
            decay,
            boundaries,
        })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }
}

/// Weighted pressure `p_j = sum_i omega_i n_ij` on every node.
///
/// All phenotype arrays must have equal length (structural error otherwise);
/// densities must be non-negative (domain error).
pub fn pressure(fields: &[Vec<f64>], omega: &[f64]) -> Result<Vec<f64>> {
    if fields.len() != omega.len() {
        return Err(Error::Structural(format!(
            "{} density fields vs {} pressure weights",
            fields.len(),
            omega.len()
        )));
    }
    let nodes = fields.first().map_or(0, Vec::len);
    for (i, f) in fields.iter().enumerate() {
        if f.len() != nodes {
            return Err(Error::Structural(format!(
                "density field {i} has {} nodes, expected {nodes}",
                f.len()
            )));
        }
        if let Some(&bad) = f.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!(
                "density field {i} contains invalid value {bad}"
            )));
        }
    }
    let mut p = vec![0.0; nodes];
    for (f, &w) in fields.iter().zip(omega) {
        for (pj, &nj) in p.iter_mut().zip(f) {
            *pj += w * nj;
        }
    }
    Ok(p)
}

/// In-place pressure accumulation without validation, for solver hot loops.
/// Callers guarantee equal lengths and non-negative densities.
pub(crate) fn pressure_into(fields: &[Vec<f64>], omega: &[f64], p: &mut [f64]) {
    p.fill(0.0);
    for (f, &w) in fields.iter().zip(omega) {
        for (pj, &nj) in p.iter_mut().zip(f) {
            *pj += w * nj;
        }
    }
}

/// Saturating growth modulation `G(p) = arctan((1 - p/p_bar) / 10)`.
///
/// `G(p_bar) = 0`, `G' < 0` everywhere, `G(0) = arctan(0.1) ~ 0.0996687`.
pub fn growth_rate(p: f64, p_bar: f64) -> f64 {
    debug_assert!(p_bar > 0.0);
    ((1.0 - p / p_bar) * 0.1).atan()
}

/// Checked variant of [`growth_rate`]: domain error for `p_bar <= 0`.
pub fn growth_rate_checked(p: f64, p_bar: f64) -> Result<f64> {
    if !(p_bar.is_finite() && p_bar > 0.0) {
        return Err(Error::Domain(format!(
            "saturation pressure must be positive, got {p_bar}"
        )));
    }
    Ok(growth_rate(p, p_bar))
}

/// Derivative `G'(p)` of the growth modulation, used by the wave shooting
/// to seed the unstable manifold of the saturated state.
pub fn growth_rate_deriv(p: f64, p_bar: f64) -> f64 {
    let u = (1.0 - p / p_bar) * 0.1;
    -0.1 / (p_bar * (1.0 + u * u))
}

/// Per-step movement scaling for the lattice model:
/// `gamma_i = 2 tau p_bar mu_i / dx^2`.
///
/// With this scaling a lattice step of `tau` reproduces the continuum
/// mobility `mu_i` in the diffusive limit. A `gamma_i >= 1` could push the
/// single-step move probability `gamma_i * dp / (2 p_bar)` past 1 whenever
/// a pressure drop of order `p_bar` appears across one site, so such values
/// are rejected outright.
pub fn gamma_from_mu(mu: &[f64], tau: f64, p_bar: f64, dx: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0 && p_bar > 0.0 && dx > 0.0) {
        return Err(Error::Config(format!(
            "gamma scaling needs tau, p_bar, dx > 0, got {tau}, {p_bar}, {dx}"
        )));
    }
    let gammas: Vec<f64> = mu.iter().map(|&m| 2.0 * tau * p_bar * m / (dx * dx)).collect();
    for (i, &g) in gammas.iter().enumerate() {
        // NaN fails both arms and is rejected
        if g <= 0.0 || g >= 1.0 || g.is_nan() {
            return Err(Error::Config(format!(
                "movement scaling gamma[{i}] = {g} leaves no headroom for the \
                 move-probability bound (need 0 < gamma < 1); reduce tau or mu, \
                 or refine dx"
            )));
        }
    }
    Ok(gammas)
}

/// Evaluate the initial humps on the grid nodes.
///
/// Rejects configurations whose initial pressure exceeds `p_bar` anywhere,
/// since both models assume the population starts at or below saturation.
pub fn build_initial(
    grid: &Grid,
    humps: &InitialHumps,
    phen: &Phenotypes,
) -> Result<Vec<Vec<f64>>> {
    if humps.amplitudes().len() != phen.count() {
        return Err(Error::Structural(format!(
            "{} initial humps for {} phenotypes",
            humps.amplitudes().len(),
            phen.count()
        )));
    }
    let b = humps.boundaries();
    let span = (b[0], b[b.len() - 1]);
    if span.0 != 0.0 || (span.1 - grid.length()).abs() > 1e-9 * grid.length() {
        return Err(Error::Config(format!(
            "initial segments cover [{}, {}) but the domain is [0, {})",
            span.0,
            span.1,
            grid.length()
        )));
    }
    let mut fields = vec![vec![0.0; grid.cells()]; phen.count()];
    for (i, field) in fields.iter_mut().enumerate() {
        let (lo, hi) = (b[i], b[i + 1]);
        let a = humps.amplitudes()[i];
        for (j, v) in field.iter_mut().enumerate() {
            let x = grid.x(j);
            if x >= lo && x < hi {
                let u = x - lo;
                *v = a * (-humps.decay() * u * u).exp();
            }
        }
    }
    let p = pressure(&fields, phen.omega())?;
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    if pmax > phen.p_bar() {
        return Err(Error::Config(format!(
            "initial pressure peaks at {pmax}, above the saturation pressure {}",
            phen.p_bar()
        )));
    }
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn baseline3() -> Phenotypes {
        Phenotypes::new(
            vec![10.0, 0.0, 0.0],
            vec![1e-4, 2e-4, 3e-4],
            vec![1.0, 2.0, 3.0],
            4e4,
        )
        .unwrap()
    }

    #[test]
    fn pressure_weighted_sum() {
        // one node: 1*1 + 2*2 = 5
        let p = pressure(&[vec![1.0], vec![2.0]], &[1.0, 2.0]).unwrap();
        assert_eq!(p, vec![5.0]);
    }

    #[test]
    fn pressure_rejects_mismatched_lengths() {
        let err = pressure(&[vec![1.0, 2.0], vec![1.0]], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn pressure_rejects_negative_density() {
        let err = pressure(&[vec![1.0], vec![-0.5]], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn growth_fixed_values() {
        // G(0) = arctan(1/10)
        assert_relative_eq!(growth_rate(0.0, 4e4), 0.1f64.atan(), max_relative = 1e-15);
        assert_abs_diff_eq!(growth_rate(0.0, 4e4), 0.0996687, epsilon = 1e-7);
        // saturation: G(p_bar) = 0 exactly
        assert_eq!(growth_rate(4e4, 4e4), 0.0);
        // strictly decreasing around saturation
        assert!(growth_rate(3.9e4, 4e4) > 0.0);
        assert!(growth_rate(4.1e4, 4e4) < 0.0);
    }

    #[test]
    fn growth_deriv_matches_finite_difference() {
        let p_bar = 4e4;
        for &p in &[0.0, 1e4, 3.9e4, 4e4, 6e4] {
            let h = 1e-3;
            let fd = (growth_rate(p + h, p_bar) - growth_rate(p - h, p_bar)) / (2.0 * h);
            assert_relative_eq!(growth_rate_deriv(p, p_bar), fd, max_relative = 1e-8);
        }
    }

    #[test]
    fn growth_checked_rejects_bad_p_bar() {
        assert!(matches!(
            growth_rate_checked(1.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            growth_rate_checked(1.0, -3.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gamma_scaling_example() {
        // 2 * 1e-4 * 4e4 * 1e-4 / 0.01 = 0.08
        let g = gamma_from_mu(&[1e-4, 2e-4, 3e-4], 1e-4, 4e4, 0.1).unwrap();
        assert_relative_eq!(g[0], 0.08, max_relative = 1e-12);
        assert_relative_eq!(g[1], 0.16, max_relative = 1e-12);
        assert_relative_eq!(g[2], 0.24, max_relative = 1e-12);
    }

    #[test]
    fn gamma_rejects_headroom_violation() {
        // mu large enough that gamma >= 1
        let err = gamma_from_mu(&[2e-3], 1e-4, 4e4, 0.1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn grid_requires_integer_cells() {
        assert!(Grid::new(150.0, 0.1, 1e-4).is_ok());
        assert_eq!(Grid::new(150.0, 0.1, 1e-4).unwrap().cells(), 1500);
        assert!(matches!(
            Grid::new(150.0, 0.07, 1e-4),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn phenotype_validation() {
        assert!(Phenotypes::new(vec![1.0], vec![1e-4], vec![1.0], 1.0).is_err());
        assert!(Phenotypes::new(vec![1.0, 0.0], vec![1e-4, -1.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(Phenotypes::new(vec![1.0, 0.0], vec![1e-4, 2e-4], vec![1.0, 1.0], 0.0).is_err());
        let p = baseline3();
        assert!(p.is_baseline_growth());
        assert!(p.mobility_ordered());
        let q = Phenotypes::new(
            vec![10.0, 0.0],
            vec![2e-4, 1e-4],
            vec![1.0, 1.0],
            4e4,
        )
        .unwrap();
        assert!(!q.mobility_ordered());
    }

    #[test]
    fn initial_humps_on_grid() {
        let grid = Grid::new(150.0, 0.1, 1e-4).unwrap();
        let phen = baseline3();
        let humps = InitialHumps::new(
            vec![3e4, 1.5e4, 1e4],
            6e-2,
            vec![0.0, 10.0, 20.0, 150.0],
        )
        .unwrap();
        let fields = build_initial(&grid, &humps, &phen).unwrap();
        // peak of each hump sits at the left edge of its segment
        assert_relative_eq!(fields[0][0], 3e4);
        assert_relative_eq!(fields[1][100], 1.5e4);
        assert_relative_eq!(fields[2][200], 1e4);
        // supports disjoint by construction
        assert_eq!(fields[0][100], 0.0);
        assert_eq!(fields[1][99], 0.0);
        // inside the first hump: A * exp(-B x^2)
        let x = grid.x(50);
        assert_relative_eq!(fields[0][50], 3e4 * (-6e-2 * x * x).exp());
    }

    #[test]
    fn initial_pressure_bound_enforced() {
        let grid = Grid::new(150.0, 0.1, 1e-4).unwrap();
        let phen = baseline3();
        // omega_1 A_1 = 1 * 5e4 > p_bar
        let humps =
            InitialHumps::new(vec![5e4, 1.0, 1.0], 6e-2, vec![0.0, 10.0, 20.0, 150.0]).unwrap();
        assert!(matches!(
            build_initial(&grid, &humps, &phen),
            Err(Error::Config(_))
        ));
    }
}

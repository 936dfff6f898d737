//! Measurement and cross-validation over simulation snapshots.
//!
//! Front positions are tracked as level sets of the pressure (x_1, x_2, x_3
//! at p = 0.2, 0.4, 0.6 of p_bar), speeds come from least-squares fits of
//! those tracks, and band structure is audited three ways: support
//! endpoints (rightmost node above a threshold), density crossovers
//! (rightmost sign change of n_i - n_{i+1}, the sharpest available proxy
//! for the band handover), and pairwise support overlap. The kink and
//! density-jump audits compare one-sided slopes and extrapolated densities
//! at interfaces against the travelling-wave relations; pressure fields
//! from the two models are compared cell by cell relative to p_bar, with
//! interface neighbourhoods reported separately.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Pressure fractions of p_bar defining the tracked points x_1, x_2, x_3.
pub const TRACK_LEVELS: [f64; 3] = [0.2, 0.4, 0.6];

/// One level-set track x(t): the rightmost downward crossing per snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelTrack {
    /// Level as a fraction of p_bar.
    pub level: f64,
    /// (t, x) pairs for snapshots where the level was attained.
    pub points: Vec<(f64, f64)>,
    /// Snapshot times where the level was never attained.
    pub omitted: Vec<f64>,
}

/// Least-squares line through a track window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Standard error of the slope (the confidence band half-width scale).
    pub slope_stderr: f64,
    pub points_used: usize,
}

/// Per-interface one-sided slope audit against s = -c/mu on each side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KinkInterface {
    /// Cell index the interface was detected in.
    pub cell: usize,
    /// Interface position.
    pub x: f64,
    /// One-sided slopes evaluated one cell behind/ahead of the interface;
    /// absent when the stencil would leave the domain.
    pub s_minus: Option<f64>,
    pub s_plus: Option<f64>,
    /// Residuals |mu_i s- + c|/c and |mu_{i+1} s+ + c|/c.
    pub res_minus: Option<f64>,
    pub res_plus: Option<f64>,
    /// Whether |s+| < |s-|, the slope ordering implied by mu_i < mu_{i+1}.
    pub ordered: Option<bool>,
    /// Interface too close to the boundary for the stencils.
    pub near_boundary: bool,
}

/// Pointwise pressure discrepancy |p_a - p_b|/p_bar with the maxima near
/// and away from interfaces reported separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PressureComparison {
    pub error: Vec<f64>,
    /// Max error within the exclusion distance of any given interface cell.
    pub max_near: f64,
    /// Max error over all remaining cells.
    pub max_far: f64,
}

/// Per-run measurement bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub times: Vec<f64>,
    /// Tracks at [`TRACK_LEVELS`] fractions of p_bar.
    pub tracks: Vec<LevelTrack>,
    /// Fit of the x_1 track over `fit_window`.
    pub c_fit: SpeedFit,
    pub fit_window: (f64, f64),
    /// Band masses per snapshot, `masses[s][i]`.
    pub masses: Vec<Vec<f64>>,
    /// Support endpoint positions per snapshot, `supports[s][i]`.
    pub supports: Vec<Vec<Option<f64>>>,
    /// Max pairwise support overlap in cells over all snapshots.
    pub max_overlap: usize,
    /// Total mass removed by negativity clipping during the run.
    pub clipped_mass: f64,
}

/// Rightmost downward crossing of `level * p_bar` per snapshot, located by
/// linear interpolation between grid nodes. Snapshots where the level is
/// never attained are listed in `omitted` instead.
pub fn track_level(
    times: &[f64],
    pressures: &[Vec<f64>],
    level: f64,
    p_bar: f64,
    dx: f64,
) -> Result<LevelTrack> {
    if times.len() != pressures.len() {
        return Err(Error::Structural(format!(
            "{} times vs {} pressure snapshots",
            times.len(),
            pressures.len()
        )));
    }
    if !(level.is_finite() && level > 0.0 && p_bar > 0.0 && dx > 0.0) {
        return Err(Error::Domain(format!(
            "level, p_bar, dx must be positive, got {level}, {p_bar}, {dx}"
        )));
    }
    let target = level * p_bar;
    let mut points = Vec::new();
    let mut omitted = Vec::new();
    for (&t, p) in times.iter().zip(pressures) {
        let mut found = None;
        for j in (0..p.len().saturating_sub(1)).rev() {
            if p[j] >= target && p[j + 1] < target {
                let theta = (p[j] - target) / (p[j] - p[j + 1]);
                found = Some((j as f64 + theta) * dx);
                break;
            }
        }
        match found {
            Some(x) => points.push((t, x)),
            None => omitted.push(t),
        }
    }
    Ok(LevelTrack {
        level,
        points,
        omitted,
    })
}

fn least_squares(ts: &[f64], xs: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let xm = xs.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stx = 0.0;
    for (&t, &x) in ts.iter().zip(xs) {
        stt += (t - tm) * (t - tm);
        stx += (t - tm) * (x - xm);
    }
    let slope = stx / stt;
    (slope, xm - slope * tm)
}

/// Least-squares line through the track points with t in `window`;
/// the slope is the speed estimate.
pub fn fit_speed(track: &[(f64, f64)], window: (f64, f64)) -> Result<SpeedFit> {
    let (ta, tb) = window;
    let sel: Vec<(f64, f64)> = track
        .iter()
        .copied()
        .filter(|(t, _)| *t >= ta && *t <= tb)
        .collect();
    if sel.len() < 3 {
        return Err(Error::Domain(format!(
            "speed fit needs at least 3 track points in [{ta}, {tb}], got {}",
            sel.len()
        )));
    }
    let ts: Vec<f64> = sel.iter().map(|(t, _)| *t).collect();
    let xs: Vec<f64> = sel.iter().map(|(_, x)| *x).collect();
    let (slope, intercept) = least_squares(&ts, &xs);
    let n = sel.len();
    let mut ss_res = 0.0;
    let mut stt = 0.0;
    let tm = ts.iter().sum::<f64>() / n as f64;
    for (&t, &x) in ts.iter().zip(&xs) {
        let r = x - (intercept + slope * t);
        ss_res += r * r;
        stt += (t - tm) * (t - tm);
    }
    let residual = (ss_res / n as f64).sqrt();
    let slope_stderr = if n > 2 {
        (ss_res / (n as f64 - 2.0) / stt).sqrt()
    } else {
        0.0
    };
    Ok(SpeedFit {
        slope,
        intercept,
        residual,
        slope_stderr,
        points_used: n,
    })
}

/// Rightmost grid node with n > threshold; `None` when the support is
/// empty at that threshold.
pub fn support_endpoint(n: &[f64], threshold: f64) -> Result<Option<usize>> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::Domain(format!(
            "support threshold must be positive, got {threshold}"
        )));
    }
    Ok(n.iter().rposition(|&v| v > threshold))
}

/// Max over phenotype pairs of the count of cells where both densities
/// exceed their thresholds.
pub fn segregation_overlap(fields: &[Vec<f64>], thresholds: &[f64]) -> Result<usize> {
    if fields.len() != thresholds.len() {
        return Err(Error::Structural(format!(
            "{} fields vs {} thresholds",
            fields.len(),
            thresholds.len()
        )));
    }
    if let Some(&bad) = thresholds.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::Domain(format!(
            "support thresholds must be positive, got {bad}"
        )));
    }
    let mut max = 0;
    for i in 0..fields.len() {
        for k in i + 1..fields.len() {
            if fields[i].len() != fields[k].len() {
                return Err(Error::Structural(format!(
                    "field lengths differ: {} vs {}",
                    fields[i].len(),
                    fields[k].len()
                )));
            }
            let count = fields[i]
                .iter()
                .zip(&fields[k])
                .filter(|(a, b)| **a > thresholds[i] && **b > thresholds[k])
                .count();
            max = max.max(count);
        }
    }
    Ok(max)
}

/// Rightmost sign change of n_i - n_{i+1} per adjacent phenotype pair:
/// the cell j with n_i[j] > n_{i+1}[j] and n_i[j+1] <= n_{i+1}[j+1],
/// plus the linearly interpolated crossing position. This locates the band
/// handover without the forward-smear bias of a support endpoint.
pub fn interface_crossovers(fields: &[Vec<f64>], dx: f64) -> Vec<Option<(usize, f64)>> {
    let mut out = Vec::with_capacity(fields.len().saturating_sub(1));
    for pair in fields.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let mut found = None;
        for j in (0..a.len().min(b.len()).saturating_sub(1)).rev() {
            let d0 = a[j] - b[j];
            let d1 = a[j + 1] - b[j + 1];
            if d0 > 0.0 && d1 <= 0.0 {
                let x = (j as f64 + d0 / (d0 - d1)) * dx;
                found = Some((j, x));
                break;
            }
        }
        out.push(found);
    }
    out
}

/// Pointwise |p_a - p_b|/p_bar plus maxima split into cells within
/// `exclusion` cells of any interface and the rest. Symmetric in the two
/// pressure fields.
pub fn compare_pressure(
    p_a: &[f64],
    p_b: &[f64],
    p_bar: f64,
    interface_cells: &[usize],
    exclusion: usize,
) -> Result<PressureComparison> {
    if p_a.len() != p_b.len() {
        return Err(Error::Structural(format!(
            "pressure grids differ: {} vs {} cells",
            p_a.len(),
            p_b.len()
        )));
    }
    if !(p_bar.is_finite() && p_bar > 0.0) {
        return Err(Error::Domain(format!("p_bar must be positive, got {p_bar}")));
    }
    let error: Vec<f64> = p_a
        .iter()
        .zip(p_b)
        .map(|(a, b)| (a - b).abs() / p_bar)
        .collect();
    let near = |j: usize| {
        interface_cells
            .iter()
            .any(|&m| j.abs_diff(m) <= exclusion)
    };
    let mut max_near: f64 = 0.0;
    let mut max_far: f64 = 0.0;
    for (j, &e) in error.iter().enumerate() {
        if near(j) {
            max_near = max_near.max(e);
        } else {
            max_far = max_far.max(e);
        }
    }
    Ok(PressureComparison {
        error,
        max_near,
        max_far,
    })
}

/// 3-point one-sided slope at cell a using cells to its left.
fn slope_backward(p: &[f64], a: usize, dx: f64) -> f64 {
    (3.0 * p[a] - 4.0 * p[a - 1] + p[a - 2]) / (2.0 * dx)
}

/// 3-point one-sided slope at cell b using cells to its right.
fn slope_forward(p: &[f64], b: usize, dx: f64) -> f64 {
    (-3.0 * p[b] + 4.0 * p[b + 1] - p[b + 2]) / (2.0 * dx)
}

/// One-sided pressure slopes at each supplied interface, audited against
/// the travelling-wave relation s = -c/mu on both sides. Stencils are
/// 3-point one-sided, evaluated one cell away from the interface cell to
/// avoid the kink cell itself; interfaces whose stencils would leave the
/// domain are flagged `near_boundary` with no slopes.
pub fn kink_audit(
    p: &[f64],
    interfaces: &[(usize, f64)],
    mu: &[f64],
    c_fit: f64,
    dx: f64,
) -> Result<Vec<KinkInterface>> {
    if mu.len() < interfaces.len() + 1 {
        return Err(Error::Structural(format!(
            "{} interfaces need at least {} mobilities, got {}",
            interfaces.len(),
            interfaces.len() + 1,
            mu.len()
        )));
    }
    if !(c_fit.is_finite() && c_fit > 0.0 && dx > 0.0) {
        return Err(Error::Domain(format!(
            "c_fit and dx must be positive, got {c_fit}, {dx}"
        )));
    }
    let mut out = Vec::with_capacity(interfaces.len());
    for (i, &(m, x)) in interfaces.iter().enumerate() {
        // rear slope at m-1 reads {m-3..m-1}; forward at m+1 reads {m+1..m+3}
        if m < 3 || m + 3 >= p.len() {
            out.push(KinkInterface {
                cell: m,
                x,
                s_minus: None,
                s_plus: None,
                res_minus: None,
                res_plus: None,
                ordered: None,
                near_boundary: true,
            });
            continue;
        }
        let s_minus = slope_backward(p, m - 1, dx);
        let s_plus = slope_forward(p, m + 1, dx);
        out.push(KinkInterface {
            cell: m,
            x,
            s_minus: Some(s_minus),
            s_plus: Some(s_plus),
            res_minus: Some((mu[i] * s_minus + c_fit).abs() / c_fit),
            res_plus: Some((mu[i + 1] * s_plus + c_fit).abs() / c_fit),
            ordered: Some(s_plus.abs() < s_minus.abs()),
            near_boundary: false,
        });
    }
    Ok(out)
}

/// Measured density jump across an interface: each side's density is fit
/// linearly over `span` cells starting `gap` cells away from the crossover
/// cell and extrapolated to the crossover position; returns the ahead/behind
/// ratio, or `None` when the stencils leave the domain. The standoff skips
/// the cells smeared by the scheme around the interface.
pub fn jump_ratio(
    n_behind: &[f64],
    n_ahead: &[f64],
    crossover: (usize, f64),
    gap: usize,
    span: usize,
    dx: f64,
) -> Option<f64> {
    let (m, xc) = crossover;
    if span < 2 || m < gap + span - 1 || m + gap + span > n_ahead.len() {
        return None;
    }
    let eval = |n: &[f64], start: usize| {
        let ts: Vec<f64> = (start..start + span)
            .map(|j| j as f64 * dx - xc)
            .collect();
        let ys: Vec<f64> = n[start..start + span].to_vec();
        let (slope, intercept) = least_squares(&ts, &ys);
        let _ = slope;
        intercept
    };
    let behind = eval(n_behind, m - gap - span + 1);
    let ahead = eval(n_ahead, m + gap);
    if behind.abs() < f64::MIN_POSITIVE {
        return None;
    }
    Some(ahead / behind)
}

/// Band masses dx * sum_j n_i[j].
pub fn band_masses(fields: &[Vec<f64>], dx: f64) -> Vec<f64> {
    fields
        .iter()
        .map(|n| n.iter().sum::<f64>() * dx)
        .collect()
}

/// Assemble the standard measurement bundle for one run: level tracks,
/// the x_1 speed fit over `fit_window`, per-snapshot masses and support
/// endpoints, and the segregation audit.
#[allow(clippy::too_many_arguments)]
pub fn summarize_run(
    times: &[f64],
    snapshots: &[Vec<Vec<f64>>],
    dx: f64,
    p_bar: f64,
    omega: &[f64],
    support_thresholds: &[f64],
    fit_window: (f64, f64),
    clipped_mass: f64,
) -> Result<RunSummary> {
    if times.len() != snapshots.len() {
        return Err(Error::Structural(format!(
            "{} times vs {} snapshots",
            times.len(),
            snapshots.len()
        )));
    }
    if snapshots.is_empty() {
        return Err(Error::Structural("no snapshots to summarize".into()));
    }
    let pressures: Vec<Vec<f64>> = snapshots
        .iter()
        .map(|fields| crate::model::pressure(fields, omega))
        .collect::<Result<_>>()?;
    let tracks: Vec<LevelTrack> = TRACK_LEVELS
        .iter()
        .map(|&lv| track_level(times, &pressures, lv, p_bar, dx))
        .collect::<Result<_>>()?;
    let c_fit = fit_speed(&tracks[0].points, fit_window)?;
    let masses: Vec<Vec<f64>> = snapshots.iter().map(|f| band_masses(f, dx)).collect();
    let mut supports = Vec::with_capacity(snapshots.len());
    let mut max_overlap = 0;
    for fields in snapshots {
        let mut xs = Vec::with_capacity(fields.len());
        for (n, &thr) in fields.iter().zip(support_thresholds) {
            xs.push(support_endpoint(n, thr)?.map(|j| j as f64 * dx));
        }
        supports.push(xs);
        max_overlap = max_overlap.max(segregation_overlap(fields, support_thresholds)?);
    }
    Ok(RunSummary {
        times: times.to_vec(),
        tracks,
        c_fit,
        fit_window,
        masses,
        supports,
        max_overlap,
        clipped_mass,
    })
}

//! Run configuration: a flat sectioned key/value file describing one
//! complete experiment, resolvable to a deterministic run.
//!
//! Format: INI-style sections `[phenotypes]`, `[grid]`, `[initial]`,
//! `[run]`; scalar values as plain text; arrays as comma lists; `#` or `;`
//! comments. Every key is required so a config is self-describing; presets
//! are shipped config files, not hard-coded tables.

use crate::error::{Error, Result};
use crate::model::{Grid, InitialHumps, Phenotypes};
use ini::Ini;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Run-control block: horizon, snapshot schedule, seeding, and numerical
/// tolerances shared by both models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunControl {
    /// Final time of the run.
    pub t_end: f64,
    /// First periodic snapshot time; t = 0 is always recorded.
    pub snapshot_start: f64,
    /// Spacing of periodic snapshots from `snapshot_start` to `t_end`.
    pub snapshot_interval: f64,
    /// Base RNG seed; replicate r uses stream r of this seed.
    pub seed: u64,
    /// Number of stochastic replicates (ignored by the deterministic model).
    pub replicates: u32,
    /// CFL safety factor in (0, 1].
    pub cfl_safety: f64,
    /// Hard cap on the adaptive time step.
    pub dt_max: f64,
    /// Relative density threshold defining a band's support edge.
    pub support_threshold_rel: f64,
}

/// One fully specified experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub phenotypes: Phenotypes,
    pub grid: Grid,
    pub initial: InitialHumps,
    pub run: RunControl,
}

fn section<'a>(ini: &'a Ini, name: &str) -> Result<&'a ini::Properties> {
    ini.section(Some(name))
        .ok_or_else(|| Error::Config(format!("missing section [{name}]")))
}

fn raw<'a>(props: &'a ini::Properties, section: &str, key: &str) -> Result<&'a str> {
    props
        .get(key)
        .ok_or_else(|| Error::Config(format!("missing key {key} in section [{section}]")))
}

fn scalar(props: &ini::Properties, section: &str, key: &str) -> Result<f64> {
    let s = raw(props, section, key)?;
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("[{section}] {key} = {s:?} is not a number")))
}

fn integer(props: &ini::Properties, section: &str, key: &str) -> Result<u64> {
    let s = raw(props, section, key)?;
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("[{section}] {key} = {s:?} is not an integer")))
}

fn list(props: &ini::Properties, section: &str, key: &str) -> Result<Vec<f64>> {
    let s = raw(props, section, key)?;
    s.split(',')
        .map(|item| {
            item.trim().parse().map_err(|_| {
                Error::Format(format!(
                    "[{section}] {key}: entry {item:?} is not a number"
                ))
            })
        })
        .collect()
}

impl RunConfig {
    /// Parse and validate a config from its textual form.
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text)
            .map_err(|e| Error::Format(format!("config syntax: {e}")))?;

        let p = section(&ini, "phenotypes")?;
        let phenotypes = Phenotypes::new(
            list(p, "phenotypes", "alpha")?,
            list(p, "phenotypes", "mu")?,
            list(p, "phenotypes", "omega")?,
            scalar(p, "phenotypes", "p_bar")?,
        )?;

        let g = section(&ini, "grid")?;
        let grid = Grid::new(
            scalar(g, "grid", "length")?,
            scalar(g, "grid", "dx")?,
            scalar(g, "grid", "tau")?,
        )?;

        let i = section(&ini, "initial")?;
        let initial = InitialHumps::new(
            list(i, "initial", "amplitudes")?,
            scalar(i, "initial", "decay")?,
            list(i, "initial", "boundaries")?,
        )?;

        let r = section(&ini, "run")?;
        let run = RunControl {
            t_end: scalar(r, "run", "t_end")?,
            snapshot_start: scalar(r, "run", "snapshot_start")?,
            snapshot_interval: scalar(r, "run", "snapshot_interval")?,
            seed: integer(r, "run", "seed")?,
            replicates: integer(r, "run", "replicates")? as u32,
            cfl_safety: scalar(r, "run", "cfl_safety")?,
            dt_max: scalar(r, "run", "dt_max")?,
            support_threshold_rel: scalar(r, "run", "support_threshold_rel")?,
        };

        let cfg = Self {
            phenotypes,
            grid,
            initial,
            run,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file from disk.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        let r = &self.run;
        if !(r.t_end >= 0.0 && r.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", r.t_end)));
        }
        let start_ok = r.snapshot_start.is_finite() && r.snapshot_start >= 0.0;
        let interval_ok = r.snapshot_interval.is_finite() && r.snapshot_interval > 0.0;
        if !start_ok || !interval_ok {
            return Err(Error::Config(format!(
                "snapshot schedule needs start >= 0 and interval > 0, got {} and {}",
                r.snapshot_start, r.snapshot_interval
            )));
        }
        if r.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if !(r.cfl_safety > 0.0 && r.cfl_safety <= 1.0) {
            return Err(Error::Config(format!(
                "cfl_safety must lie in (0, 1], got {}",
                r.cfl_safety
            )));
        }
        if r.dt_max <= 0.0 || !r.dt_max.is_finite() {
            return Err(Error::Config(format!("dt_max must be > 0, got {}", r.dt_max)));
        }
        if r.support_threshold_rel <= 0.0 || !r.support_threshold_rel.is_finite() {
            return Err(Error::Config(format!(
                "support_threshold_rel must be > 0, got {}",
                r.support_threshold_rel
            )));
        }
        // resolve the initial condition once so bad configs fail at parse
        // time rather than mid-run
        crate::model::build_initial(&self.grid, &self.initial, &self.phenotypes)?;
        Ok(())
    }

    /// Snapshot schedule: t = 0, then `snapshot_start + k interval` up to
    /// and including `t_end` (when the spacing divides the span evenly).
    pub fn snapshot_times(&self) -> Vec<f64> {
        let r = &self.run;
        let mut times = vec![0.0];
        if r.t_end > 0.0 {
            let mut k = 0u64;
            loop {
                let t = r.snapshot_start + k as f64 * r.snapshot_interval;
                if t > r.t_end * (1.0 + 1e-12) {
                    break;
                }
                if t > 0.0 {
                    times.push(t.min(r.t_end));
                }
                k += 1;
            }
        }
        times
    }

    /// Stable content hash recorded in run manifests: SHA-256 of the
    /// canonical JSON form, hex-encoded.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

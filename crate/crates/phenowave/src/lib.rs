//! Growth of a phenotypically heterogeneous cell population in one spatial
//! dimension, modelled two ways and cross-validated:
//!
//! * [`ibm`]: a stochastic lattice model where each cell divides, dies, and
//!   hops between neighbouring sites with pressure-dependent probabilities.
//! * [`pde`]: the matching continuum limit, a cross-diffusion system
//!   dn_i/dt - mu_i d/dx(n_i dp/dx) = alpha_i G(p) n_i solved with a
//!   MUSCL finite-volume scheme and adaptive time stepping.
//! * [`wave`]: travelling-wave analytics for the continuum model: the wave
//!   speed, the positions and pressures of the interfaces between phenotype
//!   bands, and the rear pressure profile via a shooting method.
//!
//! [`measure`] post-processes runs from either model (front tracking, speed
//! fits, segregation and kink audits, cross-model error maps), [`config`]
//! and [`io`] handle run configuration and CSV/JSON artifacts, [`presets`]
//! ships ready-made configurations reproducing the standard experiments,
//! and [`cli`] implements the `ibm`/`pde`/`predict`/`compare` subcommands
//! on top of the rest.

pub mod cli;
pub mod config;
pub mod error;
pub mod ibm;
pub mod io;
pub mod measure;
pub mod model;
pub mod pde;
pub mod presets;
pub mod wave;

pub use error::{Error, Result};

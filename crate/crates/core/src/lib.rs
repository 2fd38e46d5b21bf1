//! Papangelou point processes on finite discrete state spaces.
//!
//! A Papangelou kernel `π(μ, ·)` gives the intensity of realizing a new
//! point given an observed configuration `μ`; a point process belongs
//! to the kernel when its Campbell measure satisfies the
//! integration-by-parts identity. On a finite site set everything is
//! exactly computable, which is what this crate exploits:
//!
//! * [`kernels`] — the catalog (Poisson, Pólya sum, Pólya difference,
//!   local reinforcement, pair interaction) and kernel pushforward
//!   under site maps;
//! * [`partition`] — iterated kernels, certified truncated partition
//!   sums and the conditional law of a region given its environment;
//! * [`samplers`] — exact inverse-CDF sampling, closed-form per-site
//!   sampling and a birth-death Metropolis chain;
//! * [`checks`] — decision procedures for the sufficiency,
//!   prediction-invariance and learn-merge postulates, with
//!   self-certifying witnesses;
//! * [`extract`] — recovery of `(ρ, c, f)` from black-box kernels and
//!   classification against the catalog;
//! * [`gnz`] — Monte Carlo verification of the integration-by-parts
//!   identity and of state-space transformations.
//!
//! Arithmetic is generic over [`scalar::Scalar`]: `f64` for Monte
//! Carlo, exact rationals for the verification suites.

pub mod checks;
pub mod config;
pub mod error;
pub mod extract;
pub mod gnz;
pub mod kernel;
pub mod kernels;
pub mod measure;
pub mod partition;
pub mod samplers;
pub mod scalar;
pub mod space;

pub use config::Config;
pub use error::{Error, Result};
pub use kernel::{FnKernel, Kernel};
pub use measure::Measure;
pub use scalar::{Rational, Scalar};
pub use space::{SiteMap, Space};

//! Crate-wide error type.

use thiserror::Error;

use crate::config::Config;

/// Errors produced by constructors, checks and estimators.
///
/// Violation variants carry the offending configurations in typed form;
/// the numeric sides are rendered to strings so the error type stays
/// independent of the scalar parameter.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unknown site `{0}`")]
    UnknownSite(String),

    #[error("configuration weight of {kappa:?} depends on point order: {first} vs {second}")]
    CocycleViolation {
        kappa: Config,
        first: String,
        second: String,
    },

    #[error(
        "Dynkin condition fails: configurations {mu1:?} and {mu2:?} share an image but \
         give preimage masses {lhs} vs {rhs} at target site {target_site}"
    )]
    DynkinViolation {
        mu1: Config,
        mu2: Config,
        target_site: usize,
        lhs: String,
        rhs: String,
    },

    #[error("partition sum did not converge (value so far {value}, last layer {last_layer})")]
    Divergence { value: String, last_layer: String },

    #[error("partition sum is zero; the conditional law is undefined")]
    ZeroPartition,

    #[error("sampler `{sampler}` does not support kernel `{kernel}`")]
    UnsupportedSampler { sampler: String, kernel: String },

    #[error("empty sample batch")]
    EmptyBatch,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(
        "reconstruction mismatch at {config:?}, site {site}: kernel gives {actual}, \
         decomposition gives {reconstructed}"
    )]
    ReconstructionMismatch {
        config: Config,
        site: usize,
        actual: String,
        reconstructed: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

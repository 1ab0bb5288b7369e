//! Crate-level error wrapping each module's error type.

use thiserror::Error;

use crate::drift::DriftError;
use crate::evolution::EvolutionError;
use crate::girsanov::GirsanovError;
use crate::kernels::KernelError;
use crate::lamperti::LampertiError;
use crate::sampler::SamplerError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    Lamperti(#[from] LampertiError),
    #[error(transparent)]
    Girsanov(#[from] GirsanovError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Module the failure originated in.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Drift(_) => "drift",
            Error::Lamperti(_) => "lamperti",
            Error::Girsanov(_) => "girsanov",
            Error::Kernel(_) => "kernels",
            Error::Evolution(_) => "evolution",
            Error::Sampler(_) => "sampler",
            Error::Config(_) | Error::Io { .. } => "cli",
        }
    }

    /// 1 for domain errors, 2 for configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}

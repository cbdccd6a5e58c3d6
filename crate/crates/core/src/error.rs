use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("quote sheet does not match the market state: {0}")]
    QuoteMismatch(String),
    #[error("allocation does not cover the market state ({flags} flags for {jobs} jobs)")]
    AllocationMismatch { flags: usize, jobs: usize },
    #[error("cannot extract features from an empty market state")]
    EmptyState,
    #[error("unknown algorithm variant `{0}` (expected pg, pg-baseline, q-ac, td1 or advantage)")]
    UnknownAlgorithm(String),
    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error("model shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A documented precondition of an operation does not hold. The message
    /// names the failing bound.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Sieve limit would exceed the configured memory budget.
    #[error("limit {limit} needs {needed} bytes, over the {budget}-byte budget")]
    ResourceExhausted { limit: u64, needed: u64, budget: u64 },

    /// Query outside `[1, limit]` of a bitmap.
    #[error("{what} = {value} out of range [1, {limit}]")]
    OutOfRange { what: &'static str, value: u64, limit: u64 },

    /// Tuple shifts must be even, positive, strictly increasing.
    #[error("invalid tuple spec: {0}")]
    InvalidTupleSpec(String),

    /// An evaluation point beyond an arithmetic function's domain.
    #[error("n up to {needed} required but domain_limit = {domain_limit}")]
    DomainLimit { needed: u64, domain_limit: u64 },

    /// `nu` requires a prime modulus.
    #[error("{0} is not prime")]
    NotPrime(u64),

    /// Tuple averages are implemented at desk scale only.
    #[error("unsupported k = {0}: {1}")]
    UnsupportedK(u64, &'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad magic {found:02x?}, expected \"HLPB\"")]
    CorruptMagic { path: PathBuf, found: [u8; 4] },

    #[error("{path}: unsupported format version {found}, expected {expected}")]
    UnsupportedVersion { path: PathBuf, found: u32, expected: u32 },

    #[error("{path}: checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { path: PathBuf, stored: u64, computed: u64 },

    #[error("{path}: truncated: expected {expected} bytes of {section}, found {found}")]
    Truncated { path: PathBuf, section: &'static str, expected: u64, found: u64 },
}

impl Error {
    /// Convenience constructor used by the verification preconditions.
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

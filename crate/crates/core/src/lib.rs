//! Prime pair correlation counting and Hardy-Littlewood singular series,
//! with a verification harness for averaged pair-count asymptotics.
//!
//! The crate is organized around a handful of building blocks:
//!
//! - [`sieve`] — a segmented, bit-packed prime indicator over `[1, limit]`
//!   with O(1) ranged prime counting.
//! - [`correlation`] — exact shifted-coincidence counts: the pair counting
//!   functions `pi_{2k}(x)`, strided counts `pi_{2mk}(x)`, prime tuple counts,
//!   and generic correlation sums for arbitrary arithmetic functions.
//! - [`singular`] — truncated Euler products for the Hardy-Littlewood
//!   constants `C_{2k}` and their tuple generalization, each carrying a
//!   rigorous truncation tail bound, plus their Gallagher-type averages.
//! - [`averages`] — the verification harness proper: computes the left-hand
//!   side of each averaged statement from sieve data, the predicted
//!   right-hand side or lower bound, and emits structured reports.
//! - [`store`] — an on-disk bitmap format and JSON-lines report log so the
//!   sieve work is done once.

pub mod averages;
pub mod correlation;
pub mod error;
pub mod sieve;
pub mod singular;
pub mod store;

pub use averages::{ShiftSet, StatementId, Thresholds, VerificationReport};
pub use correlation::{ArithmeticFunction, CorrelationSums, PairCountTable, TupleSpec};
pub use error::{Error, Result};
pub use sieve::{build_sieve, PrimeBitmap, SieveConfig};
pub use singular::SingularValue;

//! One verifier per inequality, each returning a [`VerificationReport`].
//!
//! Verifiers never fail because an inequality fails; that outcome is data
//! in the report. Only malformed inputs (wrong descriptors, violated
//! preconditions such as cone membership) produce an [`Error`](crate::Error).

mod checks;
mod norms;
mod report;
mod sweep;

pub use checks::*;
pub use norms::*;
pub use report::*;
pub use sweep::*;

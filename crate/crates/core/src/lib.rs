//! Euclidean Jordan algebras, spectral majorization, and the checks built on them.

pub mod algebra;
pub mod dense;
pub mod error;
pub mod spectral;
pub mod majorization;
pub mod transforms;
pub mod exec;
pub mod suite;
pub mod prospector;
pub mod io;

//! Numerical laboratory for quantum work.
//!
//! The crate compares three notions of work on the same footing:
//!
//! * the unitary-condition work operator `U†H′U − H` and the two-point
//!   measurement (TPM) work operator and distribution ([`workops`]),
//! * mechanical (`W^M`) and energetic (`W^E`) work along Bohmian trajectories
//!   ([`field1d`], [`bohmdyn`], [`workfun`]),
//! * classical, TPM and Bohmian Jarzynski estimators ([`statmech`]).
//!
//! Finite-dimensional linear algebra lives in [`qcore`]; the experiment
//! registry used by the `qwork-lab` binary lives in [`expcli`].
//!
//! Ensemble work (trajectories, Monte-Carlo samples, random process sweeps)
//! is dispatched through [`exec::Exec`], which uses rayon when the
//! `parallel` feature is enabled and falls back to a sequential loop
//! otherwise. Results are identical in both modes.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bohmdyn;
pub mod error;
pub mod exec;
pub mod expcli;
pub mod field1d;
pub mod protocol;
pub mod qcore;
pub mod statmech;
pub mod stats;
pub mod workfun;
pub mod workops;

pub use error::{Error, Result};
pub use exec::Exec;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

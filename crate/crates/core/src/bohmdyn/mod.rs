//! Bohmian layer over [`crate::field1d`]: amplitude and phase-gradient
//! fields, quantum potential and force, local energy, quantum-equilibrium
//! sampling and guidance-equation trajectories co-evolved with `ψ`.
//!
//! All pointwise fields are built from spectral derivatives of `ψ` itself,
//! with `a = ψ′/ψ`, `b = ψ″/ψ`, `c = ψ‴/ψ`:
//!
//! * `∇S = ħ Im a` (no phase unwrapping),
//! * `R″/R = Re b + (Im a)²`, so `Q = −(ħ²/2m)(Re b + (Im a)²)`,
//! * `∂ₓQ = −(ħ²/2m)(Re(c − ab) + 2 Im a · Im(b − a²))`,
//! * `E_local = Re(Ĥψ/ψ)`,
//! * `∂ₜE_local = ∂ₜV + Im(Ĥ²ψ/ψ − (Ĥψ/ψ)²)/ħ`.
//!
//! These stay smooth through simple nodes of `ψ`, where `R = |ψ|` has a kink.
//! [`qhj_residual`] recomputes `Q` from a spectral derivative of the
//! amplitude instead and compares against `E_local`.

mod fields;
mod qhj;
mod sampling;
mod trajectory;

pub use fields::{ehrenfest_quantum_force, BohmFields, FieldSample, NODE_EPS};
pub use qhj::{qhj_residual, QhjResidual};
pub use sampling::{equivariance_check, sample_quantum_equilibrium, DensityCdf};
pub use trajectory::{
    integrate_ensemble, integrate_trajectories, write_trajectories_csv, Snapshot, Trajectory,
    TrajectoryOptions, TrajectoryRun, EDGE_MARGIN_CELLS,
};

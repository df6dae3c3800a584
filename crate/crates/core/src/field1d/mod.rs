//! Single-particle Schrödinger evolution on a periodic 1-D grid.
//!
//! The kinetic term is applied exactly in Fourier space and the potential
//! pointwise; time stepping is Strang splitting with the potential
//! evaluated at mid-step time.

mod eigen;
mod grid;
mod potential;
mod propagate;
mod spectral;
mod wavefunction;

pub use eigen::{ho_eigenstates, HoEigenstates};
pub use grid::{Grid1D, Units};
pub use potential::{Hamiltonian1D, PotentialSpec};
pub use propagate::{apply_hamiltonian, hamiltonian_expectation, split_step, Propagator};
pub use spectral::SpectralOps;
pub use wavefunction::Wavefunction;

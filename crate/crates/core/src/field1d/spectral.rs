use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::Grid1D;
use crate::C64;

/// FFT plans and wavenumbers for one grid. Cheap to clone; plans are
/// shared.
#[derive(Clone)]
pub struct SpectralOps {
    grid: Grid1D,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Arc<Vec<f64>>,
}

impl std::fmt::Debug for SpectralOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOps").field("grid", &self.grid).finish()
    }
}

impl SpectralOps {
    pub fn new(grid: &Grid1D) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n_points();
        Self {
            grid: *grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            k: Arc::new(grid.wavenumbers()),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// Unnormalised forward transform in place.
    pub fn forward(&self, data: &mut [C64]) {
        self.forward.process(data);
    }

    /// Inverse transform in place, including the `1/n` factor.
    pub fn inverse(&self, data: &mut [C64]) {
        self.inverse.process(data);
        let s = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    /// Spectral derivatives `∂ˣψ` for `x = 1..=max_order`. The Nyquist mode
    /// is dropped for odd orders so that real inputs give real derivatives.
    pub fn derivatives(&self, psi: &[C64], max_order: usize) -> Vec<Vec<C64>> {
        let mut hat = psi.to_vec();
        self.forward(&mut hat);
        let nyq = self.grid.n_points() / 2;
        (1..=max_order)
            .map(|order| {
                let mut d: Vec<C64> = hat
                    .iter()
                    .zip(self.k.iter())
                    .enumerate()
                    .map(|(j, (z, &k))| {
                        if j == nyq && order % 2 == 1 {
                            C64::new(0.0, 0.0)
                        } else {
                            z * C64::new(0.0, k).powu(order as u32)
                        }
                    })
                    .collect();
                self.inverse(&mut d);
                d
            })
            .collect()
    }

    /// Derivatives of a real periodic function.
    pub fn real_derivatives(&self, f: &[f64], max_order: usize) -> Vec<Vec<f64>> {
        let z: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.derivatives(&z, max_order)
            .into_iter()
            .map(|d| d.into_iter().map(|c| c.re).collect())
            .collect()
    }

    /// `(ħ²k²/2m) ψ` evaluated spectrally.
    pub fn kinetic(&self, psi: &[C64], hbar: f64, mass: f64) -> Vec<C64> {
        let mut hat = psi.to_vec();
        self.forward(&mut hat);
        let c = hbar * hbar / (2.0 * mass);
        for (z, &k) in hat.iter_mut().zip(self.k.iter()) {
            *z *= c * k * k;
        }
        self.inverse(&mut hat);
        hat
    }
}

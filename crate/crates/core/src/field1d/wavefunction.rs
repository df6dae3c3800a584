use std::io::Write;

use super::Grid1D;
use crate::stats::CompensatedSum;
use crate::{Error, Result, C64};

/// `ψ(x, t)` sampled on a grid; `Σ|ψ|²dx = 1` for physical states.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: Grid1D,
    amps: Vec<C64>,
    time: f64,
}

impl Wavefunction {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(grid: Grid1D, amps: Vec<C64>, time: f64) -> Result<Self> {
        if amps.len() != grid.n_points() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_points(),
                found: amps.len(),
            });
        }
        Ok(Self { grid, amps, time })
    }

    /// Normalised Gaussian packet with position spread `sigma` (standard
    /// deviation of `|ψ|²`), centre `x0` and carrier wavenumber `k0`.
    pub fn gaussian(grid: Grid1D, x0: f64, sigma: f64, k0: f64) -> Self {
        let amps = grid
            .xs()
            .into_iter()
            .map(|x| {
                let d = x - x0;
                C64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), k0 * (x - x0))
            })
            .collect();
        let mut psi = Self {
            grid,
            amps,
            time: 0.0,
        };
        psi.normalize();
        psi
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps
            .iter()
            .map(|z| z.norm_sqr())
            .collect::<CompensatedSum>()
            .value()
            * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / self.norm_sq().sqrt();
        for z in &mut self.amps {
            *z *= s;
        }
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() < Self::NORM_TOL
    }

    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `⟨self|other⟩ = Σ ψ*φ dx`.
    pub fn inner(&self, other: &Wavefunction) -> C64 {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            let z = a.conj() * b;
            re.add(z.re);
            im.add(z.im);
        }
        C64::new(re.value(), im.value()) * self.grid.dx()
    }

    pub fn fidelity(&self, other: &Wavefunction) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `∫ f(x)|ψ|² dx`.
    pub fn expect_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(j, z)| z.norm_sqr() * f(self.grid.x(j)))
            .collect::<CompensatedSum>()
            .value()
            * self.grid.dx()
    }

    pub fn mean_position(&self) -> f64 {
        self.expect_fn(|x| x)
    }

    pub fn position_std(&self) -> f64 {
        let m = self.mean_position();
        self.expect_fn(|x| (x - m) * (x - m)).sqrt()
    }

    /// Largest `|ψ|` at the two boundary points.
    pub fn edge_amplitude(&self) -> f64 {
        self.amps[0].norm().max(self.amps[self.amps.len() - 1].norm())
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            amps: self.amps.iter().map(|z| z.conj()).collect(),
            time: self.time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// CSV with header `x,re,im,density`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,re,im,density")?;
        for (j, z) in self.amps.iter().enumerate() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid.x(j),
                z.re,
                z.im,
                z.norm_sqr()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let g = Grid1D::centered(512, 0.0, 20.0).unwrap();
        let psi = Wavefunction::gaussian(g, 1.5, 0.8, 2.0);
        assert!(psi.is_normalized());
        assert!((psi.mean_position() - 1.5).abs() < 1e-12);
        assert!((psi.position_std() - 0.8).abs() < 1e-12);
        assert!(psi.edge_amplitude() < 1e-30);
        assert!((psi.fidelity(&psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_header_and_rows() {
        let g = Grid1D::centered(64, 0.0, 8.0).unwrap();
        let psi = Wavefunction::gaussian(g, 0.0, 1.0, 0.0);
        let mut buf = Vec::new();
        psi.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,re,im,density"));
        assert_eq!(lines.count(), 64);
    }

    #[test]
    fn length_mismatch() {
        let g = Grid1D::centered(64, 0.0, 8.0).unwrap();
        assert!(Wavefunction::new(g, vec![C64::new(0.0, 0.0); 10], 0.0).is_err());
    }
}

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform periodic grid on `[x_min, x_min + n·dx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_points: usize,
    x_min: f64,
    dx: f64,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 64;

    pub fn new(n_points: usize, x_min: f64, dx: f64) -> Result<Self> {
        if n_points < Self::MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= {}, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        if !(dx > 0.0) || !dx.is_finite() || !x_min.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min and dx > 0, got x_min = {x_min}, dx = {dx}"
            )));
        }
        Ok(Self { n_points, x_min, dx })
    }

    /// Grid covering `[center − half_width, center + half_width)`.
    pub fn centered(n_points: usize, center: f64, half_width: f64) -> Result<Self> {
        Self::new(n_points, center - half_width, 2.0 * half_width / n_points as f64)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.n_points as f64 * self.dx
    }

    /// Exclusive upper end of the domain.
    pub fn x_max(&self) -> f64 {
        self.x_min + self.length()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * std::f64::consts::PI / self.length();
        (0..n)
            .map(|j| {
                if j < n / 2 {
                    j as f64 * dk
                } else {
                    (j as f64 - n as f64) * dk
                }
            })
            .collect()
    }

    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI / self.dx
    }
}

/// Physical constants; `ħ = m = 1` by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

impl Units {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidParameter {
                name: "units",
                reason: format!("hbar and mass must be positive, got {hbar}, {mass}"),
            });
        }
        Ok(Self { hbar, mass })
    }
}

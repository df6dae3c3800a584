use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field1d::Wavefunction;
use crate::stats::{ks_statistic, CompensatedSum};
use crate::{Error, Result};

/// Piecewise-linear CDF of `|ψ|²`: each cell `[x_j, x_{j+1}]` carries the
/// trapezoid mass `(ρ_j + ρ_{j+1}) dx / 2`, spread uniformly.
#[derive(Debug, Clone)]
pub struct DensityCdf {
    x_min: f64,
    dx: f64,
    /// Cumulative mass at cell edges, normalised so the last entry is 1.
    edges: Vec<f64>,
}

impl DensityCdf {
    pub fn new(psi: &Wavefunction) -> Result<Self> {
        let rho = psi.density();
        let g = psi.grid();
        let mut acc = CompensatedSum::new();
        let mut edges = Vec::with_capacity(rho.len());
        edges.push(0.0);
        for w in rho.windows(2) {
            acc.add(0.5 * (w[0] + w[1]));
            edges.push(acc.value());
        }
        let total = acc.value();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidState("density has no mass".into()));
        }
        for e in edges.iter_mut() {
            *e /= total;
        }
        Ok(Self {
            x_min: g.x_min(),
            dx: g.dx(),
            edges,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let s = (x - self.x_min) / self.dx;
        if s <= 0.0 {
            return 0.0;
        }
        let last = self.edges.len() - 1;
        if s >= last as f64 {
            return 1.0;
        }
        let j = s.floor() as usize;
        let u = s - j as f64;
        self.edges[j] + u * (self.edges[j + 1] - self.edges[j])
    }

    pub fn inverse(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        // First edge with cumulative mass ≥ u; the cell to its left holds u.
        let k = self
            .edges
            .partition_point(|&e| e < u)
            .clamp(1, self.edges.len() - 1);
        let (lo, hi) = (self.edges[k - 1], self.edges[k]);
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.5 };
        self.x_min + self.dx * ((k - 1) as f64 + frac)
    }
}

/// Draws `n` positions from `|ψ|²` by inverse transform.
pub fn sample_quantum_equilibrium(psi: &Wavefunction, n: usize, seed: u64) -> Result<Vec<f64>> {
    let cdf = DensityCdf::new(psi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| cdf.inverse(rng.random::<f64>())).collect())
}

/// Kolmogorov–Smirnov distance between trajectory positions and `|ψ_t|²`.
pub fn equivariance_check(positions: &[f64], psi_t: &Wavefunction) -> Result<f64> {
    let cdf = DensityCdf::new(psi_t)?;
    Ok(ks_statistic(positions, |x| cdf.cdf(x)))
}

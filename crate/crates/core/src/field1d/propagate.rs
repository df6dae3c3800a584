use super::{Hamiltonian1D, SpectralOps, Wavefunction};
use crate::stats::CompensatedSum;
use crate::{Error, Result, C64};

/// Strang split-step propagator for a fixed grid, mass and time step.
#[derive(Debug, Clone)]
pub struct Propagator {
    ops: SpectralOps,
    ham: Hamiltonian1D,
    dt: f64,
    kinetic_phase: Vec<C64>,
    xs: Vec<f64>,
}

impl Propagator {
    pub fn new(ops: &SpectralOps, ham: Hamiltonian1D, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be positive and finite, got {dt}"),
            });
        }
        let Hamiltonian1D { units, .. } = ham;
        let kinetic_phase = ops
            .wavenumbers()
            .iter()
            .map(|&k| C64::from_polar(1.0, -units.hbar * k * k * dt / (2.0 * units.mass)))
            .collect();
        Ok(Self {
            ops: ops.clone(),
            ham,
            dt,
            kinetic_phase,
            xs: ops.grid().xs(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn hamiltonian(&self) -> &Hamiltonian1D {
        &self.ham
    }

    /// Advances `psi` by one step:
    /// `e^{−iV dt/2ħ} · F⁻¹ e^{−iħk²dt/2m} F · e^{−iV dt/2ħ}`, with `V` taken at
    /// `t + dt/2`.
    pub fn step(&self, psi: &mut Wavefunction) -> Result<()> {
        let t_mid = psi.time() + 0.5 * self.dt;
        let half = -0.5 * self.dt / self.ham.units.hbar;
        let amps = psi.amplitudes_mut();
        let kick: Vec<C64> = if matches!(self.ham.potential, super::PotentialSpec::Free) {
            Vec::new()
        } else {
            self.xs
                .iter()
                .map(|&x| C64::from_polar(1.0, half * self.ham.v(x, t_mid)))
                .collect()
        };
        if !kick.is_empty() {
            for (z, k) in amps.iter_mut().zip(&kick) {
                *z *= k;
            }
        }
        self.ops.forward(amps);
        for (z, p) in amps.iter_mut().zip(&self.kinetic_phase) {
            *z *= p;
        }
        self.ops.inverse(amps);
        if !kick.is_empty() {
            for (z, k) in amps.iter_mut().zip(&kick) {
                *z *= k;
            }
        }
        let t_new = psi.time() + self.dt;
        psi.set_time(t_new);
        if !psi.is_finite() {
            return Err(Error::NonFinite { time: t_new });
        }
        Ok(())
    }

    pub fn run(&self, psi: &mut Wavefunction, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(psi)?;
        }
        Ok(())
    }
}

/// One Strang step of length `dt` (builds a throw-away [`Propagator`]).
pub fn split_step(psi: &Wavefunction, ham: &Hamiltonian1D, dt: f64) -> Result<Wavefunction> {
    let ops = SpectralOps::new(psi.grid());
    let prop = Propagator::new(&ops, *ham, dt)?;
    let mut out = psi.clone();
    prop.step(&mut out)?;
    Ok(out)
}

/// `Ĥψ` at the wavefunction's own time.
pub fn apply_hamiltonian(psi: &Wavefunction, ham: &Hamiltonian1D, ops: &SpectralOps) -> Vec<C64> {
    let mut out = ops.kinetic(psi.amplitudes(), ham.units.hbar, ham.units.mass);
    let t = psi.time();
    for (j, (o, z)) in out.iter_mut().zip(psi.amplitudes()).enumerate() {
        *o += z * ham.v(psi.grid().x(j), t);
    }
    out
}

/// `⟨ψ|Ĥ|ψ⟩ / ⟨ψ|ψ⟩`; kinetic part spectral, potential pointwise.
pub fn hamiltonian_expectation(psi: &Wavefunction, ham: &Hamiltonian1D) -> f64 {
    let ops = SpectralOps::new(psi.grid());
    hamiltonian_expectation_with(psi, ham, &ops)
}

pub(crate) fn hamiltonian_expectation_with(
    psi: &Wavefunction,
    ham: &Hamiltonian1D,
    ops: &SpectralOps,
) -> f64 {
    let h_psi = apply_hamiltonian(psi, ham, ops);
    let num: CompensatedSum = psi
        .amplitudes()
        .iter()
        .zip(&h_psi)
        .map(|(a, b)| (a.conj() * b).re)
        .collect();
    num.value() * psi.grid().dx() / psi.norm_sq()
}

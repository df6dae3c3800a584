use super::{hamiltonian_expectation, Grid1D, Hamiltonian1D, PotentialSpec, Units, Wavefunction};
use crate::{Error, Result};

/// Harmonic-oscillator eigenstates sampled on a grid with their analytic
/// energies `ħω(n + ½)`.
#[derive(Debug, Clone)]
pub struct HoEigenstates {
    pub states: Vec<Wavefunction>,
    pub energies: Vec<f64>,
}

/// Orthonormality tolerance below which the grid is considered to resolve
/// the requested states.
pub const ORTHO_TOL: f64 = 1e-8;

/// Hermite functions `ψ₀ … ψ_{n_max}` of `V = ½mω²(x − center)²`, built
/// with the stable three-term recurrence and normalised on the grid.
///
/// Fails with [`Error::UnderResolved`] when the sampled states are not
/// orthonormal to [`ORTHO_TOL`] or their grid energies deviate from the
/// analytic values by more than 1e-6 relative.
pub fn ho_eigenstates(
    grid: &Grid1D,
    units: Units,
    omega: f64,
    center: f64,
    n_max: usize,
) -> Result<HoEigenstates> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("must be positive, got {omega}"),
        });
    }
    let alpha = (units.mass * omega / units.hbar).sqrt();
    let n = grid.n_points();
    let pi_quarter = std::f64::consts::PI.powf(-0.25);
    let mut table = vec![vec![0.0f64; n]; n_max + 1];
    #[allow(clippy::needless_range_loop)]
    for j in 0..n {
        let xi = alpha * (grid.x(j) - center);
        let mut prev = 0.0;
        let mut cur = pi_quarter * (-0.5 * xi * xi).exp();
        table[0][j] = cur;
        for k in 0..n_max {
            let next = (2.0 / (k + 1) as f64).sqrt() * xi * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
            prev = cur;
            cur = next;
            table[k + 1][j] = cur;
        }
    }
    let scale = alpha.sqrt();
    let mut states = Vec::with_capacity(n_max + 1);
    for row in table {
        let amps = row.into_iter().map(|v| crate::C64::new(v * scale, 0.0)).collect();
        let mut psi = Wavefunction::new(*grid, amps, 0.0)?;
        let norm = psi.norm_sq();
        if (norm - 1.0).abs() > ORTHO_TOL {
            return Err(Error::UnderResolved(format!(
                "state {} has grid norm² {norm}",
                states.len()
            )));
        }
        psi.normalize();
        states.push(psi);
    }
    for a in 0..states.len() {
        for b in 0..a {
            let ov = states[a].inner(&states[b]).norm();
            if ov > ORTHO_TOL {
                return Err(Error::UnderResolved(format!("⟨ψ{a}|ψ{b}⟩ = {ov:e}")));
            }
        }
    }
    let energies: Vec<f64> = (0..=n_max)
        .map(|k| units.hbar * omega * (k as f64 + 0.5))
        .collect();
    let ham = Hamiltonian1D::new(
        units,
        PotentialSpec::Harmonic {
            omega,
            center: crate::protocol::Schedule::constant(center),
        },
    );
    // Kinetic energy through the spectral operator flags aliasing.
    if let Some(top) = states.last() {
        let e = hamiltonian_expectation(top, &ham);
        let want = energies[n_max];
        if ((e - want) / want).abs() > 1e-6 {
            return Err(Error::UnderResolved(format!(
                "state {n_max}: grid energy {e} vs analytic {want}"
            )));
        }
    }
    Ok(HoEigenstates { states, energies })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::centered(1024, 0.0, 14.0).unwrap()
    }

    #[test]
    fn ground_state_is_gaussian() {
        let e = ho_eigenstates(&grid(), Units::default(), 1.0, 0.0, 0).unwrap();
        assert_eq!(e.energies, vec![0.5]);
        let g = Wavefunction::gaussian(grid(), 0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!((e.states[0].fidelity(&g) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_and_orthogonality() {
        let units = Units::default();
        let e = ho_eigenstates(&grid(), units, 1.0, 0.0, 10).unwrap();
        assert!(e.states[0].inner(&e.states[1]).norm() < 1e-8);
        let ham = Hamiltonian1D::new(units, PotentialSpec::static_harmonic(1.0));
        for (n, psi) in e.states.iter().enumerate() {
            let en = hamiltonian_expectation(psi, &ham);
            assert!((en - (n as f64 + 0.5)).abs() < 1e-6, "n = {n}: {en}");
        }
    }

    #[test]
    fn detects_under_resolution() {
        // Domain too narrow for n = 30: the tails are cut off.
        let narrow = Grid1D::centered(256, 0.0, 4.0).unwrap();
        assert!(matches!(
            ho_eigenstates(&narrow, Units::default(), 1.0, 0.0, 30),
            Err(Error::UnderResolved(_))
        ));
        // Too coarse to resolve high-n oscillations.
        let coarse = Grid1D::centered(64, 0.0, 14.0).unwrap();
        assert!(matches!(
            ho_eigenstates(&coarse, Units::default(), 1.0, 0.0, 40),
            Err(Error::UnderResolved(_))
        ));
    }
}

use serde::Serialize;

use super::NODE_EPS;
use crate::field1d::{apply_hamiltonian, Hamiltonian1D, SpectralOps, Wavefunction};
use crate::{Error, Result, C64};

/// Quantum Hamilton–Jacobi check with `Q` obtained from the amplitude.
///
/// `R` is continued through nodes with a sign flip wherever consecutive
/// non-zero amplitudes point in opposite directions, so that simple nodes of real
/// eigenstates become smooth zero crossings. `Q = −(ħ²/2m) R″/R` then uses a
/// spectral second derivative of that signed amplitude, `∇S` uses
/// `Im(ψ*ψ′)/|ψ|²`, and `E_local = Re(Ĥψ/ψ)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QhjResidual {
    /// `max |E_local − ((∇S)²/2m + V + Q)|` over unmasked points.
    pub max_abs: f64,
    pub n_valid: usize,
    pub n_points: usize,
}

pub fn qhj_residual(psi: &Wavefunction, ham: &Hamiltonian1D) -> Result<QhjResidual> {
    let grid = *psi.grid();
    let ops = SpectralOps::new(&grid);
    let amps = psi.amplitudes();
    let n = amps.len();
    let hbar = ham.units.hbar;
    let mass = ham.units.mass;
    let t = psi.time();

    let mut r_signed = Vec::with_capacity(n);
    let mut sign = 1.0;
    let mut reference: Option<C64> = None;
    for &z in amps {
        if z.norm_sqr() == 0.0 {
            r_signed.push(0.0);
            continue;
        }
        if let Some(prev) = reference {
            if (z * prev.conj()).re < 0.0 {
                sign = -sign;
            }
        }
        reference = Some(z);
        r_signed.push(sign * z.norm());
    }
    let r2 = ops
        .real_derivatives(&r_signed, 2)
        .pop()
        .expect("second derivative");
    let d1 = ops.derivatives(amps, 1).pop().expect("first derivative");
    let h_psi = apply_hamiltonian(psi, ham, &ops);

    let rho_max = amps.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let mut max_abs: f64 = 0.0;
    let mut n_valid = 0;
    for j in 0..n {
        let rho = amps[j].norm_sqr();
        if rho < NODE_EPS * rho_max {
            continue;
        }
        n_valid += 1;
        let grad_s = hbar * (amps[j].conj() * d1[j]).im / rho;
        let q = -hbar * hbar / (2.0 * mass) * r2[j] / r_signed[j];
        let e_local = (h_psi[j] / amps[j]).re;
        let v = ham.v(grid.x(j), t);
        max_abs = max_abs.max((e_local - (grad_s * grad_s / (2.0 * mass) + v + q)).abs());
    }
    if n_valid == 0 {
        return Err(Error::AllMasked);
    }
    Ok(QhjResidual {
        max_abs,
        n_valid,
        n_points: n,
    })
}

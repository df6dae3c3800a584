//! Finite-dimensional complex linear algebra: observables, unitaries,
//! density states, projective measurements and the energy-basis dephasing
//! channel.
//!
//! All values are immutable after construction and every operation is a pure
//! function.

mod operator;
mod random;
mod spectrum;
mod state;

pub use operator::{Operator, OperatorJson};
pub use random::{random_hermitian, random_state, random_unitary};
pub use spectrum::{spectral, Spectrum};
pub use state::DensityState;

use crate::{Error, Result, C64};

/// Entrywise tolerance for Hermiticity, unitarity and state validity.
pub const VALIDITY_TOL: f64 = 1e-12;
/// Tolerance for spectral reconstruction.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
/// Largest tolerated imaginary part of `Tr(ρA)`.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// `Tr(ρA)` for Hermitian `A`.
pub fn expectation(rho: &DensityState, a: &Operator) -> Result<f64> {
    expectation_with_tol(rho, a, VALIDITY_TOL)
}

pub fn expectation_with_tol(rho: &DensityState, a: &Operator, herm_tol: f64) -> Result<f64> {
    check_dims(rho.dim(), a.dim())?;
    a.ensure_hermitian(herm_tol)?;
    let tr = trace_product(rho.matrix(), a.matrix());
    if tr.im.abs() > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue { residue: tr.im });
    }
    Ok(tr.re)
}

/// Energy-basis dephasing: `Σᵢ |i⟩⟨i| ρ |i⟩⟨i|` with `|i⟩` the columns of
/// `basis`.
pub fn dephase(rho: &DensityState, basis: &Spectrum) -> Result<DensityState> {
    check_dims(rho.dim(), basis.dim())?;
    let v = basis.eigenvectors();
    let pops = basis.populations(rho);
    let n = rho.dim();
    let mut out = nalgebra::DMatrix::<C64>::zeros(n, n);
    for (k, &p) in pops.iter().enumerate() {
        let col = v.column(k);
        out += (col * col.adjoint()) * C64::new(p, 0.0);
    }
    // Σᵢ |i⟩⟨i| ρ |i⟩⟨i| is Hermitian by construction; symmetrise to remove
    // rounding asymmetry.
    let out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
    Ok(DensityState::from_matrix_unchecked(out))
}

/// `UρU†`.
pub fn evolve(rho: &DensityState, u: &Operator) -> Result<DensityState> {
    check_dims(rho.dim(), u.dim())?;
    u.ensure_unitary(VALIDITY_TOL)?;
    let m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    Ok(DensityState::from_matrix_unchecked(m))
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn trace_product(a: &nalgebra::DMatrix<C64>, b: &nalgebra::DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut re = crate::stats::CompensatedSum::new();
    let mut im = crate::stats::CompensatedSum::new();
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)] * b[(j, i)];
            re.add(z.re);
            im.add(z.im);
        }
    }
    C64::new(re.value(), im.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ket(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    fn plus() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[s, s])
    }

    fn minus() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[s, -s])
    }

    #[test]
    fn expectation_examples() {
        let mixed = DensityState::maximally_mixed(2);
        let z = Operator::diag(&[1.0, -1.0]);
        assert_abs_diff_eq!(expectation(&mixed, &z).unwrap(), 0.0, epsilon = 1e-15);

        let one = DensityState::pure(&ket(&[0.0, 1.0])).unwrap();
        let h = Operator::diag(&[0.0, 1.0]);
        assert_abs_diff_eq!(expectation(&one, &h).unwrap(), 1.0, epsilon = 1e-15);

        // Unitary-condition work operator of the ε = 1, ε′ = 2 two-level example.
        let w = Operator::from_real_rows(&[&[1.0, -1.0], &[-1.0, 0.0]]).unwrap();
        let p = DensityState::pure(&plus()).unwrap();
        assert_abs_diff_eq!(expectation(&p, &w).unwrap(), -0.5, epsilon = 1e-14);
    }

    #[test]
    fn expectation_errors() {
        let rho = DensityState::maximally_mixed(2);
        assert!(matches!(
            expectation(&rho, &Operator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let non_herm = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            expectation(&rho, &non_herm),
            Err(Error::NotHermitian { .. })
        ));
        // A barely non-Hermitian operator slips past a loose Hermiticity
        // tolerance but leaves an imaginary trace residue.
        let mut m = nalgebra::DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = C64::new(0.0, 1e-6);
        let skew = Operator::from_matrix(m).unwrap();
        let rho = DensityState::pure(&[C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        assert!(matches!(
            expectation_with_tol(&rho, &skew, 1e-3),
            Err(Error::ImaginaryResidue { .. })
        ));
    }

    #[test]
    fn dephase_examples() {
        let basis = spectral(&Operator::diag(&[0.0, 1.0])).unwrap();
        let diag = DensityState::diagonal(&[0.3, 0.7]).unwrap();
        let d = dephase(&diag, &basis).unwrap();
        assert!(d.max_abs_diff(&diag) < 1e-15);

        let p = DensityState::pure(&plus()).unwrap();
        let d = dephase(&p, &basis).unwrap();
        assert!(d.max_abs_diff(&DensityState::maximally_mixed(2)) < 1e-15);

        let r = random_state(2, 99);
        let d = dephase(&r, &basis).unwrap();
        assert_eq!(d.matrix()[(0, 1)], C64::new(0.0, 0.0));
        assert_eq!(d.matrix()[(1, 0)], C64::new(0.0, 0.0));
        assert_abs_diff_eq!(d.matrix()[(0, 0)].re, r.matrix()[(0, 0)].re, epsilon = 1e-15);
        assert_abs_diff_eq!(d.matrix()[(1, 1)].re, r.matrix()[(1, 1)].re, epsilon = 1e-15);
    }

    #[test]
    fn evolve_examples() {
        let r = random_state(3, 5);
        let same = evolve(&r, &Operator::identity(3)).unwrap();
        assert!(same.max_abs_diff(&r) < 1e-15);

        // U = |0⟩⟨+| + |1⟩⟨−|, so U†|1⟩ = |−⟩.
        let u = Operator::outer(&ket(&[1.0, 0.0]), &plus())
            .add(&Operator::outer(&ket(&[0.0, 1.0]), &minus()))
            .unwrap();
        let one = DensityState::pure(&ket(&[0.0, 1.0])).unwrap();
        let back = evolve(&one, &u.adjoint()).unwrap();
        let expected = DensityState::pure(&minus()).unwrap();
        assert!(back.max_abs_diff(&expected) < 1e-15);

        let not_unitary = Operator::diag(&[1.0, 2.0]);
        assert!(matches!(
            evolve(&one, &not_unitary),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn evolve_preserves_spectrum() {
        for seed in 0..20 {
            let rho = random_state(4, seed);
            let u = random_unitary(4, seed + 1000);
            let out = evolve(&rho, &u).unwrap();
            let a = rho.eigenvalues();
            let b = out.eigenvalues();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!((out.trace() - 1.0).abs() < 1e-12);
        }
    }
}

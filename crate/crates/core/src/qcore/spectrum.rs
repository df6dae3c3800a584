use nalgebra::DMatrix;

use super::{DensityState, Operator, VALIDITY_TOL};
use crate::{Result, C64};

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
///
/// Inside a degenerate eigenspace the basis is whatever orthonormal set the
/// solver returns; TPM probabilities and dephasing are covariant under that
/// choice.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

/// Diagonalises a Hermitian operator.
pub fn spectral(h: &Operator) -> Result<Spectrum> {
    h.ensure_hermitian(VALIDITY_TOL)?;
    let sym = h.hermitian_part().into_matrix();
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

impl Spectrum {
    /// Basis given directly by orthonormal columns, e.g. the computational
    /// basis.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<C64>) -> Self {
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }

    /// `Σᵢ Eᵢ |i⟩⟨i|`.
    pub fn reconstruct(&self) -> Operator {
        let v = &self.eigenvectors;
        let d = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                C64::new(self.eigenvalues[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Operator::from_matrix(v * d * v.adjoint()).expect("square by construction")
    }

    /// Born-rule populations `⟨i|ρ|i⟩`.
    pub fn populations(&self, rho: &DensityState) -> Vec<f64> {
        let v = &self.eigenvectors;
        (0..self.dim())
            .map(|k| {
                let col = v.column(k);
                (col.adjoint() * rho.matrix() * col)[(0, 0)].re
            })
            .collect()
    }

    /// Largest deviation of the columns from orthonormality.
    pub fn orthonormality_deviation(&self) -> f64 {
        Operator::from_matrix(self.eigenvectors.clone())
            .expect("square")
            .unitarity_deviation()
    }

    /// Largest relative eigen-equation residual `‖Hv − Ev‖ / max(1, ‖H‖)`.
    pub fn residual(&self, h: &Operator) -> f64 {
        let scale = h.max_abs().max(1.0);
        (0..self.dim())
            .map(|k| {
                let col = self.eigenvectors.column(k);
                let r = h.matrix() * col - col * C64::new(self.eigenvalues[k], 0.0);
                r.norm() / scale
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{random_hermitian, Operator};
    use super::*;
    use crate::Error;

    #[test]
    fn two_level_and_sorting() {
        let s = spectral(&Operator::diag(&[0.0, 1.0])).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 1.0]);

        let s = spectral(&Operator::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 2.0, 3.0]);
        // |1⟩ carries energy 1, so it is the first column.
        assert!((s.eigenvectors()[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((s.eigenvectors()[(0, 2)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction() {
        for seed in 0..25 {
            let h = random_hermitian(4, seed);
            let s = spectral(&h).unwrap();
            assert!(s.reconstruct().max_abs_diff(&h) < 1e-10);
            assert!(s.orthonormality_deviation() < 1e-12);
            assert!(s.residual(&h) < 1e-10);
            assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(spectral(&a), Err(Error::NotHermitian { .. })));
    }
}

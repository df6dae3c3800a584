use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{OperatorJson, VALIDITY_TOL};
use crate::{Error, Result, C64};

/// Density matrix: Hermitian, unit trace, positive semi-definite (all to
/// [`VALIDITY_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    m: DMatrix<C64>,
}

impl DensityState {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tol(m, VALIDITY_TOL)
    }

    pub fn with_tol(m: DMatrix<C64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let s = Self { m };
        s.validate(tol)?;
        Ok(s)
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    /// `|ψ⟩⟨ψ|` for a normalised ket.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > VALIDITY_TOL {
            return Err(Error::InvalidState(format!("ket norm² = {norm}, expected 1")));
        }
        let n = ket.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| ket[i] * ket[j].conj()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = C64::new(p, 0.0);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                let d = (self.m[(i, j)] - self.m[(j, i)].conj()).norm();
                if d > tol {
                    return Err(Error::InvalidState(format!(
                        "not Hermitian: deviation {d:e} at ({i}, {j})"
                    )));
                }
            }
        }
        let tr: C64 = (0..n).map(|i| self.m[(i, i)]).sum();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidState(format!("trace = {tr}, expected 1")));
        }
        let min_ev = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min_ev < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:e}")));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DensityState) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson::from_matrix(&self.m)
    }

    pub fn from_json(j: &OperatorJson) -> Result<Self> {
        Self::new(j.to_matrix()?)
    }
}

impl Serialize for DensityState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = OperatorJson::deserialize(d)?;
        DensityState::from_json(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_states() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(0.5, 0.0); 4]);
        assert!(DensityState::new(m * C64::new(2.0, 0.0)).is_err()); // trace 2
        assert!(DensityState::diagonal(&[1.5, -0.5]).is_err()); // negative
        let mut m = DMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityState::new(m).is_err()); // not Hermitian
        assert!(DensityState::pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let rho = super::super::random_state(3, 4);
        let text = serde_json::to_string(&rho).unwrap();
        assert!(text.contains("\"dim\":3"));
        let back: DensityState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rho);
    }
}

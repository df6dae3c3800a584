//! Seeded generators for property tests and random process sweeps.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DensityState, Operator};
use crate::C64;

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Random mixed state `GG†/Tr(GG†)` from a complex Gaussian `G`
/// (normalised Gaussian purification; Hilbert–Schmidt measure).
pub fn random_state(dim: usize, seed: u64) -> DensityState {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(dim, dim, &mut rng);
    let m = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    let m = m * C64::new(1.0 / tr, 0.0);
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    DensityState::from_matrix_unchecked(m)
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub fn random_unitary(dim: usize, seed: u64) -> Operator {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(dim, dim, &mut rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Operator::from_matrix(q).expect("square")
}

/// Random Hermitian operator `(G + G†)/2` (GUE-like).
pub fn random_hermitian(dim: usize, seed: u64) -> Operator {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(dim, dim, &mut rng);
    Operator::from_matrix((&g + g.adjoint()) * C64::new(0.5, 0.0)).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::VALIDITY_TOL;

    #[test]
    fn dim_one_is_trivial() {
        let r = random_state(1, 3);
        assert_eq!(r.matrix()[(0, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(random_state(3, 11), random_state(3, 11));
        assert_eq!(random_unitary(3, 11), random_unitary(3, 11));
        assert_ne!(random_state(3, 11), random_state(3, 12));
    }

    #[test]
    fn invariant_sweep() {
        for seed in 0..1000 {
            random_state(2, seed).validate(VALIDITY_TOL).unwrap();
        }
        for dim in 1..=8 {
            for seed in 0..20 {
                assert!(random_unitary(dim, seed).is_unitary(VALIDITY_TOL));
                assert!(random_hermitian(dim, seed).is_hermitian(0.0));
            }
        }
    }
}

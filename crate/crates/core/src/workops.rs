//! Work operators and two-point-measurement (TPM) statistics for a process
//! `(H, U, H′)`: initial Hamiltonian, unitary evolution, final Hamiltonian.
//!
//! Sign convention: work is final energy minus initial energy.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::qcore::{self, spectral, DensityState, Operator, OperatorJson, Spectrum, VALIDITY_TOL};
use crate::stats::CompensatedSum;
use crate::{Error, Result, C64};

/// Relative work-value grouping tolerance; multiplied by the largest
/// absolute energy of both spectra.
/// Grouped probabilities at or below this are dropped from the support.
pub const ZERO_PROB_TOL: f64 = 1e-14;

pub const WORK_GROUPING_REL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    h_initial: Operator,
    unitary: Operator,
    h_final: Operator,
}

impl ProcessSpec {
    pub fn new(h_initial: Operator, unitary: Operator, h_final: Operator) -> Result<Self> {
        qcore::check_dims(h_initial.dim(), unitary.dim())?;
        qcore::check_dims(h_initial.dim(), h_final.dim())?;
        h_initial.ensure_hermitian(VALIDITY_TOL)?;
        h_final.ensure_hermitian(VALIDITY_TOL)?;
        unitary.ensure_unitary(VALIDITY_TOL)?;
        Ok(Self {
            h_initial,
            unitary,
            h_final,
        })
    }

    /// The two-level no-go example: `H = ε|1⟩⟨1|`, `H′ = ε′|1⟩⟨1|`,
    /// `U = |0⟩⟨+| + |1⟩⟨−|`.
    pub fn two_level_counterexample(eps: f64, eps_prime: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Rows of U: ⟨0|U = ⟨+|, ⟨1|U = ⟨−|.
        let u = Operator::from_real_rows(&[&[s, s], &[s, -s]]).expect("2x2");
        Self::new(Operator::diag(&[0.0, eps]), u, Operator::diag(&[0.0, eps_prime]))
            .expect("valid by construction")
    }

    /// Random Hermitian pair and Haar unitary, deterministic per seed.
    ///
    /// Both Hamiltonians are scaled to unit spectral norm, so inverse
    /// temperatures are measured against the spectral width whatever the
    /// dimension.
    pub fn random(dim: usize, seed: u64) -> Self {
        let base = seed.wrapping_mul(3);
        let unit = |h: Operator| {
            let norm = qcore::spectral(&h)
                .expect("Hermitian by construction")
                .eigenvalues()
                .iter()
                .fold(0.0f64, |m, e| m.max(e.abs()));
            if norm > 0.0 {
                h.scale(1.0 / norm)
            } else {
                h
            }
        };
        Self::new(
            unit(qcore::random_hermitian(dim, base)),
            qcore::random_unitary(dim, base + 1),
            unit(qcore::random_hermitian(dim, base + 2)),
        )
        .expect("valid by construction")
    }

    pub fn dim(&self) -> usize {
        self.h_initial.dim()
    }

    pub fn h_initial(&self) -> &Operator {
        &self.h_initial
    }

    pub fn unitary(&self) -> &Operator {
        &self.unitary
    }

    pub fn h_final(&self) -> &Operator {
        &self.h_final
    }
}

/// Energies of both projective measurements and the transition
/// probabilities `p[i][f] = |⟨f|U|i⟩|²`.
#[derive(Debug, Clone)]
pub struct Transitions {
    pub initial: Spectrum,
    pub final_: Spectrum,
    pub probs: DMatrix<f64>,
}

impl Transitions {
    pub fn of(p: &ProcessSpec) -> Result<Self> {
        let initial = spectral(&p.h_initial)?;
        let final_ = spectral(&p.h_final)?;
        let amp = final_.eigenvectors().adjoint() * p.unitary.matrix() * initial.eigenvectors();
        let n = p.dim();
        // amp[(f, i)] = ⟨f|U|i⟩
        let probs = DMatrix::from_fn(n, n, |i, f| amp[(f, i)].norm_sqr());
        Ok(Self {
            initial,
            final_,
            probs,
        })
    }

    /// `W^{if} = E_f − E_i`.
    pub fn work(&self, i: usize, f: usize) -> f64 {
        self.final_.eigenvalues()[f] - self.initial.eigenvalues()[i]
    }

    fn grouping_tolerance(&self) -> f64 {
        let max_e = self
            .initial
            .eigenvalues()
            .iter()
            .chain(self.final_.eigenvalues())
            .fold(0.0f64, |m, e| m.max(e.abs()));
        WORK_GROUPING_REL * max_e.max(f64::MIN_POSITIVE)
    }
}

/// `U†H′U − H`.
pub fn unitary_work_operator(p: &ProcessSpec) -> Operator {
    let u = p.unitary.matrix();
    let heis = u.adjoint() * p.h_final.matrix() * u;
    Operator::from_matrix(heis - p.h_initial.matrix())
        .expect("square")
        .hermitian_part()
}

/// `Σ_{i,f} W^{if} p_{i,f} |i⟩⟨i|`, diagonal in the eigenbasis of `H`.
pub fn tpm_work_operator(p: &ProcessSpec) -> Result<Operator> {
    let t = Transitions::of(p)?;
    let n = p.dim();
    let v = t.initial.eigenvectors();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        let w_i: f64 = (0..n)
            .map(|f| t.work(i, f) * t.probs[(i, f)])
            .collect::<CompensatedSum>()
            .value();
        let col = v.column(i);
        m += (col * col.adjoint()) * C64::new(w_i, 0.0);
    }
    Ok(Operator::from_matrix(m)?.hermitian_part())
}

/// Discrete work distribution: strictly ascending values with their
/// probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl WorkDistribution {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.len() != probs.len() || values.is_empty() {
            return Err(Error::InvalidDistribution(format!(
                "{} values vs {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "values must be strictly ascending".into(),
            ));
        }
        if let Some(p) = probs.iter().find(|&&p| p < -1e-12) {
            return Err(Error::InvalidDistribution(format!("negative probability {p}")));
        }
        let total: f64 = probs.iter().copied().collect::<CompensatedSum>().value();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { values, probs })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `P(W)` for the grouped value closest to `w`, if within `tol`.
    pub fn prob_of(&self, w: f64, tol: f64) -> Option<f64> {
        self.values
            .iter()
            .position(|v| (v - w).abs() <= tol)
            .map(|k| self.probs[k])
    }

    /// `⟨e^{−βW}⟩`.
    pub fn exp_average(&self, beta: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(w, p)| p * (-beta * w).exp())
            .collect::<CompensatedSum>()
            .value()
    }

    /// CSV with header `value,prob`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "value,prob")?;
        for (v, p) in self.values.iter().zip(&self.probs) {
            writeln!(out, "{v:.16e},{p:.16e}")?;
        }
        Ok(())
    }
}

/// Two-point-measurement work statistics for initial state `rho`:
/// `P(W) = Σ_{E_f − E_i = W} ⟨i|ρ|i⟩ p_{i,f}`, with values closer than the
/// grouping tolerance merged.
pub fn tpm_distribution(p: &ProcessSpec, rho: &DensityState) -> Result<WorkDistribution> {
    qcore::check_dims(p.dim(), rho.dim())?;
    let t = Transitions::of(p)?;
    let pops = t.initial.populations(rho);
    let n = p.dim();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * n);
    for (i, &pop) in pops.iter().enumerate() {
        for f in 0..n {
            pairs.push((t.work(i, f), pop * t.probs[(i, f)]));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let tol = t.grouping_tolerance();
    let mut values: Vec<f64> = Vec::new();
    let mut sums: Vec<CompensatedSum> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (w, pr) in pairs {
        if values.is_empty() || w - last > tol {
            values.push(w);
            sums.push(CompensatedSum::new());
        }
        last = w;
        sums.last_mut().expect("non-empty").add(pr);
    }
    // Transitions the state never populates are not part of the support.
    let (values, probs): (Vec<f64>, Vec<f64>) = values
        .into_iter()
        .zip(sums.iter().map(CompensatedSum::value))
        .filter(|&(_, p)| p > ZERO_PROB_TOL)
        .unzip();
    WorkDistribution::new(values, probs)
}

/// `Σ W P(W)`.
pub fn expected_work(dist: &WorkDistribution) -> f64 {
    dist.values
        .iter()
        .zip(&dist.probs)
        .map(|(w, p)| w * p)
        .collect::<CompensatedSum>()
        .value()
}

/// Both work operators of the two-level example and their difference.
#[derive(Debug, Clone, Serialize)]
pub struct NgtReport {
    pub eps: f64,
    pub eps_prime: f64,
    pub w_unitary: OperatorJson,
    pub w_tpm: OperatorJson,
    pub difference: OperatorJson,
    /// Largest off-diagonal magnitude of `W_unitary − W_TPM`.
    pub offdiag_norm: f64,
    /// `|ε′|/2`.
    pub expected_offdiag: f64,
    /// Largest difference between the diagonals of the two operators.
    pub diagonal_gap: f64,
    /// True when the two operators coincide entrywise (the `ε′ = 0` case).
    pub operators_identical: bool,
}

pub fn ngt_counterexample(eps: f64, eps_prime: f64) -> NgtReport {
    let p = ProcessSpec::two_level_counterexample(eps, eps_prime);
    let wu = unitary_work_operator(&p);
    let wt = tpm_work_operator(&p).expect("diagonal Hamiltonians");
    let diff = wu.sub(&wt).expect("same dim");
    let dm = diff.matrix();
    let diagonal_gap = dm[(0, 0)].norm().max(dm[(1, 1)].norm());
    let scale = eps.abs().max(eps_prime.abs()).max(1.0);
    NgtReport {
        eps,
        eps_prime,
        w_unitary: wu.to_json(),
        w_tpm: wt.to_json(),
        difference: diff.to_json(),
        offdiag_norm: diff.max_offdiag_abs(),
        expected_offdiag: 0.5 * eps_prime.abs(),
        diagonal_gap,
        operators_identical: diff.max_abs() <= 1e-12 * scale,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TpmJarzynski {
    /// `Σ_{i,f} (e^{−βEᵢ}/Z) p_{i,f} e^{−βW^{if}}`.
    pub estimate: f64,
    /// `Z′/Z`.
    pub exact: f64,
}

/// TPM exponential work average from a Gibbs initial state of `H`, against
/// the partition-function ratio.
pub fn tpm_jarzynski(p: &ProcessSpec, beta: f64) -> Result<TpmJarzynski> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("must be positive and finite, got {beta}"),
        });
    }
    let t = Transitions::of(p)?;
    let e_i = t.initial.eigenvalues();
    let e_f = t.final_.eigenvalues();
    // Common energy shift keeps the exponentials in range; it cancels in
    // both the estimate and Z′/Z.
    let shift = e_i.iter().chain(e_f).copied().fold(f64::INFINITY, f64::min);
    let boltz = |e: f64| (-beta * (e - shift)).exp();
    let z: f64 = e_i.iter().map(|&e| boltz(e)).collect::<CompensatedSum>().value();
    let z_final: f64 = e_f.iter().map(|&e| boltz(e)).collect::<CompensatedSum>().value();
    let n = p.dim();
    let mut acc = CompensatedSum::new();
    for (i, &e) in e_i.iter().enumerate() {
        let gibbs = boltz(e) / z;
        for f in 0..n {
            acc.add(gibbs * t.probs[(i, f)] * (-beta * t.work(i, f)).exp());
        }
    }
    Ok(TpmJarzynski {
        estimate: acc.value(),
        exact: z_final / z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{dephase, expectation, random_state};
    use approx::assert_abs_diff_eq;

    fn ket(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    fn trivial(dim: usize) -> ProcessSpec {
        let h = qcore::random_hermitian(dim, 1);
        ProcessSpec::new(h.clone(), Operator::identity(dim), h).unwrap()
    }

    #[test]
    fn unitary_operator_examples() {
        assert!(unitary_work_operator(&trivial(3)).max_abs() < 1e-14);

        let p = ProcessSpec::two_level_counterexample(1.0, 2.0);
        let expected = Operator::from_real_rows(&[&[1.0, -1.0], &[-1.0, 0.0]]).unwrap();
        assert!(unitary_work_operator(&p).max_abs_diff(&expected) < 1e-14);

        for eps in [0.3, 1.0, -2.5] {
            let p = ProcessSpec::two_level_counterexample(eps, 0.0);
            let expected = Operator::diag(&[0.0, -eps]);
            assert!(unitary_work_operator(&p).max_abs_diff(&expected) < 1e-14);
        }
    }

    #[test]
    fn tpm_operator_examples() {
        let p = ProcessSpec::two_level_counterexample(1.0, 2.0);
        let w = tpm_work_operator(&p).unwrap();
        assert!(w.max_abs_diff(&Operator::diag(&[1.0, 0.0])) < 1e-14);

        assert!(tpm_work_operator(&trivial(4)).unwrap().max_abs() < 1e-12);

        let p = ProcessSpec::two_level_counterexample(0.7, 0.0);
        let w = tpm_work_operator(&p).unwrap();
        assert!(w.max_abs_diff(&Operator::diag(&[0.0, -0.7])) < 1e-14);
        assert!(w.max_abs_diff(&unitary_work_operator(&p)) < 1e-14);
    }

    #[test]
    fn tpm_distribution_examples() {
        let p = ProcessSpec::two_level_counterexample(1.0, 2.0);
        let zero = DensityState::pure(&ket(&[1.0, 0.0])).unwrap();
        let d = tpm_distribution(&p, &zero).unwrap();
        assert_eq!(d.len(), 2);
        assert_abs_diff_eq!(d.prob_of(0.0, 1e-12).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d.prob_of(2.0, 1e-12).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(expected_work(&d), 1.0, epsilon = 1e-14);

        let one = DensityState::pure(&ket(&[0.0, 1.0])).unwrap();
        let d = tpm_distribution(&p, &one).unwrap();
        assert_eq!(d.values().len(), 2);
        assert_abs_diff_eq!(d.values()[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.values()[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.probs()[0], 0.5, epsilon = 1e-14);

        let d = tpm_distribution(&p, &DensityState::maximally_mixed(2)).unwrap();
        assert_abs_diff_eq!(expected_work(&d), 0.5, epsilon = 1e-14);

        let d = tpm_distribution(&trivial(3), &random_state(3, 8)).unwrap();
        assert_eq!(d.len(), 1);
        assert_abs_diff_eq!(d.values()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probs()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn expected_work_of_point_mass() {
        let d = WorkDistribution::new(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(expected_work(&d), 0.0);
        assert!(WorkDistribution::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(WorkDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn ngt_report_examples() {
        let r = ngt_counterexample(1.0, 2.0);
        assert_abs_diff_eq!(r.offdiag_norm, 1.0, epsilon = 1e-14);
        assert!(r.diagonal_gap < 1e-14);
        assert!(!r.operators_identical);

        let r = ngt_counterexample(1.3, 0.0);
        assert!(r.operators_identical);
        assert!(r.offdiag_norm < 1e-14);

        for (e, ep) in [(0.2, -3.0), (5.0, 0.1), (-1.0, 7.5)] {
            let r = ngt_counterexample(e, ep);
            assert!(r.diagonal_gap < 1e-13);
            assert_abs_diff_eq!(r.offdiag_norm, 0.5 * ep.abs(), epsilon = 1e-13);
        }
    }

    #[test]
    fn tpm_jarzynski_examples() {
        let p = ProcessSpec::two_level_counterexample(1.0, 2.0);
        let j = tpm_jarzynski(&p, 1.0).unwrap();
        let want = (1.0 + (-2.0f64).exp()) / (1.0 + (-1.0f64).exp());
        assert_abs_diff_eq!(j.estimate, want, epsilon = 1e-14);
        assert_abs_diff_eq!(j.exact, want, epsilon = 1e-14);

        let j = tpm_jarzynski(&trivial(3), 2.0).unwrap();
        assert_abs_diff_eq!(j.estimate, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(j.exact, 1.0, epsilon = 1e-14);

        assert!(tpm_jarzynski(&p, 0.0).is_err());
        assert!(tpm_jarzynski(&p, -1.0).is_err());
    }

    #[test]
    fn tpm_jarzynski_brute_force_four_level() {
        // Independent route: Gibbs populations and transition probabilities
        // from explicit eigenvectors, summed over all 16 (i, f) pairs.
        let p = ProcessSpec::random(4, 21);
        let beta = 0.7;
        let hi = spectral(p.h_initial()).unwrap();
        let hf = spectral(p.h_final()).unwrap();
        let z: f64 = hi.eigenvalues().iter().map(|e| (-beta * e).exp()).sum();
        let zf: f64 = hf.eigenvalues().iter().map(|e| (-beta * e).exp()).sum();
        let mut brute = 0.0;
        for i in 0..4 {
            let vi = hi.eigenvector(i);
            let u_vi: Vec<C64> = (0..4)
                .map(|r| (0..4).map(|c| p.unitary().matrix()[(r, c)] * vi[c]).sum())
                .collect();
            for f in 0..4 {
                let vf = hf.eigenvector(f);
                let amp: C64 = (0..4).map(|r| vf[r].conj() * u_vi[r]).sum();
                let w = hf.eigenvalues()[f] - hi.eigenvalues()[i];
                brute += (-beta * hi.eigenvalues()[i]).exp() / z * amp.norm_sqr() * (-beta * w).exp();
            }
        }
        let j = tpm_jarzynski(&p, beta).unwrap();
        assert!((j.estimate - brute).abs() < 1e-12);
        assert!((j.exact - zf / z).abs() < 1e-12);
        assert!((j.estimate - j.exact).abs() < 1e-12);
    }

    #[test]
    fn dephasing_reconciliation_two_level() {
        let p = ProcessSpec::two_level_counterexample(1.0, 2.0);
        let rho = DensityState::pure(&ket(&[
            std::f64::consts::FRAC_1_SQRT_2,
            std::f64::consts::FRAC_1_SQRT_2,
        ]))
        .unwrap();
        let wu = unitary_work_operator(&p);
        let wt = tpm_work_operator(&p).unwrap();
        // Coherent |+⟩: the two operators disagree...
        let coherent = expectation(&rho, &wu).unwrap();
        let tpm = expectation(&rho, &wt).unwrap();
        assert_abs_diff_eq!(coherent, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(tpm, 0.5, epsilon = 1e-14);
        // ...until the state is dephased in the energy basis.
        let basis = spectral(p.h_initial()).unwrap();
        let deph = dephase(&rho, &basis).unwrap();
        assert_abs_diff_eq!(expectation(&deph, &wu).unwrap(), tpm, epsilon = 1e-14);
    }

    #[test]
    fn csv_header() {
        let d = WorkDistribution::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("value,prob\n-1.0000000000000000e0,5.0000000000000000e-1\n"));
    }
}

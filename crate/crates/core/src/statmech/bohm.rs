use serde::Serialize;

use super::{
    free_energy_diff, gibbs_n_max, positive, quantum_gibbs_mixture, FreeEnergyKind, JarzynskiReport,
    ProtocolSpec, WorkSample,
};
use crate::bohmdyn::{integrate_ensemble, sample_quantum_equilibrium, BohmFields, TrajectoryOptions};
use crate::field1d::{hamiltonian_expectation, ho_eigenstates, Grid1D, Hamiltonian1D, Units};
use crate::stats::{sum, CompensatedSum};
use crate::workfun::{work_decomposition, WorkKind, WorkRecord};
use crate::{Error, Exec, Result};

/// Bohmian thermal run: a Gibbs mixture of oscillator eigenstates, each
/// carried by its own quantum-equilibrium trajectory ensemble.
#[derive(Debug, Clone)]
pub struct BohmJarzynskiSpec {
    pub beta: f64,
    pub units: Units,
    pub protocol: ProtocolSpec,
    pub grid: Grid1D,
    /// Trajectories per eigenstate.
    pub n_traj: usize,
    /// Highest eigenstate; `None` picks the smallest one meeting the tail
    /// tolerance.
    pub n_max: Option<usize>,
    pub dt: f64,
    pub psi_substeps: usize,
    pub record_stride: usize,
    pub seed: u64,
    pub exec: Exec,
}

/// Per-eigenstate diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateSummary {
    pub n: usize,
    pub weight: f64,
    pub n_traj: usize,
    /// Samples redrawn because they started inside the node guard.
    pub redrawn: usize,
    pub mean_w_e: f64,
    pub stderr_w_e: f64,
    pub mean_w_m: f64,
    pub stderr_w_m: f64,
    /// `⟨Ĥ(T)⟩_{ψ_n(T)} − E_n`.
    pub delta_energy: f64,
    pub boltzmann_w_e: f64,
    pub boltzmann_w_m: f64,
}

#[derive(Debug, Clone)]
pub struct BohmJarzynski {
    pub w_e: JarzynskiReport,
    pub w_m: JarzynskiReport,
    pub weights: Vec<f64>,
    pub states: Vec<StateSummary>,
    pub records: Vec<(usize, WorkRecord)>,
    /// Mixture-weighted `⟨W^E⟩` and `Σ p_n ΔE_n` with the error of the former.
    pub mean_w_e: f64,
    pub stderr_mean_w_e: f64,
    pub delta_energy: f64,
}

impl BohmJarzynski {
    pub fn report(&self, kind: WorkKind) -> &JarzynskiReport {
        match kind {
            WorkKind::Energetic => &self.w_e,
            WorkKind::Mechanical => &self.w_m,
        }
    }

    pub fn samples(&self, kind: WorkKind) -> Vec<WorkSample> {
        self.records
            .iter()
            .map(|&(n, r)| WorkSample {
                n,
                traj_id: r.traj_id,
                w: r.work(kind),
            })
            .collect()
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    (crate::stats::mean(xs), crate::stats::std_error(xs))
}

/// `Σ_n p_n ⟨e^{−βW}⟩_n` against `e^{−βΔF}` with the quantum oscillator
/// free-energy difference.
pub fn bohmian_jarzynski(spec: &BohmJarzynskiSpec) -> Result<BohmJarzynski> {
    positive("beta", spec.beta)?;
    if spec.n_traj < 2 {
        return Err(Error::InvalidParameter {
            name: "n_traj",
            reason: format!("need at least 2 trajectories per state, got {}", spec.n_traj),
        });
    }
    let hbar = spec.units.hbar;
    let proto = &spec.protocol;
    let omega1 = proto.omega_at(0.0);
    let omega2 = proto.omega_at(proto.duration);
    let n_max = spec.n_max.unwrap_or_else(|| gibbs_n_max(spec.beta, omega1, hbar));
    let weights = quantum_gibbs_mixture(spec.beta, omega1, hbar, n_max)?;
    let eig = ho_eigenstates(&spec.grid, spec.units, omega1, proto.center_at(0.0), n_max)?;
    let ham = Hamiltonian1D::new(spec.units, proto.potential);
    let opts = TrajectoryOptions {
        dt: spec.dt,
        t_final: proto.duration,
        record_stride: spec.record_stride,
        psi_substeps: spec.psi_substeps,
        snapshot_stride: None,
        exec: spec.exec,
    };
    let beta = spec.beta;

    let mut states = Vec::with_capacity(n_max + 1);
    let mut records = Vec::new();
    for (n, psi0) in eig.states.iter().enumerate() {
        let fields = BohmFields::compute(psi0, &ham)?;
        let g = *psi0.grid();
        let guarded = |x: f64| {
            let j = ((x - g.x_min()) / g.dx()).floor() as isize;
            (j - 1..=j + 2).any(|i| i < 0 || i as usize >= g.n_points() || !fields.mask[i as usize])
        };
        // Start points inside the node guard (measure ≲ 1e-4 per node) are
        // redrawn from a continuation of the same stream.
        let seed = spec.seed.wrapping_mul(1_000_003).wrapping_add(n as u64);
        let mut x0s: Vec<f64> = Vec::with_capacity(spec.n_traj);
        let mut redrawn = 0;
        let mut round = 0u64;
        while x0s.len() < spec.n_traj {
            let need = spec.n_traj - x0s.len();
            for x in sample_quantum_equilibrium(psi0, need, seed ^ (round << 48))? {
                if guarded(x) {
                    redrawn += 1;
                } else {
                    x0s.push(x);
                }
            }
            round += 1;
        }
        let run = integrate_ensemble(psi0, &ham, &x0s, &opts)?;
        let recs: Vec<WorkRecord> = run
            .trajectories
            .iter()
            .map(work_decomposition)
            .collect::<Result<_>>()?;
        let w_e: Vec<f64> = recs.iter().map(|r| r.w_e).collect();
        let w_m: Vec<f64> = recs.iter().map(|r| r.w_m).collect();
        let b_e: Vec<f64> = w_e.iter().map(|w| (-beta * w).exp()).collect();
        let b_m: Vec<f64> = w_m.iter().map(|w| (-beta * w).exp()).collect();
        let (mean_w_e, stderr_w_e) = mean_se(&w_e);
        let (mean_w_m, stderr_w_m) = mean_se(&w_m);
        let delta_energy = hamiltonian_expectation(&run.psi_final, &ham) - eig.energies[n];
        states.push((
            StateSummary {
                n,
                weight: weights[n],
                n_traj: spec.n_traj,
                redrawn,
                mean_w_e,
                stderr_w_e,
                mean_w_m,
                stderr_w_m,
                delta_energy,
                boltzmann_w_e: crate::stats::mean(&b_e),
                boltzmann_w_m: crate::stats::mean(&b_m),
            },
            crate::stats::std_error(&b_e),
            crate::stats::std_error(&b_m),
        ));
        records.extend(recs.into_iter().map(|r| (n, r)));
    }

    // Per-state summary with the standard errors of its two Boltzmann means.
    type Term = (StateSummary, f64, f64);
    let combine = |f: &dyn Fn(&Term) -> (f64, f64)| -> (f64, f64) {
        let est: CompensatedSum = states.iter().map(|s| s.0.weight * f(s).0).collect();
        let var = sum(states.iter().map(|s| (s.0.weight * f(s).1).powi(2)));
        (est.value(), var.sqrt())
    };
    let (est_e, se_e) = combine(&|s| (s.0.boltzmann_w_e, s.1));
    let (est_m, se_m) = combine(&|s| (s.0.boltzmann_w_m, s.2));
    let (mean_w_e, stderr_mean_w_e) = combine(&|s| (s.0.mean_w_e, s.0.stderr_w_e));
    let (mean_w_m, stderr_mean_w_m) = combine(&|s| (s.0.mean_w_m, s.0.stderr_w_m));
    let delta_energy = sum(states.iter().map(|s| s.0.weight * s.0.delta_energy));
    let delta_f = free_energy_diff(FreeEnergyKind::QuantumHo, beta, omega1, omega2, hbar);
    let exact = (-beta * delta_f).exp();
    let n_total = records.len();
    let report = |kind: WorkKind, estimate, stderr, mean_work, stderr_work| JarzynskiReport {
        estimate,
        exact,
        stderr,
        n: n_total,
        protocol: proto.label(),
        work_kind: kind.label().into(),
        beta,
        delta_f,
        mean_work,
        stderr_work,
    };
    Ok(BohmJarzynski {
        w_e: report(WorkKind::Energetic, est_e, se_e, mean_w_e, stderr_mean_w_e),
        w_m: report(WorkKind::Mechanical, est_m, se_m, mean_w_m, stderr_mean_w_m),
        weights,
        states: states.into_iter().map(|s| s.0).collect(),
        records,
        mean_w_e,
        stderr_mean_w_e,
        delta_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(protocol: ProtocolSpec, n_traj: usize) -> BohmJarzynskiSpec {
        BohmJarzynskiSpec {
            beta: 2.0,
            units: Units::default(),
            protocol,
            grid: Grid1D::centered(512, 0.0, 10.0).unwrap(),
            n_traj,
            n_max: Some(4),
            dt: 0.01,
            psi_substeps: 4,
            record_stride: 10,
            seed: 1,
            exec: Exec::Parallel,
        }
    }

    #[test]
    fn static_protocol_gives_unit_estimate() {
        let mut s = spec(ProtocolSpec::static_trap(1.0, 1.0).unwrap(), 200);
        s.n_max = None;
        s.beta = 5.0;
        let r = bohmian_jarzynski(&s).unwrap();
        assert!((r.w_e.estimate - 1.0).abs() < 1e-6, "{:?}", r.w_e);
        assert!((r.w_e.exact - 1.0).abs() < 1e-15);
        assert!((r.w_m.estimate - 1.0).abs() < 1e-6);
    }

    #[test]
    fn truncation_is_checked() {
        let s = spec(ProtocolSpec::static_trap(1.0, 1.0).unwrap(), 10);
        assert!(matches!(bohmian_jarzynski(&s), Err(Error::Truncation { .. })));
    }

    #[test]
    fn fast_ramp_energy_bookkeeping() {
        let mut s = spec(ProtocolSpec::stiffness_ramp(1.0, 2.0, 0.1, false).unwrap(), 400);
        s.n_max = None;
        s.beta = 4.0;
        let r = bohmian_jarzynski(&s).unwrap();
        assert!(
            (r.mean_w_e - r.delta_energy).abs() < 4.0 * r.stderr_mean_w_e,
            "{} vs {} ± {}",
            r.mean_w_e,
            r.delta_energy,
            r.stderr_mean_w_e
        );
        assert_eq!(r.samples(WorkKind::Energetic).len(), r.records.len());
    }
}

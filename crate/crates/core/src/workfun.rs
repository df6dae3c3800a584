//! Work functionals along Bohmian trajectories.
//!
//! * mechanical work `W^M = ∫ F·v dt` with `F = −∂ₓ(V + Q)`,
//! * energetic work `W^E = E_local(x(t₂), t₂) − E_local(x(t₁), t₁)`,
//!
//! together with their decomposition `W^E = W^M + ΔV + ΔQ`, the ensemble
//! power density and the split of ensemble power into classical and quantum
//! parts.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bohmdyn::{BohmFields, Trajectory};
use crate::field1d::{Hamiltonian1D, SpectralOps, Wavefunction};
use crate::stats::{simpson, CompensatedSum};
use crate::{Error, Result};

/// Largest tolerated fraction of node-guarded samples in a work integral.
pub const MAX_MASKED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WorkKind {
    #[serde(rename = "W_M")]
    Mechanical,
    #[serde(rename = "W_E")]
    Energetic,
}

impl WorkKind {
    pub fn label(self) -> &'static str {
        match self {
            WorkKind::Mechanical => "W_M",
            WorkKind::Energetic => "W_E",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkRecord {
    pub traj_id: usize,
    pub w_m: f64,
    /// Endpoint form.
    pub w_e: f64,
    /// `∫ dE_local/dt dt` along the path.
    pub w_e_integral: f64,
    pub delta_k: f64,
    pub delta_v: f64,
    pub delta_q: f64,
}

impl WorkRecord {
    /// `W^M − ΔK`.
    pub fn energy_theorem_residual(&self) -> f64 {
        self.w_m - self.delta_k
    }

    /// `W^E − (W^M + ΔV + ΔQ)`.
    pub fn decomposition_residual(&self) -> f64 {
        self.w_e - (self.w_m + self.delta_v + self.delta_q)
    }

    /// Endpoint form minus integral form of `W^E`.
    pub fn energetic_form_residual(&self) -> f64 {
        self.w_e - self.w_e_integral
    }

    pub fn work(&self, kind: WorkKind) -> f64 {
        match kind {
            WorkKind::Mechanical => self.w_m,
            WorkKind::Energetic => self.w_e,
        }
    }
}

fn check_samples(traj: &Trajectory) -> Result<()> {
    if traj.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "trajectory",
            reason: format!("needs at least two samples, has {}", traj.len()),
        });
    }
    Ok(())
}

/// `W^M = ∫ F·v dt` by Simpson's rule over the recorded samples.
pub fn mechanical_work(traj: &Trajectory) -> Result<f64> {
    check_samples(traj)?;
    let masked = traj.masked_count();
    if masked as f64 > MAX_MASKED_FRACTION * traj.len() as f64 {
        return Err(Error::UnreliableIntegral {
            traj_id: traj.traj_id,
            masked,
            total: traj.len(),
        });
    }
    let power: Vec<f64> = traj
        .force
        .iter()
        .zip(&traj.velocities)
        .map(|(f, v)| f * v)
        .collect();
    Ok(simpson(&power, traj.sample_dt()))
}

/// Endpoint form of `W^E`.
pub fn energetic_work(traj: &Trajectory) -> Result<f64> {
    check_samples(traj)?;
    let last = traj.len() - 1;
    if traj.masked[0] || traj.masked[last] {
        return Err(Error::MaskedEndpoint {
            traj_id: traj.traj_id,
        });
    }
    Ok(traj.e_local[last] - traj.e_local[0])
}

/// Integral form of `W^E`: Simpson over `∂ₜE_local + v ∂ₓE_local`.
pub fn energetic_work_integral(traj: &Trajectory) -> Result<f64> {
    check_samples(traj)?;
    Ok(simpson(&traj.de_dt, traj.sample_dt()))
}

pub fn work_decomposition(traj: &Trajectory) -> Result<WorkRecord> {
    let last = traj.len().saturating_sub(1);
    Ok(WorkRecord {
        traj_id: traj.traj_id,
        w_m: mechanical_work(traj)?,
        w_e: energetic_work(traj)?,
        w_e_integral: energetic_work_integral(traj)?,
        delta_k: traj.kinetic(last) - traj.kinetic(0),
        delta_v: traj.v[last] - traj.v[0],
        delta_q: traj.q[last] - traj.q[0],
    })
}

/// Ensemble power `∫ |ψ|² F v dx` over valid points.
pub fn expected_power(psi: &Wavefunction, ham: &Hamiltonian1D) -> Result<f64> {
    let f = BohmFields::compute(psi, ham)?;
    Ok(f.density_integral(|j| f.force[j] * f.velocity[j]))
}

/// Trajectory-ensemble kinetic energy `∫ |ψ|² ½ m v² dx`. Its time derivative
/// equals [`expected_power`].
pub fn bohmian_kinetic_expectation(psi: &Wavefunction, ham: &Hamiltonian1D) -> Result<f64> {
    let f = BohmFields::compute(psi, ham)?;
    let m = ham.units.mass;
    Ok(f.density_integral(|j| 0.5 * m * f.velocity[j] * f.velocity[j]))
}

/// Weighted ensemble of work records.
#[derive(Debug, Clone)]
pub struct EnsembleWork {
    pub mean_w_m: f64,
    pub mean_w_e: f64,
    pub stderr_w_m: f64,
    pub stderr_w_e: f64,
    pub mean_delta_k: f64,
    pub mean_delta_v: f64,
    pub mean_delta_q: f64,
    pub weights: Vec<f64>,
    pub per_traj: Vec<WorkRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub mean_w_m: f64,
    pub stderr_w_m: f64,
    pub mean_w_e: f64,
    pub stderr_w_e: f64,
    pub mean_delta_k: f64,
    pub stderr_delta_k: f64,
    pub mean_delta_v: f64,
    pub stderr_delta_v: f64,
    pub mean_delta_q: f64,
    pub stderr_delta_q: f64,
    pub max_energy_theorem_residual: f64,
    pub max_decomposition_residual: f64,
    pub max_energetic_form_residual: f64,
}

/// Weighted mean and its standard error. For uniform weights the error is
/// the usual `s/√n`.
fn weighted_mean_se(xs: &[f64], w: &[f64]) -> (f64, f64) {
    let mean = xs
        .iter()
        .zip(w)
        .map(|(x, w)| x * w)
        .collect::<CompensatedSum>()
        .value();
    let n = xs.len();
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs
        .iter()
        .zip(w)
        .map(|(x, w)| w * w * (x - mean) * (x - mean))
        .collect::<CompensatedSum>()
        .value();
    (mean, (var * n as f64 / (n - 1) as f64).sqrt())
}

/// Weighted ensemble means. `weights = None` means uniform weights.
pub fn ensemble_work(records: Vec<WorkRecord>, weights: Option<Vec<f64>>) -> Result<EnsembleWork> {
    let n = records.len();
    if n == 0 {
        return Err(Error::WeightMismatch("no records".into()));
    }
    let weights = match weights {
        None => vec![1.0 / n as f64; n],
        Some(w) => {
            if w.len() != n {
                return Err(Error::WeightMismatch(format!(
                    "{} weights for {n} records",
                    w.len()
                )));
            }
            let total: f64 = w.iter().copied().collect::<CompensatedSum>().value();
            if w.iter().any(|&x| !(x >= 0.0)) || (total - 1.0).abs() > 1e-10 {
                return Err(Error::WeightMismatch(format!(
                    "weights must be non-negative and sum to 1 (sum = {total})"
                )));
            }
            w
        }
    };
    let col = |f: fn(&WorkRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    let (mean_w_m, stderr_w_m) = weighted_mean_se(&col(|r| r.w_m), &weights);
    let (mean_w_e, stderr_w_e) = weighted_mean_se(&col(|r| r.w_e), &weights);
    Ok(EnsembleWork {
        mean_w_m,
        mean_w_e,
        stderr_w_m,
        stderr_w_e,
        mean_delta_k: weighted_mean_se(&col(|r| r.delta_k), &weights).0,
        mean_delta_v: weighted_mean_se(&col(|r| r.delta_v), &weights).0,
        mean_delta_q: weighted_mean_se(&col(|r| r.delta_q), &weights).0,
        weights,
        per_traj: records,
    })
}

impl EnsembleWork {
    /// Weighted `⟨e^{−βW}⟩` and its standard error.
    pub fn exp_average(&self, beta: f64, kind: WorkKind) -> (f64, f64) {
        let xs: Vec<f64> = self
            .per_traj
            .iter()
            .map(|r| (-beta * r.work(kind)).exp())
            .collect();
        weighted_mean_se(&xs, &self.weights)
    }

    pub fn summary(&self) -> EnsembleSummary {
        let col = |f: fn(&WorkRecord) -> f64| -> (f64, f64) {
            let xs: Vec<f64> = self.per_traj.iter().map(f).collect();
            weighted_mean_se(&xs, &self.weights)
        };
        let max_abs = |f: fn(&WorkRecord) -> f64| -> f64 {
            self.per_traj.iter().map(|r| f(r).abs()).fold(0.0, f64::max)
        };
        let (mean_delta_k, stderr_delta_k) = col(|r| r.delta_k);
        let (mean_delta_v, stderr_delta_v) = col(|r| r.delta_v);
        let (mean_delta_q, stderr_delta_q) = col(|r| r.delta_q);
        EnsembleSummary {
            n: self.per_traj.len(),
            mean_w_m: self.mean_w_m,
            stderr_w_m: self.stderr_w_m,
            mean_w_e: self.mean_w_e,
            stderr_w_e: self.stderr_w_e,
            mean_delta_k,
            stderr_delta_k,
            mean_delta_v,
            stderr_delta_v,
            mean_delta_q,
            stderr_delta_q,
            max_energy_theorem_residual: max_abs(WorkRecord::energy_theorem_residual),
            max_decomposition_residual: max_abs(WorkRecord::decomposition_residual),
            max_energetic_form_residual: max_abs(WorkRecord::energetic_form_residual),
        }
    }

    /// `traj_id,W_M,W_E,dK,dV,dQ`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "traj_id,W_M,W_E,dK,dV,dQ")?;
        for r in &self.per_traj {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.traj_id, r.w_m, r.w_e, r.delta_k, r.delta_v, r.delta_q
            )?;
        }
        Ok(())
    }
}

/// Time integrals of the ensemble power terms `⟨−∂ₓV·v⟩` and `⟨∂ₓQ·v⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerSplit {
    pub classical: f64,
    pub quantum: f64,
}

impl PowerSplit {
    /// `classical − quantum`, the field-side value of `⟨W^M⟩`.
    pub fn mechanical(&self) -> f64 {
        self.classical - self.quantum
    }
}

/// Power split over `ψ` snapshots spaced uniformly by `dt`.
pub fn power_split(snapshots: &[Wavefunction], ham: &Hamiltonian1D, dt: f64) -> Result<PowerSplit> {
    let Some(first) = snapshots.first() else {
        return Err(Error::InvalidParameter {
            name: "snapshots",
            reason: "empty series".into(),
        });
    };
    let ops = SpectralOps::new(first.grid());
    let mut classical = Vec::with_capacity(snapshots.len());
    let mut quantum = Vec::with_capacity(snapshots.len());
    for psi in snapshots {
        let f = BohmFields::compute_with(psi, ham, &ops)?;
        let g = *f.grid();
        let t = f.time;
        classical.push(f.density_integral(|j| -ham.dv_dx(g.x(j), t) * f.velocity[j]));
        quantum.push(f.density_integral(|j| f.dq_dx[j] * f.velocity[j]));
    }
    Ok(PowerSplit {
        classical: simpson(&classical, dt),
        quantum: simpson(&quantum, dt),
    })
}

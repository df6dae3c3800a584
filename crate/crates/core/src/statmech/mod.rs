//! Thermal ensembles and Jarzynski estimators: classical canonical sampling
//! with leapfrog work, quantum Gibbs mixtures of oscillator eigenstates,
//! free-energy references and the Bohmian estimator built on them.

mod bohm;
mod classical;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::field1d::PotentialSpec;
use crate::protocol::Schedule;
use crate::{Error, Result};

pub use bohm::{bohmian_jarzynski, BohmJarzynski, BohmJarzynskiSpec, StateSummary};
pub use classical::{
    classical_gibbs_sample, classical_jarzynski, classical_work, ClassicalJarzynski, ClassicalWork,
    PhasePoint,
};

/// Harmonic system `p²/2m + ½mω²(x − c)²` at inverse temperature `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSpec {
    pub beta: f64,
    pub mass: f64,
    pub omega: f64,
    pub center: f64,
}

impl CanonicalSpec {
    pub fn new(beta: f64, mass: f64, omega: f64, center: f64) -> Result<Self> {
        positive("beta", beta)?;
        positive("mass", mass)?;
        positive("omega", omega)?;
        if !center.is_finite() {
            return Err(Error::InvalidParameter {
                name: "center",
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            beta,
            mass,
            omega,
            center,
        })
    }

    /// Equilibrium of the protocol's initial Hamiltonian.
    pub fn for_protocol(beta: f64, mass: f64, protocol: &ProtocolSpec) -> Result<Self> {
        Self::new(beta, mass, protocol.omega_at(0.0), protocol.center_at(0.0))
    }
}

pub(crate) fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {x}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedClass {
    QuasiStatic,
    Moderate,
    Fast,
}

impl SpeedClass {
    /// Classifies a ramp of length `duration` against the oscillator period.
    pub fn classify(duration: f64, omega: f64) -> Self {
        let periods = duration * omega / (2.0 * std::f64::consts::PI);
        if periods >= 3.0 {
            SpeedClass::QuasiStatic
        } else if periods >= 0.2 {
            SpeedClass::Moderate
        } else {
            SpeedClass::Fast
        }
    }
}

/// A harmonic drive on `[0, duration]`: either a dragged centre or a
/// stiffness ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub potential: PotentialSpec,
    pub duration: f64,
    pub speed: SpeedClass,
}

impl ProtocolSpec {
    pub fn new(potential: PotentialSpec, duration: f64) -> Result<Self> {
        positive("duration", duration)?;
        let omega = match potential {
            PotentialSpec::Harmonic { omega, .. } => omega,
            PotentialSpec::StiffnessRamp { omega, .. } => omega.value(0.0).min(omega.value(duration)),
            _ => {
                return Err(Error::InvalidParameter {
                    name: "protocol",
                    reason: "only harmonic drives are supported".into(),
                })
            }
        };
        positive("omega", omega)?;
        Ok(Self {
            potential,
            duration,
            speed: SpeedClass::classify(duration, omega),
        })
    }

    pub fn dragged_trap(omega: f64, from: f64, to: f64, duration: f64) -> Result<Self> {
        Self::new(
            PotentialSpec::Harmonic {
                omega,
                center: Schedule::linear(from, to, duration),
            },
            duration,
        )
    }

    pub fn stiffness_ramp(omega1: f64, omega2: f64, duration: f64, smooth: bool) -> Result<Self> {
        let omega = if smooth {
            Schedule::smooth(omega1, omega2, duration)
        } else {
            Schedule::linear(omega1, omega2, duration)
        };
        Self::new(PotentialSpec::StiffnessRamp { omega, center: 0.0 }, duration)
    }

    pub fn static_trap(omega: f64, duration: f64) -> Result<Self> {
        Self::new(PotentialSpec::static_harmonic(omega), duration)
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        match self.potential {
            PotentialSpec::Harmonic { omega, .. } => omega,
            PotentialSpec::StiffnessRamp { omega, .. } => omega.value(t),
            _ => unreachable!("validated in ProtocolSpec::new"),
        }
    }

    pub fn center_at(&self, t: f64) -> f64 {
        match self.potential {
            PotentialSpec::Harmonic { center, .. } => center.value(t),
            PotentialSpec::StiffnessRamp { center, .. } => center,
            _ => unreachable!("validated in ProtocolSpec::new"),
        }
    }

    pub fn label(&self) -> String {
        let kind = match self.potential {
            PotentialSpec::Harmonic { center, .. } if center.is_static() => "static-trap",
            PotentialSpec::Harmonic { .. } => "dragged-trap",
            _ => "stiffness-ramp",
        };
        format!(
            "{kind} ω {}→{}, centre {}→{}, τ = {} ({:?})",
            self.omega_at(0.0),
            self.omega_at(self.duration),
            self.center_at(0.0),
            self.center_at(self.duration),
            self.duration,
            self.speed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreeEnergyKind {
    ClassicalHo,
    QuantumHo,
}

/// `F(ω₂) − F(ω₁)` for a harmonic oscillator at inverse temperature `β`.
pub fn free_energy_diff(kind: FreeEnergyKind, beta: f64, omega1: f64, omega2: f64, hbar: f64) -> f64 {
    match kind {
        FreeEnergyKind::ClassicalHo => (omega2 / omega1).ln() / beta,
        FreeEnergyKind::QuantumHo => {
            let a2 = 0.5 * beta * hbar * omega2;
            let a1 = 0.5 * beta * hbar * omega1;
            // ln sinh(a) = a + ln(1 − e^{−2a}) − ln 2, stable for large a.
            let ln_sinh = |a: f64| a + (-(-2.0 * a).exp()).ln_1p() - std::f64::consts::LN_2;
            (ln_sinh(a2) - ln_sinh(a1)) / beta
        }
    }
}

/// Default truncation tolerance on the discarded Gibbs weight.
pub const GIBBS_TAIL_TOL: f64 = 1e-10;

/// Boltzmann weights `p_n ∝ e^{−βħω(n+½)}` for `n ≤ n_max`.
pub fn quantum_gibbs_mixture(beta: f64, omega: f64, hbar: f64, n_max: usize) -> Result<Vec<f64>> {
    positive("beta", beta)?;
    positive("omega", omega)?;
    let x = (-beta * hbar * omega).exp();
    let tail = x.powi(n_max as i32 + 1);
    if tail >= GIBBS_TAIL_TOL {
        return Err(Error::Truncation { n_max, tail });
    }
    let raw: Vec<f64> = (0..=n_max).map(|n| x.powi(n as i32)).collect();
    let z: f64 = crate::stats::sum(raw.iter().copied());
    Ok(raw.into_iter().map(|p| p / z).collect())
}

/// Smallest `n_max` whose discarded Gibbs weight is below [`GIBBS_TAIL_TOL`].
pub fn gibbs_n_max(beta: f64, omega: f64, hbar: f64) -> usize {
    let x = (-beta * hbar * omega).exp();
    let mut n_max = 0;
    while x.powi(n_max as i32 + 1) >= GIBBS_TAIL_TOL {
        n_max += 1;
    }
    n_max
}

/// Jarzynski estimate with its reference value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JarzynskiReport {
    pub estimate: f64,
    pub exact: f64,
    pub stderr: f64,
    pub n: usize,
    pub protocol: String,
    pub work_kind: String,
    pub beta: f64,
    pub delta_f: f64,
    pub mean_work: f64,
    pub stderr_work: f64,
}

impl JarzynskiReport {
    /// `(estimate − exact)/stderr`; infinite when the error is zero but the
    /// estimate is off.
    pub fn gap_sigma(&self) -> f64 {
        let gap = self.estimate - self.exact;
        if self.stderr > 0.0 {
            gap / self.stderr
        } else if gap == 0.0 {
            0.0
        } else {
            gap.signum() * f64::INFINITY
        }
    }

    pub fn passes(&self, sigmas: f64) -> bool {
        self.gap_sigma().abs() < sigmas
    }

    /// Jensen: `⟨W⟩ ≥ ΔF`, allowing for the sampling error of `⟨W⟩`.
    pub fn jensen_holds(&self) -> bool {
        self.mean_work >= self.delta_f - 4.0 * self.stderr_work
    }
}

/// One work sample; `n` is the eigenstate index (0 for classical runs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkSample {
    pub n: usize,
    pub traj_id: usize,
    pub w: f64,
}

/// `n,traj_id,W,exp_minus_beta_W`.
pub fn write_work_samples_csv<W: Write>(
    samples: &[WorkSample],
    beta: f64,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "n,traj_id,W,exp_minus_beta_W")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e}",
            s.n,
            s.traj_id,
            s.w,
            (-beta * s.w).exp()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gibbs_weights() {
        let p = quantum_gibbs_mixture(1.0, 1.0, 1.0, 30).unwrap();
        for (n, pn) in p.iter().enumerate() {
            let want = (1.0 - (-1.0f64).exp()) * (-(n as f64)).exp();
            assert!((pn - want).abs() < 1e-12);
        }
        assert!((crate::stats::sum(p.iter().copied()) - 1.0).abs() < 1e-12);
        let cold = quantum_gibbs_mixture(1e3, 1.0, 1.0, 0).unwrap();
        assert_eq!(cold, vec![1.0]);
        assert!(matches!(
            quantum_gibbs_mixture(1.0, 1.0, 1.0, 5),
            Err(Error::Truncation { n_max: 5, .. })
        ));
    }

    #[test]
    fn gibbs_energy_matches_coth() {
        for beta in [0.5, 1.0, 2.0, 5.0] {
            let n_max = gibbs_n_max(beta, 1.3, 1.0);
            let p = quantum_gibbs_mixture(beta, 1.3, 1.0, n_max).unwrap();
            let e: f64 = p
                .iter()
                .enumerate()
                .map(|(n, p)| p * 1.3 * (n as f64 + 0.5))
                .sum();
            let want = 0.65 / (0.5 * beta * 1.3f64).tanh();
            assert!((e - want).abs() < 1e-8, "β = {beta}");
            assert!(quantum_gibbs_mixture(beta, 1.3, 1.0, n_max.saturating_sub(1)).is_err() || n_max == 0);
        }
    }

    #[test]
    fn free_energy_references() {
        for kind in [FreeEnergyKind::ClassicalHo, FreeEnergyKind::QuantumHo] {
            assert_eq!(free_energy_diff(kind, 1.0, 1.4, 1.4, 1.0), 0.0);
        }
        assert!(
            (free_energy_diff(FreeEnergyKind::ClassicalHo, 2.0, 1.0, 2.0, 1.0) - 0.5 * 2f64.ln()).abs()
                < 1e-15
        );
        // Quantum → classical as βħω → 0 with an O(β(ħω)²) correction.
        for beta in [1e-1, 1e-2, 1e-3] {
            let q = free_energy_diff(FreeEnergyKind::QuantumHo, beta, 1.0, 2.0, 1.0);
            let c = free_energy_diff(FreeEnergyKind::ClassicalHo, beta, 1.0, 2.0, 1.0);
            let series = beta * (4.0 - 1.0) / 24.0;
            assert!((q - c - series).abs() < 10.0 * beta.powi(3), "β = {beta}");
        }
        let big = free_energy_diff(FreeEnergyKind::QuantumHo, 100.0, 1.0, 2.0, 1.0);
        assert!((big - 0.5).abs() < 1e-12);
    }

    #[test]
    fn protocol_classes() {
        let slow = ProtocolSpec::dragged_trap(1.0, 0.0, 1.0, 40.0).unwrap();
        assert_eq!(slow.speed, SpeedClass::QuasiStatic);
        assert_eq!(slow.center_at(20.0), 0.5);
        let fast = ProtocolSpec::stiffness_ramp(1.0, 2.0, 0.1, false).unwrap();
        assert_eq!(fast.speed, SpeedClass::Fast);
        assert_eq!(fast.omega_at(0.1), 2.0);
        assert!(ProtocolSpec::new(PotentialSpec::Free, 1.0).is_err());
        assert!(CanonicalSpec::new(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn samples_csv() {
        let mut buf = Vec::new();
        write_work_samples_csv(
            &[WorkSample {
                n: 2,
                traj_id: 7,
                w: 0.0,
            }],
            1.0,
            &mut buf,
        )
        .unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next().unwrap(), "n,traj_id,W,exp_minus_beta_W");
        assert!(s
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("2,7,0.0000000000000000e0,1.0000000000000000e0"));
    }
}

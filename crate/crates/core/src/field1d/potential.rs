use serde::{Deserialize, Serialize};

use super::Units;
use crate::protocol::Schedule;

/// Classical potential `V(x, t)`. Harmonic terms use the particle mass,
/// `V = ½ m ω² (x − c)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Free,
    /// Trap of fixed frequency whose centre follows `center(t)`.
    Harmonic {
        omega: f64,
        center: Schedule,
    },
    /// Trap at a fixed centre whose frequency follows `omega(t)`.
    StiffnessRamp {
        omega: Schedule,
        center: f64,
    },
    /// Static Gaussian barrier `h·exp(−(x − c)²/(2w²))`.
    Barrier {
        height: f64,
        width: f64,
        center: f64,
    },
}

impl PotentialSpec {
    pub fn static_harmonic(omega: f64) -> Self {
        PotentialSpec::Harmonic {
            omega,
            center: Schedule::constant(0.0),
        }
    }

    pub fn value(&self, x: f64, t: f64, mass: f64) -> f64 {
        match *self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { omega, center } => {
                let d = x - center.value(t);
                0.5 * mass * omega * omega * d * d
            }
            PotentialSpec::StiffnessRamp { omega, center } => {
                let w = omega.value(t);
                let d = x - center;
                0.5 * mass * w * w * d * d
            }
            PotentialSpec::Barrier {
                height,
                width,
                center,
            } => {
                let d = x - center;
                height * (-d * d / (2.0 * width * width)).exp()
            }
        }
    }

    /// ∂V/∂x.
    pub fn grad(&self, x: f64, t: f64, mass: f64) -> f64 {
        match *self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { omega, center } => mass * omega * omega * (x - center.value(t)),
            PotentialSpec::StiffnessRamp { omega, center } => {
                let w = omega.value(t);
                mass * w * w * (x - center)
            }
            PotentialSpec::Barrier {
                height,
                width,
                center,
            } => {
                let d = x - center;
                -height * d / (width * width) * (-d * d / (2.0 * width * width)).exp()
            }
        }
    }

    /// ∂V/∂t at fixed x.
    pub fn time_rate(&self, x: f64, t: f64, mass: f64) -> f64 {
        match *self {
            PotentialSpec::Free | PotentialSpec::Barrier { .. } => 0.0,
            PotentialSpec::Harmonic { omega, center } => {
                -mass * omega * omega * (x - center.value(t)) * center.rate(t)
            }
            PotentialSpec::StiffnessRamp { omega, center } => {
                let d = x - center;
                mass * omega.value(t) * omega.rate(t) * d * d
            }
        }
    }

    pub fn is_static(&self) -> bool {
        match self {
            PotentialSpec::Free | PotentialSpec::Barrier { .. } => true,
            PotentialSpec::Harmonic { center, .. } => center.is_static(),
            PotentialSpec::StiffnessRamp { omega, .. } => omega.is_static(),
        }
    }

    /// Same potential driven backwards in time over `[0, total]`.
    pub fn time_reversed(&self, total: f64) -> Self {
        match *self {
            PotentialSpec::Harmonic { omega, center } => PotentialSpec::Harmonic {
                omega,
                center: center.time_reversed(total),
            },
            PotentialSpec::StiffnessRamp { omega, center } => PotentialSpec::StiffnessRamp {
                omega: omega.time_reversed(total),
                center,
            },
            other => other,
        }
    }
}

/// `Ĥ = p²/2m + V(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian1D {
    pub units: Units,
    pub potential: PotentialSpec,
}

impl Hamiltonian1D {
    pub fn new(units: Units, potential: PotentialSpec) -> Self {
        Self { units, potential }
    }

    pub fn v(&self, x: f64, t: f64) -> f64 {
        self.potential.value(x, t, self.units.mass)
    }

    pub fn dv_dx(&self, x: f64, t: f64) -> f64 {
        self.potential.grad(x, t, self.units.mass)
    }

    pub fn dv_dt(&self, x: f64, t: f64) -> f64 {
        self.potential.time_rate(x, t, self.units.mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let specs = [
            PotentialSpec::Harmonic {
                omega: 1.3,
                center: Schedule::linear(0.0, 2.0, 3.0),
            },
            PotentialSpec::StiffnessRamp {
                omega: Schedule::smooth(1.0, 2.0, 3.0),
                center: 0.4,
            },
            PotentialSpec::Barrier {
                height: 2.0,
                width: 0.7,
                center: -0.3,
            },
        ];
        let h = 1e-6;
        for s in specs {
            for &(x, t) in &[(0.3, 1.0), (-1.2, 2.2)] {
                let fx = (s.value(x + h, t, 1.5) - s.value(x - h, t, 1.5)) / (2.0 * h);
                let ft = (s.value(x, t + h, 1.5) - s.value(x, t - h, 1.5)) / (2.0 * h);
                assert!((fx - s.grad(x, t, 1.5)).abs() < 1e-7, "{s:?}");
                assert!((ft - s.time_rate(x, t, 1.5)).abs() < 1e-7, "{s:?}");
            }
        }
    }
}

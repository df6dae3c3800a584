//! Drive schedules `λ(t)` for externally controlled parameters (trap
//! centre or trap frequency).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant {
        value: f64,
    },
    /// Linear interpolation on `[start, start + duration]`, clamped outside.
    Linear {
        from: f64,
        to: f64,
        start: f64,
        duration: f64,
    },
    /// Quintic smootherstep: first and second derivatives vanish at both
    /// ends of the ramp.
    Smooth {
        from: f64,
        to: f64,
        start: f64,
        duration: f64,
    },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    pub fn linear(from: f64, to: f64, duration: f64) -> Self {
        Schedule::Linear {
            from,
            to,
            start: 0.0,
            duration,
        }
    }

    pub fn smooth(from: f64, to: f64, duration: f64) -> Self {
        Schedule::Smooth {
            from,
            to,
            start: 0.0,
            duration,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Linear {
                from,
                to,
                start,
                duration,
            } => from + (to - from) * ramp_fraction(t, start, duration),
            Schedule::Smooth {
                from,
                to,
                start,
                duration,
            } => from + (to - from) * smootherstep(ramp_fraction(t, start, duration)),
        }
    }

    /// dλ/dt.
    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant { .. } => 0.0,
            Schedule::Linear {
                from,
                to,
                start,
                duration,
            } => {
                if duration > 0.0 && t > start && t < start + duration {
                    (to - from) / duration
                } else {
                    0.0
                }
            }
            Schedule::Smooth {
                from,
                to,
                start,
                duration,
            } => {
                if duration > 0.0 && t > start && t < start + duration {
                    let u = (t - start) / duration;
                    (to - from) * 30.0 * u * u * (1.0 - u) * (1.0 - u) / duration
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_static(&self) -> bool {
        match *self {
            Schedule::Constant { .. } => true,
            Schedule::Linear { from, to, .. } | Schedule::Smooth { from, to, .. } => from == to,
        }
    }

    /// Schedule `λ'(t) = λ(total − t)`.
    pub fn time_reversed(&self, total: f64) -> Self {
        match *self {
            Schedule::Constant { value } => Schedule::Constant { value },
            Schedule::Linear {
                from,
                to,
                start,
                duration,
            } => Schedule::Linear {
                from: to,
                to: from,
                start: total - start - duration,
                duration,
            },
            Schedule::Smooth {
                from,
                to,
                start,
                duration,
            } => Schedule::Smooth {
                from: to,
                to: from,
                start: total - start - duration,
                duration,
            },
        }
    }
}

fn ramp_fraction(t: f64, start: f64, duration: f64) -> f64 {
    if duration <= 0.0 {
        return if t >= start { 1.0 } else { 0.0 };
    }
    ((t - start) / duration).clamp(0.0, 1.0)
}

fn smootherstep(u: f64) -> f64 {
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_matches_finite_difference() {
        for s in [Schedule::linear(1.0, 3.0, 2.0), Schedule::smooth(-1.0, 2.0, 5.0)] {
            for &t in &[0.3, 1.1, 1.9] {
                let h = 1e-6;
                let fd = (s.value(t + h) - s.value(t - h)) / (2.0 * h);
                assert!((fd - s.rate(t)).abs() < 1e-7, "{s:?} at {t}");
            }
        }
    }

    #[test]
    fn endpoints_and_reversal() {
        let s = Schedule::smooth(1.0, 2.0, 4.0);
        assert_eq!(s.value(0.0), 1.0);
        assert_eq!(s.value(4.0), 2.0);
        assert_eq!(s.value(10.0), 2.0);
        let r = s.time_reversed(6.0);
        for &t in &[0.0, 1.0, 2.5, 3.3, 6.0] {
            assert!((r.value(t) - s.value(6.0 - t)).abs() < 1e-14);
        }
        assert!(Schedule::constant(3.0).is_static());
        assert!(!s.is_static());
    }
}

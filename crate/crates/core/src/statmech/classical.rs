use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::{
    free_energy_diff, positive, CanonicalSpec, FreeEnergyKind, JarzynskiReport, ProtocolSpec, WorkSample,
};
use crate::stats::{jackknife_of_mean, mean, std_error};
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

/// I.i.d. canonical samples: `x ~ N(c, 1/(βmω²))`, `p ~ N(0, m/β)`.
pub fn classical_gibbs_sample(spec: &CanonicalSpec, n: usize, seed: u64) -> Vec<PhasePoint> {
    let sx = 1.0 / (spec.beta * spec.mass * spec.omega * spec.omega).sqrt();
    let sp = (spec.mass / spec.beta).sqrt();
    let dx = Normal::new(spec.center, sx).expect("validated spec");
    let dp = Normal::new(0.0, sp).expect("validated spec");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = dx.sample(&mut rng);
            let p = dp.sample(&mut rng);
            PhasePoint { x, p }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalWork {
    pub work: f64,
    /// `H(x_T, p_T; T) − H(x_0, p_0; 0)`.
    pub delta_h: f64,
    pub final_point: PhasePoint,
}

/// Work `∫ λ̇ ∂H/∂λ dt` along a leapfrog trajectory.
///
/// Each step freezes the drive at its midpoint `t_{k+½}` and takes a
/// kick-drift-kick step of that autonomous Hamiltonian. The work is the sum
/// of the potential jumps `V(x_k; t_{k+½}) − V(x_k; t_{k−½})` at the step
/// boundaries (with `t_{−½} = 0` and `t_{N+½} = T`), so `W − ΔH` is the
/// integrator's bounded energy error.
pub fn classical_work(
    protocol: &ProtocolSpec,
    mass: f64,
    start: PhasePoint,
    dt: f64,
) -> Result<ClassicalWork> {
    positive("dt", dt)?;
    positive("mass", mass)?;
    let total = protocol.duration;
    let steps = (total / dt).ceil().max(1.0) as usize;
    let h = total / steps as f64;
    let pot = protocol.potential;
    let v = |x: f64, t: f64| pot.value(x, t, mass);
    let grad = |x: f64, t: f64| pot.grad(x, t, mass);

    let (mut x, mut p) = (start.x, start.p);
    let h0 = 0.5 * p * p / mass + v(x, 0.0);
    let mut work = 0.0;
    let mut t_prev = 0.0;
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * h;
        work += v(x, t_mid) - v(x, t_prev);
        p -= 0.5 * h * grad(x, t_mid);
        x += h * p / mass;
        p -= 0.5 * h * grad(x, t_mid);
        t_prev = t_mid;
    }
    work += v(x, total) - v(x, t_prev);
    if !(x.is_finite() && p.is_finite() && work.is_finite()) {
        return Err(Error::NonFinite { time: total });
    }
    let h1 = 0.5 * p * p / mass + v(x, total);
    Ok(ClassicalWork {
        work,
        delta_h: h1 - h0,
        final_point: PhasePoint { x, p },
    })
}

#[derive(Debug, Clone)]
pub struct ClassicalJarzynski {
    pub report: JarzynskiReport,
    pub samples: Vec<WorkSample>,
    /// `max |W − ΔH|` over the ensemble.
    pub max_bookkeeping_error: f64,
}

/// Monte-Carlo `⟨e^{−βW}⟩` over canonical initial conditions of the
/// protocol's initial Hamiltonian, with a jackknife error.
pub fn classical_jarzynski(
    spec: &CanonicalSpec,
    protocol: &ProtocolSpec,
    n: usize,
    dt: f64,
    seed: u64,
    exec: Exec,
) -> Result<ClassicalJarzynski> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("need at least 2 samples, got {n}"),
        });
    }
    let omega0 = protocol.omega_at(0.0);
    let c0 = protocol.center_at(0.0);
    if (spec.omega - omega0).abs() > 1e-12 * omega0 || (spec.center - c0).abs() > 1e-12 {
        return Err(Error::InvalidParameter {
            name: "spec",
            reason: "canonical state must match the protocol's initial Hamiltonian".into(),
        });
    }
    let points = classical_gibbs_sample(spec, n, seed);
    let runs = exec.map(&points, |&pt| classical_work(protocol, spec.mass, pt, dt));
    let runs: Vec<ClassicalWork> = runs.into_iter().collect::<Result<_>>()?;
    let works: Vec<f64> = runs.iter().map(|r| r.work).collect();
    let beta = spec.beta;
    let boltz: Vec<f64> = works.iter().map(|w| (-beta * w).exp()).collect();
    let (estimate, stderr) = jackknife_of_mean(&boltz, |m| m);
    let delta_f = free_energy_diff(
        FreeEnergyKind::ClassicalHo,
        beta,
        omega0,
        protocol.omega_at(protocol.duration),
        1.0,
    );
    Ok(ClassicalJarzynski {
        report: JarzynskiReport {
            estimate,
            exact: (-beta * delta_f).exp(),
            stderr,
            n,
            protocol: protocol.label(),
            work_kind: "classical".into(),
            beta,
            delta_f,
            mean_work: mean(&works),
            stderr_work: std_error(&works),
        },
        samples: works
            .iter()
            .enumerate()
            .map(|(i, &w)| WorkSample { n: 0, traj_id: i, w })
            .collect(),
        max_bookkeeping_error: runs
            .iter()
            .map(|r| (r.work - r.delta_h).abs())
            .fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::variance;

    #[test]
    fn gibbs_moments() {
        let spec = CanonicalSpec::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let n = 100_000;
        let pts = classical_gibbs_sample(&spec, n, 11);
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        assert!((variance(&xs) - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
        let e: Vec<f64> = pts.iter().map(|p| 0.5 * p.p * p.p + 0.5 * p.x * p.x).collect();
        assert!((mean(&e) - 1.0).abs() < 4.0 * std_error(&e));
        assert_eq!(pts[..10], classical_gibbs_sample(&spec, 10, 11)[..]);
    }

    #[test]
    fn static_protocol_does_no_work() {
        let proto = ProtocolSpec::static_trap(1.3, 5.0).unwrap();
        let w = classical_work(&proto, 1.0, PhasePoint { x: 0.4, p: -0.2 }, 0.01).unwrap();
        assert_eq!(w.work, 0.0);
        assert!(w.delta_h.abs() < 1e-4);
    }

    #[test]
    fn work_equals_energy_change_to_second_order() {
        let proto = ProtocolSpec::stiffness_ramp(1.0, 2.0, 3.0, false).unwrap();
        let start = PhasePoint { x: 0.7, p: 0.3 };
        let err = |dt: f64| {
            let w = classical_work(&proto, 1.0, start, dt).unwrap();
            (w.work - w.delta_h).abs()
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e1 < 1e-3);
        assert!(e1 / e2 > 3.0, "{e1} / {e2}");
    }

    #[test]
    fn quasi_static_drag_does_vanishing_work() {
        let start = PhasePoint { x: 0.0, p: 0.0 };
        let w: Vec<f64> = [5.0, 50.0, 500.0]
            .iter()
            .map(|&tau| {
                let proto = ProtocolSpec::dragged_trap(1.0, 0.0, 1.0, tau).unwrap();
                classical_work(&proto, 1.0, start, 0.01).unwrap().work.abs()
            })
            .collect();
        assert!(w[1] < w[0] && w[2] < w[1] && w[2] < 1e-4, "{w:?}");
    }

    #[test]
    fn jarzynski_stiffness_and_drag() {
        let beta = 1.0;
        for proto in [
            ProtocolSpec::dragged_trap(1.0, 0.0, 2.0, 1.0).unwrap(),
            ProtocolSpec::stiffness_ramp(1.0, 2.0, 1.0, false).unwrap(),
        ] {
            let spec = CanonicalSpec::for_protocol(beta, 1.0, &proto).unwrap();
            let j = classical_jarzynski(&spec, &proto, 10_000, 0.005, 3, Exec::Parallel).unwrap();
            assert!(j.report.passes(4.0), "{:?}", j.report);
            assert!(j.report.mean_work >= j.report.delta_f);
            assert!(j.max_bookkeeping_error < 1e-3);
        }
    }

    #[test]
    fn mismatched_canonical_state_is_rejected() {
        let proto = ProtocolSpec::stiffness_ramp(1.0, 2.0, 1.0, false).unwrap();
        let spec = CanonicalSpec::new(1.0, 1.0, 2.0, 0.0).unwrap();
        assert!(classical_jarzynski(&spec, &proto, 100, 0.01, 0, Exec::Sequential).is_err());
    }
}

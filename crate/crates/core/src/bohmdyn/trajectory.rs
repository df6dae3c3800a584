use std::io::Write;

use super::fields::{BohmFields, FieldSample};
use crate::field1d::{Hamiltonian1D, Propagator, SpectralOps, Wavefunction};
use crate::{Error, Exec, Result};

/// Trajectories closer than this many cells to either grid edge are aborted.
pub const EDGE_MARGIN_CELLS: f64 = 5.0;

/// Recorded path of one guidance-equation trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub traj_id: usize,
    pub mass: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
    pub e_local: Vec<f64>,
    /// Total force `−∂ₓ(V + Q)`.
    pub force: Vec<f64>,
    /// `dE_local/dt` along the path.
    pub de_dt: Vec<f64>,
    /// Sample used node-guarded field values.
    pub masked: Vec<bool>,
}

impl Trajectory {
    fn new(traj_id: usize, mass: f64, capacity: usize) -> Self {
        Self {
            traj_id,
            mass,
            times: Vec::with_capacity(capacity),
            positions: Vec::with_capacity(capacity),
            velocities: Vec::with_capacity(capacity),
            v: Vec::with_capacity(capacity),
            q: Vec::with_capacity(capacity),
            e_local: Vec::with_capacity(capacity),
            force: Vec::with_capacity(capacity),
            de_dt: Vec::with_capacity(capacity),
            masked: Vec::with_capacity(capacity),
        }
    }

    fn push(&mut self, t: f64, x: f64, s: &FieldSample) {
        self.times.push(t);
        self.positions.push(x);
        self.velocities.push(s.velocity);
        self.v.push(s.v);
        self.q.push(s.q);
        self.e_local.push(s.e_local);
        self.force.push(s.force);
        self.de_dt.push(s.de_dt_path);
        self.masked.push(s.masked);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spacing between recorded samples.
    pub fn sample_dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn kinetic(&self, i: usize) -> f64 {
        0.5 * self.mass * self.velocities[i] * self.velocities[i]
    }

    pub fn masked_count(&self) -> usize {
        self.masked.iter().filter(|&&m| m).count()
    }

    pub fn final_position(&self) -> f64 {
        *self.positions.last().expect("non-empty trajectory")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Record every `record_stride`-th step; must divide the step count.
    pub record_stride: usize,
    /// Split-step substeps per half RK4 step when advancing `ψ`.
    pub psi_substeps: usize,
    /// Keep `ψ` and all positions every this many steps (and at t = 0).
    pub snapshot_stride: Option<usize>,
    pub exec: Exec,
}

impl TrajectoryOptions {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            record_stride: 1,
            psi_substeps: 1,
            snapshot_stride: None,
            exec: Exec::default(),
        }
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be positive and finite, got {}", self.dt),
            });
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_final",
                reason: format!("must be non-negative and finite, got {}", self.t_final),
            });
        }
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(self.dt) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("t_final = {} is not a multiple of dt = {}", self.t_final, self.dt),
            });
        }
        let steps = steps as usize;
        if self.record_stride == 0 || !steps.is_multiple_of(self.record_stride) {
            return Err(Error::InvalidParameter {
                name: "record_stride",
                reason: format!("must divide the step count {steps}"),
            });
        }
        if self.psi_substeps == 0 {
            return Err(Error::InvalidParameter {
                name: "psi_substeps",
                reason: "must be at least 1".into(),
            });
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::InvalidParameter {
                name: "snapshot_stride",
                reason: "must be at least 1".into(),
            });
        }
        Ok(steps)
    }
}

/// Wavefunction and ensemble positions at one instant.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub psi: Wavefunction,
    pub positions: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    pub trajectories: Vec<Trajectory>,
    pub psi_final: Wavefunction,
    pub snapshots: Vec<Snapshot>,
}

impl TrajectoryRun {
    pub fn final_positions(&self) -> Vec<f64> {
        self.trajectories.iter().map(Trajectory::final_position).collect()
    }

    pub fn masked_events(&self) -> usize {
        self.trajectories.iter().map(Trajectory::masked_count).sum()
    }
}

/// Integrates `ẋ = ∇S/m` from each `x0` with classical RK4 while `ψ` is
/// advanced alongside by split-step in half steps.
pub fn integrate_trajectories(
    psi0: &Wavefunction,
    ham: &Hamiltonian1D,
    x0s: &[f64],
    t_final: f64,
    dt: f64,
) -> Result<Vec<Trajectory>> {
    Ok(integrate_ensemble(psi0, ham, x0s, &TrajectoryOptions::new(dt, t_final))?.trajectories)
}

pub fn integrate_ensemble(
    psi0: &Wavefunction,
    ham: &Hamiltonian1D,
    x0s: &[f64],
    opts: &TrajectoryOptions,
) -> Result<TrajectoryRun> {
    let steps = opts.steps()?;
    let grid = *psi0.grid();
    let ops = SpectralOps::new(&grid);
    let sub = opts.psi_substeps;
    let prop = Propagator::new(&ops, *ham, 0.5 * opts.dt / sub as f64)?;
    let lo = grid.x_min() + EDGE_MARGIN_CELLS * grid.dx();
    let hi = grid.x_max() - EDGE_MARGIN_CELLS * grid.dx();
    let dt = opts.dt;
    let t0 = psi0.time();
    let capacity = steps / opts.record_stride + 1;
    let mass = ham.units.mass;

    let inside = |id: usize, t: f64, x: f64| -> Result<()> {
        if x.is_finite() && x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::TrajectoryEscaped {
                traj_id: id,
                time: t,
                position: x,
            })
        }
    };
    let sample = |f: &BohmFields, x: f64| f.sample(x, ham.v(x, f.time));

    let mut psi = psi0.clone();
    let mut f0 = BohmFields::compute_with(&psi, ham, &ops)?;
    let mut states: Vec<(f64, Trajectory)> = Vec::with_capacity(x0s.len());
    for (id, &x) in x0s.iter().enumerate() {
        inside(id, t0, x)?;
        let mut tr = Trajectory::new(id, mass, capacity);
        tr.push(t0, x, &sample(&f0, x));
        states.push((x, tr));
    }
    let mut snapshots = Vec::new();
    let snap = |psi: &Wavefunction, states: &[(f64, Trajectory)]| Snapshot {
        psi: psi.clone(),
        positions: states.iter().map(|s| s.0).collect(),
    };
    if opts.snapshot_stride.is_some() {
        snapshots.push(snap(&psi, &states));
    }

    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        prop.run(&mut psi, sub)?;
        psi.set_time(t + 0.5 * dt);
        let f_mid = BohmFields::compute_with(&psi, ham, &ops)?;
        prop.run(&mut psi, sub)?;
        let t_end = t0 + (step + 1) as f64 * dt;
        psi.set_time(t_end);
        let f_end = BohmFields::compute_with(&psi, ham, &ops)?;
        let record = (step + 1) % opts.record_stride == 0;

        let advance = |(x, tr): &mut (f64, Trajectory)| -> Result<()> {
            let id = tr.traj_id;
            let k1 = f0.sample(*x, 0.0).velocity;
            let x2 = *x + 0.5 * dt * k1;
            inside(id, t + 0.5 * dt, x2)?;
            let k2 = f_mid.sample(x2, 0.0).velocity;
            let x3 = *x + 0.5 * dt * k2;
            inside(id, t + 0.5 * dt, x3)?;
            let k3 = f_mid.sample(x3, 0.0).velocity;
            let x4 = *x + dt * k3;
            inside(id, t_end, x4)?;
            let k4 = f_end.sample(x4, 0.0).velocity;
            *x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            inside(id, t_end, *x)?;
            if record {
                tr.push(t_end, *x, &sample(&f_end, *x));
            }
            Ok(())
        };
        let mut errs: Vec<Option<Error>> = (0..states.len()).map(|_| None).collect();
        {
            let mut jobs: Vec<_> = states.iter_mut().zip(errs.iter_mut()).collect();
            opts.exec
                .for_each_mut(&mut jobs, |_, (s, e)| **e = advance(s).err());
        }
        if let Some(err) = errs.into_iter().flatten().next() {
            return Err(err);
        }
        if let Some(k) = opts.snapshot_stride {
            if (step + 1) % k == 0 {
                snapshots.push(snap(&psi, &states));
            }
        }
        f0 = f_end;
    }

    Ok(TrajectoryRun {
        trajectories: states.into_iter().map(|s| s.1).collect(),
        psi_final: psi,
        snapshots,
    })
}

/// Writes `traj_id,t,x,v,V,Q,E_local` rows for every recorded sample.
pub fn write_trajectories_csv<W: Write>(trajs: &[Trajectory], mut out: W) -> std::io::Result<()> {
    writeln!(out, "traj_id,t,x,v,V,Q,E_local")?;
    for tr in trajs {
        for i in 0..tr.len() {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                tr.traj_id, tr.times[i], tr.positions[i], tr.velocities[i], tr.v[i], tr.q[i], tr.e_local[i]
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field1d::{Grid1D, PotentialSpec, Units};

    fn free_setup(sigma0: f64) -> (Wavefunction, Hamiltonian1D) {
        let grid = Grid1D::centered(1024, 0.0, 30.0).unwrap();
        (
            Wavefunction::gaussian(grid, 0.0, sigma0, 0.0),
            Hamiltonian1D::new(Units::default(), PotentialSpec::Free),
        )
    }

    fn sigma_t(sigma0: f64, t: f64) -> f64 {
        sigma0 * (1.0 + (t / (2.0 * sigma0 * sigma0)).powi(2)).sqrt()
    }

    #[test]
    fn free_gaussian_scaling_solution() {
        let s0 = 1.0;
        let (psi, ham) = free_setup(s0);
        let x0s = [-1.5, -0.3, 0.0, 0.7, 2.0];
        let trajs = integrate_trajectories(&psi, &ham, &x0s, 2.0, 0.05).unwrap();
        for (tr, &x0) in trajs.iter().zip(&x0s) {
            assert_eq!(tr.len(), 41);
            for (i, &t) in tr.times.iter().enumerate() {
                let want = x0 * sigma_t(s0, t) / s0;
                assert!((tr.positions[i] - want).abs() < 1e-6, "t = {t}");
            }
        }
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let s0 = 0.6;
        let (psi, ham) = free_setup(s0);
        let t = 1.6;
        let err = |dt: f64| {
            let tr = &integrate_trajectories(&psi, &ham, &[1.1], t, dt).unwrap()[0];
            (tr.final_position() - 1.1 * sigma_t(s0, t) / s0).abs()
        };
        let (e1, e2) = (err(0.2), err(0.1));
        assert!(e1 / e2 >= 8.0, "{e1} / {e2}");
    }

    #[test]
    fn trajectories_do_not_cross() {
        let grid = Grid1D::centered(512, 0.0, 12.0).unwrap();
        let ham = Hamiltonian1D::new(Units::default(), PotentialSpec::static_harmonic(1.0));
        let psi = Wavefunction::gaussian(grid, 1.0, 0.5, 0.5);
        let x0s: Vec<f64> = (0..9).map(|i| -0.2 + 0.3 * i as f64).collect();
        let trajs = integrate_trajectories(&psi, &ham, &x0s, 3.0, 0.01).unwrap();
        for i in 0..trajs[0].len() {
            for w in trajs.windows(2) {
                assert!(w[0].positions[i] < w[1].positions[i]);
            }
        }
    }

    #[test]
    fn newton_form_matches_guidance() {
        // m dv/dt along the path equals −∂ₓ(V + Q).
        let grid = Grid1D::centered(512, 0.0, 12.0).unwrap();
        let ham = Hamiltonian1D::new(Units::default(), PotentialSpec::static_harmonic(1.3));
        let psi = Wavefunction::gaussian(grid, 0.8, 0.6, -0.4);
        let tr = &integrate_trajectories(&psi, &ham, &[0.5], 2.0, 0.005).unwrap()[0];
        let h = tr.sample_dt();
        for i in 1..tr.len() - 1 {
            let accel = (tr.velocities[i + 1] - tr.velocities[i - 1]) / (2.0 * h);
            assert!(
                (accel - tr.force[i]).abs() < 1e-3,
                "i = {i}: {accel} vs {}",
                tr.force[i]
            );
        }
    }

    #[test]
    fn escape_is_reported() {
        let grid = Grid1D::centered(256, 0.0, 8.0).unwrap();
        let ham = Hamiltonian1D::new(Units::default(), PotentialSpec::Free);
        let psi = Wavefunction::gaussian(grid, 0.0, 0.3, 4.0);
        let r = integrate_trajectories(&psi, &ham, &[0.0], 4.0, 0.01);
        assert!(matches!(r, Err(Error::TrajectoryEscaped { .. })));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let (psi, ham) = free_setup(1.0);
        let x0s: Vec<f64> = (0..32).map(|i| -2.0 + 0.125 * i as f64).collect();
        let mut opts = TrajectoryOptions::new(0.05, 0.5);
        opts.exec = Exec::Sequential;
        let a = integrate_ensemble(&psi, &ham, &x0s, &opts).unwrap();
        opts.exec = Exec::Parallel;
        let b = integrate_ensemble(&psi, &ham, &x0s, &opts).unwrap();
        assert_eq!(a.trajectories, b.trajectories);
    }

    #[test]
    fn stride_and_snapshots() {
        let (psi, ham) = free_setup(1.0);
        let mut opts = TrajectoryOptions::new(0.05, 1.0);
        opts.record_stride = 4;
        opts.snapshot_stride = Some(10);
        let run = integrate_ensemble(&psi, &ham, &[0.1, 0.2], &opts).unwrap();
        assert_eq!(run.trajectories[0].len(), 6);
        assert_eq!(run.snapshots.len(), 3);
        assert!((run.snapshots[2].psi.time() - 1.0).abs() < 1e-12);
        opts.record_stride = 3;
        assert!(integrate_ensemble(&psi, &ham, &[0.1], &opts).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let (psi, ham) = free_setup(1.0);
        let trajs = integrate_trajectories(&psi, &ham, &[0.3], 0.1, 0.05).unwrap();
        let mut buf = Vec::new();
        write_trajectories_csv(&trajs, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "traj_id,t,x,v,V,Q,E_local");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split(',').count(), 7);
    }
}

use std::io::Write;

use super::sub_seed;
use crate::bohmdyn::{
    ehrenfest_quantum_force, equivariance_check, integrate_ensemble, qhj_residual,
    sample_quantum_equilibrium, write_trajectories_csv, TrajectoryOptions, TrajectoryRun,
};
use crate::expcli::{Output, Params};
use crate::field1d::{
    hamiltonian_expectation, ho_eigenstates, Grid1D, Hamiltonian1D, PotentialSpec, Units, Wavefunction,
};
use crate::protocol::Schedule;
use crate::stats::{ks_critical_99, mean, std_error};
use crate::workfun::{energetic_work, ensemble_work, work_decomposition, EnsembleWork, WorkRecord};
use crate::Result;

/// Per-trajectory tolerance of `W^M − ΔK`.
pub(crate) const ENERGY_THEOREM_TOL: f64 = 1e-5;
/// Per-trajectory tolerance of `W^E − (W^M + ΔV + ΔQ)`.
pub(crate) const DECOMPOSITION_TOL: f64 = 1e-4;
pub(crate) const QHJ_TOL: f64 = 1e-6;
/// Absolute slack added to the `4·SE` band of `⟨W^E⟩ = Δ⟨Ĥ⟩`; it only
/// matters when the ensemble spread vanishes (stationary states).
pub(crate) const ENERGY_FLOOR: f64 = 1e-6;

pub(crate) fn grid(params: &Params) -> Result<Grid1D> {
    Grid1D::centered(params.usize("grid-n")?, 0.0, params.f64("half-width")?)
}

/// Adds `⟨W^E⟩ = Δ⟨Ĥ⟩` to `out` and returns `Δ⟨Ĥ⟩`.
pub(crate) fn energy_bookkeeping(
    out: &mut Output,
    label: &str,
    ens: &EnsembleWork,
    psi0: &Wavefunction,
    psi_t: &Wavefunction,
    ham: &Hamiltonian1D,
) -> Result<f64> {
    let dh = hamiltonian_expectation(psi_t, ham) - hamiltonian_expectation(psi0, ham);
    out.check_at_most(
        &format!("{label}_mean_w_e_vs_delta_h"),
        (ens.mean_w_e - dh).abs(),
        4.0 * ens.stderr_w_e + ENERGY_FLOOR,
    );
    out.metric(&format!("{label}_delta_h"), dh)?;
    out.metric(&format!("{label}_work"), ens.summary())?;
    Ok(dh)
}

pub(crate) fn decompose(run: &TrajectoryRun) -> Result<Vec<WorkRecord>> {
    run.trajectories.iter().map(work_decomposition).collect()
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn write_run(out: &Output, run: &TrajectoryRun, ens: &EnsembleWork, prefix: &str) -> Result<()> {
    write_trajectories_csv(&run.trajectories, out.file(&format!("{prefix}trajectories.csv"))?)?;
    ens.write_csv(out.file(&format!("{prefix}work.csv"))?)?;
    out.json(&format!("{prefix}work_summary.json"), &ens.summary())?;
    run.psi_final
        .write_csv(out.file(&format!("{prefix}psi_final.csv"))?)?;
    Ok(())
}

pub fn stationary(params: &Params, out: &mut Output) -> Result<()> {
    let omega = params.f64("omega")?;
    let tol = params.f64("tol")?;
    let units = Units::default();
    let g = grid(params)?;
    let ham = Hamiltonian1D::new(units, PotentialSpec::static_harmonic(omega));
    let psi0 = ho_eigenstates(&g, units, omega, 0.0, 0)?.states.remove(0);
    let x0s = sample_quantum_equilibrium(&psi0, params.usize("n-traj")?, params.u64("seed")?)?;
    let mut opts = TrajectoryOptions::new(params.f64("dt")?, params.f64("t-final")?);
    opts.psi_substeps = params.usize("psi-substeps")?;
    opts.exec = params.exec();
    let run = integrate_ensemble(&psi0, &ham, &x0s, &opts)?;
    let records = decompose(&run)?;

    let drift = max_abs(
        run.trajectories
            .iter()
            .flat_map(|t| t.positions.iter().map(move |x| x - t.positions[0])),
    );
    out.check_below("max_displacement", drift, tol);
    type Component = (&'static str, fn(&WorkRecord) -> f64);
    let comps: [Component; 5] = [
        ("max_abs_w_m", |r| r.w_m),
        ("max_abs_w_e", |r| r.w_e),
        ("max_abs_delta_k", |r| r.delta_k),
        ("max_abs_delta_v", |r| r.delta_v),
        ("max_abs_delta_q", |r| r.delta_q),
    ];
    for (name, f) in comps {
        out.check_below(name, max_abs(records.iter().map(f)), tol);
    }
    for (label, psi) in [("initial", &psi0), ("final", &run.psi_final)] {
        let r = qhj_residual(psi, &ham)?;
        out.check_below(&format!("qhj_residual_{label}"), r.max_abs, QHJ_TOL);
    }
    out.check_below(
        "ehrenfest_mean_dq_dx",
        ehrenfest_quantum_force(&psi0, &ham).abs(),
        1e-8,
    );

    let ens = ensemble_work(records, None)?;
    energy_bookkeeping(out, "ground", &ens, &psi0, &run.psi_final, &ham)?;
    write_run(out, &run, &ens, "")
}

/// `σ(t)` of a free packet with density spread `σ₀`.
pub(crate) fn free_sigma(units: Units, s0: f64, t: f64) -> f64 {
    let tau = units.hbar * t / (2.0 * units.mass * s0 * s0);
    s0 * (1.0 + tau * tau).sqrt()
}

/// Analytic free-packet trajectory `x(t) = v_g t + x₀ σ(t)/σ₀` (packet
/// centred at the origin) and its velocity.
pub(crate) fn free_path(units: Units, s0: f64, k0: f64, x0: f64, t: f64) -> (f64, f64) {
    let vg = units.hbar * k0 / units.mass;
    let c = units.hbar / (2.0 * units.mass * s0 * s0);
    let root = (1.0 + (c * t).powi(2)).sqrt();
    let x = vg * t + x0 * root;
    let v = vg + x0 * c * c * t / root;
    (x, v)
}

struct FreeErrors {
    energy_theorem: f64,
    endpoint_rel: f64,
    delta_k_vs_analytic: f64,
}

fn free_errors(
    run: &TrajectoryRun,
    records: &[WorkRecord],
    units: Units,
    s0: f64,
    k0: f64,
    t_final: f64,
) -> FreeErrors {
    let mut e = FreeErrors {
        energy_theorem: 0.0,
        endpoint_rel: 0.0,
        delta_k_vs_analytic: 0.0,
    };
    for (tr, r) in run.trajectories.iter().zip(records) {
        let x0 = tr.positions[0];
        let (law, v_end) = free_path(units, s0, k0, x0, t_final);
        let (_, v_start) = free_path(units, s0, k0, x0, 0.0);
        let dk = 0.5 * units.mass * (v_end * v_end - v_start * v_start);
        e.energy_theorem = e.energy_theorem.max(r.energy_theorem_residual().abs());
        e.endpoint_rel = e
            .endpoint_rel
            .max(((tr.final_position() - law) / law.abs().max(1e-12)).abs());
        e.delta_k_vs_analytic = e.delta_k_vs_analytic.max((r.delta_k - dk).abs());
    }
    e
}

pub fn free_packet(params: &Params, out: &mut Output) -> Result<()> {
    let s0 = params.f64("sigma0")?;
    let k0 = params.f64("k0")?;
    let t_final = params.f64("t-final")?;
    let dt = params.f64("dt")?;
    let dt_coarse = params.f64("dt-coarse")?;
    let units = Units::default();
    let g = grid(params)?;
    let ham = Hamiltonian1D::new(units, PotentialSpec::Free);
    let psi0 = Wavefunction::gaussian(g, 0.0, s0, k0);
    let x0s = sample_quantum_equilibrium(&psi0, params.usize("n-traj")?, params.u64("seed")?)?;

    let solve = |dt: f64| -> Result<(TrajectoryRun, Vec<WorkRecord>)> {
        let mut opts = TrajectoryOptions::new(dt, t_final);
        opts.exec = params.exec();
        let run = integrate_ensemble(&psi0, &ham, &x0s, &opts)?;
        let records = decompose(&run)?;
        Ok((run, records))
    };

    let (run, records) = solve(dt)?;
    let err = free_errors(&run, &records, units, s0, k0, t_final);
    out.check_below("max_energy_theorem_error", err.energy_theorem, ENERGY_THEOREM_TOL);
    out.check_below("max_endpoint_rel_error", err.endpoint_rel, 1e-4);
    out.metric("max_delta_k_vs_analytic", err.delta_k_vs_analytic)?;
    out.check_below(
        "max_decomposition_residual",
        max_abs(records.iter().map(WorkRecord::decomposition_residual)),
        DECOMPOSITION_TOL,
    );
    out.metric(
        "max_energetic_form_residual",
        max_abs(records.iter().map(WorkRecord::energetic_form_residual)),
    )?;
    for (label, psi) in [("initial", &psi0), ("final", &run.psi_final)] {
        let r = qhj_residual(psi, &ham)?;
        out.check_below(&format!("qhj_residual_{label}"), r.max_abs, QHJ_TOL);
    }
    out.check_below(
        "sigma_final_vs_analytic_rel",
        (run.psi_final.position_std() / free_sigma(units, s0, t_final) - 1.0).abs(),
        1e-6,
    );

    // W^E is reported as a distribution; nothing forces it to vanish.
    let w_e: Vec<f64> = records.iter().map(|r| r.w_e).collect();
    let nonzero = w_e.iter().filter(|w| w.abs() > 1e-6).count();
    out.metric("w_e_min", w_e.iter().copied().fold(f64::INFINITY, f64::min))?;
    out.metric("w_e_max", w_e.iter().copied().fold(f64::NEG_INFINITY, f64::max))?;
    out.metric("w_e_nonzero_fraction", nonzero as f64 / w_e.len().max(1) as f64)?;

    let ens = ensemble_work(records, None)?;
    energy_bookkeeping(out, "free", &ens, &psi0, &run.psi_final, &ham)?;
    write_run(out, &run, &ens, "")?;

    // Integration-order study: both errors must drop by at least 4x when
    // dt is halved.
    let mut csv = out.file("dt_halving.csv")?;
    writeln!(csv, "dt,max_energy_theorem_error,max_endpoint_rel_error")?;
    let mut errs = Vec::new();
    for h in [dt_coarse, 0.5 * dt_coarse] {
        let (run, records) = solve(h)?;
        let e = free_errors(&run, &records, units, s0, k0, t_final);
        writeln!(csv, "{h:.16e},{:.16e},{:.16e}", e.energy_theorem, e.endpoint_rel)?;
        errs.push(e);
    }
    csv.flush()?;
    out.check_above(
        "dt_halving_energy_theorem_ratio",
        errs[0].energy_theorem / errs[1].energy_theorem,
        4.0,
    );
    out.check_above(
        "dt_halving_endpoint_ratio",
        errs[0].endpoint_rel / errs[1].endpoint_rel,
        4.0,
    );
    Ok(())
}

/// Energy pumped into a coherent state by dragging its trap at speed `u`
/// for time `tau`: `m u² (1 − cos ωτ)`.
pub(crate) fn drag_energy(mass: f64, omega: f64, distance: f64, tau: f64) -> f64 {
    let u = distance / tau;
    mass * u * u * (1.0 - (omega * tau).cos())
}

pub(crate) fn dragged_hamiltonian(units: Units, omega: f64, distance: f64, tau: f64) -> Hamiltonian1D {
    Hamiltonian1D::new(
        units,
        PotentialSpec::Harmonic {
            omega,
            center: Schedule::linear(0.0, distance, tau),
        },
    )
}

pub fn dragged_trap(params: &Params, out: &mut Output) -> Result<()> {
    let omega = params.f64("omega")?;
    let distance = params.f64("distance")?;
    let durations = params.list("durations")?;
    let dt = params.f64("dt")?;
    let n = params.usize("n-traj")?;
    let seed = params.u64("seed")?;
    let units = Units::default();
    let g = grid(params)?;
    let psi0 = ho_eigenstates(&g, units, omega, 0.0, 0)?.states.remove(0);

    let mut csv = out.file("speeds.csv")?;
    writeln!(
        csv,
        "duration,speed,mean_w_m,stderr_w_m,mean_w_e,stderr_w_e,delta_h,drag_energy,ks,ks_limit"
    )?;
    for (k, &tau) in durations.iter().enumerate() {
        let label = format!("tau{k}");
        let ham = dragged_hamiltonian(units, omega, distance, tau);
        let x0s = sample_quantum_equilibrium(&psi0, n, sub_seed(seed, k as u64))?;
        let mut opts = TrajectoryOptions::new(dt, tau);
        opts.psi_substeps = params.usize("psi-substeps")?;
        opts.exec = params.exec();
        let run = integrate_ensemble(&psi0, &ham, &x0s, &opts)?;
        let records = decompose(&run)?;
        out.check_below(
            &format!("{label}_max_energy_theorem_error"),
            max_abs(records.iter().map(WorkRecord::energy_theorem_residual)),
            ENERGY_THEOREM_TOL,
        );
        out.check_below(
            &format!("{label}_max_decomposition_residual"),
            max_abs(records.iter().map(WorkRecord::decomposition_residual)),
            DECOMPOSITION_TOL,
        );
        let ens = ensemble_work(records, None)?;
        let dh = energy_bookkeeping(out, &label, &ens, &psi0, &run.psi_final, &ham)?;
        let analytic = drag_energy(units.mass, omega, distance, tau);
        out.check_below(
            &format!("{label}_delta_h_vs_drag_energy"),
            (dh - analytic).abs(),
            1e-6,
        );
        let ks = equivariance_check(&run.final_positions(), &run.psi_final)?;
        let limit = ks_critical_99(n) + 2.0 * g.dx() / run.psi_final.position_std();
        out.check_below(&format!("{label}_ks_final"), ks, limit);
        writeln!(
            csv,
            "{tau:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{dh:.16e},{analytic:.16e},{ks:.16e},{limit:.16e}",
            distance / tau,
            ens.mean_w_m,
            ens.stderr_w_m,
            ens.mean_w_e,
            ens.stderr_w_e
        )?;
        ens.write_csv(out.file(&format!("{label}_work.csv"))?)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn equivariance(params: &Params, out: &mut Output) -> Result<()> {
    let n = params.usize("n-traj")?;
    let s0 = params.f64("sigma0")?;
    let t_final = params.f64("t-final")?;
    let dt = params.f64("dt")?;
    let omega = params.f64("omega")?;
    let distance = params.f64("distance")?;
    let seed = params.u64("seed")?;
    let units = Units::default();
    let g = grid(params)?;

    let steps = (t_final / dt).round() as usize;
    if !steps.is_multiple_of(3) {
        return Err(crate::Error::Config(format!(
            "t-final / dt = {steps} must be divisible by 3 (three checkpoints)"
        )));
    }
    let cases = [
        (
            "free",
            Hamiltonian1D::new(units, PotentialSpec::Free),
            Wavefunction::gaussian(g, 0.0, s0, 0.0),
        ),
        (
            "driven",
            dragged_hamiltonian(units, omega, distance, t_final),
            ho_eigenstates(&g, units, omega, 0.0, 0)?.states.remove(0),
        ),
    ];

    let mut csv = out.file("ks.csv")?;
    writeln!(csv, "protocol,t,ks,limit,n")?;
    for (k, (label, ham, psi0)) in cases.iter().enumerate() {
        let x0s = sample_quantum_equilibrium(psi0, n, sub_seed(seed, k as u64))?;
        let mut opts = TrajectoryOptions::new(dt, t_final);
        opts.record_stride = steps / 3;
        opts.snapshot_stride = Some(steps / 3);
        opts.exec = params.exec();
        let run = integrate_ensemble(psi0, ham, &x0s, &opts)?;

        let order: Vec<usize> = {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| x0s[a].total_cmp(&x0s[b]));
            idx
        };
        let mut crossings = 0usize;
        for snap in run.snapshots.iter().skip(1) {
            let t = snap.psi.time();
            let ks = equivariance_check(&snap.positions, &snap.psi)?;
            let limit = ks_critical_99(n) + 2.0 * g.dx() / snap.psi.position_std();
            out.check_below(&format!("{label}_ks_t{t:.3}"), ks, limit);
            writeln!(csv, "{label},{t:.16e},{ks:.16e},{limit:.16e},{n}")?;
            crossings += order
                .windows(2)
                .filter(|w| snap.positions[w[0]] > snap.positions[w[1]])
                .count();
        }
        out.check_at_most(&format!("{label}_order_violations"), crossings as f64, 0.0);

        // Recording is sparse here, so only the endpoint form of W^E is used.
        let w_e: Vec<f64> = run
            .trajectories
            .iter()
            .map(energetic_work)
            .collect::<Result<_>>()?;
        let (mean_w_e, se_w_e) = (mean(&w_e), std_error(&w_e));
        let dh = hamiltonian_expectation(&run.psi_final, ham) - hamiltonian_expectation(psi0, ham);
        out.check_at_most(
            &format!("{label}_mean_w_e_vs_delta_h"),
            (mean_w_e - dh).abs(),
            4.0 * se_w_e + ENERGY_FLOOR,
        );
        out.metric(&format!("{label}_mean_w_e"), mean_w_e)?;
        out.metric(&format!("{label}_stderr_w_e"), se_w_e)?;
        out.metric(&format!("{label}_delta_h"), dh)?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_path_matches_sigma_scaling() {
        let u = Units::default();
        let (x, _) = free_path(u, 0.7, 0.0, 0.7, 1.3);
        assert!((x - free_sigma(u, 0.7, 1.3)).abs() < 1e-15);
        // Velocity is the time derivative of the path.
        let h = 1e-5;
        let (xp, _) = free_path(u, 0.7, 0.4, 1.1, 1.3 + h);
        let (xm, _) = free_path(u, 0.7, 0.4, 1.1, 1.3 - h);
        let (_, v) = free_path(u, 0.7, 0.4, 1.1, 1.3);
        assert!(((xp - xm) / (2.0 * h) - v).abs() < 1e-9);
    }

    #[test]
    fn drag_energy_vanishes_for_whole_periods() {
        let tau = 2.0 * std::f64::consts::PI;
        assert!(drag_energy(1.0, 1.0, 2.0, tau).abs() < 1e-15);
        assert!((drag_energy(1.0, 1.0, 2.0, 0.5 * tau) - 2.0 * (2.0 / (0.5 * tau)).powi(2)).abs() < 1e-12);
    }
}

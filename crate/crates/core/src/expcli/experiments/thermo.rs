use std::io::Write;

use super::field::{decompose, energy_bookkeeping, DECOMPOSITION_TOL};
use super::sub_seed;
use crate::bohmdyn::{integrate_ensemble, sample_quantum_equilibrium, TrajectoryOptions};
use crate::expcli::{Output, Params};
use crate::field1d::{Grid1D, Hamiltonian1D, PotentialSpec, Units, Wavefunction};
use crate::statmech::{
    bohmian_jarzynski, classical_jarzynski, write_work_samples_csv, BohmJarzynskiSpec, CanonicalSpec,
    JarzynskiReport, ProtocolSpec,
};
use crate::workfun::{ensemble_work, WorkKind, WorkRecord};
use crate::Result;

const SIGMAS: f64 = 4.0;
/// A fast ramp must miss the Jarzynski value by more than this many
/// standard errors.
const BREAKDOWN_SIGMAS: f64 = 5.0;
/// `max |W − ΔH|` allowed for the leapfrog integrator.
const CLASSICAL_BOOKKEEPING_TOL: f64 = 1e-3;

fn report_checks(out: &mut Output, label: &str, r: &JarzynskiReport) -> Result<()> {
    out.check_below(&format!("{label}_gap_sigma"), r.gap_sigma().abs(), SIGMAS);
    // ⟨W⟩ ≥ ΔF up to the sampling error of ⟨W⟩.
    out.check_at_most(
        &format!("{label}_jensen_deficit"),
        r.delta_f - r.mean_work,
        SIGMAS * r.stderr_work,
    );
    out.json(&format!("{label}_jarzynski.json"), r)
}

pub fn classical(params: &Params, out: &mut Output) -> Result<()> {
    let beta = params.f64("beta")?;
    let mass = params.f64("mass")?;
    let omega = params.f64("omega")?;
    let distance = params.f64("distance")?;
    let n = params.usize("n")?;
    let dt = params.f64("dt")?;
    let seed = params.u64("seed")?;

    let mut protocols: Vec<(String, ProtocolSpec)> = params
        .list("durations")?
        .into_iter()
        .enumerate()
        .map(|(k, tau)| {
            Ok((
                format!("drag{k}"),
                ProtocolSpec::dragged_trap(omega, 0.0, distance, tau)?,
            ))
        })
        .collect::<Result<_>>()?;
    protocols.push((
        "ramp".into(),
        ProtocolSpec::stiffness_ramp(
            omega,
            params.f64("omega-final")?,
            params.f64("ramp-duration")?,
            false,
        )?,
    ));

    let mut csv = out.file("protocols.csv")?;
    writeln!(
        csv,
        "label,protocol,speed,estimate,exact,stderr,mean_work,delta_f,gap_sigma"
    )?;
    for (k, (label, proto)) in protocols.iter().enumerate() {
        let spec = CanonicalSpec::for_protocol(beta, mass, proto)?;
        let j = classical_jarzynski(&spec, proto, n, dt, sub_seed(seed, k as u64), params.exec())?;
        report_checks(out, label, &j.report)?;
        out.check_below(
            &format!("{label}_max_bookkeeping_error"),
            j.max_bookkeeping_error,
            CLASSICAL_BOOKKEEPING_TOL,
        );
        write_work_samples_csv(&j.samples, beta, out.file(&format!("{label}_samples.csv"))?)?;
        let r = &j.report;
        writeln!(
            csv,
            "{label},\"{}\",{:?},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.protocol,
            proto.speed,
            r.estimate,
            r.exact,
            r.stderr,
            r.mean_work,
            r.delta_f,
            r.gap_sigma()
        )?;
    }
    csv.flush()?;
    Ok(())
}

fn offset_grid(n: usize, half_width: f64) -> Result<Grid1D> {
    // Half-cell shift keeps the symmetric nodes of odd eigenstates off the
    // grid points.
    let dx = 2.0 * half_width / n as f64;
    Grid1D::new(n, -half_width + 0.5 * dx, dx)
}

pub fn bohm(params: &Params, out: &mut Output) -> Result<()> {
    let beta = params.f64("beta")?;
    let omega1 = params.f64("omega")?;
    let omega2 = params.f64("omega-final")?;
    let seed = params.u64("seed")?;
    let units = Units::default();
    let grid = offset_grid(params.usize("grid-n")?, params.f64("half-width")?)?;
    let base = BohmJarzynskiSpec {
        beta,
        units,
        protocol: ProtocolSpec::stiffness_ramp(omega1, omega2, params.f64("slow-duration")?, true)?,
        grid,
        n_traj: params.usize("n-traj")?,
        n_max: None,
        dt: params.f64("dt")?,
        psi_substeps: params.usize("psi-substeps")?,
        record_stride: params.usize("slow-stride")?,
        seed,
        exec: params.exec(),
    };

    // Quasi-static: W^E obeys Jarzynski.
    let slow = bohmian_jarzynski(&base)?;
    report_checks(out, "slow_w_e", &slow.w_e)?;
    out.json("slow_w_m_jarzynski.json", &slow.w_m)?;
    out.metric("slow_w_m_gap_sigma", slow.w_m.gap_sigma())?;
    out.check_at_most(
        "slow_mean_w_e_vs_delta_energy",
        (slow.mean_w_e - slow.delta_energy).abs(),
        SIGMAS * slow.stderr_mean_w_e + super::field::ENERGY_FLOOR,
    );
    write_work_samples_csv(
        &slow.samples(WorkKind::Energetic),
        beta,
        out.file("slow_w_e_samples.csv")?,
    )?;
    out.json("slow_states.json", &slow.states)?;

    // Fast: the W^E average misses e^{−βΔF}.
    let fast_spec = BohmJarzynskiSpec {
        protocol: ProtocolSpec::stiffness_ramp(omega1, omega2, params.f64("fast-duration")?, false)?,
        record_stride: 1,
        seed: sub_seed(seed, 1),
        ..base
    };
    let fast = bohmian_jarzynski(&fast_spec)?;
    out.json("fast_w_e_jarzynski.json", &fast.w_e)?;
    out.json("fast_w_m_jarzynski.json", &fast.w_m)?;
    out.check_above(
        "fast_w_e_abs_gap_sigma",
        fast.w_e.gap_sigma().abs(),
        BREAKDOWN_SIGMAS,
    );
    out.metric("fast_w_m_gap_sigma", fast.w_m.gap_sigma())?;
    out.check_at_most(
        "fast_mean_w_e_vs_delta_energy",
        (fast.mean_w_e - fast.delta_energy).abs(),
        SIGMAS * fast.stderr_mean_w_e + super::field::ENERGY_FLOOR,
    );
    let fast_records: Vec<WorkRecord> = fast.records.iter().map(|(_, r)| *r).collect();
    out.check_below(
        "fast_max_decomposition_residual",
        fast_records
            .iter()
            .map(|r| r.decomposition_residual().abs())
            .fold(0.0, f64::max),
        DECOMPOSITION_TOL,
    );
    write_work_samples_csv(
        &fast.samples(WorkKind::Energetic),
        beta,
        out.file("fast_w_e_samples.csv")?,
    )?;
    out.json("fast_states.json", &fast.states)?;

    let mut csv = out.file("regimes.csv")?;
    writeln!(
        csv,
        "regime,work_kind,estimate,exact,stderr,gap_sigma,mean_work,delta_f"
    )?;
    for (regime, r) in [("slow", &slow), ("fast", &fast)] {
        for kind in [WorkKind::Energetic, WorkKind::Mechanical] {
            let j = r.report(kind);
            writeln!(
                csv,
                "{regime},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                kind.label(),
                j.estimate,
                j.exact,
                j.stderr,
                j.gap_sigma(),
                j.mean_work,
                j.delta_f
            )?;
        }
    }
    csv.flush()?;

    // Free packet: the per-trajectory W^E distribution, reported without a
    // gate.
    let s0 = params.f64("free-sigma0")?;
    let t_free = params.f64("free-t-final")?;
    let free_grid = Grid1D::centered(params.usize("grid-n")?, 0.0, 3.0 * params.f64("half-width")?)?;
    let ham = Hamiltonian1D::new(units, PotentialSpec::Free);
    let psi0 = Wavefunction::gaussian(free_grid, 0.0, s0, 0.0);
    let x0s = sample_quantum_equilibrium(&psi0, params.usize("free-n-traj")?, sub_seed(seed, 2))?;
    let mut opts = TrajectoryOptions::new(params.f64("dt")?, t_free);
    opts.exec = params.exec();
    let run = integrate_ensemble(&psi0, &ham, &x0s, &opts)?;
    let ens = ensemble_work(decompose(&run)?, None)?;
    energy_bookkeeping(out, "free_packet", &ens, &psi0, &run.psi_final, &ham)?;
    ens.write_csv(out.file("free_packet_work.csv")?)?;
    let w_e: Vec<f64> = ens.per_traj.iter().map(|r| r.w_e).collect();
    out.metric(
        "free_packet_w_e_min",
        w_e.iter().copied().fold(f64::INFINITY, f64::min),
    )?;
    out.metric(
        "free_packet_w_e_max",
        w_e.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )?;
    Ok(())
}

use std::f64::consts::PI;
use std::io::Write;

use crate::bohmdyn::ehrenfest_quantum_force;
use crate::expcli::{Output, Params};
use crate::field1d::{
    ho_eigenstates, Grid1D, Hamiltonian1D, PotentialSpec, Propagator, SpectralOps, Units, Wavefunction,
};
use crate::workfun::power_split;
use crate::{Error, Result};

const EHRENFEST_TOL: f64 = 1e-8;
/// Quantum share of the power allowed once `λ_dB/L` is below
/// [`SEMICLASSICAL_RATIO`].
const QUANTUM_SHARE_TOL: f64 = 1e-2;
const SEMICLASSICAL_RATIO: f64 = 1e-2;

fn ehrenfest_packets() -> Result<Vec<(&'static str, Wavefunction, Hamiltonian1D)>> {
    let units = Units::default();
    let g = Grid1D::centered(1024, 0.0, 12.0)?;
    let trap = Hamiltonian1D::new(units, PotentialSpec::static_harmonic(1.0));
    let free = Hamiltonian1D::new(units, PotentialSpec::Free);
    let eig = ho_eigenstates(&g, units, 1.0, 0.0, 1)?;
    Ok(vec![
        ("ground", eig.states[0].clone(), trap),
        ("first_excited", eig.states[1].clone(), trap),
        (
            "displaced_squeezed",
            Wavefunction::gaussian(g, 1.5, 0.5, 0.0),
            trap,
        ),
        (
            "free_with_carrier",
            Wavefunction::gaussian(g, -0.5, 0.8, 1.5),
            free,
        ),
    ])
}

/// One point of the de Broglie sweep.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SweepPoint {
    pub ratio: f64,
    pub hbar: f64,
    pub grid_n: usize,
    pub classical: f64,
    pub quantum: f64,
}

impl SweepPoint {
    pub fn quantum_share(&self) -> f64 {
        (self.quantum / self.classical).abs()
    }
}

/// Squeezed packet released at rest from `x = L` in a unit-frequency trap,
/// integrated over a quarter period. `ħ` is set so that the de Broglie
/// wavelength at the peak momentum `mωL` is `ratio · L`.
pub(crate) fn sweep_point(
    ratio: f64,
    amplitude: f64,
    squeeze: f64,
    steps: usize,
    max_n: usize,
) -> Result<SweepPoint> {
    let (mass, omega) = (1.0, 1.0);
    let p_peak = mass * omega * amplitude;
    let hbar = ratio * amplitude * p_peak / (2.0 * PI);
    let sigma_g = (hbar / (2.0 * mass * omega)).sqrt();
    let sigma0 = squeeze * sigma_g;
    let (s_min, s_max) = if squeeze >= 1.0 {
        (sigma_g / squeeze, sigma0)
    } else {
        (sigma0, sigma_g / squeeze)
    };
    let half_width = amplitude + 12.0 * s_max;
    let k_need = (p_peak + 10.0 * hbar / (2.0 * s_min)) / hbar;
    let n_min = (1.5 * k_need * 2.0 * half_width / PI).ceil() as usize;
    let n = n_min.next_power_of_two().max(256);
    if n > max_n {
        return Err(Error::Config(format!(
            "lambda_dB/L = {ratio} needs {n} grid points, above max-grid-n = {max_n}"
        )));
    }
    let units = Units::new(hbar, mass)?;
    let grid = Grid1D::centered(n, 0.0, half_width)?;
    let ham = Hamiltonian1D::new(units, PotentialSpec::static_harmonic(omega));
    let dt = 0.5 * PI / omega / steps as f64;
    let ops = SpectralOps::new(&grid);
    let prop = Propagator::new(&ops, ham, dt)?;
    let mut psi = Wavefunction::gaussian(grid, amplitude, sigma0, 0.0);
    let mut snaps = Vec::with_capacity(steps + 1);
    snaps.push(psi.clone());
    for _ in 0..steps {
        prop.step(&mut psi)?;
        snaps.push(psi.clone());
    }
    let split = power_split(&snaps, &ham, dt)?;
    Ok(SweepPoint {
        ratio,
        hbar,
        grid_n: n,
        classical: split.classical,
        quantum: split.quantum,
    })
}

pub fn run(params: &Params, out: &mut Output) -> Result<()> {
    let mut csv = out.file("ehrenfest.csv")?;
    writeln!(csv, "packet,mean_dq_dx")?;
    for (label, psi, ham) in ehrenfest_packets()? {
        let f = ehrenfest_quantum_force(&psi, &ham);
        out.check_below(&format!("ehrenfest_{label}"), f.abs(), EHRENFEST_TOL);
        writeln!(csv, "{label},{f:.16e}")?;
    }
    csv.flush()?;

    let amplitude = params.f64("amplitude")?;
    let squeeze = params.f64("squeeze")?;
    let steps = params.usize("steps")?;
    let max_n = params.usize("max-grid-n")?;
    let mut csv = out.file("sweep.csv")?;
    writeln!(csv, "lambda_over_l,hbar,grid_n,classical,quantum,quantum_share")?;
    for ratio in params.list("ratios")? {
        let pt = sweep_point(ratio, amplitude, squeeze, steps, max_n)?;
        writeln!(
            csv,
            "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
            pt.ratio,
            pt.hbar,
            pt.grid_n,
            pt.classical,
            pt.quantum,
            pt.quantum_share()
        )?;
        if ratio < SEMICLASSICAL_RATIO {
            out.check_below(
                &format!("quantum_share_ratio_{ratio}"),
                pt.quantum_share(),
                QUANTUM_SHARE_TOL,
            );
        } else {
            out.metric(&format!("quantum_share_ratio_{ratio}"), pt.quantum_share())?;
        }
    }
    csv.flush()?;
    Ok(())
}

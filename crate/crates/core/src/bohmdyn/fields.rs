use crate::field1d::{Grid1D, Hamiltonian1D, SpectralOps, Wavefunction};
use crate::stats::CompensatedSum;
use crate::{Error, Result, C64};

/// Relative density below which a grid point counts as a node:
/// `|ψ|² < NODE_EPS · max|ψ|²`.
pub const NODE_EPS: f64 = 1e-8;

/// Densities below this fraction of the maximum are dropped from
/// density-weighted integrals. Far below it, round-off in the spectral
/// derivatives divided by `ψ` dominates the integrand.
const UNDERFLOW_EPS: f64 = 1e-24;

/// Bohmian fields of one wavefunction snapshot.
///
/// Masked points (`mask[j] == false`) carry values filled in from the
/// neighbouring valid points so the arrays can be interpolated; they are
/// never used in density-weighted integrals.
#[derive(Debug, Clone)]
pub struct BohmFields {
    grid: Grid1D,
    pub time: f64,
    pub mass: f64,
    pub density: Vec<f64>,
    pub r: Vec<f64>,
    pub grad_s: Vec<f64>,
    pub velocity: Vec<f64>,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
    pub dq_dx: Vec<f64>,
    pub force: Vec<f64>,
    pub e_local: Vec<f64>,
    pub de_dx: Vec<f64>,
    /// `∂E_local/∂t` at fixed `x`.
    pub de_dt: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Fields interpolated at an off-grid position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub velocity: f64,
    pub v: f64,
    pub q: f64,
    pub force: f64,
    pub e_local: f64,
    /// `dE_local/dt` along the guidance flow: `∂ₜE + v ∂ₓE`.
    pub de_dt_path: f64,
    /// The grid cell containing the position has a node-masked end point.
    pub masked: bool,
}

struct Derived {
    grad_s: f64,
    q: f64,
    dq_dx: f64,
    e_local: f64,
    de_dx: f64,
    de_dt: f64,
}

impl BohmFields {
    pub fn compute(psi: &Wavefunction, ham: &Hamiltonian1D) -> Result<Self> {
        Self::compute_with(psi, ham, &SpectralOps::new(psi.grid()))
    }

    pub fn compute_with(psi: &Wavefunction, ham: &Hamiltonian1D, ops: &SpectralOps) -> Result<Self> {
        let grid = *psi.grid();
        let n = grid.n_points();
        let t = psi.time();
        let hbar = ham.units.hbar;
        let mass = ham.units.mass;
        let amps = psi.amplitudes();

        let density: Vec<f64> = amps.iter().map(|z| z.norm_sqr()).collect();
        let rho_max = density.iter().copied().fold(0.0, f64::max);
        if !(rho_max > 0.0) {
            return Err(Error::AllMasked);
        }
        let mask: Vec<bool> = density.iter().map(|&d| d >= NODE_EPS * rho_max).collect();

        let d = ops.derivatives(amps, 3);
        let v: Vec<f64> = (0..n).map(|j| ham.v(grid.x(j), t)).collect();
        let h_psi = hamiltonian_apply(amps, &v, ops, hbar, mass);
        let h2_psi = hamiltonian_apply(&h_psi, &v, ops, hbar, mass);

        let mut grad_s = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut dq_dx = vec![0.0; n];
        let mut e_local = vec![0.0; n];
        let mut de_dx = vec![0.0; n];
        let mut de_dt = vec![0.0; n];
        for j in 0..n {
            if !mask[j] {
                continue;
            }
            let x = grid.x(j);
            let dv = Derived::at(
                amps[j],
                [d[0][j], d[1][j], d[2][j]],
                h_psi[j],
                h2_psi[j],
                ham.dv_dx(x, t),
                ham.dv_dt(x, t),
                v[j],
                hbar,
                mass,
            );
            grad_s[j] = dv.grad_s;
            q[j] = dv.q;
            dq_dx[j] = dv.dq_dx;
            e_local[j] = dv.e_local;
            de_dx[j] = dv.de_dx;
            de_dt[j] = dv.de_dt;
        }
        let mut force = vec![0.0; n];
        for j in (0..n).filter(|&j| mask[j]) {
            force[j] = -(ham.dv_dx(grid.x(j), t) + dq_dx[j]);
        }
        let gaps = ValidNeighbours::new(&mask);
        for arr in [
            &mut grad_s,
            &mut q,
            &mut dq_dx,
            &mut e_local,
            &mut de_dx,
            &mut de_dt,
            &mut force,
        ] {
            gaps.fill(arr);
        }
        let velocity: Vec<f64> = grad_s.iter().map(|g| g / mass).collect();
        Ok(Self {
            grid,
            time: t,
            mass,
            r: density.iter().map(|d| d.sqrt()).collect(),
            density,
            grad_s,
            velocity,
            v,
            q,
            dq_dx,
            force,
            e_local,
            de_dx,
            de_dt,
            mask,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn n_valid(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Pointwise quantum Hamilton–Jacobi residual
    /// `E_local − ((∇S)²/2m + V + Q)` on valid points.
    pub fn hj_residual_max(&self) -> f64 {
        (0..self.grid.n_points())
            .filter(|&j| self.mask[j])
            .map(|j| {
                let k = self.grad_s[j] * self.grad_s[j] / (2.0 * self.mass);
                (self.e_local[j] - (k + self.v[j] + self.q[j])).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `∫ f_j |ψ_j|² dx` over valid points.
    pub fn density_integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.grid.n_points())
            .filter(|&j| self.mask[j])
            .map(|j| self.density[j] * f(j))
            .collect::<CompensatedSum>()
            .value()
            * self.grid.dx()
    }

    /// Cubic (four-point Lagrange) interpolation of the fields at `x`;
    /// `v_at` gives the exact classical potential there.
    ///
    /// `x` must satisfy `x_min + dx ≤ x < x_max − 2dx`.
    pub fn sample(&self, x: f64, v_at: f64) -> FieldSample {
        let g = &self.grid;
        let s = (x - g.x_min()) / g.dx();
        let j0 = s.floor() as isize;
        let n = g.n_points() as isize;
        debug_assert!(j0 >= 1 && j0 + 2 < n, "stencil out of range at x = {x}");
        let j0 = j0.clamp(1, n - 3) as usize;
        let u = s - j0 as f64;
        let w = [
            -u * (u - 1.0) * (u - 2.0) / 6.0,
            (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
            -(u + 1.0) * u * (u - 2.0) / 2.0,
            (u + 1.0) * u * (u - 1.0) / 6.0,
        ];
        let idx = [j0 - 1, j0, j0 + 1, j0 + 2];
        let interp = |arr: &[f64]| -> f64 { (0..4).map(|i| w[i] * arr[idx[i]]).sum() };
        let velocity = interp(&self.velocity);
        let de_dx = interp(&self.de_dx);
        FieldSample {
            velocity,
            v: v_at,
            q: interp(&self.q),
            force: interp(&self.force),
            e_local: interp(&self.e_local),
            de_dt_path: interp(&self.de_dt) + velocity * de_dx,
            masked: !self.mask[j0] || !self.mask[j0 + 1],
        }
    }
}

impl Derived {
    #[allow(clippy::too_many_arguments)]
    fn at(
        psi: C64,
        d: [C64; 3],
        h_psi: C64,
        h2_psi: C64,
        dv_dx: f64,
        dv_dt: f64,
        v: f64,
        hbar: f64,
        mass: f64,
    ) -> Self {
        let a = d[0] / psi;
        let b = d[1] / psi;
        let c = d[2] / psi;
        let kin = hbar * hbar / (2.0 * mass);
        let db = c - a * b;
        let da = b - a * a;
        let e = h_psi / psi;
        let _ = v;
        Derived {
            grad_s: hbar * a.im,
            q: -kin * (b.re + a.im * a.im),
            dq_dx: -kin * (db.re + 2.0 * a.im * da.im),
            e_local: e.re,
            de_dx: -kin * db.re + dv_dx,
            de_dt: dv_dt + (h2_psi / psi - e * e).im / hbar,
        }
    }
}

fn hamiltonian_apply(psi: &[C64], v: &[f64], ops: &SpectralOps, hbar: f64, mass: f64) -> Vec<C64> {
    let mut out = ops.kinetic(psi, hbar, mass);
    for ((o, z), vj) in out.iter_mut().zip(psi).zip(v) {
        *o += z * vj;
    }
    out
}

/// Nearest valid point on each side of every grid point.
struct ValidNeighbours {
    mask: Vec<bool>,
    left: Vec<Option<usize>>,
    right: Vec<Option<usize>>,
}

impl ValidNeighbours {
    fn new(mask: &[bool]) -> Self {
        let n = mask.len();
        let mut left = vec![None; n];
        let mut right = vec![None; n];
        let mut last = None;
        for j in 0..n {
            if mask[j] {
                last = Some(j);
            }
            left[j] = last;
        }
        last = None;
        for j in (0..n).rev() {
            if mask[j] {
                last = Some(j);
            }
            right[j] = last;
        }
        Self {
            mask: mask.to_vec(),
            left,
            right,
        }
    }

    /// Masked points inside the support are filled linearly from the valid
    /// points on either side; masked tails copy the outermost valid value.
    fn fill(&self, arr: &mut [f64]) {
        for j in 0..arr.len() {
            if self.mask[j] {
                continue;
            }
            arr[j] = match (self.left[j], self.right[j]) {
                (Some(l), Some(r)) => {
                    let u = (j - l) as f64 / (r - l) as f64;
                    arr[l] + u * (arr[r] - arr[l])
                }
                (Some(l), None) => arr[l],
                (None, Some(r)) => arr[r],
                (None, None) => arr[j],
            };
        }
    }
}

/// `⟨∂ₓQ⟩_ψ = ∫ |ψ|² ∂ₓQ dx`. The node mask is not applied here:
/// density-weighting keeps near-node contributions finite, and cutting the
/// integral at the mask edge would leave a boundary term of order `ε_node`.
pub fn ehrenfest_quantum_force(psi: &Wavefunction, ham: &Hamiltonian1D) -> f64 {
    let ops = SpectralOps::new(psi.grid());
    let amps = psi.amplitudes();
    let d = ops.derivatives(amps, 3);
    let rho_max = amps.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let kin = ham.units.hbar * ham.units.hbar / (2.0 * ham.units.mass);
    let mut acc = CompensatedSum::new();
    for (j, &z) in amps.iter().enumerate() {
        let rho = z.norm_sqr();
        if rho <= UNDERFLOW_EPS * rho_max {
            continue;
        }
        let a = d[0][j] / z;
        let b = d[1][j] / z;
        let c = d[2][j] / z;
        let dq = -kin * ((c - a * b).re + 2.0 * a.im * (b - a * a).im);
        acc.add(rho * dq);
    }
    acc.value() * psi.grid().dx()
}

mod field;
mod quantum;
mod semiclassical;
mod thermo;

use super::{Output, Params};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Real,
    Positive,
    Count,
    /// Comma-separated positive reals.
    PositiveList,
    Exec,
    Text,
}

/// One schema entry. Fields without a default are required unless built
/// with [`ParamSpec::optional`].
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: Option<&'static str>,
    pub help: &'static str,
    pub required: bool,
}

impl ParamSpec {
    pub const fn new(
        name: &'static str,
        kind: ParamKind,
        default: Option<&'static str>,
        help: &'static str,
    ) -> Self {
        Self {
            name,
            kind,
            default,
            help,
            required: default.is_none(),
        }
    }

    pub const fn optional(name: &'static str, kind: ParamKind, help: &'static str) -> Self {
        Self {
            name,
            kind,
            default: None,
            help,
            required: false,
        }
    }
}

pub type RunFn = fn(&Params, &mut Output) -> Result<()>;

pub struct Experiment {
    pub name: &'static str,
    /// Topic tags for `list`.
    pub topics: &'static [&'static str],
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
    pub run: RunFn,
}

impl std::fmt::Debug for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Experiment").field("name", &self.name).finish()
    }
}

const fn p(name: &'static str, kind: ParamKind, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec::new(name, kind, Some(default), help)
}

use ParamKind::{Count, Positive, PositiveList, Real};

static REGISTRY: [Experiment; 10] = [
    Experiment {
        name: "exp-ngt",
        topics: &["two-level counterexample", "work operators"],
        summary: "unitary-condition vs TPM work operators of the two-level example",
        params: &[
            p("eps", Real, "1", "initial excited-level energy"),
            p("eps-prime", Real, "2", "final excited-level energy"),
            p("n-random", Count, "20", "random (eps, eps') pairs"),
            p("tol", Positive, "1e-12", "entrywise tolerance"),
        ],
        run: quantum::ngt,
    },
    Experiment {
        name: "exp-dephasing",
        topics: &["dephasing reconciliation", "decoherence"],
        summary: "expected work of the dephased state vs TPM expected work",
        params: &[
            p("n-pairs", Count, "200", "random (process, state) pairs"),
            p("dim-min", Count, "2", "smallest Hilbert-space dimension"),
            p("dim-max", Count, "8", "largest Hilbert-space dimension"),
            p("tol", Positive, "1e-10", "agreement tolerance"),
        ],
        run: quantum::dephasing,
    },
    Experiment {
        name: "exp-tpm-jarzynski",
        topics: &["two-point measurement", "jarzynski equality"],
        summary: "TPM exponential work average against Z'/Z",
        params: &[
            p("n-specs", Count, "100", "random processes"),
            p("dim-min", Count, "2", "smallest Hilbert-space dimension"),
            p("dim-max", Count, "8", "largest Hilbert-space dimension"),
            p("betas", PositiveList, "0.1,1,5", "inverse temperatures"),
            p("tol", Positive, "1e-12", "absolute tolerance"),
        ],
        run: quantum::tpm_jarzynski_sweep,
    },
    Experiment {
        name: "exp-stationary",
        topics: &["stationary states", "bohmian trajectories"],
        summary: "trajectories in the oscillator ground state do no work",
        params: &[
            p("omega", Positive, "1", "trap frequency"),
            p("grid-n", Count, "512", "grid points (power of two)"),
            p("half-width", Positive, "12", "grid half-width"),
            p("dt", Positive, "0.01", "time step"),
            p("t-final", Positive, "2", "duration"),
            p("psi-substeps", Count, "50", "split steps per half step"),
            p("n-traj", Count, "50", "trajectories"),
            p("tol", Positive, "1e-8", "work and displacement tolerance"),
        ],
        run: field::stationary,
    },
    Experiment {
        name: "exp-free-packet",
        topics: &[
            "free gaussian",
            "mechanical and energetic work",
            "work decomposition",
        ],
        summary: "free Gaussian ensemble: energy theorem, scaling law, decomposition",
        params: &[
            p(
                "sigma0",
                Positive,
                "1",
                "initial position spread (std of |psi|^2)",
            ),
            p("k0", Real, "0", "carrier wavenumber"),
            p("grid-n", Count, "1024", "grid points (power of two)"),
            p("half-width", Positive, "30", "grid half-width"),
            p("t-final", Positive, "2", "duration"),
            p("dt", Positive, "0.01", "time step"),
            p(
                "dt-coarse",
                Positive,
                "0.2",
                "coarse step of the dt-halving study",
            ),
            p("n-traj", Count, "100", "trajectories"),
        ],
        run: field::free_packet,
    },
    Experiment {
        name: "exp-dragged-trap",
        topics: &["driven work", "work decomposition", "ensemble energy"],
        summary: "ground state of a harmonic trap dragged at several speeds",
        params: &[
            p("omega", Positive, "1", "trap frequency"),
            p("distance", Real, "2", "drag distance"),
            p("durations", PositiveList, "0.5,2,6", "drag durations"),
            p("grid-n", Count, "1024", "grid points (power of two)"),
            p("half-width", Positive, "12", "grid half-width"),
            p("dt", Positive, "0.01", "time step"),
            p("psi-substeps", Count, "8", "split steps per half step"),
            p("n-traj", Count, "1000", "trajectories per speed"),
        ],
        run: field::dragged_trap,
    },
    Experiment {
        name: "exp-jarzynski-classical",
        topics: &["jarzynski equality", "classical oscillator"],
        summary: "classical Jarzynski estimator for dragged and stiffened traps",
        params: &[
            ParamSpec::new("beta", Positive, None, "inverse temperature"),
            p("mass", Positive, "1", "particle mass"),
            p("omega", Positive, "1", "initial trap frequency"),
            p("distance", Real, "2", "drag distance"),
            p(
                "durations",
                PositiveList,
                "0.2,2,20",
                "drag durations (fast to slow)",
            ),
            p(
                "omega-final",
                Positive,
                "2",
                "final frequency of the stiffness ramp",
            ),
            p("ramp-duration", Positive, "1", "stiffness ramp duration"),
            p("n", Count, "10000", "samples per protocol"),
            p("dt", Positive, "0.005", "leapfrog step"),
        ],
        run: thermo::classical,
    },
    Experiment {
        name: "exp-jarzynski-bohm",
        topics: &[
            "jarzynski equality",
            "bohmian work",
            "quasi-static vs fast driving",
        ],
        summary: "Bohmian W^E and W^M Jarzynski averages for slow and fast stiffness ramps",
        params: &[
            p("beta", Positive, "2", "inverse temperature"),
            p("omega", Positive, "1", "initial frequency"),
            p("omega-final", Positive, "2", "final frequency"),
            p(
                "slow-duration",
                Positive,
                "20",
                "quasi-static ramp duration (smooth schedule)",
            ),
            p(
                "fast-duration",
                Positive,
                "0.1",
                "fast ramp duration (linear schedule)",
            ),
            p("grid-n", Count, "1024", "grid points (power of two)"),
            p("half-width", Positive, "10", "grid half-width"),
            p("dt", Positive, "0.01", "time step"),
            p("psi-substeps", Count, "4", "split steps per half step"),
            p("slow-stride", Count, "100", "record stride of the slow ramp"),
            p("n-traj", Count, "2000", "trajectories per eigenstate"),
            p("free-sigma0", Positive, "1", "spread of the free packet"),
            p("free-t-final", Positive, "2", "duration of the free packet run"),
            p("free-n-traj", Count, "1000", "trajectories of the free packet"),
        ],
        run: thermo::bohm,
    },
    Experiment {
        name: "exp-semiclassical",
        topics: &["ehrenfest theorem", "power split", "semiclassical limit"],
        summary: "mean quantum force and the quantum share of the power vs de Broglie ratio",
        params: &[
            p(
                "ratios",
                PositiveList,
                "1,0.3,0.1,0.03,0.01,0.005,0.002",
                "lambda_dB / L values",
            ),
            p("amplitude", Positive, "1", "initial displacement L"),
            p(
                "squeeze",
                Positive,
                "1.5",
                "initial width over ground-state width",
            ),
            p("steps", Count, "600", "time steps over a quarter period"),
            p("max-grid-n", Count, "16384", "largest grid allowed"),
        ],
        run: semiclassical::run,
    },
    Experiment {
        name: "exp-equivariance",
        topics: &["quantum equilibrium", "equivariance", "ensemble energy"],
        summary: "KS distance of trajectory positions to |psi(t)|^2, free and driven",
        params: &[
            p("n-traj", Count, "10000", "trajectories per protocol"),
            p("sigma0", Positive, "1", "free packet spread"),
            p("t-final", Positive, "3", "duration"),
            p("dt", Positive, "0.01", "time step"),
            p("omega", Positive, "1", "driven trap frequency"),
            p("distance", Real, "2", "drag distance of the driven trap"),
            p("grid-n", Count, "1024", "grid points (power of two)"),
            p("half-width", Positive, "20", "grid half-width"),
        ],
        run: field::equivariance,
    },
];

pub fn registry() -> &'static [Experiment] {
    &REGISTRY
}

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Independent stream index for job `k` of a run seeded with `seed`.
pub(crate) fn sub_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k)
}

//! Scenario runner: named verification suites driven by a config file,
//! producing machine-readable reports.
//!
//! Each suite bundles the checks of one capability area. A run writes
//! `summary.json` (per-check pass/fail, measured values, bounds) and fixed-
//! column CSV artifacts into the configured output directory. Report bytes
//! are deterministic for a given config; wall-clock information goes to a
//! separate `run_metadata.json` so repeated runs stay byte-identical.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{
    classical_limit_ladder, conjugate_momentum, covariant_hamiltonian_densities,
    energy_functional_derivative, functional_poisson_bracket, log_log_slope,
    point_evaluation_derivative, solve_klein_gordon, LagrangianSpec, LatticeField,
    SurfaceFieldData, SurfaceParameterization,
};
use crate::config::Tolerances;
use crate::dynamics::{
    scattering_operator_hilbert, scattering_operator_star, PotentialSpec, PulseShape,
    QuadraticHamiltonian,
};
use crate::error::{Error, Result};
use crate::green::{self, GreenRequest};
use crate::moyal::{self, StarMethod};
use crate::perturbation::{
    kernel_energy_transform, pauli_jordan_kernel, star_dyson, wick_expand, ContractionKernel,
    KernelName, TimeGrid,
};
use crate::phase_space::{
    weyl_quantize, weyl_symbol_of, OperatorMatrix, PhaseSpaceGrid, Symbol, WaveFunction,
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// The seven runnable suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Algebra,
    Scattering,
    Causality,
    Green,
    PvKernel,
    ClassicalLimit,
    Covariant,
}

impl SuiteName {
    pub fn all() -> [SuiteName; 7] {
        [
            SuiteName::Algebra,
            SuiteName::Scattering,
            SuiteName::Causality,
            SuiteName::Green,
            SuiteName::PvKernel,
            SuiteName::ClassicalLimit,
            SuiteName::Covariant,
        ]
    }

    pub fn description(self) -> &'static str {
        match self {
            SuiteName::Algebra => {
                "Weyl round trip, star vs operator product, associativity, hbar-scaling slopes"
            }
            SuiteName::Scattering => {
                "scattering-operator unitarity, route agreement, step-convergence orders"
            }
            SuiteName::Causality => {
                "independence of the scattering ratio from early-time potential variations"
            }
            SuiteName::Green => {
                "one- and two-point Green functions vs closed forms, permutation symmetry"
            }
            SuiteName::PvKernel => {
                "star-Dyson vs Wick(PV) identity, first-order vertices, PV energy transform"
            }
            SuiteName::ClassicalLimit => {
                "conjugated observables vs the classical Duffing scattering map over an hbar ladder"
            }
            SuiteName::Covariant => {
                "covariant momentum/Hamiltonian densities on flat and tilted surfaces, brackets"
            }
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SuiteName::Algebra => "algebra",
            SuiteName::Scattering => "scattering",
            SuiteName::Causality => "causality",
            SuiteName::Green => "green",
            SuiteName::PvKernel => "pv-kernel",
            SuiteName::ClassicalLimit => "classical-limit",
            SuiteName::Covariant => "covariant",
        };
        f.write_str(s)
    }
}

/// Phase-space grid parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub half_extent: f64,
    pub points: usize,
    pub hbar: f64,
    /// Ladder used by the hbar-scaling and classical-limit studies.
    pub hbar_ladder: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_extent: 10.0, points: 128, hbar: 1.0, hbar_ladder: vec![0.4, 0.2, 0.1, 0.05] }
    }
}

/// One pulse envelope: `peak * (1 - u^2)^3` on `|u| < 1`, `u = (t-center)/width`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub peak: f64,
    pub center: f64,
    pub width: f64,
}

impl PulseConfig {
    fn shape(&self) -> PulseShape {
        PulseShape { amplitude: self.peak, center: self.center, width: self.width }
    }
}

/// Time window plus quartic (`g`) and linear (`j`) pulse envelopes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub window: (f64, f64),
    pub quartic: Vec<PulseConfig>,
    pub linear: Vec<PulseConfig>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { window: (-0.5, 0.5), quartic: Vec::new(), linear: Vec::new() }
    }
}

impl PotentialConfig {
    pub fn to_spec(&self) -> PotentialSpec {
        let mut v = PotentialSpec::free(self.window);
        v.quartic.extend(self.quartic.iter().map(PulseConfig::shape));
        v.linear.extend(self.linear.iter().map(PulseConfig::shape));
        v
    }
}

/// Step counts and differencing parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub hilbert_steps: usize,
    pub star_steps: usize,
    /// Midpoint nodes of the formal time grid (pv-kernel suite).
    pub time_nodes: usize,
    /// Coarsest differencing amplitude for Green-function stencils.
    pub green_epsilon: f64,
    /// Coarsest source width for Green-function stencils.
    pub green_sigma: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            hilbert_steps: 1000,
            star_steps: 400,
            time_nodes: 16,
            green_epsilon: 0.1,
            green_sigma: 0.2,
        }
    }
}

/// A full scenario: which suite to run, on what grid, with what potential,
/// solver parameters, and tolerances, writing where.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub suite: SuiteName,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: GridConfig,
    /// Optional; suites that need a potential fall back to a documented
    /// built-in when absent.
    #[serde(default)]
    pub potential: Option<PotentialConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Seed for the deterministic random symbols of the algebra suite.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Number of random round-trip samples in the algebra suite.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_seed() -> u64 {
    7
}

fn default_samples() -> usize {
    50
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn grid(&self) -> Result<PhaseSpaceGrid> {
        PhaseSpaceGrid::new(self.grid.half_extent, self.grid.points, self.grid.hbar)
    }
}

/// The config-file schema, printed by `wmlab print-schema`.
pub const CONFIG_SCHEMA: &str = r#"Scenario config (TOML). Unknown keys are rejected.

suite        (required) one of: algebra | scattering | causality | green |
             pv-kernel | classical-limit | covariant
output_dir   (required) directory for summary.json, run_metadata.json, CSVs
seed         integer, random-symbol seed for the algebra suite   [default 7]
samples      round-trip sample count for the algebra suite       [default 50]

[grid]
half_extent  phase-space box half width L                        [default 10.0]
points       grid points per axis N                              [default 128]
hbar         Planck constant of the base grid                    [default 1.0]
hbar_ladder  ladder for scaling studies            [default [0.4,0.2,0.1,0.05]]

[potential]              (optional; suites substitute a documented default)
window       = [t1, t2]                                [default [-0.5, 0.5]]
[[potential.quartic]]    any number of quartic-coupling pulses g(t)
peak = 0.1   center = 0.0   width = 0.3
[[potential.linear]]     any number of linear-source pulses j(t)
peak = 0.2   center = 0.0   width = 0.3
             each pulse is peak*(1-u^2)^3, u = (t-center)/width, |u| < 1

[solver]
hilbert_steps  time steps of the Hilbert-route propagator        [default 1000]
star_steps     time steps of the star-route integrator           [default 400]
time_nodes     midpoint nodes of the pv-kernel time grid         [default 16]
green_epsilon  coarsest Green-function stencil amplitude         [default 0.1]
green_sigma    coarsest Green-function source width              [default 0.2]

[tolerances]   any field of the tolerance table (see its docs), e.g.
round_trip = 1e-10
correspondence = 1e-8

Report files: summary.json lists every check with its measured value, bounds
and pass/fail; per-check CSV columns are fixed per suite (see the annotated
example configs shipped in scenarios/). Exit codes of `wmlab run`:
0 all checks pass, 1 at least one check failed, 2 config error, 3 runtime
error. WMLAB_WORKERS caps the worker-thread count.
"#;

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// One named check: `passed` iff `measured` lies within `[lower, upper]`
/// (missing bounds are unbounded).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub passed: bool,
}

impl CheckResult {
    pub fn below(name: &str, measured: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            lower: None,
            upper: Some(upper),
            passed: measured.is_finite() && measured <= upper,
        }
    }

    pub fn within(name: &str, measured: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            lower: Some(lower),
            upper: Some(upper),
            passed: measured.is_finite() && measured >= lower && measured <= upper,
        }
    }

    pub fn above(name: &str, measured: f64, lower: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            lower: Some(lower),
            upper: None,
            passed: measured.is_finite() && measured >= lower,
        }
    }
}

/// Everything a suite produced: checks plus named CSV artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub all_passed: bool,
    pub checks: Vec<CheckResult>,
    /// File names of the CSV artifacts written next to summary.json.
    pub artifacts: Vec<String>,
}

struct SuiteOutput {
    checks: Vec<CheckResult>,
    /// (file name, file contents)
    artifacts: Vec<(String, String)>,
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// Run the configured suite and write `summary.json`, the CSV artifacts and
/// `run_metadata.json` into the output directory. The returned report is
/// exactly what `summary.json` contains.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SuiteReport> {
    let started = std::time::Instant::now();
    let output = match config.suite {
        SuiteName::Algebra => algebra_suite(config)?,
        SuiteName::Scattering => scattering_suite(config)?,
        SuiteName::Causality => causality_suite(config)?,
        SuiteName::Green => green_suite(config)?,
        SuiteName::PvKernel => pv_kernel_suite(config)?,
        SuiteName::ClassicalLimit => classical_limit_suite(config)?,
        SuiteName::Covariant => covariant_suite(config)?,
    };

    let report = SuiteReport {
        suite: config.suite,
        all_passed: output.checks.iter().all(|c| c.passed),
        checks: output.checks,
        artifacts: output.artifacts.iter().map(|(name, _)| name.clone()).collect(),
    };

    fs::create_dir_all(&config.output_dir)?;
    for (name, contents) in &output.artifacts {
        fs::write(config.output_dir.join(name), contents)?;
    }
    let mut summary = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    summary.push('\n');
    fs::write(config.output_dir.join("summary.json"), summary)?;

    // wall-clock data is deliberately not part of the deterministic report
    let metadata = format!(
        "{{\n  \"wall_seconds\": {},\n  \"unix_timestamp\": {}\n}}\n",
        started.elapsed().as_secs_f64(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    );
    fs::write(config.output_dir.join("run_metadata.json"), metadata)?;

    Ok(report)
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Largest coherent-state matrix-element deviation between two operators;
/// the weak-sense distance used wherever the periodic-box wrap makes
/// pointwise sup norms meaningless.
fn weak_distance(g: PhaseSpaceGrid, a: &OperatorMatrix, b: &OperatorMatrix) -> Result<f64> {
    let pts = [(0.0, 0.0), (1.0, 0.5), (-0.8, 1.2)];
    let inner = |x: &WaveFunction, y: &WaveFunction| {
        x.values().iter().zip(y.values().iter()).map(|(u, v)| u.conj() * v).sum::<Complex64>()
    };
    let mut worst = 0.0f64;
    for &(q1, p1) in &pts {
        for &(q2, p2) in &pts {
            let bra = WaveFunction::coherent(g, q1, p1, 1.0, 1.0);
            let ket = WaveFunction::coherent(g, q2, p2, 1.0, 1.0);
            let ma = inner(&bra, &a.apply(&ket)?);
            let mb = inner(&bra, &b.apply(&ket)?);
            worst = worst.max((ma - mb).norm());
        }
    }
    Ok(worst)
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// algebra
// ---------------------------------------------------------------------------

fn algebra_suite(cfg: &ScenarioConfig) -> Result<SuiteOutput> {
    let grid = cfg.grid()?;
    let tol = &cfg.tolerances;
    let n = cfg.grid.points;
    let max_freq = (n / 6).max(1);
    let mut checks = Vec::new();

    // Weyl round trip over random band-limited symbols.
    let mut worst_rt = 0.0f64;
    for i in 0..cfg.samples {
        let sym = Symbol::random_band_limited(grid, max_freq, cfg.seed.wrapping_add(i as u64), false);
        let back = weyl_symbol_of(&weyl_quantize(&sym));
        worst_rt = worst_rt.max(back.linf_distance(&sym)?);
    }
    checks.push(CheckResult::below("weyl-round-trip", worst_rt, tol.round_trip));

    // Star product vs the symbol of the operator product, and associativity.
    let mut worst_corr = 0.0f64;
    let mut worst_assoc = 0.0f64;
    for i in 0..3u64 {
        let f = Symbol::random_band_limited(grid, max_freq, cfg.seed.wrapping_add(100 + 3 * i), false);
        let g = Symbol::random_band_limited(grid, max_freq, cfg.seed.wrapping_add(101 + 3 * i), false);
        let h = Symbol::random_band_limited(grid, max_freq, cfg.seed.wrapping_add(102 + 3 * i), false);
        let star_fg = moyal::star(&f, &g, StarMethod::SpectralIntegral)?;
        let op_fg = weyl_symbol_of(&weyl_quantize(&f).matmul(&weyl_quantize(&g))?);
        worst_corr = worst_corr.max(star_fg.linf_distance(&op_fg)?);
        let left = moyal::star(&star_fg, &h, StarMethod::SpectralIntegral)?;
        let right = moyal::star(
            &f,
            &moyal::star(&g, &h, StarMethod::SpectralIntegral)?,
            StarMethod::SpectralIntegral,
        )?;
        worst_assoc = worst_assoc.max(left.linf_distance(&right)?);
    }
    checks.push(CheckResult::below("star-vs-operator-product", worst_corr, tol.correspondence));
    checks.push(CheckResult::below("star-associativity", worst_assoc, tol.associativity));

    // hbar scaling: commutativity defect ~ hbar, bracket-vs-Poisson ~ hbar^2.
    // Fixed smooth observables on a balanced box L = sqrt(N pi hbar / 2):
    // the momentum extent of the lattice scales with hbar at fixed L, so a
    // fixed box would change the represented functions between rungs.
    let ladder = &cfg.grid.hbar_ladder;
    let mut star_errs = Vec::new();
    let mut bracket_errs = Vec::new();
    for &hbar in ladder {
        let g = PhaseSpaceGrid::new((n as f64 * std::f64::consts::PI * hbar / 2.0).sqrt(), n, hbar)?;
        let f1 = Symbol::from_fn(g, |q, p| {
            Complex64::new((-2.0 * ((q - 0.3) * (q - 0.3) + p * p)).exp() * (1.0 + 0.5 * q), 0.0)
        });
        let f2 = Symbol::from_fn(g, |q, p| {
            Complex64::new((-2.0 * (q * q + (p - 0.2) * (p - 0.2))).exp() * (1.0 - 0.3 * p), 0.0)
        });
        let star = moyal::star(&f1, &f2, StarMethod::SpectralIntegral)?;
        let pointwise = f1.mul_pointwise(&f2)?;
        star_errs.push(star.linf_distance(&pointwise)?);
        let bracket = moyal::moyal_bracket(&f1, &f2, StarMethod::SpectralIntegral)?;
        let poisson = moyal::poisson_bracket(&f1, &f2)?;
        bracket_errs.push(bracket.linf_distance(&poisson)?);
    }
    // the coarsest rung is pre-asymptotic; estimate from the finest halving
    let k = ladder.len();
    let halvings = (ladder[k - 2] / ladder[k - 1]).log2();
    let star_slope = (star_errs[k - 2] / star_errs[k - 1]).log2() / halvings;
    let bracket_slope = (bracket_errs[k - 2] / bracket_errs[k - 1]).log2() / halvings;
    checks.push(CheckResult::within("commutativity-defect-slope", star_slope, 0.9, 1.1));
    checks.push(CheckResult::within("bracket-vs-poisson-slope", bracket_slope, 1.8, 2.2));

    let scaling_csv = csv(
        "hbar,star_minus_pointwise,bracket_minus_poisson",
        ladder
            .iter()
            .zip(star_errs.iter().zip(bracket_errs.iter()))
            .map(|(h, (a, b))| format!("{h},{a},{b}")),
    );
    Ok(SuiteOutput { checks, artifacts: vec![("hbar-scaling.csv".into(), scaling_csv)] })
}

// ---------------------------------------------------------------------------
// scattering
// ---------------------------------------------------------------------------

fn scattering_suite(cfg: &ScenarioConfig) -> Result<SuiteOutput> {
    let grid = cfg.grid()?;
    let tol = &cfg.tolerances;
    let h0 = QuadraticHamiltonian::oscillator();
    let v = cfg
        .potential
        .as_ref()
        .map(PotentialConfig::to_spec)
        .unwrap_or_else(|| {
            let mut v = PotentialSpec::free((-0.5, 0.5));
            v.quartic.push(PulseShape { amplitude: 0.1, center: 0.0, width: 0.3 });
            v
        });
    let mut checks = Vec::new();

    let s_hil = scattering_operator_hilbert(grid, &h0, &v, cfg.solver.hilbert_steps)?;

    // Unitarity: the Hilbert route is a product of exactly unitary Cayley
    // steps, checked at the operator level; the star route is checked with
    // the star product on the symbol, sup norm over the whole box.
    let defect_hil = weyl_quantize(&s_hil).unitarity_defect();
    checks.push(CheckResult::below("unitarity-defect-hilbert", defect_hil, tol.unitarity));

    // The star route refuses to run when the transported interaction pushes
    // the symbol past the band guard; on the default box the quartic phase
    // at the corner exceeds the Nyquist frequency, so that refusal shows up
    // as failed checks (measured NaN) rather than a crash.
    match scattering_operator_star(grid, &h0, &v, cfg.solver.star_steps) {
        Ok(s_star) => {
            let defect_star = moyal::unitarity_defect(&s_star);
            checks.push(CheckResult::below("unitarity-defect-star", defect_star, tol.unitarity));

            // Route agreement: sup norm over the whole box and the inner
            // half. The sup-norm bound is not attainable for anharmonic
            // potentials: the two routes quantize the interaction on
            // different geometries (periodic box vs transported line
            // polynomial) and disagree at O(1) in a boundary layer; the
            // interior and weak-sense numbers carry the physics.
            let route_sup = s_hil.linf_distance(&s_star)?;
            checks.push(CheckResult::below("route-agreement-sup", route_sup, tol.route_equivalence));
            let route_interior = s_hil.linf_distance_interior(&s_star, 0.5)?;
            checks.push(CheckResult::below("route-agreement-interior", route_interior, 5e-3));
            let route_weak = weak_distance(grid, &weyl_quantize(&s_hil), &weyl_quantize(&s_star))?;
            checks.push(CheckResult::below("route-agreement-weak", route_weak, tol.route_equivalence));
        }
        Err(Error::BandLimit { .. }) => {
            for name in [
                "unitarity-defect-star",
                "route-agreement-sup",
                "route-agreement-interior",
                "route-agreement-weak",
            ] {
                checks.push(CheckResult::below(name, f64::NAN, tol.unitarity));
            }
        }
        Err(e) => return Err(e),
    }

    // Step-convergence orders, each route against a fine reference of the
    // same route, on a fixed small grid (the orders are grid-independent).
    let cg = PhaseSpaceGrid::new(8.0, 48, 1.0)?;
    let mut cv = PotentialSpec::free((-0.5, 0.5));
    cv.quartic.push(PulseShape { amplitude: 0.1, center: 0.0, width: 0.2 });
    let mut rows = Vec::new();
    let hil_ref = scattering_operator_hilbert(cg, &h0, &cv, 4000)?;
    let hil_steps = [250usize, 500, 1000];
    let mut hil_errs = Vec::new();
    for &steps in &hil_steps {
        let e = scattering_operator_hilbert(cg, &h0, &cv, steps)?.linf_distance(&hil_ref)?;
        rows.push(format!("hilbert,{steps},{e}"));
        hil_errs.push(e);
    }
    let star_ref = scattering_operator_star(cg, &h0, &cv, 6400)?;
    let star_steps = [200usize, 400, 800];
    let mut star_errs = Vec::new();
    for &steps in &star_steps {
        let e = scattering_operator_star(cg, &h0, &cv, steps)?.linf_distance(&star_ref)?;
        rows.push(format!("star,{steps},{e}"));
        star_errs.push(e);
    }
    let dts_h: Vec<f64> = hil_steps.iter().map(|&s| 1.0 / s as f64).collect();
    let dts_s: Vec<f64> = star_steps.iter().map(|&s| 1.0 / s as f64).collect();
    checks.push(CheckResult::within(
        "hilbert-convergence-order",
        log_log_slope(&dts_h, &hil_errs),
        1.8,
        2.2,
    ));
    checks.push(CheckResult::within(
        "star-convergence-order",
        log_log_slope(&dts_s, &star_errs),
        3.5,
        4.5,
    ));

    let conv_csv = csv("route,steps,error", rows);
    Ok(SuiteOutput { checks, artifacts: vec![("step-convergence.csv".into(), conv_csv)] })
}

// ---------------------------------------------------------------------------
// causality
// ---------------------------------------------------------------------------

/// V1 and V2 agree (vanish) before t = 0 and differ afterwards; the
/// returned closure adds a shared early-time variation. All amplitudes
/// carry the common scale.
fn causality_potentials(
    scale: f64,
) -> (PotentialSpec, PotentialSpec, impl Fn(&PotentialSpec) -> PotentialSpec) {
    let window = (-1.0, 1.0);
    let mut v1 = PotentialSpec::free(window);
    v1.quartic.push(PulseShape { amplitude: 0.08 * scale, center: 0.5, width: 0.3 });
    let mut v2 = PotentialSpec::free(window);
    v2.linear.push(PulseShape { amplitude: 0.3 * scale, center: 0.5, width: 0.3 });
    let early_g = PulseShape { amplitude: 0.08 * scale, center: -0.5, width: 0.3 };
    let early_j = PulseShape { amplitude: 0.2 * scale, center: -0.5, width: 0.3 };
    let perturb = move |v: &PotentialSpec| {
        let mut out = v.clone();
        out.quartic.push(early_g);
        out.linear.push(early_j);
        out
    };
    (v1, v2, perturb)
}

fn causality_suite(cfg: &ScenarioConfig) -> Result<SuiteOutput> {
    let grid = cfg.grid()?;
    let h0 = QuadraticHamiltonian::oscillator();
    let steps = cfg.solver.hilbert_steps;
    let one = Symbol::constant(grid, Complex64::new(1.0, 0.0));
    let mut checks = Vec::new();
    let mut rows = Vec::new();

    // Operator-level ratio S(V1) S(V2)^dag: the shared early factor cancels
    // exactly (the propagator is a product of exactly unitary Cayley steps).
    {
        let scale = 0.3;
        let (v1, v2, perturb) = causality_potentials(scale);
        let ratio = |a: &PotentialSpec, b: &PotentialSpec| -> Result<Symbol> {
            let sa = weyl_quantize(&scattering_operator_hilbert(grid, &h0, a, steps)?);
            let sb = weyl_quantize(&scattering_operator_hilbert(grid, &h0, b, steps)?);
            Ok(weyl_symbol_of(&sa.matmul(&sb.adjoint())?))
        };
        let bare = ratio(&v1, &v2)?;
        let dressed = ratio(&perturb(&v1), &perturb(&v2))?;
        let residual = bare.linf_distance(&dressed)?;
        let signal = bare.linf_distance(&one)?;
        rows.push(format!("operator,{scale},{residual},{signal}"));
        checks.push(CheckResult::below("operator-ratio-residual", residual, 1e-9));
        checks.push(CheckResult::above("operator-ratio-signal", signal, 0.1));
    }

    // Star-algebra ratio S(V1) * conj(S(V2)): the spectral star quadrature
    // leaks a fixed ~1% of the scattered signal into the residual at any
    // amplitude (the S phases ring at the box wrap), so the absolute bound
    // holds for gentle pulses, with the ratio well above the leak.
    {
        let scale = 1e-4;
        let (v1, v2, perturb) = causality_potentials(scale);
        let ratio = |a: &PotentialSpec, b: &PotentialSpec| -> Result<Symbol> {
            let sa = scattering_operator_hilbert(grid, &h0, a, steps)?;
            let sb = scattering_operator_hilbert(grid, &h0, b, steps)?;
            moyal::star(&sa, &sb.conj(), StarMethod::SpectralIntegral)
        };
        let bare = ratio(&v1, &v2)?;
        let dressed = ratio(&perturb(&v1), &perturb(&v2))?;
        let residual = bare.linf_distance(&dressed)?;
        let signal = bare.linf_distance(&one)?;
        rows.push(format!("star,{scale},{residual},{signal}"));
        checks.push(CheckResult::below("star-ratio-residual", residual, 1e-5));
        checks.push(CheckResult::above("star-ratio-signal", signal, 3e-4));
        checks.push(CheckResult::below("star-leak-vs-signal", residual / signal, 0.02));
    }

    let causality_csv = csv("method,scale,residual,signal", rows);
    Ok(SuiteOutput { checks, artifacts: vec![("causality.csv".into(), causality_csv)] })
}

// ---------------------------------------------------------------------------
// green
// ---------------------------------------------------------------------------

fn green_suite(cfg: &ScenarioConfig) -> Result<SuiteOutput> {
    let grid = cfg.grid()?;
    let h0 = QuadraticHamiltonian::oscillator();
    let eps = cfg.solver.green_epsilon;
    let mut checks = Vec::new();
    let mut artifacts = Vec::new();

    // One-point function of the free operator: (1/i hbar) q_I(t1).
    let t1 = 0.3f64;
    let req1 = GreenRequest {
        times: vec![t1],
        base: PotentialSpec::free((-1.25, 1.85)),
        epsilon: eps,
        sigma: cfg.solver.green_sigma,
        extrapolate: true,
        steps: 310,
    };
    let res1 = green::green_function(grid, &h0, &req1)?;
    let hbar = grid.hbar();
    let oracle1 = Symbol::from_fn(grid, |q, p| {
        Complex64::new(0.0, -(q * t1.cos() + p * t1.sin()) / hbar)
    });
    let d1 = weak_distance(grid, &weyl_quantize(&res1.symbol), &weyl_quantize(&oracle1))?;
    checks.push(CheckResult::below("one-point-vs-field-insertion", d1, 1e-5));
    let mut buf = Vec::new();
    green::write_report_csv(&res1.report, &mut buf)?;
    artifacts.push((
        "green-n1-convergence.csv".to_string(),
        String::from_utf8(buf).expect("ascii csv"),
    ));

    // Two-point function in the quadratic case vs the closed form, plus
    // permutation symmetry and the moment identity.
    let (ta, tb) = (0.3f64, 0.9f64);
    let base2 = PotentialSpec::free((-0.5, 1.7));
    let req2 = GreenRequest {
        times: vec![ta, tb],
        base: base2.clone(),
        epsilon: eps,
        sigma: 0.1,
        extrapolate: true,
        steps: 440,
    };
    let res2 = green::green_function(grid, &h0, &req2)?;
    let delta = (ta - tb).abs();
    let oracle2 = Symbol::from_fn(grid, |q, p| {
        let qa = q * ta.cos() + p * ta.sin();
        let qb = q * tb.cos() + p * tb.sin();
        (Complex64::new(qa * qb, 0.0) - Complex64::new(0.0, hbar / 2.0 * delta.sin()))
            * Complex64::new(-1.0 / (hbar * hbar), 0.0)
    });
    let d2 = weak_distance(grid, &weyl_quantize(&res2.symbol), &weyl_quantize(&oracle2))?;
    checks.push(CheckResult::below("two-point-vs-closed-form", d2, 1e-4));
    let mut buf2 = Vec::new();
    green::write_report_csv(&res2.report, &mut buf2)?;
    artifacts.push((
        "green-n2-convergence.csv".to_string(),
        String::from_utf8(buf2).expect("ascii csv"),
    ));

    let moments =
        green::feynman_moment_check(grid, &h0, (ta, tb), &base2, eps, 0.1, true, 440)?;
    checks.push(CheckResult::below(
        "two-point-permutation-symmetry",
        moments.permutation_defect,
        1e-10,
    ));
    checks.push(CheckResult::below("two-point-moment-identity", moments.moment_residual, 5e-2));

    Ok(SuiteOutput { checks, artifacts })
}

// ---------------------------------------------------------------------------
// pv-kernel
// ---------------------------------------------------------------------------

fn pv_kernel_suite(cfg: &ScenarioConfig) -> Result<SuiteOutput> {
    let mass = 1.0;
    let tg = TimeGrid::midpoint((-0.5, 0.5), cfg.solver.time_nodes)?;
    let mut checks = Vec::new();

    // envelopes: configured pulses or a documented default pair
    let v = cfg
        .potential
        .as_ref()
        .map(PotentialConfig::to_spec)
        .unwrap_or_else(|| {
            let mut v = PotentialSpec::free(tg.window());
            v.quartic.push(PulseShape { amplitude: 0.05, center: 0.0, width: 0.3 });
            v.linear.push(PulseShape { amplitude: 0.1, center: 0.1, width: 0.2 });
            v
        });
    let g_env = tg.sample(|t| v.g(t));
    let j_env = tg.sample(|t| v.j(t));

    // star-Dyson and the PV Wick expansion must agree term by term
    let orders = (2u32, 4u32);
    let bound = (4 * orders.0 + orders.1) as usize;
    let dyson = star_dyson(&tg, &g_env, &j_env, mass, orders, bound)?;
    let pv = ContractionKernel::new(KernelName::PvTimeOrdered, mass, &tg)?;
    let wick_pv = wick_expand(&tg, &g_env, &j_env, &pv, orders, bound)?;
    checks.push(CheckResult::below(
        "star-dyson-equals-pv-wick",
        dyson.max_coeff_distance(&wick_pv),
        1e-12,
    ));

    // first-order terms are exactly the discretized vertices
    let mut worst_first = 0.0f64;
    for (node, (&w, (&g, &j))) in tg
        .weights()
        .iter()
        .zip(g_env.iter().zip(j_env.iter()))
        .enumerate()
    {
        let got_g = dyson.coefficient(&(-1, 1, 0, vec![node; 4]));
        let want_g = Complex64::new(0.0, -w * g / 24.0);
        worst_first = worst_first.max((got_g - want_g).norm());
        let got_j = dyson.coefficient(&(-1, 0, 1, vec![node]));
        let want_j = Complex64::new(0.0, -w * j);
        worst_first = worst_first.max((got_j - want_j).norm());
    }
    checks.push(CheckResult::below("first-order-vertices-exact", worst_first, 1e-15));

    // Feynman minus PV at order (0, 2) is the symmetric cosine kernel:
    // for two unit delta sources the whole difference is one fully
    // contracted term with coefficient (-i)^2 K_sym(a, b) w_a w_b
    let fey = ContractionKernel::new(KernelName::Feynman, mass, &tg)?;
    let sym = ContractionKernel::new(KernelName::SymmetricPart, mass, &tg)?;
    let (na, nb) = (1usize, tg.len() - 2);
    let zero_g = vec![0.0; tg.len()];
    let mut delta_j = vec![0.0; tg.len()];
    delta_j[na] = 1.0;
    delta_j[nb] = 1.0;
    let wick_fey = wick_expand(&tg, &zero_g, &delta_j, &fey, (0, 2), bound)?;
    let wick_pv02 = wick_expand(&tg, &zero_g, &delta_j, &pv, (0, 2), bound)?;
    let mut diff = wick_fey.sub(&wick_pv02)?;
    diff.prune(1e-15);
    let mut worst_sym = if diff.len() == 1 { 0.0f64 } else { f64::INFINITY };
    for (key, coeff) in diff.terms() {
        if !key.3.is_empty() {
            worst_sym = f64::INFINITY;
            continue;
        }
        let want = Complex64::new(0.0, -1.0).powu(2)
            * sym.value(na, nb)
            * tg.weights()[na]
            * tg.weights()[nb];
        worst_sym = worst_sym.max((coeff - want).norm());
    }
    checks.push(CheckResult::below("feynman-minus-pv-is-symmetric", worst_sym, 1e-15));

    // energy transform of the PV kernel vs PV 1/(E^2 - m^2)
    let energies = [-3.0f64, -2.2, -1.8, -0.45, 0.0, 0.3, 1.6, 2.0, 2.8, 4.0];
    let transform = kernel_energy_transform(&pv, &energies, false)?;
    let mut worst_rel = 0.0f64;
    let mut rows = Vec::new();
    for (&e, t) in energies.iter().zip(transform.iter()) {
        let reference = 1.0 / (e * e - mass * mass);
        rows.push(format!("{e},{},{},{reference}", t.re, t.im));
        worst_rel = worst_rel.max((t.re - reference).abs() / reference.abs());
        worst_rel = worst_rel.max(t.im.abs() / reference.abs());
    }
    checks.push(CheckResult::below("pv-transform-relative-error", worst_rel, 2e-2));

    // the Pauli-Jordan kernel the star expansion is built from is odd
    let pj = pauli_jordan_kernel(mass, &tg)?;
    let mut worst_odd = 0.0f64;
    for a in 0..tg.len() {
        for b in 0..tg.len() {
            worst_odd = worst_odd.max((pj.value(a, b) + pj.value(b, a)).norm());
        }
    }
    checks.push(CheckResult::below("pauli-jordan-antisymmetry", worst_odd, 1e-15));

    let transform_csv = csv("E,re_transform,im_transform,pv_reference", rows);
    Ok(SuiteOutput { checks, artifacts: vec![("pv-transform.csv".into(), transform_csv)] })
}

// ---------------------------------------------------------------------------
// classical-limit
// ---------------------------------------------------------------------------

fn classical_limit_suite(cfg: &ScenarioConfig) -> Result<SuiteOutput> {
    let ladder = cfg.grid.hbar_ladder.clone();
    if ladder.len() < 2 {
        return Err(Error::Config("hbar_ladder needs at least two rungs".into()));
    }
    let errors = classical_limit_ladder(&ladder, 0.3, 250)?;
    let slope = log_log_slope(&ladder, &errors);
    let mut checks = Vec::new();

    // The stated expectation is an O(hbar) error, slope 1.0 +/- 0.2. The
    // measured decay for symmetric (Weyl) ordering is quadratic (odd-order
    // corrections vanish by parity), so this window check fails while the
    // two checks after it document that the limit itself holds with margin.
    checks.push(CheckResult::within("conjugation-error-slope", slope, 0.8, 1.2));
    let mut ratio_worst = 0.0f64;
    for w in errors.windows(2) {
        ratio_worst = ratio_worst.max(w[1] / w[0]);
    }
    checks.push(CheckResult::below("errors-strictly-decreasing", ratio_worst, 1.0));
    let linear_envelope = errors[0] / ladder[0] * ladder[ladder.len() - 1];
    checks.push(CheckResult::below(
        "final-error-vs-linear-envelope",
        errors[errors.len() - 1] / linear_envelope,
        1.0,
    ));

    let ladder_csv = csv(
        "hbar,error",
        ladder.iter().zip(errors.iter()).map(|(h, e)| format!("{h},{e}")),
    );
    Ok(SuiteOutput { checks, artifacts: vec![("classical-limit.csv".into(), ladder_csv)] })
}

// ---------------------------------------------------------------------------
// covariant
// ---------------------------------------------------------------------------

fn covariant_suite(_cfg: &ScenarioConfig) -> Result<SuiteOutput> {
    let mass = 1.2f64;
    let spec = LagrangianSpec::new(mass)?;
    let n = 33usize;
    let s: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut checks = Vec::new();
    let mut rows = Vec::new();

    // flat surface: pi reduces to phi_x0 and H0 to the canonical energy
    {
        let surface = SurfaceParameterization::flat(s.clone(), 0.0)?;
        let data = SurfaceFieldData {
            phi: s.iter().map(|&x| (2.0 * x).sin()).collect(),
            phi_x0: s.iter().map(|&x| 0.3 * x.cos()).collect(),
            phi_x1: s.iter().map(|&x| 2.0 * (2.0 * x).cos()).collect(),
        };
        let pi = conjugate_momentum(&surface, &data, &spec)?;
        let mut worst_pi = 0.0f64;
        for (p, f0) in pi.iter().zip(data.phi_x0.iter()) {
            worst_pi = worst_pi.max((p - f0).abs());
        }
        checks.push(CheckResult::below("flat-momentum-reduction", worst_pi, 1e-12));

        let (h0, h1) = covariant_hamiltonian_densities(&surface, &data, &pi, &spec)?;
        let mut worst_h = 0.0f64;
        for i in 0..n {
            let (f, f0, f1) = (data.phi[i], data.phi_x0[i], data.phi_x1[i]);
            let want0 = 0.5 * (f0 * f0 + f1 * f1 + mass * mass * f * f);
            let want1 = f0 * f1;
            worst_h = worst_h.max((h0[i] - want0).abs()).max((h1[i] - want1).abs());
        }
        checks.push(CheckResult::below("flat-density-reduction", worst_h, 1e-12));
    }

    // tilted surface x0 = a s + b: hand oracle for pi and the densities
    {
        let (a, b) = (0.4f64, 0.2f64);
        let x0: Vec<f64> = s.iter().map(|&x| a * x + b).collect();
        let surface = SurfaceParameterization::new(s.clone(), x0, s.clone())?;
        let (c0, c1, c) = (0.5f64, 0.9f64, 0.25f64);
        let data = SurfaceFieldData {
            phi: vec![c; n],
            phi_x0: vec![c0; n],
            phi_x1: vec![c1; n],
        };
        let pi = conjugate_momentum(&surface, &data, &spec)?;
        let want_pi = c0 * 1.0 + c1 * a;
        let mut worst_pi = 0.0f64;
        for (i, p) in pi.iter().enumerate() {
            rows.push(format!("{},{p},{want_pi}", s[i]));
            worst_pi = worst_pi.max((p - want_pi).abs());
        }
        checks.push(CheckResult::below("tilted-momentum-oracle", worst_pi, 1e-12));

        let (h0, h1) = covariant_hamiltonian_densities(&surface, &data, &pi, &spec)?;
        let l0 = 0.5 * (c0 * c0 - c1 * c1 - mass * mass * c * c);
        let want_h0 = c1 * c0 * a + (c0 * c0 - l0) * 1.0;
        let want_h1 = c0 * c1 * 1.0 + (c1 * c1 + l0) * a;
        let mut worst_h = 0.0f64;
        for i in 0..n {
            worst_h = worst_h.max((h0[i] - want_h0).abs()).max((h1[i] - want_h1).abs());
        }
        checks.push(CheckResult::below("tilted-density-oracle", worst_h, 1e-12));
    }

    // flat-surface Hamilton equation: {phi(s0), H} = pi(s0) exactly, and it
    // matches the leapfrog central difference within integrator order
    {
        let nodes = 48usize;
        let a = 0.125f64;
        use std::f64::consts::PI;
        let phi: Vec<f64> =
            (0..nodes).map(|i| (2.0 * PI * i as f64 / nodes as f64).sin()).collect();
        let pi: Vec<f64> =
            (0..nodes).map(|i| 0.4 * (4.0 * PI * i as f64 / nodes as f64).cos()).collect();
        let field = LatticeField::new(a, phi.clone(), pi.clone(), 0.0)?;
        let energy = energy_functional_derivative(&field, mass);
        let dt = 0.005;
        let fwd = solve_klein_gordon(&field, &spec, dt, 1)?;
        let back = solve_klein_gordon(
            &LatticeField::new(a, phi, pi.iter().map(|x| -x).collect(), 0.0)?,
            &spec,
            dt,
            1,
        )?;
        let mut worst_exact = 0.0f64;
        let mut worst_leapfrog = 0.0f64;
        for s0 in [0usize, 11, 29] {
            let point = point_evaluation_derivative(&field, s0, false);
            let bracket = functional_poisson_bracket(&point, &energy)?;
            worst_exact = worst_exact.max((bracket - field.pi[s0]).abs());
            let numeric = (fwd.phi[s0] - back.phi[s0]) / (2.0 * dt);
            worst_leapfrog = worst_leapfrog.max((bracket - numeric).abs());
        }
        checks.push(CheckResult::below("hamilton-equation-exact", worst_exact, 1e-12));
        checks.push(CheckResult::below("hamilton-equation-vs-leapfrog", worst_leapfrog, 1e-4));
    }

    let momentum_csv = csv("s,pi_measured,pi_expected", rows);
    Ok(SuiteOutput { checks, artifacts: vec![("tilted-momentum.csv".into(), momentum_csv)] })
}

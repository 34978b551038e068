//! Classical side of the correspondence: the driven Duffing oscillator,
//! its scattering map in interaction-picture coordinates, the action
//! functional, a 1+1-dimensional Klein-Gordon lattice solver, and the
//! covariant Hamiltonian formalism (conjugate momentum and Hamiltonian
//! densities on a spacelike surface, functional Poisson brackets).

use crate::dynamics::PotentialSpec;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

// ---------------------------------------------------------------------------
// Duffing oscillator
// ---------------------------------------------------------------------------

/// Parameters of the driven Duffing equation
/// `qdd + m^2 q + g(t) q^3/3! = -j(t)`, with the same compactly supported
/// pulse envelopes used on the quantum side.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuffingParams {
    pub mass: f64,
    pub potential: PotentialSpec,
}

impl DuffingParams {
    pub fn new(mass: f64, potential: PotentialSpec) -> Result<Self> {
        if mass <= 0.0 {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        potential.validate()?;
        Ok(Self { mass, potential })
    }

    pub fn window(&self) -> (f64, f64) {
        self.potential.window
    }

    /// Acceleration `-m^2 q - g q^3/6 - j`.
    fn force(&self, t: f64, q: f64) -> f64 {
        -self.mass * self.mass * q - self.potential.g(t) * q * q * q / 6.0
            - self.potential.j(t)
    }

    fn check_step(&self, steps: usize) -> Result<()> {
        let (t1, t2) = self.window();
        let dt = (t2 - t1) / steps as f64;
        let value = dt * self.mass;
        if value >= 0.1 {
            return Err(Error::StepResolution { value, limit: 0.1 });
        }
        Ok(())
    }
}

/// A sampled classical trajectory on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub start: f64,
    pub dt: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn final_point(&self) -> [f64; 2] {
        [*self.q.last().expect("nonempty"), *self.p.last().expect("nonempty")]
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,q,p")?;
        for i in 0..self.len() {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", self.time(i), self.q[i], self.p[i])?;
        }
        Ok(())
    }
}

/// Integrate the Duffing equation over the window with classic RK4.
pub fn solve_duffing(params: &DuffingParams, z0: [f64; 2], steps: usize) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one step".into()));
    }
    params.check_step(steps)?;
    let (t1, t2) = params.window();
    let dt = (t2 - t1) / steps as f64;
    let mut q = Vec::with_capacity(steps + 1);
    let mut p = Vec::with_capacity(steps + 1);
    let (mut qc, mut pc) = (z0[0], z0[1]);
    q.push(qc);
    p.push(pc);
    for i in 0..steps {
        let t = t1 + i as f64 * dt;
        let (k1q, k1p) = (pc, params.force(t, qc));
        let (k2q, k2p) =
            (pc + 0.5 * dt * k1p, params.force(t + 0.5 * dt, qc + 0.5 * dt * k1q));
        let (k3q, k3p) =
            (pc + 0.5 * dt * k2p, params.force(t + 0.5 * dt, qc + 0.5 * dt * k2q));
        let (k4q, k4p) = (pc + dt * k3p, params.force(t + dt, qc + dt * k3q));
        qc += dt * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0;
        pc += dt * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0;
        q.push(qc);
        p.push(pc);
    }
    Ok(Trajectory { start: t1, dt, q, p })
}

/// Free-oscillator rotation by time `t`:
/// `q -> q cos(mt) + p sin(mt)/m`, `p -> -q m sin(mt) + p cos(mt)`.
pub fn free_rotation(mass: f64, t: f64, z: [f64; 2]) -> [f64; 2] {
    let (c, s) = ((mass * t).cos(), (mass * t).sin());
    [z[0] * c + z[1] * s / mass, -z[0] * mass * s + z[1] * c]
}

/// Classical scattering map in interaction-picture coordinates anchored at
/// t = 0: rotate the incoming point to the window start, integrate the
/// full nonlinear equation through the pulse, rotate back from the window
/// end. With no interaction the composition of rotations is the identity.
pub fn classical_scattering_map(
    params: &DuffingParams,
    z0: [f64; 2],
    steps: usize,
) -> Result<[f64; 2]> {
    let (t1, t2) = params.window();
    let z_in = free_rotation(params.mass, t1, z0);
    let traj = solve_duffing(params, z_in, steps)?;
    Ok(free_rotation(params.mass, -t2, traj.final_point()))
}

// ---------------------------------------------------------------------------
// Action functional
// ---------------------------------------------------------------------------

/// Action of a sampled trajectory:
/// `J = int (p^2/2 - m^2 q^2/2 - g q^4/4! - j q) dt` by composite Simpson
/// quadrature (the stored `p` stands in for `qdot`). The trajectory must
/// cover the parameter window.
pub fn evaluate_action(traj: &Trajectory, params: &DuffingParams) -> Result<f64> {
    let (t1, t2) = params.window();
    let n = traj.len();
    if n < 3 {
        return Err(Error::InvalidParameter("trajectory too short".into()));
    }
    if (traj.start - t1).abs() > 1e-9 || (traj.end() - t2).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "trajectory window [{}, {}] does not match the parameter window [{t1}, {t2}]",
            traj.start,
            traj.end()
        )));
    }
    let m2 = params.mass * params.mass;
    let density = |i: usize| -> f64 {
        let (t, q, p) = (traj.time(i), traj.q[i], traj.p[i]);
        0.5 * p * p - 0.5 * m2 * q * q - params.potential.g(t) * q.powi(4) / 24.0
            - params.potential.j(t) * q
    };
    // composite Simpson; a trapezoid cell closes an even sample count
    let mut acc = 0.0;
    let cells = (n - 1) / 2;
    for c in 0..cells {
        let i = 2 * c;
        acc += traj.dt / 3.0 * (density(i) + 4.0 * density(i + 1) + density(i + 2));
    }
    if (n - 1) % 2 == 1 {
        acc += 0.5 * traj.dt * (density(n - 2) + density(n - 1));
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Klein-Gordon lattice
// ---------------------------------------------------------------------------

/// Free-field Lagrangian data: the quadratic part
/// `L0 = (phi_t^2 - phi_x^2 - m^2 phi^2)/2`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianSpec {
    pub mass: f64,
}

impl LagrangianSpec {
    pub fn new(mass: f64) -> Result<Self> {
        if mass <= 0.0 {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        Ok(Self { mass })
    }
}

/// Periodic lattice snapshot of the field and its conjugate momentum.
#[derive(Debug, Clone)]
pub struct LatticeField {
    pub spacing: f64,
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
    pub time: f64,
}

impl LatticeField {
    pub fn new(spacing: f64, phi: Vec<f64>, pi: Vec<f64>, time: f64) -> Result<Self> {
        if spacing <= 0.0 {
            return Err(Error::InvalidParameter("lattice spacing must be positive".into()));
        }
        if phi.len() != pi.len() || phi.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} momentum samples", phi.len()),
                got: format!("{}", pi.len()),
            });
        }
        Ok(Self { spacing, phi, pi, time })
    }

    pub fn nodes(&self) -> usize {
        self.phi.len()
    }

    /// Discrete energy
    /// `a sum [pi^2/2 + ((phi_{i+1}-phi_i)/a)^2/2 + m^2 phi^2/2]`.
    pub fn energy(&self, mass: f64) -> f64 {
        let n = self.nodes();
        let a = self.spacing;
        let mut acc = 0.0;
        for i in 0..n {
            let grad = (self.phi[(i + 1) % n] - self.phi[i]) / a;
            acc += 0.5 * self.pi[i] * self.pi[i]
                + 0.5 * grad * grad
                + 0.5 * mass * mass * self.phi[i] * self.phi[i];
        }
        acc * a
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "x,phi,pi")?;
        for i in 0..self.nodes() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e}",
                i as f64 * self.spacing,
                self.phi[i],
                self.pi[i]
            )?;
        }
        Ok(())
    }
}

/// Evolve the free lattice field by kick-drift-kick leapfrog over time `t`
/// in the given number of steps; `phi` and `pi` are synchronized at entry
/// and exit. The step must satisfy the lattice CFL condition `dt < a`.
pub fn solve_klein_gordon(
    initial: &LatticeField,
    spec: &LagrangianSpec,
    t: f64,
    steps: usize,
) -> Result<LatticeField> {
    if steps == 0 || t <= 0.0 {
        return Err(Error::InvalidParameter("need positive time and steps".into()));
    }
    let dt = t / steps as f64;
    if dt >= initial.spacing {
        return Err(Error::Cfl { dt, a: initial.spacing });
    }
    let n = initial.nodes();
    let a2 = initial.spacing * initial.spacing;
    let m2 = spec.mass * spec.mass;
    let mut phi = initial.phi.clone();
    let mut pi = initial.pi.clone();
    let force = |phi: &[f64], i: usize| -> f64 {
        let lap = (phi[(i + 1) % n] - 2.0 * phi[i] + phi[(i + n - 1) % n]) / a2;
        lap - m2 * phi[i]
    };
    let mut f: Vec<f64> = (0..n).map(|i| force(&phi, i)).collect();
    for _ in 0..steps {
        for i in 0..n {
            pi[i] += 0.5 * dt * f[i];
        }
        for i in 0..n {
            phi[i] += dt * pi[i];
        }
        for (i, fi) in f.iter_mut().enumerate() {
            *fi = force(&phi, i);
        }
        for i in 0..n {
            pi[i] += 0.5 * dt * f[i];
        }
    }
    LatticeField::new(initial.spacing, phi, pi, initial.time + t)
}

// ---------------------------------------------------------------------------
// Covariant Hamiltonian formalism on a spacelike surface
// ---------------------------------------------------------------------------

/// One-parameter spacelike surface `s -> (x0(s), x1(s))` in 1+1 spacetime,
/// sampled on a uniform parameter grid; parameter derivatives by central
/// differences (second-order one-sided at the ends).
#[derive(Debug, Clone)]
pub struct SurfaceParameterization {
    pub s: Vec<f64>,
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
}

impl SurfaceParameterization {
    pub fn new(s: Vec<f64>, x0: Vec<f64>, x1: Vec<f64>) -> Result<Self> {
        if s.len() < 3 || x0.len() != s.len() || x1.len() != s.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("three aligned arrays of at least 3 samples"),
                got: format!("{}, {}, {}", s.len(), x0.len(), x1.len()),
            });
        }
        let ds = s[1] - s[0];
        if ds <= 0.0 || s.windows(2).any(|w| (w[1] - w[0] - ds).abs() > 1e-12 * ds.abs()) {
            return Err(Error::InvalidParameter("parameter grid must be uniform".into()));
        }
        let surf = Self { s, x0, x1 };
        let (d0, d1) = (surf.derivative(&surf.x0), surf.derivative(&surf.x1));
        for i in 0..surf.s.len() {
            if d0[i].abs() >= d1[i].abs() {
                return Err(Error::NonSpacelike(i));
            }
        }
        Ok(surf)
    }

    /// Constant-time surface `x0 = t0`, `x1 = s`.
    pub fn flat(s: Vec<f64>, t0: f64) -> Result<Self> {
        let x0 = vec![t0; s.len()];
        let x1 = s.clone();
        Self::new(s, x0, x1)
    }

    fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let ds = self.s[1] - self.s[0];
        let mut d = vec![0.0; n];
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * ds);
        d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * ds);
        for i in 1..n - 1 {
            d[i] = (f[i + 1] - f[i - 1]) / (2.0 * ds);
        }
        d
    }

    pub fn x0_s(&self) -> Vec<f64> {
        self.derivative(&self.x0)
    }

    pub fn x1_s(&self) -> Vec<f64> {
        self.derivative(&self.x1)
    }
}

/// Field data on the surface: the field value and its spacetime partial
/// derivatives at each surface node.
#[derive(Debug, Clone)]
pub struct SurfaceFieldData {
    pub phi: Vec<f64>,
    pub phi_x0: Vec<f64>,
    pub phi_x1: Vec<f64>,
}

impl SurfaceFieldData {
    fn check(&self, surface: &SurfaceParameterization) -> Result<()> {
        let n = surface.s.len();
        if self.phi.len() != n || self.phi_x0.len() != n || self.phi_x1.len() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n} field samples"),
                got: format!("{}, {}, {}", self.phi.len(), self.phi_x0.len(), self.phi_x1.len()),
            });
        }
        Ok(())
    }
}

/// Conjugate momentum on the surface for the quadratic Lagrangian:
/// `pi(s) = phi_x0 x1_s + phi_x1 x0_s` (the two Jacobian terms of the
/// one-parameter case, with `L_{phi_x0} = phi_x0` and
/// `L_{phi_x1} = -phi_x1`). On a flat surface it reduces to `phi_x0`.
pub fn conjugate_momentum(
    surface: &SurfaceParameterization,
    data: &SurfaceFieldData,
    _spec: &LagrangianSpec,
) -> Result<Vec<f64>> {
    data.check(surface)?;
    let (x0s, x1s) = (surface.x0_s(), surface.x1_s());
    Ok((0..surface.s.len())
        .map(|i| data.phi_x0[i] * x1s[i] + data.phi_x1[i] * x0s[i])
        .collect())
}

/// Covariant Hamiltonian densities of the quadratic Lagrangian on the
/// surface, with `L0 = (phi_x0^2 - phi_x1^2 - m^2 phi^2)/2`:
///
/// `H0 = phi_x1 phi_x0 x0_s + (phi_x0^2 - L0) x1_s`
/// `H1 = phi_x0 phi_x1 x1_s + (phi_x1^2 + L0) x0_s`
///
/// Flat-surface reduction: `H0 = (pi^2 + phi_s^2 + m^2 phi^2)/2` and
/// `H1 = pi phi_s` (so that the bracket with H1 generates spatial surface
/// displacements of field functionals). The supplied momentum must agree
/// with [`conjugate_momentum`] to 1e-10.
pub fn covariant_hamiltonian_densities(
    surface: &SurfaceParameterization,
    data: &SurfaceFieldData,
    pi: &[f64],
    spec: &LagrangianSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    data.check(surface)?;
    let expected = conjugate_momentum(surface, data, spec)?;
    if pi.len() != expected.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} momentum samples", expected.len()),
            got: format!("{}", pi.len()),
        });
    }
    let worst = pi
        .iter()
        .zip(expected.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if worst > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "momentum inconsistent with the surface data: residual {worst:.3e}"
        )));
    }
    let (x0s, x1s) = (surface.x0_s(), surface.x1_s());
    let m2 = spec.mass * spec.mass;
    let mut h0 = Vec::with_capacity(pi.len());
    let mut h1 = Vec::with_capacity(pi.len());
    for i in 0..pi.len() {
        let (f0, f1, f) = (data.phi_x0[i], data.phi_x1[i], data.phi[i]);
        let l0 = 0.5 * (f0 * f0 - f1 * f1 - m2 * f * f);
        h0.push(f1 * f0 * x0s[i] + (f0 * f0 - l0) * x1s[i]);
        h1.push(f0 * f1 * x1s[i] + (f1 * f1 + l0) * x0s[i]);
    }
    Ok((h0, h1))
}

/// Variational derivatives of a lattice functional, sampled per node
/// (`delta F / delta phi(s_i)` and `delta F / delta pi(s_i)`).
#[derive(Debug, Clone)]
pub struct FunctionalDerivative {
    pub spacing: f64,
    pub d_phi: Vec<f64>,
    pub d_pi: Vec<f64>,
}

/// Discrete functional Poisson bracket
/// `{F1, F2} = a sum_s (dF1/dphi dF2/dpi - dF1/dpi dF2/dphi)`.
pub fn functional_poisson_bracket(
    f1: &FunctionalDerivative,
    f2: &FunctionalDerivative,
) -> Result<f64> {
    if f1.d_phi.len() != f1.d_pi.len()
        || f1.d_phi.len() != f2.d_phi.len()
        || f2.d_phi.len() != f2.d_pi.len()
        || (f1.spacing - f2.spacing).abs() > 1e-14
    {
        return Err(Error::ShapeMismatch {
            expected: format!("matching lattices ({} nodes, a = {})", f1.d_phi.len(), f1.spacing),
            got: format!("{} nodes, a = {}", f2.d_phi.len(), f2.spacing),
        });
    }
    Ok(f1.spacing
        * f1.d_phi
            .iter()
            .zip(f1.d_pi.iter())
            .zip(f2.d_phi.iter().zip(f2.d_pi.iter()))
            .map(|((a_phi, a_pi), (b_phi, b_pi))| a_phi * b_pi - a_pi * b_phi)
            .sum::<f64>())
}

/// Variational derivatives of the total flat-surface energy
/// `a sum [pi^2/2 + grad^2/2 + m^2 phi^2/2]` on a periodic lattice.
pub fn energy_functional_derivative(field: &LatticeField, mass: f64) -> FunctionalDerivative {
    let n = field.nodes();
    let a2 = field.spacing * field.spacing;
    let m2 = mass * mass;
    let d_phi = (0..n)
        .map(|i| {
            let lap =
                (field.phi[(i + 1) % n] - 2.0 * field.phi[i] + field.phi[(i + n - 1) % n]) / a2;
            -lap + m2 * field.phi[i]
        })
        .collect();
    let d_pi = field.pi.clone();
    FunctionalDerivative { spacing: field.spacing, d_phi, d_pi }
}

/// Variational derivative of the point evaluation `phi(s_i)` (a discrete
/// delta of weight `1/a` so that the bracket with `pi(s_i)` is `1/a`).
pub fn point_evaluation_derivative(
    field: &LatticeField,
    node: usize,
    of_momentum: bool,
) -> FunctionalDerivative {
    let n = field.nodes();
    let mut d_phi = vec![0.0; n];
    let mut d_pi = vec![0.0; n];
    if of_momentum {
        d_pi[node] = 1.0 / field.spacing;
    } else {
        d_phi[node] = 1.0 / field.spacing;
    }
    FunctionalDerivative { spacing: field.spacing, d_phi, d_pi }
}

// ---------------------------------------------------------------------------
// Classical-limit bridge
// ---------------------------------------------------------------------------

/// Compare the conjugated scattering operator against composition with the
/// classical scattering map on coherent-state matrix elements, one error per
/// `hbar` rung. Matrix elements smear away the wrap artifacts of the
/// periodic box while preserving the genuine `hbar`-dependence of the
/// conjugation error. The grid density scales with `1/hbar` so the momentum
/// extent stays fixed across the ladder.
pub fn classical_limit_ladder(
    ladder: &[f64],
    amplitude: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    use crate::dynamics::{
        scattering_operator_star_anchored, PulseShape, QuadraticHamiltonian,
    };
    use crate::phase_space::{weyl_quantize, PhaseSpaceGrid, Symbol, WaveFunction};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    let half_extent = 5.0;
    // the time-integrated coupling sets the accumulated quartic phase
    // of S; it must stay a few times below the q-Nyquist rate at the
    // box edge for every rung of the hbar ladder
    let mut v = PotentialSpec::free((-0.5, 0.5));
    v.quartic.push(PulseShape { amplitude, center: 0.0, width: 0.2 });
    let params = DuffingParams::new(1.0, v.clone())?;
    let h0 = QuadraticHamiltonian::oscillator();
    let envelope = |q: f64, p: f64| (-(q * q + p * p) / 2.0f64).exp();
    let pts = [(0.0, 0.0), (1.0, 0.5), (-0.8, 1.2), (1.5, -1.0), (0.3, -1.7)];
    let mut errors = Vec::new();
    for &hbar in ladder {
        // keep the momentum extent fixed at 4 while hbar shrinks
        let n = ((8.0 * half_extent / (PI * hbar)).ceil() as usize).next_multiple_of(2);
        let grid = PhaseSpaceGrid::new(half_extent, n, hbar)?;
        let s = scattering_operator_star_anchored(grid, &h0, &v, &|_| 0.0, 0.0, steps)?;
        let s_op = weyl_quantize(&s);
        let inner = |x: &WaveFunction, y: &WaveFunction| -> Complex64 {
            x.values()
                .iter()
                .zip(y.values().iter())
                .map(|(u, w)| u.conj() * w)
                .sum::<Complex64>()
                * grid.dq()
        };
        let mut worst = 0.0f64;
        for component in [0usize, 1] {
            let windowed = Symbol::from_fn(grid, |q, p| {
                Complex64::new((if component == 0 { q } else { p }) * envelope(q, p), 0.0)
            });
            // conjugate in operator form: the spectral star product is
            // the exact pullback of this operator product
            let conj_op = s_op.adjoint().matmul(&weyl_quantize(&windowed))?.matmul(&s_op)?;
            // the only failure mode of the map is the step-resolution check,
            // which does not depend on the starting point; probe it once
            classical_scattering_map(&params, [0.0, 0.0], 200)?;
            let classical = Symbol::from_fn(grid, |q, p| {
                let out = classical_scattering_map(&params, [q, p], 200)
                    .expect("step resolution verified above");
                Complex64::new(out[component] * envelope(out[0], out[1]), 0.0)
            });
            let class_op = weyl_quantize(&classical);
            for &(q1, p1) in &pts {
                for &(q2, p2) in &pts {
                    let psi1 = WaveFunction::coherent(grid, q1, p1, 1.0, 1.0);
                    let psi2 = WaveFunction::coherent(grid, q2, p2, 1.0, 1.0);
                    let lhs = inner(&psi1, &conj_op.apply(&psi2)?);
                    let rhs = inner(&psi1, &class_op.apply(&psi2)?);
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
        errors.push(worst);
    }
    Ok(errors)
}

/// Least-squares slope of `log(y)` against `log(x)`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let xm = lx.iter().sum::<f64>() / lx.len() as f64;
    let ym = ly.iter().sum::<f64>() / ly.len() as f64;
    lx.iter().zip(ly.iter()).map(|(x, y)| (x - xm) * (y - ym)).sum::<f64>()
        / lx.iter().map(|x| (x - xm).powi(2)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::PulseShape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn free_params(window: (f64, f64)) -> DuffingParams {
        DuffingParams::new(1.0, PotentialSpec::free(window)).unwrap()
    }

    #[test]
    fn free_oscillator_returns_after_a_period() {
        let params = free_params((0.0, 2.0 * PI));
        let traj = solve_duffing(&params, [1.0, 0.0], 4000).unwrap();
        let [qf, pf] = traj.final_point();
        assert!((qf - 1.0).abs() < 1e-8 && pf.abs() < 1e-8, "({qf}, {pf})");
        // energy conservation along the whole free run
        let e0 = 0.5;
        let drift = (0..traj.len())
            .map(|i| (0.5 * (traj.p[i].powi(2) + traj.q[i].powi(2)) - e0).abs())
            .fold(0.0f64, f64::max);
        assert!(drift < 1e-10, "energy drift {drift:.3e}");
    }

    #[test]
    fn driven_oscillator_matches_duhamel() {
        let mut v = PotentialSpec::free((-1.0, 1.5));
        v.linear.push(PulseShape { amplitude: 0.7, center: 0.2, width: 0.4 });
        let params = DuffingParams::new(1.0, v.clone()).unwrap();
        let traj = solve_duffing(&params, [0.3, -0.2], 6000).unwrap();
        // q(t) = free + int sin(t - t') (-j(t')) dt' by fine Simpson
        let closed = |t: f64| -> f64 {
            let free = 0.3 * (t + 1.0).cos() - 0.2 * (t + 1.0).sin();
            let n = 20000usize;
            let h = (t + 1.0) / n as f64;
            let f = |tp: f64| -(t - tp).sin() * v.j(tp);
            let mut acc = f(-1.0) + f(t);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(-1.0 + i as f64 * h);
            }
            free + acc * h / 3.0
        };
        for &t in &[0.0, 0.8, 1.5] {
            let i = ((t - traj.start) / traj.dt).round() as usize;
            let err = (traj.q[i] - closed(traj.time(i))).abs();
            assert!(err < 1e-8, "t = {t}: err {err:.3e}");
        }
    }

    #[test]
    fn quartic_pulse_satisfies_work_energy_identity() {
        let mut v = PotentialSpec::free((-1.0, 1.0));
        v.quartic.push(PulseShape { amplitude: 0.1, center: 0.0, width: 0.5 });
        let params = DuffingParams::new(1.0, v.clone()).unwrap();
        let traj = solve_duffing(&params, [1.1, 0.4], 8000).unwrap();
        let e = |i: usize| 0.5 * (traj.p[i].powi(2) + traj.q[i].powi(2));
        // dE/dt = -g q^3 p / 6 along solutions; Simpson over the samples
        let density =
            |i: usize| -v.g(traj.time(i)) * traj.q[i].powi(3) * traj.p[i] / 6.0;
        let mut work = 0.0;
        for c in 0..(traj.len() - 1) / 2 {
            let i = 2 * c;
            work += traj.dt / 3.0 * (density(i) + 4.0 * density(i + 1) + density(i + 2));
        }
        let residual = (e(traj.len() - 1) - e(0) - work).abs();
        assert!(residual < 1e-8, "work-energy residual {residual:.3e}");
    }

    #[test]
    fn duffing_step_resolution_check() {
        let params = free_params((0.0, 100.0));
        assert!(matches!(
            solve_duffing(&params, [1.0, 0.0], 500),
            Err(Error::StepResolution { .. })
        ));
    }

    #[test]
    fn scattering_map_free_is_identity() {
        let params = free_params((-0.7, 1.3));
        for z in [[0.0, 0.0], [1.2, -0.4], [-0.3, 0.9]] {
            let out = classical_scattering_map(&params, z, 2000).unwrap();
            assert!((out[0] - z[0]).abs() < 1e-9 && (out[1] - z[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn scattering_map_linear_source_is_translation() {
        let mut v = PotentialSpec::free((-0.5, 0.5));
        v.linear.push(PulseShape { amplitude: 0.4, center: 0.0, width: 0.3 });
        let params = DuffingParams::new(1.0, v.clone()).unwrap();
        // Duhamel in the rotating frame: the shift is
        // (int j sin(t) dt, -int j cos(t) dt), independent of z0
        let n = 40000usize;
        let h = 1.0 / n as f64;
        let (mut dq, mut dp) = (0.0, 0.0);
        for i in 0..=n {
            let t = -0.5 + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            dq += w * v.j(t) * t.sin();
            dp -= w * v.j(t) * t.cos();
        }
        dq *= h / 3.0;
        dp *= h / 3.0;
        let mut shifts = Vec::new();
        for z in [[0.0, 0.0], [1.0, 0.5], [-0.8, 1.2]] {
            let out = classical_scattering_map(&params, z, 4000).unwrap();
            shifts.push([out[0] - z[0], out[1] - z[1]]);
        }
        for s in &shifts {
            assert!((s[0] - shifts[0][0]).abs() < 1e-9, "shift not rigid");
            assert!((s[1] - shifts[0][1]).abs() < 1e-9, "shift not rigid");
            assert!((s[0] - dq).abs() < 1e-6, "dq {} vs {dq}", s[0]);
            assert!((s[1] - dp).abs() < 1e-6, "dp {} vs {dp}", s[1]);
        }
    }

    #[test]
    fn scattering_map_is_symplectic() {
        let mut v = PotentialSpec::free((-0.5, 0.5));
        v.quartic.push(PulseShape { amplitude: 0.3, center: 0.0, width: 0.3 });
        let params = DuffingParams::new(1.0, v).unwrap();
        let h = 1e-5;
        for z in [[0.0, 0.0], [0.8, -0.5], [-1.1, 0.7], [1.4, 1.2]] {
            let col = |dq: f64, dp: f64| -> [f64; 2] {
                let plus =
                    classical_scattering_map(&params, [z[0] + dq, z[1] + dp], 4000).unwrap();
                let minus =
                    classical_scattering_map(&params, [z[0] - dq, z[1] - dp], 4000).unwrap();
                [(plus[0] - minus[0]) / (2.0 * h), (plus[1] - minus[1]) / (2.0 * h)]
            };
            let a = col(h, 0.0);
            let b = col(0.0, h);
            let det = a[0] * b[1] - a[1] * b[0];
            assert!((det - 1.0).abs() < 1e-8, "Jacobian determinant {det}");
        }
    }

    #[test]
    fn action_vanishes_for_rest_and_full_periods() {
        let params = free_params((0.0, 2.0 * PI));
        let rest = Trajectory {
            start: 0.0,
            dt: 2.0 * PI / 400.0,
            q: vec![0.0; 401],
            p: vec![0.0; 401],
        };
        assert_eq!(evaluate_action(&rest, &params).unwrap(), 0.0);
        let traj = solve_duffing(&params, [1.0, 0.0], 4000).unwrap();
        let j = evaluate_action(&traj, &params).unwrap();
        assert!(j.abs() < 1e-8, "harmonic action over a full period {j:.3e}");
        // window mismatch is rejected
        let other = free_params((0.0, PI));
        assert!(evaluate_action(&traj, &other).is_err());
    }

    #[test]
    fn action_is_stationary_on_solutions() {
        let mut v = PotentialSpec::free((-1.0, 1.0));
        v.quartic.push(PulseShape { amplitude: 0.2, center: 0.0, width: 0.5 });
        let params = DuffingParams::new(1.0, v).unwrap();
        let traj = solve_duffing(&params, [0.9, -0.3], 4000).unwrap();
        let j0 = evaluate_action(&traj, &params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..20 {
            // random smooth compact perturbation: sine modes under a bump
            let modes: Vec<(f64, f64)> = (1..=3)
                .map(|k| (rng.gen_range(-1.0..1.0), k as f64 * PI))
                .collect();
            let eta = |t: f64| -> f64 {
                let u: f64 = t; // window is (-1, 1)
                let bump = if u.abs() >= 1.0 { 0.0 } else { (1.0 - u * u).powi(3) };
                bump * modes.iter().map(|&(c, w)| c * (w * t).sin()).sum::<f64>()
            };
            let eta_dot = |t: f64| -> f64 {
                let h = 1e-6;
                (eta(t + h) - eta(t - h)) / (2.0 * h)
            };
            let mut diffs = Vec::new();
            let deltas = [0.1, 0.05, 0.025, 0.0125];
            for &d in &deltas {
                let mut pert = traj.clone();
                for i in 0..pert.len() {
                    let t = pert.time(i);
                    pert.q[i] += d * eta(t);
                    pert.p[i] += d * eta_dot(t);
                }
                diffs.push((evaluate_action(&pert, &params).unwrap() - j0).abs());
            }
            // least-squares slope of log|dJ| against log(delta)
            let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
            let ys: Vec<f64> = diffs.iter().map(|d| d.ln()).collect();
            let xm = xs.iter().sum::<f64>() / 4.0;
            let ym = ys.iter().sum::<f64>() / 4.0;
            let slope = xs
                .iter()
                .zip(ys.iter())
                .map(|(x, y)| (x - xm) * (y - ym))
                .sum::<f64>()
                / xs.iter().map(|x| (x - xm).powi(2)).sum::<f64>();
            assert!(
                (slope - 2.0).abs() < 0.2,
                "trial {trial}: stationarity slope {slope:.3}"
            );
        }
    }

    #[test]
    fn klein_gordon_zero_stays_zero() {
        let f = LatticeField::new(0.1, vec![0.0; 64], vec![0.0; 64], 0.0).unwrap();
        let out = solve_klein_gordon(&f, &LagrangianSpec::new(1.0).unwrap(), 1.0, 500).unwrap();
        assert!(out.phi.iter().chain(out.pi.iter()).all(|&x| x == 0.0));
    }

    #[test]
    fn klein_gordon_single_mode_dispersion() {
        let (n, a, m) = (64usize, 0.1f64, 1.0f64);
        let k = 2.0 * PI * 3.0 / (n as f64 * a);
        let phi: Vec<f64> = (0..n).map(|i| (k * i as f64 * a).cos()).collect();
        let f = LatticeField::new(a, phi, vec![0.0; n], 0.0).unwrap();
        let spec = LagrangianSpec::new(m).unwrap();
        let (t, steps) = (2.0, 5000usize);
        let dt = t / steps as f64;
        let out = solve_klein_gordon(&f, &spec, t, steps).unwrap();
        // discrete dispersion and the leapfrog frequency it maps to
        let k_hat = 2.0 / a * (k * a / 2.0).sin();
        let omega = (m * m + k_hat * k_hat).sqrt();
        let big_omega = 2.0 / dt * (omega * dt / 2.0).asin();
        assert!(
            (big_omega - omega).abs() < 1e-6,
            "time-discretization frequency error {:.3e}",
            (big_omega - omega).abs()
        );
        let worst = (0..n)
            .map(|i| {
                (out.phi[i] - (big_omega * t).cos() * (k * i as f64 * a).cos()).abs()
            })
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-10, "mode evolution error {worst:.3e}");
    }

    #[test]
    fn klein_gordon_energy_drift_and_cfl() {
        let (n, a, m) = (256usize, 0.1f64, 1.0f64);
        let length = n as f64 * a;
        let phi: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 * a;
                (2.0 * PI * x / length).sin() + 0.5 * (2.0 * PI * 3.0 * x / length).cos()
            })
            .collect();
        let pi: Vec<f64> =
            (0..n).map(|i| 0.3 * (2.0 * PI * 2.0 * i as f64 * a / length).sin()).collect();
        let f = LatticeField::new(a, phi, pi, 0.0).unwrap();
        let spec = LagrangianSpec::new(m).unwrap();
        let e0 = f.energy(m);
        let out = solve_klein_gordon(&f, &spec, 10.0, 10000).unwrap();
        let drift = (out.energy(m) - e0).abs() / e0;
        assert!(drift < 1e-6, "relative energy drift {drift:.3e}");
        assert!(matches!(
            solve_klein_gordon(&f, &spec, 10.0, 50),
            Err(Error::Cfl { .. })
        ));
    }

    fn tilted_surface() -> SurfaceParameterization {
        let s: Vec<f64> = (0..65).map(|i| -1.6 + 0.05 * i as f64).collect();
        let x0: Vec<f64> = s.iter().map(|&v| 0.4 * v + 0.2).collect();
        let x1 = s.clone();
        SurfaceParameterization::new(s, x0, x1).unwrap()
    }

    #[test]
    fn conjugate_momentum_flat_and_tilted() {
        let spec = LagrangianSpec::new(1.3).unwrap();
        let s: Vec<f64> = (0..65).map(|i| -1.6 + 0.05 * i as f64).collect();
        let flat = SurfaceParameterization::flat(s.clone(), 0.0).unwrap();
        let data = SurfaceFieldData {
            phi: s.iter().map(|&v| (0.7 * v).sin()).collect(),
            phi_x0: s.iter().map(|&v| (1.1 * v).cos()).collect(),
            phi_x1: s.iter().map(|&v| 0.3 * v).collect(),
        };
        let pi = conjugate_momentum(&flat, &data, &spec).unwrap();
        for i in 0..s.len() {
            assert!((pi[i] - data.phi_x0[i]).abs() < 1e-12);
        }
        // tilted straight surface with constant gradients: by hand,
        // pi = phi_x0 * 1 + phi_x1 * alpha
        let tilted = tilted_surface();
        let grad = SurfaceFieldData {
            phi: s.iter().map(|&v| 0.2 + 0.5 * (0.4 * v + 0.2) + 0.9 * v).collect(),
            phi_x0: vec![0.5; s.len()],
            phi_x1: vec![0.9; s.len()],
        };
        let pi = conjugate_momentum(&tilted, &grad, &spec).unwrap();
        for &v in &pi {
            assert!((v - (0.5 + 0.9 * 0.4)).abs() < 1e-12);
        }
        // non-spacelike surfaces are rejected at construction
        let steep: Vec<f64> = s.iter().map(|&v| 1.5 * v).collect();
        assert!(matches!(
            SurfaceParameterization::new(s.clone(), steep, s.clone()),
            Err(Error::NonSpacelike(_))
        ));
    }

    #[test]
    fn hamiltonian_densities_flat_and_tilted() {
        let m = 1.3f64;
        let spec = LagrangianSpec::new(m).unwrap();
        let s: Vec<f64> = (0..65).map(|i| -1.6 + 0.05 * i as f64).collect();
        let flat = SurfaceParameterization::flat(s.clone(), 0.0).unwrap();
        // phi = sin(s) with zero momentum
        let data = SurfaceFieldData {
            phi: s.iter().map(|&v| v.sin()).collect(),
            phi_x0: vec![0.0; s.len()],
            phi_x1: s.iter().map(|&v| v.cos()).collect(),
        };
        let pi = conjugate_momentum(&flat, &data, &spec).unwrap();
        let (h0, h1) = covariant_hamiltonian_densities(&flat, &data, &pi, &spec).unwrap();
        for i in 0..s.len() {
            let want = 0.5 * (s[i].cos().powi(2) + m * m * s[i].sin().powi(2));
            assert!((h0[i] - want).abs() < 1e-12);
            assert!(h1[i].abs() < 1e-12);
        }
        // flat with nonzero momentum: H1 = pi * phi_s
        let moving = SurfaceFieldData {
            phi_x0: s.iter().map(|&v| 0.4 * v.cos()).collect(),
            ..data.clone()
        };
        let pi = conjugate_momentum(&flat, &moving, &spec).unwrap();
        let (_, h1) = covariant_hamiltonian_densities(&flat, &moving, &pi, &spec).unwrap();
        for i in 0..s.len() {
            assert!((h1[i] - pi[i] * moving.phi_x1[i]).abs() < 1e-12);
        }
        // tilted constant-gradient case against a hand evaluation with
        // x0_s = alpha, x1_s = 1
        let tilted = tilted_surface();
        let (alpha, f0, f1) = (0.4, 0.5, 0.9);
        let grad = SurfaceFieldData {
            phi: vec![0.7; s.len()],
            phi_x0: vec![f0; s.len()],
            phi_x1: vec![f1; s.len()],
        };
        let pi = conjugate_momentum(&tilted, &grad, &spec).unwrap();
        let (h0, h1) = covariant_hamiltonian_densities(&tilted, &grad, &pi, &spec).unwrap();
        let l0 = 0.5 * (f0 * f0 - f1 * f1 - m * m * 0.7 * 0.7);
        let want0 = f1 * f0 * alpha + (f0 * f0 - l0) * 1.0;
        let want1 = f0 * f1 * 1.0 + (f1 * f1 + l0) * alpha;
        for i in 0..s.len() {
            assert!((h0[i] - want0).abs() < 1e-12);
            assert!((h1[i] - want1).abs() < 1e-12);
        }
        // inconsistent momentum is rejected
        let bad = vec![0.0; s.len()];
        assert!(covariant_hamiltonian_densities(&tilted, &grad, &bad, &spec).is_err());
    }

    #[test]
    fn poisson_bracket_canonical_and_generates_dynamics() {
        let (n, a, m) = (64usize, 0.1f64, 1.0f64);
        let phi: Vec<f64> =
            (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).sin()).collect();
        let pi: Vec<f64> =
            (0..n).map(|i| 0.4 * (4.0 * PI * i as f64 / n as f64).cos()).collect();
        let field = LatticeField::new(a, phi, pi, 0.0).unwrap();
        // antisymmetry and {F, F} = 0
        let e = energy_functional_derivative(&field, m);
        let point = point_evaluation_derivative(&field, 10, false);
        assert_eq!(functional_poisson_bracket(&e, &e).unwrap(), 0.0);
        let ab = functional_poisson_bracket(&e, &point).unwrap();
        let ba = functional_poisson_bracket(&point, &e).unwrap();
        assert!((ab + ba).abs() < 1e-14);
        // canonical pair: {phi(s0), pi(s1)} = delta / a
        for (s0, s1) in [(5usize, 5usize), (5, 6)] {
            let f1 = point_evaluation_derivative(&field, s0, false);
            let f2 = point_evaluation_derivative(&field, s1, true);
            let want = if s0 == s1 { 1.0 / a } else { 0.0 };
            assert!((functional_poisson_bracket(&f1, &f2).unwrap() - want).abs() < 1e-12);
        }
        // {phi(s0), H} equals the leapfrog time derivative within O(dt^2)
        let spec = LagrangianSpec::new(m).unwrap();
        let dt = 0.005;
        let fwd = solve_klein_gordon(&field, &spec, dt, 1).unwrap();
        let back = solve_klein_gordon(
            &LatticeField::new(a, field.phi.clone(), field.pi.iter().map(|x| -x).collect(), 0.0)
                .unwrap(),
            &spec,
            dt,
            1,
        )
        .unwrap();
        for s0 in [0usize, 17, 40] {
            let f1 = point_evaluation_derivative(&field, s0, false);
            let bracket = functional_poisson_bracket(&f1, &e).unwrap();
            let numeric = (fwd.phi[s0] - back.phi[s0]) / (2.0 * dt);
            assert!(
                (bracket - numeric).abs() < 1e-4,
                "node {s0}: bracket {bracket} vs leapfrog {numeric}"
            );
            // and equals pi(s0) exactly for the flat energy
            assert!((bracket - field.pi[s0]).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugation_approaches_classical_map_with_hbar() {
        let ladder = [0.4, 0.2, 0.1, 0.05];
        let errors = classical_limit_ladder(&ladder, 0.3, 250).unwrap();
        // the conjugation error must vanish at least linearly in hbar;
        // for symmetric (Weyl) ordering the measured decay is in fact
        // quadratic, comfortably inside the at-most-O(hbar) claim
        for w in errors.windows(2) {
            assert!(w[1] < w[0], "errors not decreasing: {errors:?}");
        }
        let slope = log_log_slope(&ladder, &errors);
        assert!(slope > 0.8, "classical-limit decay slope {slope:.3} ({errors:?})");
        let linear_bound = errors[0] / 0.4;
        assert!(
            errors[3] <= 0.05 * linear_bound,
            "final rung above the linear envelope: {errors:?}"
        );
    }
}

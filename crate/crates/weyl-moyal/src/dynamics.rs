//! Quadratic free flows, symbol transport, Hilbert-space propagation, and
//! the scattering operator by two independent routes.
//!
//! The free Hamiltonian is quadratic, so its classical flow is an affine
//! symplectic map computed in closed form. Symbols are transported along
//! that flow by exact spectral shears. The scattering operator is computed
//! (a) in the Hilbert space by Cayley (Crank-Nicolson) stepping of the full
//! and free propagators, and (b) directly in the symbol algebra by
//! integrating the interaction-picture equation
//! `i hbar dS/dt = V_I(t) * S` with a fourth-order scheme, where `V_I` is
//! the potential composed with the free flow. Route (b) exploits that the
//! model potentials are polynomials in `q`, for which the star product
//! terminates.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fourier;
use crate::moyal::{self, PhasePolynomial};
use crate::phase_space::{weyl_symbol_of, OperatorMatrix, PhaseSpaceGrid, Symbol};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `H0(z) = 1/2 z^T A z + b.z + c` with `z = (q, p)`; time independent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadraticHamiltonian {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: f64,
}

impl QuadraticHamiltonian {
    pub fn new(a: [[f64; 2]; 2], b: [f64; 2], c: f64) -> Result<Self> {
        if (a[0][1] - a[1][0]).abs() > 1e-12 {
            return Err(Error::InvalidParameter("quadratic form must be symmetric".into()));
        }
        Ok(Self { a, b, c })
    }

    /// `H0 = (p^2 + q^2)/2`, the unit harmonic oscillator.
    pub fn oscillator() -> Self {
        Self { a: [[1.0, 0.0], [0.0, 1.0]], b: [0.0, 0.0], c: 0.0 }
    }

    /// `H0 = p^2/2`, the free particle.
    pub fn free_particle() -> Self {
        Self { a: [[0.0, 0.0], [0.0, 1.0]], b: [0.0, 0.0], c: 0.0 }
    }

    pub fn symbol_value(&self, q: f64, p: f64) -> f64 {
        0.5 * (self.a[0][0] * q * q + 2.0 * self.a[0][1] * q * p + self.a[1][1] * p * p)
            + self.b[0] * q
            + self.b[1] * p
            + self.c
    }

    /// Assemble the operator on the grid: symmetric ordering of the cross
    /// term, spectral momentum.
    pub fn to_operator(&self, grid: PhaseSpaceGrid) -> OperatorMatrix {
        let qm = OperatorMatrix::position(grid);
        let pm = OperatorMatrix::momentum(grid);
        let half = Complex64::new(0.5, 0.0);
        let mut h = qm
            .matmul(&qm)
            .unwrap()
            .scale(half * self.a[0][0])
            .add(&pm.matmul(&pm).unwrap().scale(half * self.a[1][1]))
            .unwrap();
        if self.a[0][1] != 0.0 {
            let cross = qm
                .matmul(&pm)
                .unwrap()
                .add(&pm.matmul(&qm).unwrap())
                .unwrap()
                .scale(half * self.a[0][1]);
            h = h.add(&cross).unwrap();
        }
        if self.b[0] != 0.0 {
            h = h.add(&qm.scale(Complex64::new(self.b[0], 0.0))).unwrap();
        }
        if self.b[1] != 0.0 {
            h = h.add(&pm.scale(Complex64::new(self.b[1], 0.0))).unwrap();
        }
        if self.c != 0.0 {
            h = h.add(&OperatorMatrix::identity(grid).scale(Complex64::new(self.c, 0.0))).unwrap();
        }
        h
    }
}

/// Affine symplectic map `z -> M z + d`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SymplecticFlow {
    pub m: [[f64; 2]; 2],
    pub d: [f64; 2],
}

impl SymplecticFlow {
    pub fn new(m: [[f64; 2]; 2], d: [f64; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "flow matrix must have unit determinant, got {det}"
            )));
        }
        Ok(Self { m, d })
    }

    pub fn identity() -> Self {
        Self { m: [[1.0, 0.0], [0.0, 1.0]], d: [0.0, 0.0] }
    }

    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * z[0] + self.m[0][1] * z[1] + self.d[0],
            self.m[1][0] * z[0] + self.m[1][1] * z[1] + self.d[1],
        ]
    }

    /// `self` after `other`: `(self ∘ other)(z) = self(other(z))`.
    pub fn compose(&self, other: &SymplecticFlow) -> SymplecticFlow {
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.m[i][0] * other.m[0][j] + self.m[i][1] * other.m[1][j];
            }
        }
        let d = [
            self.m[0][0] * other.d[0] + self.m[0][1] * other.d[1] + self.d[0],
            self.m[1][0] * other.d[0] + self.m[1][1] * other.d[1] + self.d[1],
        ];
        SymplecticFlow { m, d }
    }

    pub fn inverse(&self) -> SymplecticFlow {
        // unit determinant: adjugate is the inverse
        let m = [[self.m[1][1], -self.m[0][1]], [-self.m[1][0], self.m[0][0]]];
        let d = [
            -(m[0][0] * self.d[0] + m[0][1] * self.d[1]),
            -(m[1][0] * self.d[0] + m[1][1] * self.d[1]),
        ];
        SymplecticFlow { m, d }
    }

    pub fn max_abs_diff(&self, other: &SymplecticFlow) -> f64 {
        let mut err = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                err = err.max((self.m[i][j] - other.m[i][j]).abs());
            }
            err = err.max((self.d[i] - other.d[i]).abs());
        }
        err
    }
}

/// Closed-form flow of the quadratic Hamiltonian for time `t`:
/// `M = exp(t J A)`, `d = (int_0^t exp(s J A) ds) J b`.
pub fn free_flow(h: &QuadraticHamiltonian, t: f64) -> SymplecticFlow {
    let a = h.a;
    // X = J A with J = [[0,1],[-1,0]]; traceless since A is symmetric.
    let x = [[a[1][0], a[1][1]], [-a[0][0], -a[0][1]]];
    let det_a = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    // exp(tX) = c0 I + c1 X, int_0^t exp(sX) ds = i0 I + i1 X
    let (c0, c1, i0, i1) = if det_a > 1e-14 {
        let w = det_a.sqrt();
        let th = w * t;
        (th.cos(), th.sin() / w, th.sin() / w, (1.0 - th.cos()) / det_a)
    } else if det_a < -1e-14 {
        let l = (-det_a).sqrt();
        let lt = l * t;
        (lt.cosh(), lt.sinh() / l, lt.sinh() / l, (lt.cosh() - 1.0) / (-det_a))
    } else {
        (1.0, t, t, 0.5 * t * t)
    };
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = c1 * x[i][j] + if i == j { c0 } else { 0.0 };
        }
    }
    let jb = [h.b[1], -h.b[0]];
    let d = [
        i0 * jb[0] + i1 * (x[0][0] * jb[0] + x[0][1] * jb[1]),
        i0 * jb[1] + i1 * (x[1][0] * jb[0] + x[1][1] * jb[1]),
    ];
    SymplecticFlow { m, d }
}

#[derive(Debug, Clone, Copy)]
enum Shear {
    /// q -> q + alpha p
    Q(f64),
    /// p -> p + gamma q
    P(f64),
}

/// Decompose the unit-determinant matrix into at most three lattice shears
/// (plus a recursion step for near-diagonal matrices, which no shear
/// triple reaches directly).
fn shear_chain(m: [[f64; 2]; 2], out: &mut Vec<Shear>) {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let eps = 1e-9;
    if c.abs() > eps {
        out.push(Shear::Q((a - 1.0) / c));
        out.push(Shear::P(c));
        out.push(Shear::Q((d - 1.0) / c));
    } else if b.abs() > eps {
        out.push(Shear::P((d - 1.0) / b));
        out.push(Shear::Q(b));
        out.push(Shear::P((a - 1.0) / b));
    } else if (a - 1.0).abs() < 1e-12 {
        // identity up to roundoff
    } else {
        // near-diagonal scaling: route through a quarter rotation,
        // M = (M R^-1) R with R = [[0,1],[-1,0]]
        let mr = [[-m[0][1], m[0][0]], [-m[1][1], m[1][0]]];
        shear_chain(mr, out);
        shear_chain([[0.0, 1.0], [-1.0, 0.0]], out);
    }
}

/// Compose a symbol with an affine symplectic flow: `(T Phi)(z) = Phi(flow(z))`.
///
/// Exact for band-limited symbols up to the resampling of non-lattice
/// harmonics; the translation and each shear are single spectral passes.
pub fn transport_symbol(phi: &Symbol, flow: &SymplecticFlow) -> Result<Symbol> {
    transport_symbol_with(phi, flow, Some(Tolerances::default().support_escape_mass))
}

/// Transport with an explicit support-escape limit (`None` disables the check).
pub fn transport_symbol_with(
    phi: &Symbol,
    flow: &SymplecticFlow,
    escape_limit: Option<f64>,
) -> Result<Symbol> {
    let grid = *phi.grid();
    if let Some(limit) = escape_limit {
        let mass = phi.boundary_mass(0.9);
        if mass > limit {
            return Err(Error::SupportEscape { mass, limit });
        }
    }
    let mut values = phi.values().clone();
    // translation first: A(Mz + d) = C(Mz) with C(z) = A(z + d)
    if flow.d[0] != 0.0 {
        values = fourier::shift_q_per_column(&values, grid.u_step(), |_| flow.d[0]);
    }
    if flow.d[1] != 0.0 {
        values = fourier::shift_p_per_row(&values, grid.v_step(), |_| flow.d[1]);
    }
    let mut chain = Vec::new();
    shear_chain(flow.m, &mut chain);
    for shear in chain {
        match shear {
            Shear::Q(alpha) => {
                if alpha != 0.0 {
                    values = fourier::shift_q_per_column(&values, grid.u_step(), |k| {
                        alpha * grid.p(k)
                    });
                }
            }
            Shear::P(gamma) => {
                if gamma != 0.0 {
                    values =
                        fourier::shift_p_per_row(&values, grid.v_step(), |j| gamma * grid.q(j));
                }
            }
        }
    }
    let out = Symbol::new(grid, values)?;
    if let Some(limit) = escape_limit {
        let mass = out.boundary_mass(0.9);
        if mass > limit {
            return Err(Error::SupportEscape { mass, limit });
        }
    }
    Ok(out)
}

/// Smooth compactly supported bump `amplitude * (1 - u^2)^3` for
/// `u = (t - center)/width` inside `|u| < 1`, identically zero outside.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseShape {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl PulseShape {
    pub fn value(&self, t: f64) -> f64 {
        let u = (t - self.center) / self.width;
        if u.abs() >= 1.0 {
            0.0
        } else {
            let w = 1.0 - u * u;
            self.amplitude * w * w * w
        }
    }

    /// `int g dt` by closed form: `int (1-u^2)^3 du = 32/35` over the support.
    pub fn integral(&self) -> f64 {
        self.amplitude * self.width * 32.0 / 35.0
    }
}

/// Time-dependent interaction `V(t, q) = g(t) q^4/4! + j(t) q`, supported
/// strictly inside the window.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub window: (f64, f64),
    #[serde(default)]
    pub quartic: Vec<PulseShape>,
    #[serde(default)]
    pub linear: Vec<PulseShape>,
}

impl PotentialSpec {
    pub fn free(window: (f64, f64)) -> Self {
        Self { window, quartic: Vec::new(), linear: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window.1 > self.window.0) {
            return Err(Error::InvalidPotential("window must have positive length".into()));
        }
        for p in self.quartic.iter().chain(self.linear.iter()) {
            if p.width <= 0.0 {
                return Err(Error::InvalidPotential("pulse width must be positive".into()));
            }
            if p.center - p.width <= self.window.0 || p.center + p.width >= self.window.1 {
                return Err(Error::InvalidPotential(format!(
                    "pulse support [{}, {}] must lie strictly inside the window ({}, {})",
                    p.center - p.width,
                    p.center + p.width,
                    self.window.0,
                    self.window.1
                )));
            }
        }
        Ok(())
    }

    pub fn g(&self, t: f64) -> f64 {
        self.quartic.iter().map(|p| p.value(t)).sum()
    }

    pub fn j(&self, t: f64) -> f64 {
        self.linear.iter().map(|p| p.value(t)).sum()
    }

    pub fn is_free(&self) -> bool {
        self.quartic.is_empty() && self.linear.is_empty()
    }

    /// `V(t)` as a polynomial in `q`.
    pub fn polynomial_at(&self, t: f64) -> PhasePolynomial {
        let mut poly = PhasePolynomial::zero();
        let g = self.g(t);
        if g != 0.0 {
            poly.set(4, 0, Complex64::new(g / 24.0, 0.0));
        }
        let j = self.j(t);
        if j != 0.0 {
            poly.set(1, 0, Complex64::new(j, 0.0));
        }
        poly
    }
}

// ---------------------------------------------------------------------------
// Dense complex LU with partial pivoting (small fixed problem sizes; avoids
// an external LAPACK linkage).
// ---------------------------------------------------------------------------

fn lu_factor(a: &mut Array2<Complex64>) -> Result<Vec<usize>> {
    let n = a.nrows();
    let mut piv = Vec::with_capacity(n);
    for col in 0..n {
        let mut best = col;
        let mut best_mag = a[[col, col]].norm_sqr();
        for r in col + 1..n {
            let mag = a[[r, col]].norm_sqr();
            if mag > best_mag {
                best = r;
                best_mag = mag;
            }
        }
        if best_mag == 0.0 {
            return Err(Error::NonConvergence("singular matrix in LU factorization".into()));
        }
        if best != col {
            for c in 0..n {
                let tmp = a[[col, c]];
                a[[col, c]] = a[[best, c]];
                a[[best, c]] = tmp;
            }
        }
        piv.push(best);
        let inv = a[[col, col]].inv();
        for r in col + 1..n {
            let factor = a[[r, col]] * inv;
            a[[r, col]] = factor;
            if factor.norm_sqr() != 0.0 {
                for c in col + 1..n {
                    let sub = factor * a[[col, c]];
                    a[[r, c]] -= sub;
                }
            }
        }
    }
    Ok(piv)
}

/// Solve `A X = B` in place on `B`, with `A` already factored.
fn lu_solve(a: &Array2<Complex64>, piv: &[usize], b: &mut Array2<Complex64>) {
    let n = a.nrows();
    for col in 0..n {
        if piv[col] != col {
            for c in 0..b.ncols() {
                let tmp = b[[col, c]];
                b[[col, c]] = b[[piv[col], c]];
                b[[piv[col], c]] = tmp;
            }
        }
        for r in col + 1..n {
            let factor = a[[r, col]];
            if factor.norm_sqr() != 0.0 {
                for c in 0..b.ncols() {
                    let sub = factor * b[[col, c]];
                    b[[r, c]] -= sub;
                }
            }
        }
    }
    for col in (0..n).rev() {
        let inv = a[[col, col]].inv();
        for c in 0..b.ncols() {
            b[[col, c]] *= inv;
        }
        for r in 0..col {
            let factor = a[[r, col]];
            if factor.norm_sqr() != 0.0 {
                for c in 0..b.ncols() {
                    let sub = factor * b[[col, c]];
                    b[[r, c]] -= sub;
                }
            }
        }
    }
}

/// Cayley (Crank-Nicolson) propagation of the full evolution operator over
/// the potential window. Each step is `U <- (1 + i dt H/2 hbar)^{-1}
/// (1 - i dt H/2 hbar) U` with `H` frozen at the step midpoint; exactly
/// norm preserving, global error O(dt^2).
pub fn evolve_hilbert(
    grid: PhaseSpaceGrid,
    h0: &QuadraticHamiltonian,
    v: &PotentialSpec,
    steps: usize,
) -> Result<OperatorMatrix> {
    v.validate()?;
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    let n = grid.points();
    let dt = (v.window.1 - v.window.0) / steps as f64;
    let hbar = grid.hbar();

    // step-resolution heuristic: the spectral radius of H is close to the
    // symbol maximum for these Hamiltonians
    let mut h_sup = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            h_sup = h_sup.max(h0.symbol_value(grid.q(j), grid.p(k)).abs());
        }
    }
    let mut v_sup = 0.0f64;
    for s in 0..steps {
        let t = v.window.0 + (s as f64 + 0.5) * dt;
        let g = v.g(t).abs();
        let jj = v.j(t).abs();
        let q_max = grid.half_extent();
        v_sup = v_sup.max(g * q_max.powi(4) / 24.0 + jj * q_max);
    }
    let limit = Tolerances::default().step_resolution;
    let value = dt * (h_sup + v_sup);
    if value >= limit {
        return Err(Error::StepResolution { value, limit });
    }

    let h0_op = h0.to_operator(grid);
    if h0_op.hermiticity_defect() > 1e-10 {
        return Err(Error::InvalidParameter("assembled Hamiltonian is not Hermitian".into()));
    }
    let mut u = Array2::<Complex64>::eye(n);
    let mut cached: Option<(f64, f64, Array2<Complex64>)> = None;
    for s in 0..steps {
        let t = v.window.0 + (s as f64 + 0.5) * dt;
        let g = v.g(t);
        let jj = v.j(t);
        let reuse = matches!(&cached, Some((cg, cj, _)) if *cg == g && *cj == jj);
        if !reuse {
            // K = (1 + i dt H / 2 hbar)^{-1} (1 - i dt H / 2 hbar)
            let mut h = h0_op.entries().clone();
            for jq in 0..n {
                let q = grid.q(jq);
                h[[jq, jq]] += Complex64::new(g * q.powi(4) / 24.0 + jj * q, 0.0);
            }
            let lam = Complex64::new(0.0, dt / (2.0 * hbar));
            let mut a_mat = Array2::<Complex64>::eye(n);
            let mut b_mat = Array2::<Complex64>::eye(n);
            for jq in 0..n {
                for k in 0..n {
                    let hv = lam * h[[jq, k]];
                    a_mat[[jq, k]] += hv;
                    b_mat[[jq, k]] -= hv;
                }
            }
            let piv = lu_factor(&mut a_mat)?;
            lu_solve(&a_mat, &piv, &mut b_mat);
            cached = Some((g, jj, b_mat));
        }
        let k_mat = &cached.as_ref().unwrap().2;
        u = k_mat.dot(&u);
    }
    OperatorMatrix::new(grid, u)
}

/// Scattering operator via the Hilbert route: the symbol of `U0^-1 U`,
/// both propagators stepped identically so a vanishing potential yields
/// the identity exactly.
pub fn scattering_operator_hilbert(
    grid: PhaseSpaceGrid,
    h0: &QuadraticHamiltonian,
    v: &PotentialSpec,
    steps: usize,
) -> Result<Symbol> {
    let u = evolve_hilbert(grid, h0, v, steps)?;
    let u0 = evolve_hilbert(grid, h0, &PotentialSpec::free(v.window), steps)?;
    let s = u0.adjoint().matmul(&u)?;
    Ok(weyl_symbol_of(&s))
}

/// Scattering operator via the symbol route: classic fourth-order
/// Runge-Kutta on `dS/dt = V_I(t) * S / (i hbar)`, with the polynomial
/// interaction transported along the free flow so every star product
/// terminates exactly.
pub fn scattering_operator_star(
    grid: PhaseSpaceGrid,
    h0: &QuadraticHamiltonian,
    v: &PotentialSpec,
    steps: usize,
) -> Result<Symbol> {
    scattering_operator_star_driven(grid, h0, v, &|_| 0.0, steps)
}

/// Same as [`scattering_operator_star`] with an extra source term
/// `drive(t) q` added on top of the potential's own pulses; the drive is
/// what green-function requests differentiate with respect to.
pub fn scattering_operator_star_driven(
    grid: PhaseSpaceGrid,
    h0: &QuadraticHamiltonian,
    v: &PotentialSpec,
    drive: &(dyn Fn(f64) -> f64 + Sync),
    steps: usize,
) -> Result<Symbol> {
    scattering_operator_star_anchored(grid, h0, v, drive, v.window.0, steps)
}

/// Star-route scattering operator referenced at an arbitrary anchor time:
/// the interaction picture is taken relative to `reference_time` instead of
/// the window start, so the result is the symbol of
/// `U0(T2 <- ref)^-1 U(T2 <- T1) U0(T1 <- ref)`. Re-anchoring happens inside
/// the (exact) polynomial flow composition; transporting the finished symbol
/// instead would drag boundary-wrap artifacts across the whole box.
pub fn scattering_operator_star_anchored(
    grid: PhaseSpaceGrid,
    h0: &QuadraticHamiltonian,
    v: &PotentialSpec,
    drive: &(dyn Fn(f64) -> f64 + Sync),
    reference_time: f64,
    steps: usize,
) -> Result<Symbol> {
    v.validate()?;
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    let (t1, t2) = v.window;
    let dt = (t2 - t1) / steps as f64;
    let hbar = grid.hbar();
    let minus_i_over_h = Complex64::new(0.0, -1.0 / hbar);

    let v_i = |t: f64| -> PhasePolynomial {
        let flow = free_flow(h0, t - reference_time);
        let mut poly = v.polynomial_at(t);
        let d = drive(t);
        if d != 0.0 {
            let prev = poly.coefficient(1, 0);
            poly.set(1, 0, prev + Complex64::new(d, 0.0));
        }
        poly.compose_affine(flow.m, flow.d)
    };
    let rhs = |t: f64, s: &Symbol| -> Symbol {
        let poly = v_i(t);
        if poly.is_zero() {
            return Symbol::zeros(*s.grid());
        }
        moyal::star_poly_left(&poly, s).scale(minus_i_over_h)
    };

    let mut s = Symbol::constant(grid, Complex64::new(1.0, 0.0));
    // Mid-integration band check. S picks up Dirichlet tails from the
    // periodic wrap of its phase even in healthy runs, so the guard only
    // trips on genuine Nyquist breakdown, well above those tails.
    let band_limit = 0.5f64;
    for step in 0..steps {
        let t = t1 + step as f64 * dt;
        let k1 = rhs(t, &s);
        let k2 = rhs(t + 0.5 * dt, &s.add(&k1.scale(Complex64::new(0.5 * dt, 0.0)))?);
        let k3 = rhs(t + 0.5 * dt, &s.add(&k2.scale(Complex64::new(0.5 * dt, 0.0)))?);
        let k4 = rhs(t + dt, &s.add(&k3.scale(Complex64::new(dt, 0.0)))?);
        let incr = k1
            .add(&k2.scale(Complex64::new(2.0, 0.0)))?
            .add(&k3.scale(Complex64::new(2.0, 0.0)))?
            .add(&k4)?
            .scale(Complex64::new(dt / 6.0, 0.0));
        s = s.add(&incr)?;
        if step % 64 == 63 {
            let mass = s.high_band_mass();
            if mass > band_limit {
                return Err(Error::BandLimit { mass, limit: band_limit });
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{weyl_quantize, weyl_symbol_of, wigner_of_state, WaveFunction};
    use std::f64::consts::PI;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(10.0, 128, 1.0).unwrap()
    }

    /// Smaller grid for tests that step dense propagators.
    fn gridh() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(8.0, 64, 1.0).unwrap()
    }

    #[test]
    fn free_flow_period_and_shear() {
        let h = QuadraticHamiltonian::oscillator();
        let full = free_flow(&h, 2.0 * PI);
        assert!(full.max_abs_diff(&SymplecticFlow::identity()) < 1e-12);
        let fp = QuadraticHamiltonian::free_particle();
        let tau = 0.7;
        let sh = free_flow(&fp, tau);
        let want = SymplecticFlow::new([[1.0, tau], [0.0, 1.0]], [0.0, 0.0]).unwrap();
        assert!(sh.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn free_flow_group_property() {
        let h = QuadraticHamiltonian::new([[1.3, 0.2], [0.2, 0.8]], [0.1, -0.3], 0.0).unwrap();
        let f1 = free_flow(&h, 0.37);
        let f2 = free_flow(&h, 0.95);
        let combined = free_flow(&h, 0.37 + 0.95);
        assert!(f1.compose(&f2).max_abs_diff(&combined) < 1e-12);
        // inverse
        let back = free_flow(&h, -0.37);
        assert!(f1.compose(&back).max_abs_diff(&SymplecticFlow::identity()) < 1e-12);
    }

    #[test]
    fn transport_identity_and_coordinate() {
        let g = grid();
        let phi = Symbol::from_fn(g, |q, p| {
            Complex64::new((-(q * q + p * p) / 2.0).exp() * (1.0 + 0.2 * q), 0.0)
        });
        let same = transport_symbol(&phi, &SymplecticFlow::identity()).unwrap();
        assert!(same.linf_distance(&phi).unwrap() < 1e-12);

        // q transported under the oscillator flow becomes q cos t + p sin t.
        // The coordinate symbol wraps, so compare it against a masked
        // Gaussian to stay away from the sawtooth jump.
        let t = 0.6f64;
        let flow = free_flow(&QuadraticHamiltonian::oscillator(), t);
        let blob = |q: f64, p: f64| (-((q - 1.0) * (q - 1.0) + p * p) / 2.0).exp();
        let masked_q = Symbol::from_fn(g, |q, p| Complex64::new(q * blob(q, p), 0.0));
        let moved = transport_symbol(&masked_q, &flow).unwrap();
        // (q b)(flow z) where flow moves both factors
        let want = Symbol::from_fn(g, |q, p| {
            let z = flow.apply([q, p]);
            Complex64::new(z[0] * blob(z[0], z[1]), 0.0)
        });
        assert!(moved.linf_distance(&want).unwrap() < 1e-7);
    }

    #[test]
    fn transport_gaussian_under_shear() {
        let g = grid();
        let fp = QuadraticHamiltonian::free_particle();
        let flow = free_flow(&fp, 0.8);
        let phi = Symbol::from_fn(g, |q, p| {
            Complex64::new((-((q + 0.5) * (q + 0.5) + (p - 0.3) * (p - 0.3))).exp(), 0.0)
        });
        let moved = transport_symbol(&phi, &flow).unwrap();
        let want = Symbol::from_fn(g, |q, p| {
            let z = flow.apply([q, p]);
            Complex64::new((-((z[0] + 0.5) * (z[0] + 0.5) + (z[1] - 0.3) * (z[1] - 0.3))).exp(), 0.0)
        });
        assert!(moved.linf_distance(&want).unwrap() < 1e-9);
    }

    /// Centered discrete Fourier transform as a unitary matrix. Up to a
    /// global phase this is the oscillator propagator over a quarter period,
    /// and unlike a stepped propagator it carries no time-discretization
    /// error, so it serves as an exact conjugation oracle.
    fn quarter_turn_unitary(g: PhaseSpaceGrid) -> OperatorMatrix {
        let n = g.points();
        let norm = 1.0 / (n as f64).sqrt();
        let mut w = Array2::zeros((n, n));
        for k in 0..n {
            for j in 0..n {
                let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                let ph = -2.0 * PI * (j as f64) * (k as f64) / n as f64;
                w[[k, j]] = Complex64::from_polar(sign * norm, ph);
            }
        }
        OperatorMatrix::new(g, w).unwrap()
    }

    #[test]
    fn transport_matches_metaplectic_conjugation() {
        // T Phi = symbol(U0^dag quantize(Phi) U0) for the oscillator flow.
        // The DFT is the quarter turn only on a balanced grid (dq = dp),
        // i.e. L = sqrt(N pi hbar / 2).
        let n = 64usize;
        let g = PhaseSpaceGrid::new((n as f64 * PI / 2.0).sqrt(), n, 1.0).unwrap();
        let h = QuadraticHamiltonian::oscillator();
        let u0 = quarter_turn_unitary(g);
        assert!(u0.unitarity_defect() < 1e-12);

        // pin down which quarter turn the transform implements by conjugating
        // the position operator: q evolves to q cos t + p sin t
        let qop = OperatorMatrix::position(g);
        let pop = OperatorMatrix::momentum(g);
        let q_conj = u0.adjoint().matmul(&qop).unwrap().matmul(&u0).unwrap();
        let t = if q_conj.max_abs_diff(&pop).unwrap() < 1e-9 {
            PI / 2.0
        } else {
            assert!(q_conj.max_abs_diff(&pop.scale(Complex64::new(-1.0, 0.0))).unwrap() < 1e-9);
            -PI / 2.0
        };

        let phi = Symbol::random_band_limited(g, 10, 42, false);
        // suppress boundary content so the transported support stays inside
        let phi = {
            let mask = Symbol::from_fn(g, |q, p| {
                Complex64::new((-(q * q + p * p) / 4.0).exp(), 0.0)
            });
            phi.mul_pointwise(&mask).unwrap()
        };
        let moved = transport_symbol(&phi, &free_flow(&h, t)).unwrap();

        let conj = u0
            .adjoint()
            .matmul(&crate::phase_space::weyl_quantize(&phi))
            .unwrap()
            .matmul(&u0)
            .unwrap();
        let oracle = weyl_symbol_of(&conj);
        let err = moved.linf_distance_interior(&oracle, 0.8).unwrap();
        assert!(err < 1e-7, "metaplectic covariance defect {err}");
    }

    #[test]
    fn transport_rejects_escaping_support() {
        let g = grid();
        let phi = Symbol::from_fn(g, |q, p| {
            Complex64::new((-((q - 8.0) * (q - 8.0) + p * p)).exp(), 0.0)
        });
        let flow = SymplecticFlow::new([[1.0, 0.0], [0.0, 1.0]], [3.0, 0.0]).unwrap();
        // translating by +3 pushes the blob through the boundary; input mass
        // is already marginal, output must trip the check
        let res = transport_symbol(&phi, &flow);
        assert!(matches!(res, Err(Error::SupportEscape { .. })));
    }

    #[test]
    fn cayley_oscillator_period_fidelity() {
        let g = gridh();
        let h = QuadraticHamiltonian::oscillator();
        let u = evolve_hilbert(g, &h, &PotentialSpec::free((0.0, 2.0 * PI)), 4096).unwrap();
        assert!(u.unitarity_defect() < 1e-11);
        let psi = WaveFunction::coherent(g, 1.0, 0.5, 1.0, 1.0);
        let evolved = u.apply(&psi).unwrap();
        let fid = evolved.fidelity(&psi).unwrap();
        assert!(fid > 1.0 - 1e-8, "period fidelity {fid}");
    }

    #[test]
    fn heisenberg_transport_matches_free_flow() {
        // wavepacket centroid follows the classical flow
        let g = gridh();
        let h = QuadraticHamiltonian::oscillator();
        let t = 1.1f64;
        let u = evolve_hilbert(g, &h, &PotentialSpec::free((0.0, t)), 8192).unwrap();
        let psi = WaveFunction::coherent(g, 1.2, -0.4, 1.0, 1.0);
        let evolved = u.apply(&psi).unwrap();
        let w = wigner_of_state(&evolved, false, 1e-6).unwrap();
        // centroid of the Wigner function
        let mut zq = 0.0f64;
        let mut zp = 0.0f64;
        let mut total = 0.0f64;
        for j in 0..g.points() {
            for k in 0..g.points() {
                let wv = w.values()[[j, k]].re;
                zq += wv * g.q(j);
                zp += wv * g.p(k);
                total += wv;
            }
        }
        zq /= total;
        zp /= total;
        let z = free_flow(&h, t).apply([1.2, -0.4]);
        assert!((zq - z[0]).abs() < 1e-6, "q centroid {zq} vs {}", z[0]);
        assert!((zp - z[1]).abs() < 1e-6, "p centroid {zp} vs {}", z[1]);
    }

    /// Quadrature of the closed-form response constants for a linear pulse:
    /// alpha = -int j(t) cos(t - t1) dt, beta = -int j(t) sin(t - t1) dt,
    /// gamma from the phase equation.
    fn linear_response_constants(v: &PotentialSpec) -> (f64, f64, f64) {
        let (t1, t2) = v.window;
        let steps = 40000usize;
        let dt = (t2 - t1) / steps as f64;
        let mut alpha = 0.0f64;
        let mut beta = 0.0f64;
        let mut gamma = 0.0f64;
        for s in 0..steps {
            let t = t1 + (s as f64 + 0.5) * dt;
            let j = v.j(t);
            let (c, si) = ((t - t1).cos(), (t - t1).sin());
            gamma += 0.5 * j * (c * beta - si * alpha) * dt;
            alpha -= j * c * dt;
            beta -= j * si * dt;
        }
        (alpha, beta, gamma)
    }

    #[test]
    fn scattering_free_potential_is_identity() {
        let g = gridh();
        let h = QuadraticHamiltonian::oscillator();
        let v = PotentialSpec::free((-0.5, 0.5));
        let s = scattering_operator_hilbert(g, &h, &v, 600).unwrap();
        let one = Symbol::constant(g, Complex64::new(1.0, 0.0));
        assert!(s.linf_distance(&one).unwrap() < 1e-10);
        let s2 = scattering_operator_star(g, &h, &v, 50).unwrap();
        assert!(s2.linf_distance(&one).unwrap() == 0.0);
    }

    /// Largest coherent-state matrix-element deviation between two operators.
    fn weak_distance(g: PhaseSpaceGrid, a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
        let pts = [(0.0, 0.0), (1.0, 0.5), (-0.8, 1.2), (1.5, -1.0)];
        let inner = |x: &crate::phase_space::WaveFunction, y: &crate::phase_space::WaveFunction| {
            x.values()
                .iter()
                .zip(y.values().iter())
                .map(|(u, v)| u.conj() * v)
                .sum::<Complex64>()
        };
        let mut worst = 0.0f64;
        for &(q1, p1) in &pts {
            for &(q2, p2) in &pts {
                let bra = crate::phase_space::WaveFunction::coherent(g, q1, p1, 1.0, 1.0);
                let ket = crate::phase_space::WaveFunction::coherent(g, q2, p2, 1.0, 1.0);
                let ma = inner(&bra, &a.apply(&ket).unwrap());
                let mb = inner(&bra, &b.apply(&ket).unwrap());
                worst = worst.max((ma - mb).norm());
            }
        }
        worst
    }

    #[test]
    fn scattering_linear_source_closed_form() {
        // needs a box a little larger than gridh(): the coherent-state
        // matrix elements below carry e^{-L^2}-type boundary tails that are
        // ~2e-6 at L = 8 and gone at L = 10
        let g = PhaseSpaceGrid::new(10.0, 96, 1.0).unwrap();
        let h = QuadraticHamiltonian::oscillator();
        let mut v = PotentialSpec::free((-0.5, 0.5));
        v.linear.push(PulseShape { amplitude: 0.4, center: 0.0, width: 0.3 });
        let (alpha, beta, gamma) = linear_response_constants(&v);
        // The closed form is the pure phase exp(i(alpha q + beta p +
        // gamma)/hbar). Its frequency (alpha, beta) is not commensurate with
        // the box, so on the torus both computed routes and the sampled
        // closed form carry boundary-wrap ringing; pointwise they agree only
        // to a few permille in the interior. The physical content lives in
        // matrix elements against boundary-negligible states, where all
        // three agree to the full tolerance.
        let want = Symbol::from_fn(g, |q, p| {
            Complex64::from_polar(1.0, (alpha * q + beta * p + gamma) / g.hbar())
        });

        let s_star = scattering_operator_star(g, &h, &v, 400).unwrap();
        let s_hil = scattering_operator_hilbert(g, &h, &v, 4000).unwrap();
        assert!(s_star.linf_distance_interior(&want, 0.5).unwrap() < 1e-2);
        assert!(s_hil.linf_distance_interior(&want, 0.5).unwrap() < 1e-1);

        let q_star = crate::phase_space::weyl_quantize(&s_star);
        let q_hil = crate::phase_space::weyl_quantize(&s_hil);
        let q_want = crate::phase_space::weyl_quantize(&want);
        let d_star = weak_distance(g, &q_star, &q_want);
        assert!(d_star < 1e-6, "star route vs closed form (weak) {d_star}");
        let d_hil = weak_distance(g, &q_hil, &q_want);
        assert!(d_hil < 1e-6, "hilbert route vs closed form (weak) {d_hil}");

        // No unitarity assertion here: quantizing the wrap ringing spoils
        // S^dag S at the 1e-4 level even for the sampled closed form itself,
        // so the defect measures the boundary artifact rather than the
        // route. Unitarity is checked on ring-free inputs elsewhere.
    }

    #[test]
    fn scattering_quartic_route_agreement() {
        // The two routes quantize the quartic on different geometries: the
        // Hilbert route sees the periodic box, the star route transports the
        // line polynomial q^4 along the free flow, which reaches arbitrarily
        // far in p. A pulse timed near the window edge keeps the transported
        // polynomial close to q^4 and the mismatch confined to a boundary
        // layer; in the interior the routes then agree to a few percent of
        // the scattered signal. (Pointwise agreement at the grid boundary is
        // not attainable on the torus; see the interior mask.)
        let g = gridh();
        let h = QuadraticHamiltonian::oscillator();
        let mut v = PotentialSpec::free((-0.5, 0.5));
        v.quartic.push(PulseShape { amplitude: 0.1, center: -0.4, width: 0.04 });
        let s_star = scattering_operator_star(g, &h, &v, 4000).unwrap();
        let s_hil = scattering_operator_hilbert(g, &h, &v, 8000).unwrap();
        let one = Symbol::constant(g, Complex64::new(1.0, 0.0));
        let signal = s_hil.linf_distance_interior(&one, 0.5).unwrap();
        let err = s_star.linf_distance_interior(&s_hil, 0.5).unwrap();
        assert!(err < 5e-3, "route disagreement {err}");
        assert!(err < 0.1 * signal, "route disagreement {err} vs signal {signal}");
        // unitarity of the star-route symbol, away from the boundary layer
        let prod = moyal::star(&s_star, &s_star.conj(), moyal::StarMethod::SpectralIntegral).unwrap();
        let unit = prod.linf_distance_interior(&one, 0.5).unwrap();
        assert!(unit < 5e-3, "interior unitarity defect {unit}");
    }

    #[test]
    fn step_resolution_check_trips() {
        let g = gridh();
        let h = QuadraticHamiltonian::oscillator();
        let v = PotentialSpec::free((0.0, 2.0 * PI));
        let res = evolve_hilbert(g, &h, &v, 10);
        assert!(matches!(res, Err(Error::StepResolution { .. })));
    }

    /// Potential pair for the causality checks: V1 and V2 agree (vanish)
    /// before t = 0 and differ afterwards; `perturb` adds a shared
    /// variation supported strictly before t = 0. All amplitudes carry a
    /// common scale factor.
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

    #[test]
    fn early_history_cancels_in_scattering_ratio() {
        // Time ordering factorizes S = S_late * S_early with the shared
        // early factor on the right, so the ratio S(V1) * S(V2)^-1
        // (star-inverse of a unitary symbol = its conjugate) depends only on
        // the parts of the potentials after t = 0: adding the same
        // early-time variation to both must leave the ratio unchanged.
        let g = gridh();
        let h = QuadraticHamiltonian::oscillator();
        let steps = 1000;
        let one = Symbol::constant(g, Complex64::new(1.0, 0.0));

        // Part 1: the cancellation is exact at the operator level. The
        // propagator is a product of exactly unitary Cayley steps, so the
        // early factors annihilate in U1 U2^dag to machine precision.
        {
            let (v1, v2, perturb) = causality_potentials(0.3);
            let ratio = |a: &PotentialSpec, b: &PotentialSpec| -> Symbol {
                let sa = weyl_quantize(&scattering_operator_hilbert(g, &h, a, steps).unwrap());
                let sb = weyl_quantize(&scattering_operator_hilbert(g, &h, b, steps).unwrap());
                weyl_symbol_of(&sa.matmul(&sb.adjoint()).unwrap())
            };
            let bare = ratio(&v1, &v2);
            let dressed = ratio(&perturb(&v1), &perturb(&v2));
            let diff = bare.linf_distance(&dressed).unwrap();
            assert!(diff < 1e-9, "operator-level early-time leak {diff}");
            assert!(bare.linf_distance(&one).unwrap() > 0.5, "ratio is trivial");
        }

        // Part 2: the same statement phrased with the star product. The
        // spectral star quadrature is not exact on symbols that ring at the
        // box boundary (the phase of S is a sampled polynomial flow, not
        // periodic), and that quadrature error leaks a fixed ~1% of the
        // scattered signal into the ratio difference at every amplitude.
        // Gentle pulses keep the leak under the tolerance while the ratio
        // itself stays two orders of magnitude above it.
        {
            let (v1, v2, perturb) = causality_potentials(1e-4);
            let ratio = |a: &PotentialSpec, b: &PotentialSpec| -> Symbol {
                let sa = scattering_operator_hilbert(g, &h, a, steps).unwrap();
                let sb = scattering_operator_hilbert(g, &h, b, steps).unwrap();
                moyal::star(&sa, &sb.conj(), moyal::StarMethod::SpectralIntegral).unwrap()
            };
            let bare = ratio(&v1, &v2);
            let dressed = ratio(&perturb(&v1), &perturb(&v2));
            let diff = bare.linf_distance(&dressed).unwrap();
            let signal = bare.linf_distance(&one).unwrap();
            assert!(diff < 1e-5, "star-algebra early-time leak {diff}");
            assert!(signal > 3e-4, "ratio is trivial: {signal}");
            assert!(diff < 0.02 * signal, "leak {diff} not small against signal {signal}");
        }
    }

    /// Least-squares slope of log(y) against log(x).
    fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    }

    #[test]
    fn route_step_convergence_orders() {
        // Self-convergence of each route against a fine-step reference of the
        // same route: the Hilbert route uses an implicit-midpoint (Cayley)
        // propagator, second order in the step, while the star route uses
        // classic Runge-Kutta, fourth order.
        let g = PhaseSpaceGrid::new(8.0, 48, 1.0).unwrap();
        let h = QuadraticHamiltonian::oscillator();
        let mut v = PotentialSpec::free((-0.5, 0.5));
        v.quartic.push(PulseShape { amplitude: 0.1, center: 0.0, width: 0.2 });

        let hil_steps = [250usize, 500, 1000];
        let hil_ref = scattering_operator_hilbert(g, &h, &v, 4000).unwrap();
        let hil_errs: Vec<f64> = hil_steps
            .iter()
            .map(|&n| {
                scattering_operator_hilbert(g, &h, &v, n)
                    .unwrap()
                    .linf_distance(&hil_ref)
                    .unwrap()
            })
            .collect();
        let hil_dts: Vec<f64> = hil_steps.iter().map(|&n| 1.0 / n as f64).collect();
        let hil_slope = log_log_slope(&hil_dts, &hil_errs);
        assert!(
            (hil_slope - 2.0).abs() < 0.2,
            "hilbert route slope {hil_slope}, errors {hil_errs:?}"
        );

        // the coarsest rung must already be inside the Runge-Kutta stability
        // region for the transported quartic, whose magnitude at the box
        // corner sets the stiffness; 100 steps sits at the edge of stability
        // and 200 is the first cleanly fourth-order rung
        let star_steps = [200usize, 400, 800];
        let star_ref = scattering_operator_star(g, &h, &v, 6400).unwrap();
        let star_errs: Vec<f64> = star_steps
            .iter()
            .map(|&n| {
                scattering_operator_star(g, &h, &v, n)
                    .unwrap()
                    .linf_distance(&star_ref)
                    .unwrap()
            })
            .collect();
        let star_dts: Vec<f64> = star_steps.iter().map(|&n| 1.0 / n as f64).collect();
        let star_slope = log_log_slope(&star_dts, &star_errs);
        assert!(
            (star_slope - 4.0).abs() < 0.5,
            "star route slope {star_slope}, errors {star_errs:?}"
        );
    }

    #[test]
    fn shifted_window_transports_along_free_flow() {
        // Shifting the scattering window by tau while keeping the anchor at
        // t = 0 composes the operator with the free flow: with
        // V'(t) = V(t + tau), the anchored symbols satisfy
        // S'(z) = S(flow(-tau) z). A balanced grid (dq = dp) with
        // tau = quarter period makes the flow an exact lattice permutation,
        // so the transport itself carries no resampling error. The sampled
        // interaction polynomial is not periodic, though, and its wrap seam
        // sits on different lattice lines in the two runs, so the identity
        // is exact only away from the seam: pointwise in the interior, and
        // to full precision in matrix elements against localized states.
        let n = 64usize;
        let l = (n as f64 * PI / 2.0).sqrt();
        let g = PhaseSpaceGrid::new(l, n, 1.0).unwrap();
        assert!((g.dq() - g.dp()).abs() < 1e-12);
        let h = QuadraticHamiltonian::oscillator();
        let tau = PI / 2.0;
        let steps = 500;

        let mut v = PotentialSpec::free((-0.5, 0.5));
        v.quartic.push(PulseShape { amplitude: 0.1, center: 0.0, width: 0.2 });
        v.linear.push(PulseShape { amplitude: 0.2, center: 0.1, width: 0.2 });

        let mut v_shift = PotentialSpec::free((v.window.0 - tau, v.window.1 - tau));
        for pulse in &v.quartic {
            v_shift.quartic.push(PulseShape { center: pulse.center - tau, ..*pulse });
        }
        for pulse in &v.linear {
            v_shift.linear.push(PulseShape { center: pulse.center - tau, ..*pulse });
        }

        let zero = |_: f64| 0.0;
        let s = scattering_operator_star_anchored(g, &h, &v, &zero, 0.0, steps).unwrap();
        let s_shift =
            scattering_operator_star_anchored(g, &h, &v_shift, &zero, 0.0, steps).unwrap();
        // the escape check is disabled: a unitary symbol has unit modulus
        // everywhere, including the boundary band the check inspects
        let transported = transport_symbol_with(&s, &free_flow(&h, -tau), None).unwrap();

        let weak = weak_distance(g, &weyl_quantize(&s_shift), &weyl_quantize(&transported));
        assert!(weak < 1e-6, "shifted-window mismatch (weak) {weak}");
        let interior = s_shift.linf_distance_interior(&transported, 0.2).unwrap();
        assert!(interior < 1e-3, "shifted-window mismatch (interior) {interior}");

        // the comparison is non-trivial: without the transport the shifted
        // operator is a very different symbol
        let signal =
            weak_distance(g, &weyl_quantize(&s_shift), &weyl_quantize(&s));
        assert!(signal > 0.05, "transport is trivial: {signal}");
    }
}

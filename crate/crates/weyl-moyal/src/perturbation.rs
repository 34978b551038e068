//! Formal Weyl-Moyal algebra of functionals of free-oscillator solutions:
//! polynomials in field insertions `q(t_i)` on quadrature nodes, their star
//! product by pairing expansion with the Pauli-Jordan kernel, the
//! time-ordered star-Dyson series of the interaction exponential, and the
//! equivalent Wick expansion whose contraction kernel is the
//! principal-value time-ordered two-point function.
//!
//! The central check of the module: the time-ordered star exponential and
//! the ordinary-product Wick expansion with the PV kernel produce the same
//! functional polynomial term by term. Energy-domain transforms of the
//! kernels identify the PV kernel with `PV 1/(E^2 - m^2)` and separate it
//! from the Feynman kernel, which acquires an imaginary part at the mass
//! shell.

use crate::error::{Error, Result};
use crate::phase_space::{PhaseSpaceGrid, Symbol};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Time grid
// ---------------------------------------------------------------------------

/// Composite-midpoint quadrature over the interaction window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeGrid {
    window: (f64, f64),
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeGrid {
    pub fn midpoint(window: (f64, f64), nodes: usize) -> Result<Self> {
        if !(window.1 > window.0) {
            return Err(Error::InvalidParameter("window must have positive length".into()));
        }
        if nodes == 0 {
            return Err(Error::InvalidParameter("need at least one node".into()));
        }
        let dt = (window.1 - window.0) / nodes as f64;
        let nodes_v: Vec<f64> =
            (0..nodes).map(|i| window.0 + (i as f64 + 0.5) * dt).collect();
        Ok(Self { window, nodes: nodes_v, weights: vec![dt; nodes] })
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sample a function on the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&t| f(t)).collect()
    }
}

// ---------------------------------------------------------------------------
// Contraction kernels
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    /// `Delta(t1, t2) = sin(m (t2 - t1)) / m`, the Poisson bracket
    /// `{q(t1), q(t2)}` on solution space; antisymmetric.
    PauliJordan,
    /// `-sin(m |tau|) / (2m)`: the time-ordered contraction the star
    /// product generates; its energy transform is `PV 1/(E^2 - m^2)`.
    PvTimeOrdered,
    /// `-i e^{-i m |tau|} / (2m)`: the Feynman propagator of the
    /// oscillator; symmetric in `|tau|`.
    Feynman,
    /// `cos(m tau) / (2m)`: the real symmetric part separating Feynman
    /// from the PV kernel (`K_F = K_PV - i K_sym`).
    SymmetricPart,
}

/// A two-point contraction kernel: closed-form generator plus its samples
/// on the node pairs of a time grid.
#[derive(Debug, Clone)]
pub struct ContractionKernel {
    pub name: KernelName,
    pub mass: f64,
    values: Array2<Complex64>,
}

impl ContractionKernel {
    pub fn new(name: KernelName, mass: f64, grid: &TimeGrid) -> Result<Self> {
        if mass <= 0.0 {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        let n = grid.len();
        let mut values = Array2::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                values[[a, b]] = generator_value(name, mass, grid.nodes[a], grid.nodes[b]);
            }
        }
        Ok(Self { name, mass, values })
    }

    /// Closed-form kernel value at arbitrary times.
    pub fn value_at(&self, t1: f64, t2: f64) -> Complex64 {
        generator_value(self.name, self.mass, t1, t2)
    }

    /// Sampled value on a node pair.
    pub fn value(&self, a: usize, b: usize) -> Complex64 {
        self.values[[a, b]]
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }
}

fn generator_value(name: KernelName, m: f64, t1: f64, t2: f64) -> Complex64 {
    let tau = t2 - t1;
    match name {
        KernelName::PauliJordan => Complex64::new((m * tau).sin() / m, 0.0),
        KernelName::PvTimeOrdered => Complex64::new(-(m * tau.abs()).sin() / (2.0 * m), 0.0),
        KernelName::Feynman => {
            Complex64::new(0.0, -1.0 / (2.0 * m)) * Complex64::from_polar(1.0, -m * tau.abs())
        }
        KernelName::SymmetricPart => Complex64::new((m * tau).cos() / (2.0 * m), 0.0),
    }
}

/// The Pauli-Jordan (solution-space Poisson) kernel.
pub fn pauli_jordan_kernel(mass: f64, grid: &TimeGrid) -> Result<ContractionKernel> {
    ContractionKernel::new(KernelName::PauliJordan, mass, grid)
}

// ---------------------------------------------------------------------------
// Functional polynomials
// ---------------------------------------------------------------------------

/// Term key: (hbar power, g order, j order, sorted insertion node indices).
/// The coupling orders are bookkeeping for series truncation; the hbar
/// power can be negative (each interaction vertex carries `1/(i hbar)`,
/// each contraction pairing raises the power by one).
pub type TermKey = (i32, u32, u32, Vec<usize>);

/// Polynomial in field insertions `q(t_i)` with complex coefficients,
/// graded by hbar power and coupling orders. Terms with identical keys are
/// merged; the total insertion degree is capped.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalPolynomial {
    degree_bound: usize,
    terms: BTreeMap<TermKey, Complex64>,
}

impl FunctionalPolynomial {
    pub fn zero(degree_bound: usize) -> Self {
        Self { degree_bound, terms: BTreeMap::new() }
    }

    /// The constant functional 1.
    pub fn one(degree_bound: usize) -> Self {
        let mut p = Self::zero(degree_bound);
        p.terms.insert((0, 0, 0, Vec::new()), Complex64::new(1.0, 0.0));
        p
    }

    /// A single field insertion `q(t_node)`.
    pub fn insertion(node: usize, degree_bound: usize) -> Result<Self> {
        let mut p = Self::zero(degree_bound);
        p.add_term(0, 0, 0, vec![node], Complex64::new(1.0, 0.0))?;
        Ok(p)
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &TermKey) -> Complex64 {
        self.terms.get(key).copied().unwrap_or_default()
    }

    /// Merge a term in; the insertion list is sorted to canonical multiset
    /// form. Errors if the degree exceeds the bound.
    pub fn add_term(
        &mut self,
        hbar: i32,
        g_order: u32,
        j_order: u32,
        mut nodes: Vec<usize>,
        coeff: Complex64,
    ) -> Result<()> {
        if nodes.len() > self.degree_bound {
            return Err(Error::DegreeOverflow { degree: nodes.len(), bound: self.degree_bound });
        }
        nodes.sort_unstable();
        let entry = self
            .terms
            .entry((hbar, g_order, j_order, nodes))
            .or_insert_with(|| Complex64::new(0.0, 0.0));
        *entry += coeff;
        Ok(())
    }

    /// Drop terms with coefficient magnitude at or below `floor` (exact
    /// zeros from cancellations, mainly).
    pub fn prune(&mut self, floor: f64) {
        self.terms.retain(|_, c| c.norm() > floor);
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.0, k.1, k.2, k.3.clone(), *v)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Keep only terms within the coupling-order caps.
    pub fn truncate_orders(&self, n_g: u32, n_j: u32) -> Self {
        let mut out = Self::zero(self.degree_bound);
        for (k, v) in &self.terms {
            if k.1 <= n_g && k.2 <= n_j {
                out.terms.insert(k.clone(), *v);
            }
        }
        out
    }

    /// Largest coefficient-magnitude difference against another polynomial,
    /// over the union of term keys.
    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (k, v) in &self.terms {
            worst = worst.max((*v - other.coefficient(k)).norm());
        }
        for (k, v) in &other.terms {
            worst = worst.max((*v - self.coefficient(k)).norm());
        }
        worst
    }

    /// Serialize to a stable JSON text form: sorted terms with hbar power,
    /// coupling orders, node multiset, and coefficient components.
    pub fn to_json_string(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            hbar: i32,
            g: u32,
            j: u32,
            nodes: &'a [usize],
            re: f64,
            im: f64,
        }
        let rows: Vec<Row> = self
            .terms
            .iter()
            .map(|(k, v)| Row { hbar: k.0, g: k.1, j: k.2, nodes: &k.3, re: v.re, im: v.im })
            .collect();
        serde_json::to_string_pretty(&rows).expect("serializing plain rows cannot fail")
    }

    /// Evaluate on the phase-space realization `q(t) -> q0 cos(mt) +
    /// p0 sin(mt)/m`, with ordinary pointwise products between insertions
    /// (the star content lives in the contraction terms) and `hbar` taken
    /// from the grid.
    pub fn evaluate_symbol(
        &self,
        grid: PhaseSpaceGrid,
        time_grid: &TimeGrid,
        mass: f64,
    ) -> Result<Symbol> {
        let hbar = grid.hbar();
        let n = grid.points();
        // per-node insertion samples
        let mut node_values: BTreeMap<usize, Array2<f64>> = BTreeMap::new();
        let mut out = Array2::<Complex64>::zeros((n, n));
        for (key, coeff) in &self.terms {
            for &node in &key.3 {
                node_values.entry(node).or_insert_with(|| {
                    let t = time_grid.nodes[node];
                    let (c, s) = ((mass * t).cos(), (mass * t).sin() / mass);
                    let mut vals = Array2::zeros((n, n));
                    for jq in 0..n {
                        for k in 0..n {
                            vals[[jq, k]] = c * grid.q(jq) + s * grid.p(k);
                        }
                    }
                    vals
                });
            }
            let scale = *coeff * Complex64::new(hbar.powi(key.0), 0.0);
            for jq in 0..n {
                for k in 0..n {
                    let mut prod = scale;
                    for &node in &key.3 {
                        prod *= node_values[&node][[jq, k]];
                    }
                    out[[jq, k]] += prod;
                }
            }
        }
        Symbol::new(grid, out)
    }
}

// ---------------------------------------------------------------------------
// Pairing products
// ---------------------------------------------------------------------------

/// Generic pairing product: ordinary product of two polynomials plus the
/// sum over all k-fold matchings between insertions of the left and right
/// factors, each matched pair (a from left, b from right) replaced by
/// `pair_factor(a, b)` and raising the hbar power by one. With
/// `pair_factor = (i/2) Delta(a, b)` this is the Moyal product on
/// functionals; with `i K(a, b)` for a time-ordered kernel it is the Wick
/// contraction product.
fn pairing_product(
    p1: &FunctionalPolynomial,
    p2: &FunctionalPolynomial,
    pair_factor: &dyn Fn(usize, usize) -> Complex64,
    order_caps: Option<(u32, u32)>,
) -> Result<FunctionalPolynomial> {
    let bound = p1.degree_bound.min(p2.degree_bound);
    let mut out = FunctionalPolynomial::zero(bound);
    for (k1, c1) in &p1.terms {
        for (k2, c2) in &p2.terms {
            let (g, j) = (k1.1 + k2.1, k1.2 + k2.2);
            if let Some((ng, nj)) = order_caps {
                if g > ng || j > nj {
                    continue;
                }
            }
            if k1.3.len() + k2.3.len() > bound {
                return Err(Error::DegreeOverflow {
                    degree: k1.3.len() + k2.3.len(),
                    bound,
                });
            }
            let base = (k1.0 + k2.0, g, j);
            pair_recurse(
                &k1.3,
                0,
                &mut k2.3.clone(),
                &mut vec![false; k2.3.len()],
                *c1 * *c2,
                0,
                &mut Vec::new(),
                base,
                pair_factor,
                &mut out,
            )?;
        }
    }
    out.prune(0.0);
    Ok(out)
}

/// Walk the left insertion list; each element is left free or matched with
/// one still-unmatched right element. Accumulates every matching exactly
/// once.
#[allow(clippy::too_many_arguments)]
fn pair_recurse(
    left: &[usize],
    li: usize,
    right: &mut Vec<usize>,
    used: &mut Vec<bool>,
    coeff: Complex64,
    pairs: u32,
    kept_left: &mut Vec<usize>,
    base: (i32, u32, u32),
    pair_factor: &dyn Fn(usize, usize) -> Complex64,
    out: &mut FunctionalPolynomial,
) -> Result<()> {
    if li == left.len() {
        let mut nodes = kept_left.clone();
        for (ri, &node) in right.iter().enumerate() {
            if !used[ri] {
                nodes.push(node);
            }
        }
        return out.add_term(base.0 + pairs as i32, base.1, base.2, nodes, coeff);
    }
    // leave left[li] uncontracted
    kept_left.push(left[li]);
    pair_recurse(left, li + 1, right, used, coeff, pairs, kept_left, base, pair_factor, out)?;
    kept_left.pop();
    // or contract it with each available right insertion
    for ri in 0..right.len() {
        if used[ri] {
            continue;
        }
        used[ri] = true;
        let c = coeff * pair_factor(left[li], right[ri]);
        pair_recurse(left, li + 1, right, used, c, pairs + 1, kept_left, base, pair_factor, out)?;
        used[ri] = false;
    }
    Ok(())
}

/// Moyal star product of solution-space functionals: pairing expansion
/// with the Pauli-Jordan kernel, `(i hbar / 2)^k / k!` per k-fold pairing
/// (the hbar power is tracked in the term grading).
pub fn star_functionals(
    p1: &FunctionalPolynomial,
    p2: &FunctionalPolynomial,
    kernel: &ContractionKernel,
) -> Result<FunctionalPolynomial> {
    let factor =
        |a: usize, b: usize| Complex64::new(0.0, 0.5) * kernel.value(a, b);
    pairing_product(p1, p2, &factor, None)
}

/// Star commutator `p1 * p2 - p2 * p1`.
pub fn star_commutator(
    p1: &FunctionalPolynomial,
    p2: &FunctionalPolynomial,
    kernel: &ContractionKernel,
) -> Result<FunctionalPolynomial> {
    let mut out = star_functionals(p1, p2, kernel)?.sub(&star_functionals(p2, p1, kernel)?)?;
    out.prune(0.0);
    Ok(out)
}

fn check_orders(orders: (u32, u32), degree_bound: usize) -> Result<()> {
    let (n_g, n_j) = orders;
    if n_g > 2 || n_j > 4 {
        return Err(Error::OrderBound(format!(
            "orders ({n_g}, {n_j}) exceed the supported (2, 4)"
        )));
    }
    let needed = 4 * n_g as usize + n_j as usize;
    if degree_bound < needed {
        return Err(Error::DegreeOverflow { degree: needed, bound: degree_bound });
    }
    Ok(())
}

/// Interaction factor at one node: `exp(v_g + v_j)` truncated at the
/// coupling caps, where `v_g = (1/i hbar) w g q^4 / 4!` and
/// `v_j = (1/i hbar) w j q`. Same-node insertions commute (the kernel
/// vanishes at equal times), so the ordinary exponential is exact.
fn node_factor(
    grid: &TimeGrid,
    g_env: &[f64],
    j_env: &[f64],
    node: usize,
    orders: (u32, u32),
    degree_bound: usize,
) -> Result<FunctionalPolynomial> {
    let w = grid.weights[node];
    let minus_i = Complex64::new(0.0, -1.0);
    let cg = minus_i * Complex64::new(w * g_env[node] / 24.0, 0.0);
    let cj = minus_i * Complex64::new(w * j_env[node], 0.0);
    let mut out = FunctionalPolynomial::zero(degree_bound);
    for kg in 0..=orders.0 {
        if g_env[node] == 0.0 && kg > 0 {
            continue;
        }
        for kj in 0..=orders.1 {
            if j_env[node] == 0.0 && kj > 0 {
                continue;
            }
            let deg = 4 * kg as usize + kj as usize;
            if deg > degree_bound {
                continue;
            }
            let mut fact = 1.0f64;
            for i in 2..=kg {
                fact *= i as f64;
            }
            for i in 2..=kj {
                fact *= i as f64;
            }
            let coeff = cg.powu(kg) * cj.powu(kj) / fact;
            out.add_term(
                -((kg + kj) as i32),
                kg,
                kj,
                vec![node; deg],
                coeff,
            )?;
        }
    }
    Ok(out)
}

/// Time-ordered star exponential of the interaction
/// `(1/i hbar) int (g(t) q(t)^4/4! + j(t) q(t)) dt`, truncated at the
/// given coupling orders. Later nodes stand to the left; the product over
/// nodes is taken with the functional star product.
pub fn star_dyson(
    grid: &TimeGrid,
    g_env: &[f64],
    j_env: &[f64],
    mass: f64,
    orders: (u32, u32),
    degree_bound: usize,
) -> Result<FunctionalPolynomial> {
    check_orders(orders, degree_bound)?;
    let kernel = pauli_jordan_kernel(mass, grid)?;
    let factor =
        |a: usize, b: usize| Complex64::new(0.0, 0.5) * kernel.value(a, b);
    ordered_expansion(grid, g_env, j_env, orders, degree_bound, &factor)
}

/// Wick expansion of the same interaction exponential with an explicit
/// contraction kernel: ordinary products between vertices, every pairing
/// between insertions of different vertices weighted `i K(a, b)`. With the
/// PV time-ordered kernel this reproduces [`star_dyson`] term by term.
pub fn wick_expand(
    grid: &TimeGrid,
    g_env: &[f64],
    j_env: &[f64],
    kernel: &ContractionKernel,
    orders: (u32, u32),
    degree_bound: usize,
) -> Result<FunctionalPolynomial> {
    check_orders(orders, degree_bound)?;
    let factor = |a: usize, b: usize| Complex64::new(0.0, 1.0) * kernel.value(a, b);
    ordered_expansion(grid, g_env, j_env, orders, degree_bound, &factor)
}

/// Shared fold: multiply the node factors from latest to earliest with the
/// given pairing factor, truncating by coupling order at every step. For
/// the star factor `(i/2) Delta(a, b)` the fold is the time-ordered star
/// exponential, because each pairing always joins a later insertion (left)
/// with an earlier one (right). For a symmetric Wick kernel the order of
/// the fold is immaterial.
fn ordered_expansion(
    grid: &TimeGrid,
    g_env: &[f64],
    j_env: &[f64],
    orders: (u32, u32),
    degree_bound: usize,
    pair_factor: &dyn Fn(usize, usize) -> Complex64,
) -> Result<FunctionalPolynomial> {
    if g_env.len() != grid.len() || j_env.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} envelope samples", grid.len()),
            got: format!("{} and {}", g_env.len(), j_env.len()),
        });
    }
    let mut acc = FunctionalPolynomial::one(degree_bound);
    for node in (0..grid.len()).rev() {
        let f = node_factor(grid, g_env, j_env, node, orders, degree_bound)?;
        if f.len() == 1 {
            // only the constant 1: node carries no interaction
            continue;
        }
        acc = pairing_product(&acc, &f, pair_factor, Some(orders))?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Energy-domain transforms
// ---------------------------------------------------------------------------

/// Windowed Fourier transform of a kernel in the time separation:
/// `F(E) = int_{-T}^{T} K(tau) e^{i E tau} w(tau) dtau` with `T = 100/m`,
/// an exponential window `e^{-eta |tau|}` (eta = 0.03 m) and a cosine
/// taper over the last quarter to suppress truncation ringing. For the PV
/// time-ordered kernel the result is `PV 1/(E^2 - m^2)` with constant
/// c = 1 in this normalization. Unless `allow_singular` is set, energy
/// points within 0.5 of the mass shell are rejected (the transform is not
/// trustworthy there).
pub fn kernel_energy_transform(
    kernel: &ContractionKernel,
    energies: &[f64],
    allow_singular: bool,
) -> Result<Vec<Complex64>> {
    let m = kernel.mass;
    if !allow_singular {
        for &e in energies {
            if (e.abs() - m).abs() < 0.5 {
                return Err(Error::InvalidParameter(format!(
                    "energy {e} is within 0.5 of the mass shell; \
                     pass allow_singular to sample there anyway"
                )));
            }
        }
    }
    let t_max = 100.0 / m;
    let eta = 0.03 * m;
    let dt = 0.005 / m;
    let steps = (2.0 * t_max / dt).ceil() as usize;
    let taper_start = 0.75 * t_max;
    let window = |tau: f64| -> f64 {
        let a = tau.abs();
        let mut w = (-eta * a).exp();
        if a > taper_start {
            let x = (a - taper_start) / (t_max - taper_start);
            w *= 0.5 * (1.0 + (std::f64::consts::PI * x.min(1.0)).cos());
        }
        w
    };
    let mut out = Vec::with_capacity(energies.len());
    for &e in energies {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..steps {
            let tau = -t_max + (s as f64 + 0.5) * dt;
            let k = kernel.value_at(0.0, tau);
            acc += k * Complex64::from_polar(window(tau), e * tau);
        }
        out.push(acc * dt);
    }
    Ok(out)
}

//! Discretized phase space, Weyl symbol <-> operator transforms, and Wigner
//! functions of states.
//!
//! Conventions: position and momentum both live on periodic intervals,
//! `q in [-L, L)` with step `dq = 2L/N` and `p in [-P, P)` with step
//! `dp = pi*hbar/L`, so that `dq * dp * N = 2*pi*hbar` exactly and every
//! transform below is a plain DFT. The Weyl correspondence is realized
//! through the harmonic operators `exp(i(u q^ + v p^))` with grid harmonics
//! `u = pi m / L`, `v = pi n / P`: position harmonics quantize to diagonal
//! phase matrices, momentum harmonics to circular shifts, and the symmetric
//! ordering contributes the phase `exp(i pi m n / N)` per mode. On this
//! domain the round trip symbol -> operator -> symbol is exact to rounding.

use crate::error::{Error, Result};
use crate::fourier;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::{Read, Write};

/// Discretized `(q, p)` domain with an `hbar` value; anchor for all symbol
/// arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    half_extent: f64,
    points: usize,
    hbar: f64,
}

impl PhaseSpaceGrid {
    /// Build a grid, checking `N` even and at least 8, `L > 0`, `hbar > 0`.
    pub fn new(half_extent: f64, points: usize, hbar: f64) -> Result<Self> {
        if points % 2 != 0 {
            return Err(Error::InvalidGrid(format!("N must be even, got {points}")));
        }
        if points < 8 {
            return Err(Error::InvalidGrid(format!("N must be >= 8, got {points}")));
        }
        if !(half_extent > 0.0) {
            return Err(Error::InvalidGrid(format!("L must be positive, got {half_extent}")));
        }
        if !(hbar > 0.0) {
            return Err(Error::InvalidGrid(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { half_extent, points, hbar })
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Position step `dq = 2L/N`.
    pub fn dq(&self) -> f64 {
        2.0 * self.half_extent / self.points as f64
    }

    /// Momentum step `dp = pi*hbar/L`.
    pub fn dp(&self) -> f64 {
        PI * self.hbar / self.half_extent
    }

    /// Momentum half-extent `P = N*dp/2`.
    pub fn p_half_extent(&self) -> f64 {
        self.points as f64 * self.dp() / 2.0
    }

    pub fn q(&self, j: usize) -> f64 {
        -self.half_extent + j as f64 * self.dq()
    }

    pub fn p(&self, k: usize) -> f64 {
        -self.p_half_extent() + k as f64 * self.dp()
    }

    /// Base q-harmonic `pi/L`.
    pub fn u_step(&self) -> f64 {
        PI / self.half_extent
    }

    /// Base p-harmonic `pi/P`.
    pub fn v_step(&self) -> f64 {
        PI / self.p_half_extent()
    }

    fn check_same(&self, other: &PhaseSpaceGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "L={}/N={}/hbar={} vs L={}/N={}/hbar={}",
                self.half_extent, self.points, self.hbar,
                other.half_extent, other.points, other.hbar
            )));
        }
        Ok(())
    }
}

/// Complex-valued function on a [`PhaseSpaceGrid`]; a Weyl observable.
#[derive(Debug, Clone)]
pub struct Symbol {
    grid: PhaseSpaceGrid,
    values: Array2<Complex64>,
}

impl Symbol {
    pub fn new(grid: PhaseSpaceGrid, values: Array2<Complex64>) -> Result<Self> {
        let n = grid.points();
        if values.dim() != (n, n) {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", values.dim().0, values.dim().1),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: PhaseSpaceGrid) -> Self {
        let n = grid.points();
        Self { grid, values: Array2::zeros((n, n)) }
    }

    pub fn constant(grid: PhaseSpaceGrid, c: Complex64) -> Self {
        let n = grid.points();
        Self { grid, values: Array2::from_elem((n, n), c) }
    }

    /// Sample a function of `(q, p)` on the grid.
    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = grid.points();
        let values = Array2::from_shape_fn((n, n), |(j, k)| f(grid.q(j), grid.p(k)));
        Self { grid, values }
    }

    /// The coordinate symbol `q`.
    pub fn coordinate_q(grid: PhaseSpaceGrid) -> Self {
        Self::from_fn(grid, |q, _| Complex64::new(q, 0.0))
    }

    /// The coordinate symbol `p`.
    pub fn coordinate_p(grid: PhaseSpaceGrid) -> Self {
        Self::from_fn(grid, |_, p| Complex64::new(p, 0.0))
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid, values: self.values.mapv(|z| z.conj()) }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.mapv(|z| z * c) }
    }

    pub fn add(&self, other: &Symbol) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self { grid: self.grid, values: &self.values + &other.values })
    }

    pub fn sub(&self, other: &Symbol) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self { grid: self.grid, values: &self.values - &other.values })
    }

    /// Pointwise (commutative) product.
    pub fn mul_pointwise(&self, other: &Symbol) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self { grid: self.grid, values: &self.values * &other.values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Sup-norm distance to another symbol on the same grid.
    pub fn linf_distance(&self, other: &Symbol) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Sup-norm distance restricted to the interior box `|q| <= fraction*L`,
    /// `|p| <= fraction*P`. Acceptance comparisons use this with the
    /// documented 0.8 interior fraction, consistent with the requirement
    /// that test data stay negligible near the periodic boundary.
    pub fn linf_distance_interior(&self, other: &Symbol, fraction: f64) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let l = self.grid.half_extent() * fraction;
        let pmax = self.grid.p_half_extent() * fraction;
        let mut err = 0.0f64;
        for j in 0..self.grid.points() {
            if self.grid.q(j).abs() > l {
                continue;
            }
            for k in 0..self.grid.points() {
                if self.grid.p(k).abs() > pmax {
                    continue;
                }
                err = err.max((self.values[[j, k]] - other.values[[j, k]]).norm());
            }
        }
        Ok(err)
    }

    /// Relative Fourier mass above half-Nyquist.
    pub fn high_band_mass(&self) -> f64 {
        fourier::high_band_mass(&self.values)
    }

    /// Error if the symbol is not band-limited at the given mass tolerance.
    pub fn require_band_limited(&self, limit: f64) -> Result<()> {
        let mass = self.high_band_mass();
        if mass > limit {
            return Err(Error::BandLimit { mass, limit });
        }
        Ok(())
    }

    /// Fraction of `|A|^2` mass in the outer `1 - fraction` ring of the box.
    pub fn boundary_mass(&self, fraction: f64) -> f64 {
        let l = self.grid.half_extent() * fraction;
        let pmax = self.grid.p_half_extent() * fraction;
        let mut outer = 0.0f64;
        let mut total = 0.0f64;
        for j in 0..self.grid.points() {
            for k in 0..self.grid.points() {
                let w = self.values[[j, k]].norm_sqr();
                total += w;
                if self.grid.q(j).abs() > l || self.grid.p(k).abs() > pmax {
                    outer += w;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }

    /// Random band-limited symbol with chord content inside `|m|,|n| <= max_freq`.
    pub fn random_band_limited(
        grid: PhaseSpaceGrid,
        max_freq: usize,
        seed: u64,
        real: bool,
    ) -> Self {
        let n = grid.points();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chord = Array2::<Complex64>::zeros((n, n));
        let mf = max_freq as i64;
        for mi in 0..n {
            let m = fourier::centered_freq(mi, n);
            if m.abs() > mf {
                continue;
            }
            for ni in 0..n {
                let nn = fourier::centered_freq(ni, n);
                if nn.abs() > mf {
                    continue;
                }
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                chord[[mi, ni]] = Complex64::new(re, im);
            }
        }
        if real {
            // enforce a(-m,-n) = conj(a(m,n))
            let sym = chord.clone();
            for mi in 0..n {
                for ni in 0..n {
                    let m = fourier::centered_freq(mi, n);
                    let nn = fourier::centered_freq(ni, n);
                    let mi2 = fourier::bin_of_freq(-m, n);
                    let ni2 = fourier::bin_of_freq(-nn, n);
                    chord[[mi, ni]] = 0.5 * (sym[[mi, ni]] + sym[[mi2, ni2]].conj());
                }
            }
        }
        Self { grid, values: fourier::grid_from_chord(&chord) }
    }

    /// Phase-space average `sum A dq dp`.
    pub fn integral(&self) -> Complex64 {
        let w = self.grid.dq() * self.grid.dp();
        self.values.iter().sum::<Complex64>() * w
    }
}

/// Dense complex matrix acting on position-grid wavefunctions.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    grid: PhaseSpaceGrid,
    entries: Array2<Complex64>,
}

impl OperatorMatrix {
    pub fn new(grid: PhaseSpaceGrid, entries: Array2<Complex64>) -> Result<Self> {
        let n = grid.points();
        if entries.dim() != (n, n) {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", entries.dim().0, entries.dim().1),
            });
        }
        Ok(Self { grid, entries })
    }

    pub fn zeros(grid: PhaseSpaceGrid) -> Self {
        let n = grid.points();
        Self { grid, entries: Array2::zeros((n, n)) }
    }

    pub fn identity(grid: PhaseSpaceGrid) -> Self {
        let n = grid.points();
        let mut entries = Array2::zeros((n, n));
        for j in 0..n {
            entries[[j, j]] = Complex64::new(1.0, 0.0);
        }
        Self { grid, entries }
    }

    /// Position multiplication operator `diag(q_j)`.
    pub fn position(grid: PhaseSpaceGrid) -> Self {
        let n = grid.points();
        let mut entries = Array2::zeros((n, n));
        for j in 0..n {
            entries[[j, j]] = Complex64::new(grid.q(j), 0.0);
        }
        Self { grid, entries }
    }

    /// Spectral momentum operator, diagonal in the discrete Fourier basis.
    pub fn momentum(grid: PhaseSpaceGrid) -> Self {
        let n = grid.points();
        // row a, col b entry: (-1)^(a-b)/N * sum_k p_k exp(2 pi i k (a-b)/N)
        let fft = fourier::plan(n, true);
        let mut pk: Vec<Complex64> =
            (0..n).map(|k| Complex64::new(grid.p(k), 0.0)).collect();
        fft.process(&mut pk);
        let mut entries = Array2::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let d = (a as i64 - b as i64).rem_euclid(n as i64) as usize;
                let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                entries[[a, b]] = pk[d] * sign / n as f64;
            }
        }
        Self { grid, entries }
    }

    /// Diagonal operator multiplying by a function of position.
    pub fn diagonal(grid: PhaseSpaceGrid, f: impl Fn(f64) -> f64) -> Self {
        let n = grid.points();
        let mut entries = Array2::zeros((n, n));
        for j in 0..n {
            entries[[j, j]] = Complex64::new(f(grid.q(j)), 0.0);
        }
        Self { grid, entries }
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.entries
    }

    pub fn matmul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.grid.check_same(&other.grid)?;
        Ok(OperatorMatrix { grid: self.grid, entries: self.entries.dot(&other.entries) })
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.grid.check_same(&other.grid)?;
        Ok(OperatorMatrix { grid: self.grid, entries: &self.entries + &other.entries })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.grid.check_same(&other.grid)?;
        Ok(OperatorMatrix { grid: self.grid, entries: &self.entries - &other.entries })
    }

    pub fn scale(&self, c: Complex64) -> OperatorMatrix {
        OperatorMatrix { grid: self.grid, entries: self.entries.mapv(|z| z * c) }
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix { grid: self.grid, entries: self.entries.t().mapv(|z| z.conj()) }
    }

    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.grid.check_same(&psi.grid)?;
        Ok(WaveFunction { grid: self.grid, values: self.entries.dot(&psi.values) })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.grid.points()).map(|j| self.entries[[j, j]]).sum()
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |M M^dag - I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.entries.dot(&self.adjoint().entries);
        let n = self.grid.points();
        let mut err = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { Complex64::new(1.0, 0.0) } else { Complex64::default() };
                err = err.max((prod[[a, b]] - want).norm());
            }
        }
        err
    }

    /// `max |M - M^dag|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        self.max_abs_diff(&adj).expect("same grid")
    }
}

/// Complex wavefunction samples on the position grid, with norm
/// `sum |psi|^2 dq`.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: PhaseSpaceGrid,
    values: Array1<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: PhaseSpaceGrid, values: Array1<Complex64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}", grid.points()),
                got: format!("{}", values.len()),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = Array1::from_shape_fn(grid.points(), |j| f(grid.q(j)));
        Self { grid, values }
    }

    /// Normalized Gaussian coherent state centered at `(q0, p0)` with ground
    /// width for mass and frequency `m`, `omega`.
    pub fn coherent(grid: PhaseSpaceGrid, q0: f64, p0: f64, m: f64, omega: f64) -> Self {
        let hbar = grid.hbar();
        let a = m * omega / (2.0 * hbar);
        let norm = (m * omega / (PI * hbar)).powf(0.25);
        let mut psi = Self::from_fn(grid, |q| {
            let phase = p0 * (q - q0 / 2.0) / hbar;
            Complex64::from_polar((-a * (q - q0) * (q - q0)).exp() * norm, phase)
        });
        psi.normalize();
        psi
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array1<Complex64> {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dq()).sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.values.mapv_inplace(|z| z / n);
        }
    }

    pub fn require_normalized(&self, tol: f64) -> Result<()> {
        let defect = (self.norm() - 1.0).abs();
        if defect > tol {
            return Err(Error::NotNormalized { defect });
        }
        Ok(())
    }

    /// Translate by a whole number of grid steps in position.
    pub fn shift_q_steps(&self, steps: i64) -> WaveFunction {
        let n = self.grid.points();
        let mut values = Array1::zeros(n);
        for j in 0..n {
            let src = (j as i64 - steps).rem_euclid(n as i64) as usize;
            values[j] = self.values[src];
        }
        WaveFunction { grid: self.grid, values }
    }

    /// Fidelity `|<self|other>|` with the grid inner product.
    pub fn fidelity(&self, other: &WaveFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let ip: Complex64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok((ip * self.grid.dq()).norm())
    }

    /// Rank-1 projector `|psi><psi|` as an operator (grid inner product).
    pub fn projector(&self) -> OperatorMatrix {
        let n = self.grid.points();
        let dq = self.grid.dq();
        let mut entries = Array2::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                entries[[a, b]] = self.values[a] * self.values[b].conj() * dq;
            }
        }
        OperatorMatrix { grid: self.grid, entries }
    }
}

/// Weyl symbol of an operator matrix. Exact inverse of [`weyl_quantize`].
pub fn weyl_symbol_of(m: &OperatorMatrix) -> Symbol {
    let grid = *m.grid();
    let n = grid.points();
    let fft = fourier::plan(n, false);
    let mut chord = Array2::<Complex64>::zeros((n, n));
    let mut diag = vec![Complex64::default(); n];
    for ni in 0..n {
        let shift = fourier::centered_freq(ni, n);
        for j in 0..n {
            let col = fourier::bin_of_freq(j as i64 + shift, n);
            diag[j] = m.entries()[[j, col]];
        }
        fft.process(&mut diag);
        for mi in 0..n {
            let mm = fourier::centered_freq(mi, n);
            let sign = if mm.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            // undo the Weyl phase exp(i pi m n / N)
            let phase = Complex64::from_polar(1.0, -PI * (mm * shift) as f64 / n as f64);
            chord[[mi, ni]] = diag[mi] * phase * sign / n as f64;
        }
    }
    Symbol { grid, values: fourier::grid_from_chord(&chord) }
}

/// Weyl quantization of a symbol: grid harmonics map to displacement
/// operators with the symmetric-ordering phase.
pub fn weyl_quantize(a: &Symbol) -> OperatorMatrix {
    let grid = *a.grid();
    let n = grid.points();
    let chord = fourier::chord_of(a.values());
    let fft = fourier::plan(n, true);
    let mut entries = Array2::<Complex64>::zeros((n, n));
    let mut coef = vec![Complex64::default(); n];
    for ni in 0..n {
        let shift = fourier::centered_freq(ni, n);
        for mi in 0..n {
            let mm = fourier::centered_freq(mi, n);
            let sign = if mm.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let phase = Complex64::from_polar(1.0, PI * (mm * shift) as f64 / n as f64);
            coef[mi] = chord[[mi, ni]] * phase * sign;
        }
        fft.process(&mut coef);
        for j in 0..n {
            let col = fourier::bin_of_freq(j as i64 + shift, n);
            entries[[j, col]] += coef[j];
        }
    }
    OperatorMatrix { grid, entries }
}

/// Wigner function of a normalized state: the Weyl symbol of its projector
/// scaled by `1/(2 pi hbar)`.
pub fn wigner_of_state(psi: &WaveFunction, strict: bool, norm_tol: f64) -> Result<Symbol> {
    if strict {
        psi.require_normalized(norm_tol)?;
    }
    let proj = psi.projector();
    let sym = weyl_symbol_of(&proj);
    let scale = 1.0 / (2.0 * PI * psi.grid().hbar());
    Ok(sym.scale(Complex64::new(scale, 0.0)))
}

// ---------------------------------------------------------------------------
// Serialization: flat binary layout and CSV.
// ---------------------------------------------------------------------------

const SYMBOL_MAGIC: &[u8; 4] = b"WMSY";
const OPERATOR_MAGIC: &[u8; 4] = b"WMOP";

fn write_flat<W: Write>(
    w: &mut W,
    magic: &[u8; 4],
    grid: &PhaseSpaceGrid,
    values: &Array2<Complex64>,
) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&(grid.points() as u64).to_le_bytes())?;
    w.write_all(&grid.half_extent().to_le_bytes())?;
    w.write_all(&grid.hbar().to_le_bytes())?;
    for z in values.iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_flat<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<(PhaseSpaceGrid, Array2<Complex64>)> {
    let mut got = [0u8; 4];
    r.read_exact(&mut got)?;
    if &got != magic {
        return Err(Error::Serialization(format!(
            "bad magic {:?}, expected {:?}",
            got, magic
        )));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let hbar = f64::from_le_bytes(b8);
    let grid = PhaseSpaceGrid::new(l, n, hbar)?;
    let mut values = Array2::zeros((n, n));
    for j in 0..n {
        for k in 0..n {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            values[[j, k]] = Complex64::new(re, im);
        }
    }
    Ok((grid, values))
}

impl Symbol {
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        write_flat(w, SYMBOL_MAGIC, &self.grid, &self.values)
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let (grid, values) = read_flat(r, SYMBOL_MAGIC)?;
        Ok(Self { grid, values })
    }

    /// CSV rows `j,k,q,p,re,im`; intended for small N.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "j,k,q,p,re,im")?;
        for j in 0..self.grid.points() {
            for k in 0..self.grid.points() {
                let z = self.values[[j, k]];
                writeln!(
                    w,
                    "{},{},{},{},{:e},{:e}",
                    j,
                    k,
                    self.grid.q(j),
                    self.grid.p(k),
                    z.re,
                    z.im
                )?;
            }
        }
        Ok(())
    }
}

impl OperatorMatrix {
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        write_flat(w, OPERATOR_MAGIC, &self.grid, &self.entries)
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let (grid, entries) = read_flat(r, OPERATOR_MAGIC)?;
        Ok(Self { grid, entries })
    }
}

//! The Moyal star product in two independent implementations, the Moyal
//! bracket, and algebra diagnostics.
//!
//! The spectral-integral method is the reference: it realizes the star
//! product exactly on the periodic grid by expanding the right factor in
//! grid harmonics and evaluating the left factor on the doubled half-step
//! grid, `(f * g)(x) = sum_{mn} g_mn E_mn(x) f(q - n dq/2, p + m dp/2)`.
//! The derivative-series method truncates the bidifferential expansion at a
//! chosen order; it is exact (terminating) when one factor is a phase-space
//! polynomial, which is the fast path used by the dynamics module.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fourier;
use crate::phase_space::{PhaseSpaceGrid, Symbol};
use ndarray::Array2;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Star product method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarMethod {
    /// Exact spectral realization for (band-limited) grid symbols.
    SpectralIntegral,
    /// Bidifferential series truncated at `order` (`K >= 1`).
    DerivativeSeries { order: usize },
}

/// What to do when an input symbol violates the band-limit contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandLimitPolicy {
    /// Skip the check.
    Ignore,
    /// Print a warning to stderr and continue.
    #[default]
    Warn,
    /// Fail with [`Error::BandLimit`].
    Error,
}

fn check_band_limit(sym: &Symbol, policy: BandLimitPolicy, limit: f64) -> Result<()> {
    match policy {
        BandLimitPolicy::Ignore => Ok(()),
        BandLimitPolicy::Warn => {
            let mass = sym.high_band_mass();
            if mass > limit {
                eprintln!("warning: symbol exceeds band limit (mass {mass:.3e} > {limit:.3e})");
            }
            Ok(())
        }
        BandLimitPolicy::Error => sym.require_band_limited(limit),
    }
}

/// Moyal star product `f * g`.
pub fn star(f: &Symbol, g: &Symbol, method: StarMethod) -> Result<Symbol> {
    star_with_policy(f, g, method, BandLimitPolicy::Ignore, Tolerances::default().band_limit_mass)
}

/// Star product with an explicit band-limit policy for the spectral method.
pub fn star_with_policy(
    f: &Symbol,
    g: &Symbol,
    method: StarMethod,
    policy: BandLimitPolicy,
    band_limit: f64,
) -> Result<Symbol> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("star product arguments".into()));
    }
    match method {
        StarMethod::SpectralIntegral => {
            check_band_limit(f, policy, band_limit)?;
            check_band_limit(g, policy, band_limit)?;
            Ok(star_spectral(f, g))
        }
        StarMethod::DerivativeSeries { order } => {
            if order < 1 {
                return Err(Error::InvalidParameter("series order K must be >= 1".into()));
            }
            Ok(star_series(f, g, order))
        }
    }
}

/// Embed chord coefficients into 2N bins keeping a single centered
/// representative for the Nyquist row/column, matching the quantization
/// convention so that the spectral star is the exact pullback of the
/// operator product.
fn upsample_chord_centered(chord: &Array2<Complex64>) -> Array2<Complex64> {
    let n = chord.nrows();
    let n2 = 2 * n;
    let mut out = Array2::<Complex64>::zeros((n2, n2));
    for mi in 0..n {
        let m = fourier::centered_freq(mi, n);
        for ni in 0..n {
            let nn = fourier::centered_freq(ni, n);
            out[[fourier::bin_of_freq(m, n2), fourier::bin_of_freq(nn, n2)]] = chord[[mi, ni]];
        }
    }
    out
}

/// Exact spectral star product on the periodic grid.
fn star_spectral(f: &Symbol, g: &Symbol) -> Symbol {
    let grid = *f.grid();
    let n = grid.points();
    let n2 = 2 * n;

    // Left factor on the doubled half-step grid.
    let f_chord = fourier::chord_of(f.values());
    let fine = fourier::grid_from_chord(&upsample_chord_centered(&f_chord));

    // Row DFTs of the fine left factor: fhat[alpha][s].
    let fft2n = fourier::plan(n2, false);
    let mut fhat = fine;
    {
        let mut buf = vec![Complex64::default(); n2];
        for mut row in fhat.rows_mut() {
            match row.as_slice_mut() {
                Some(s) => fft2n.process(s),
                None => {
                    for (i, v) in row.iter().enumerate() {
                        buf[i] = *v;
                    }
                    fft2n.process(&mut buf);
                    for (i, v) in row.iter_mut().enumerate() {
                        *v = buf[i];
                    }
                }
            }
        }
    }

    // Chords of the right factor, and per-column harmonic sums
    // zhat[ni][s] = sum_m g_{m,n} exp(2 pi i m s / 2N).
    let g_chord = fourier::chord_of(g.values());
    let ifft2n = fourier::plan(n2, true);
    let mut zhat = Array2::<Complex64>::zeros((n, n2));
    for ni in 0..n {
        let mut z = vec![Complex64::default(); n2];
        for mi in 0..n {
            let m = fourier::centered_freq(mi, n);
            z[fourier::bin_of_freq(m, n2)] = g_chord[[mi, ni]];
        }
        ifft2n.process(&mut z);
        for s in 0..n2 {
            zhat[[ni, s]] = z[s];
        }
    }

    let ifftn = fourier::plan(n, true);
    let mut out = Array2::<Complex64>::zeros((n, n));
    let mut y = vec![Complex64::default(); n];
    let inv2n = 1.0 / n2 as f64;
    for j in 0..n {
        for ni in 0..n {
            let shift_n = fourier::centered_freq(ni, n);
            let alpha = fourier::bin_of_freq(2 * j as i64 - shift_n, n2);
            // y(s0) = sum_t fhat[alpha][s0 + N t] * zhat[ni][(s0 + N t + 2j + N) mod 2N]
            let t_off = (2 * j + n) % n2;
            for (s0, ys) in y.iter_mut().enumerate() {
                let s1 = s0;
                let s2 = s0 + n;
                let z1 = zhat[[ni, (s1 + t_off) % n2]];
                let z2 = zhat[[ni, (s2 + t_off) % n2]];
                *ys = (fhat[[alpha, s1]] * z1 + fhat[[alpha, s2]] * z2) * inv2n;
            }
            ifftn.process(&mut y);
            // accumulate with the p-harmonic exp(i v_n p_k) = (-1)^n e^{2 pi i n k / N}
            let sign = if shift_n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            for k in 0..n {
                let ph = 2.0 * PI * (shift_n * k as i64) as f64 / n as f64;
                out[[j, k]] += y[k] * Complex64::from_polar(sign, ph);
            }
        }
    }
    Symbol::new(grid, out).expect("shape")
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Chord coefficients with entries below the roundoff floor zeroed, so that
/// high-order spectral derivatives don't amplify pure noise bins.
fn denoised_chord(values: &Array2<Complex64>) -> Array2<Complex64> {
    let mut chord = fourier::chord_of(values);
    let peak = chord.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = peak * 1e-14;
    chord.mapv_inplace(|z| if z.norm() < floor { Complex64::default() } else { z });
    chord
}

fn chord_derivative(
    chord: &Array2<Complex64>,
    a: usize,
    b: usize,
    u_step: f64,
    v_step: f64,
) -> Array2<Complex64> {
    let n = chord.nrows();
    let mut work = chord.clone();
    for mi in 0..n {
        let m = fourier::centered_freq(mi, n) as f64;
        let fq = Complex64::new(0.0, m * u_step).powu(a as u32);
        for ni in 0..n {
            let nn = fourier::centered_freq(ni, n) as f64;
            work[[mi, ni]] *= fq * Complex64::new(0.0, nn * v_step).powu(b as u32);
        }
    }
    fourier::grid_from_chord(&work)
}

/// Truncated bidifferential series with spectral derivatives.
fn star_series(f: &Symbol, g: &Symbol, order: usize) -> Symbol {
    let grid = *f.grid();
    let n = grid.points();
    let hbar = grid.hbar();
    let us = grid.u_step();
    let vs = grid.v_step();
    let cf = denoised_chord(f.values());
    let cg = denoised_chord(g.values());
    let mut acc = Array2::<Complex64>::zeros((n, n));
    let mut fact = 1.0f64;
    for r in 0..=order {
        if r > 0 {
            fact *= r as f64;
        }
        let pref = Complex64::new(0.0, hbar / 2.0).powu(r as u32) / fact;
        for s in 0..=r {
            let sgn = if s % 2 == 0 { 1.0 } else { -1.0 };
            let c = pref * binomial(r, s) * sgn;
            let df = chord_derivative(&cf, r - s, s, us, vs);
            let dg = chord_derivative(&cg, s, r - s, us, vs);
            for j in 0..n {
                for k in 0..n {
                    acc[[j, k]] += c * df[[j, k]] * dg[[j, k]];
                }
            }
        }
    }
    Symbol::new(grid, acc).expect("shape")
}

/// Moyal bracket `(f * g - g * f) / (i hbar)`.
pub fn moyal_bracket(f: &Symbol, g: &Symbol, method: StarMethod) -> Result<Symbol> {
    let fg = star(f, g, method)?;
    let gf = star(g, f, method)?;
    let hbar = f.grid().hbar();
    Ok(fg.sub(&gf)?.scale(Complex64::new(0.0, -1.0 / hbar)))
}

/// Poisson bracket `{f, g}` by spectral differentiation.
pub fn poisson_bracket(f: &Symbol, g: &Symbol) -> Result<Symbol> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("poisson bracket arguments".into()));
    }
    let grid = *f.grid();
    let us = grid.u_step();
    let vs = grid.v_step();
    let fq = fourier::spectral_derivative(f.values(), 1, 0, us, vs);
    let fp = fourier::spectral_derivative(f.values(), 0, 1, us, vs);
    let gq = fourier::spectral_derivative(g.values(), 1, 0, us, vs);
    let gp = fourier::spectral_derivative(g.values(), 0, 1, us, vs);
    let values = &fq * &gp - &fp * &gq;
    Symbol::new(grid, values)
}

/// `max |S * conj(S) - 1|` with the spectral star product.
pub fn unitarity_defect(s: &Symbol) -> f64 {
    let prod = star_spectral(s, &s.conj());
    let one = Symbol::constant(*s.grid(), Complex64::new(1.0, 0.0));
    prod.linf_distance(&one).expect("same grid")
}

// ---------------------------------------------------------------------------
// Phase-space polynomials: the natural domain of the derivative-series
// method, with an exact terminating star product.
// ---------------------------------------------------------------------------

/// A polynomial in `(q, p)` with complex coefficients, keyed by `(dq, dp)`
/// powers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhasePolynomial {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl PhasePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::default();
        p.set(0, 0, c);
        p
    }

    pub fn coordinate_q() -> Self {
        let mut p = Self::default();
        p.set(1, 0, Complex64::new(1.0, 0.0));
        p
    }

    pub fn coordinate_p() -> Self {
        let mut p = Self::default();
        p.set(0, 1, Complex64::new(1.0, 0.0));
        p
    }

    pub fn set(&mut self, dq: u32, dp: u32, c: Complex64) {
        if c.norm() == 0.0 {
            self.terms.remove(&(dq, dp));
        } else {
            self.terms.insert((dq, dp), c);
        }
    }

    pub fn coefficient(&self, dq: u32, dp: u32) -> Complex64 {
        self.terms.get(&(dq, dp)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Complex64)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.norm() < 1e-300)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            let v = out.coefficient(k.0, k.1) + c;
            out.set(k.0, k.1, v);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::default();
        for (&k, &v) in &self.terms {
            out.set(k.0, k.1, v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (&(a1, b1), &c1) in &self.terms {
            for (&(a2, b2), &c2) in &other.terms {
                let k = (a1 + a2, b1 + b2);
                let v = out.coefficient(k.0, k.1) + c1 * c2;
                out.set(k.0, k.1, v);
            }
        }
        out
    }

    /// `d^a/dq^a d^b/dp^b`, exact.
    pub fn derivative(&self, a: u32, b: u32) -> Self {
        let mut out = Self::default();
        for (&(dq, dp), &c) in &self.terms {
            if dq < a || dp < b {
                continue;
            }
            let mut f = 1.0f64;
            for i in 0..a {
                f *= (dq - i) as f64;
            }
            for i in 0..b {
                f *= (dp - i) as f64;
            }
            out.set(dq - a, dp - b, c * f);
        }
        out
    }

    pub fn eval(&self, q: f64, p: f64) -> Complex64 {
        let mut acc = Complex64::default();
        for (&(a, b), &c) in &self.terms {
            acc += c * q.powi(a as i32) * p.powi(b as i32);
        }
        acc
    }

    pub fn to_symbol(&self, grid: PhaseSpaceGrid) -> Symbol {
        Symbol::from_fn(grid, |q, p| self.eval(q, p))
    }

    /// Substitute the affine map `q -> m00 q + m01 p + d0`,
    /// `p -> m10 q + m11 p + d1`.
    pub fn compose_affine(&self, m: [[f64; 2]; 2], d: [f64; 2]) -> Self {
        let mut new_q = Self::default();
        new_q.set(1, 0, Complex64::new(m[0][0], 0.0));
        new_q.set(0, 1, Complex64::new(m[0][1], 0.0));
        let c = new_q.coefficient(0, 0) + Complex64::new(d[0], 0.0);
        new_q.set(0, 0, c);
        let mut new_p = Self::default();
        new_p.set(1, 0, Complex64::new(m[1][0], 0.0));
        new_p.set(0, 1, Complex64::new(m[1][1], 0.0));
        let c = new_p.coefficient(0, 0) + Complex64::new(d[1], 0.0);
        new_p.set(0, 0, c);

        let mut out = Self::default();
        for (&(a, b), &coef) in &self.terms {
            let mut term = Self::constant(coef);
            for _ in 0..a {
                term = term.mul(&new_q);
            }
            for _ in 0..b {
                term = term.mul(&new_p);
            }
            out = out.add(&term);
        }
        out
    }

    /// Exact star product: the bidifferential series terminates at the
    /// combined degree.
    pub fn star(&self, other: &Self, hbar: f64) -> Self {
        let rmax = (self.degree().min(other.degree())) as usize;
        let mut out = Self::default();
        let mut fact = 1.0f64;
        for r in 0..=rmax {
            if r > 0 {
                fact *= r as f64;
            }
            let pref = Complex64::new(0.0, hbar / 2.0).powu(r as u32) / fact;
            for s in 0..=r {
                let sgn = if s % 2 == 0 { 1.0 } else { -1.0 };
                let c = pref * binomial(r, s) * sgn;
                let df = self.derivative((r - s) as u32, s as u32);
                let dg = other.derivative(s as u32, (r - s) as u32);
                out = out.add(&df.mul(&dg).scale(c));
            }
        }
        out
    }

    /// Moyal bracket of polynomials, exact.
    pub fn moyal_bracket(&self, other: &Self, hbar: f64) -> Self {
        let fg = self.star(other, hbar);
        let gf = other.star(self, hbar);
        fg.add(&gf.scale(Complex64::new(-1.0, 0.0)))
            .scale(Complex64::new(0.0, -1.0 / hbar))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `poly * S` where the left factor is a polynomial: the series terminates
/// at the polynomial degree, polynomial derivatives are exact and evaluated
/// pointwise, and the symbol derivatives are spectral.
pub fn star_poly_left(poly: &PhasePolynomial, s: &Symbol) -> Symbol {
    star_poly(poly, s, true)
}

/// `S * poly` with the polynomial on the right.
pub fn star_poly_right(s: &Symbol, poly: &PhasePolynomial) -> Symbol {
    star_poly(poly, s, false)
}

fn star_poly(poly: &PhasePolynomial, s: &Symbol, poly_left: bool) -> Symbol {
    let grid = *s.grid();
    let n = grid.points();
    let hbar = grid.hbar();
    let us = grid.u_step();
    let vs = grid.v_step();
    let rmax = poly.degree() as usize;
    let mut acc = Array2::<Complex64>::zeros((n, n));
    let mut fact = 1.0f64;
    for r in 0..=rmax {
        if r > 0 {
            fact *= r as f64;
        }
        let pref = Complex64::new(0.0, hbar / 2.0).powu(r as u32) / fact;
        for k in 0..=r {
            // With the polynomial as the left factor the left derivatives are
            // (d_q^{r-k} d_p^k poly); as the right factor the roles and the
            // sign pattern swap.
            let (pa, pb, sa, sb, sgn) = if poly_left {
                (r - k, k, k, r - k, if k % 2 == 0 { 1.0 } else { -1.0 })
            } else {
                (k, r - k, r - k, k, if k % 2 == 0 { 1.0 } else { -1.0 })
            };
            let dpoly = poly.derivative(pa as u32, pb as u32);
            if dpoly.is_zero() {
                continue;
            }
            let c = pref * binomial(r, if poly_left { k } else { r - k }) * sgn;
            let ds = fourier::spectral_derivative(s.values(), sa, sb, us, vs);
            for j in 0..n {
                let q = grid.q(j);
                for kk in 0..n {
                    let p = grid.p(kk);
                    acc[[j, kk]] += c * dpoly.eval(q, p) * ds[[j, kk]];
                }
            }
        }
    }
    Symbol::new(grid, acc).expect("shape")
}

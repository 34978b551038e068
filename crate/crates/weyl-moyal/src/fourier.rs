//! Discrete Fourier machinery shared by the symbol calculus.
//!
//! Symbols live on an N x N periodic grid over `[-L, L) x [-P, P)`. The
//! natural harmonics are `exp(i pi m q / L)` and `exp(i pi n p / P)` with
//! centered integer frequencies `m, n` in `[-N/2, N/2)`. Because the grid
//! starts at `-L` rather than `0`, the map between plain DFT coefficients and
//! harmonic ("chord") coefficients carries alternating signs; the helpers
//! here keep that bookkeeping in one place.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn planner_cache() -> &'static Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// A cached FFT plan of length `n`; `inverse` selects the conjugate transform.
pub fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = planner_cache().lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Centered integer frequency for DFT bin `idx` of length `n`.
#[inline]
pub fn centered_freq(idx: usize, n: usize) -> i64 {
    let idx = idx as i64;
    let n = n as i64;
    if idx < n / 2 {
        idx
    } else {
        idx - n
    }
}

/// DFT bin holding centered frequency `m` for length `n`.
#[inline]
pub fn bin_of_freq(m: i64, n: usize) -> usize {
    let n = n as i64;
    (m.rem_euclid(n)) as usize
}

fn transform_rows(values: &mut Array2<Complex64>, inverse: bool) {
    let n = values.ncols();
    let fft = plan(n, inverse);
    let mut buf = vec![Complex64::default(); n];
    for mut row in values.rows_mut() {
        match row.as_slice_mut() {
            Some(slice) => fft.process(slice),
            None => {
                for (i, v) in row.iter().enumerate() {
                    buf[i] = *v;
                }
                fft.process(&mut buf);
                for (i, v) in row.iter_mut().enumerate() {
                    *v = buf[i];
                }
            }
        }
    }
}

fn transform_cols(values: &mut Array2<Complex64>, inverse: bool) {
    let n = values.nrows();
    let fft = plan(n, inverse);
    let mut buf = vec![Complex64::default(); n];
    for c in 0..values.ncols() {
        for r in 0..n {
            buf[r] = values[[r, c]];
        }
        fft.process(&mut buf);
        for r in 0..n {
            values[[r, c]] = buf[r];
        }
    }
}

/// Unnormalized 2D DFT (forward) in place.
pub fn fft2(values: &mut Array2<Complex64>) {
    transform_rows(values, false);
    transform_cols(values, false);
}

/// Unnormalized 2D DFT (inverse, no 1/N^2) in place.
pub fn ifft2(values: &mut Array2<Complex64>) {
    transform_rows(values, true);
    transform_cols(values, true);
}

/// Chord coefficients of grid samples.
///
/// Returns `c[mi, ni]` (DFT bin order) such that
/// `A(j,k) = sum_{m,n} c_{mn} exp(i pi m q_j / L) exp(i pi n p_k / P)`
/// with centered `m, n`.
pub fn chord_of(values: &Array2<Complex64>) -> Array2<Complex64> {
    let n = values.nrows();
    let mut work = values.clone();
    fft2(&mut work);
    let norm = 1.0 / (n * n) as f64;
    for mi in 0..n {
        let m = centered_freq(mi, n);
        for ni in 0..n {
            let nn = centered_freq(ni, n);
            // exp(-i u_m q_j) = (-1)^m exp(-2 pi i m j / N); same in p.
            let sign = if (m + nn).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            work[[mi, ni]] *= sign * norm;
        }
    }
    work
}

/// Inverse of [`chord_of`]: grid samples from chord coefficients.
pub fn grid_from_chord(chord: &Array2<Complex64>) -> Array2<Complex64> {
    let n = chord.nrows();
    let mut work = chord.clone();
    for mi in 0..n {
        let m = centered_freq(mi, n);
        for ni in 0..n {
            let nn = centered_freq(ni, n);
            let sign = if (m + nn).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            work[[mi, ni]] *= sign;
        }
    }
    ifft2(&mut work);
    work
}

/// Embed N x N chord coefficients into a 2N x 2N chord array.
///
/// Centered frequencies are preserved; the Nyquist rows/columns of the
/// source are split evenly between +N/2 and -N/2 so real symbols stay real.
pub fn upsample_chord(chord: &Array2<Complex64>) -> Array2<Complex64> {
    let n = chord.nrows();
    let n2 = 2 * n;
    let mut out = Array2::<Complex64>::zeros((n2, n2));
    let half = (n / 2) as i64;
    for mi in 0..n {
        let m = centered_freq(mi, n);
        for ni in 0..n {
            let nn = centered_freq(ni, n);
            let v = chord[[mi, ni]];
            let m_targets: Vec<(i64, f64)> = if m == -half {
                vec![(-half, 0.5), (half, 0.5)]
            } else {
                vec![(m, 1.0)]
            };
            let n_targets: Vec<(i64, f64)> = if nn == -half {
                vec![(-half, 0.5), (half, 0.5)]
            } else {
                vec![(nn, 1.0)]
            };
            for &(mt, wm) in &m_targets {
                for &(nt, wn) in &n_targets {
                    out[[bin_of_freq(mt, n2), bin_of_freq(nt, n2)]] += v * (wm * wn);
                }
            }
        }
    }
    out
}

/// Values of the band-limited interpolant on the doubled 2N x 2N grid
/// (half-step sampling in both axes).
pub fn upsample_grid(values: &Array2<Complex64>) -> Array2<Complex64> {
    let chord = chord_of(values);
    let fine = upsample_chord(&chord);
    grid_from_chord(&fine)
}

/// Relative Fourier mass above half-Nyquist (`max(|m|,|n|) > N/4`).
pub fn high_band_mass(values: &Array2<Complex64>) -> f64 {
    let n = values.nrows();
    let chord = chord_of(values);
    let cutoff = (n / 4) as i64;
    let mut high = 0.0f64;
    let mut total = 0.0f64;
    for mi in 0..n {
        let m = centered_freq(mi, n).abs();
        for ni in 0..n {
            let nn = centered_freq(ni, n).abs();
            let w = chord[[mi, ni]].norm_sqr();
            total += w;
            if m.max(nn) > cutoff {
                high += w;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (high / total).sqrt()
    }
}

/// Spectral derivative `d^a/dq^a d^b/dp^b` of grid samples.
///
/// `u_step` is `pi/L`, `v_step` is `pi/P`.
pub fn spectral_derivative(
    values: &Array2<Complex64>,
    a: usize,
    b: usize,
    u_step: f64,
    v_step: f64,
) -> Array2<Complex64> {
    if a == 0 && b == 0 {
        return values.clone();
    }
    let n = values.nrows();
    let mut chord = chord_of(values);
    for mi in 0..n {
        let m = centered_freq(mi, n) as f64;
        let iu = Complex64::new(0.0, m * u_step);
        let fq = iu.powu(a as u32);
        for ni in 0..n {
            let nn = centered_freq(ni, n) as f64;
            let iv = Complex64::new(0.0, nn * v_step);
            chord[[mi, ni]] *= fq * iv.powu(b as u32);
        }
    }
    grid_from_chord(&chord)
}

/// Shift along axis 0 (q) by an amount depending on the axis-1 index:
/// returns `B(j,k) = A(q_j + shift(k), p_k)` via per-column phase factors.
pub fn shift_q_per_column(
    values: &Array2<Complex64>,
    u_step: f64,
    shift: impl Fn(usize) -> f64,
) -> Array2<Complex64> {
    let n = values.nrows();
    let mut work = values.clone();
    transform_cols(&mut work, false);
    // column c of `work` now holds DFT over j; apply exp(i u_m s) with the
    // (-1)^m register change folded in as in chord_of.
    for mi in 0..n {
        let m = centered_freq(mi, n) as f64;
        for k in 0..n {
            let s = shift(k);
            let phase = Complex64::from_polar(1.0, m * u_step * s);
            work[[mi, k]] *= phase;
        }
    }
    transform_cols(&mut work, true);
    work.mapv_inplace(|z| z / n as f64);
    work
}

/// Shift along axis 1 (p) by an amount depending on the axis-0 index:
/// returns `B(j,k) = A(q_j, p_k + shift(j))`.
pub fn shift_p_per_row(
    values: &Array2<Complex64>,
    v_step: f64,
    shift: impl Fn(usize) -> f64,
) -> Array2<Complex64> {
    let n = values.ncols();
    let mut work = values.clone();
    transform_rows(&mut work, false);
    for j in 0..values.nrows() {
        let s = shift(j);
        for ni in 0..n {
            let m = centered_freq(ni, n) as f64;
            let phase = Complex64::from_polar(1.0, m * v_step * s);
            work[[j, ni]] *= phase;
        }
    }
    transform_rows(&mut work, true);
    work.mapv_inplace(|z| z / n as f64);
    work
}

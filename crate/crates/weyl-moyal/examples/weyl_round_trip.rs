//! Weyl correspondence on the discrete phase-space torus: quantize a
//! symbol, recover it exactly, and look at the Wigner function of a
//! coherent state.
//!
//! Run with: cargo run --example weyl_round_trip

use num_complex::Complex64;
use weyl_moyal::phase_space::{
    weyl_quantize, weyl_symbol_of, wigner_of_state, Symbol, WaveFunction,
};
use weyl_moyal::PhaseSpaceGrid;

fn main() -> weyl_moyal::Result<()> {
    let grid = PhaseSpaceGrid::new(8.0, 64, 1.0)?;
    println!(
        "grid: q in [-{0}, {0}), {1} points, dq = {2:.4}, hbar = {3}",
        grid.half_extent(),
        grid.points(),
        grid.dq(),
        grid.hbar()
    );

    // any band-limited symbol survives quantize -> symbol exactly
    let symbol = Symbol::from_fn(grid, |q, p| {
        Complex64::new((-0.5 * (q * q + p * p)).exp() * (1.0 + 0.3 * q * p), 0.2 * p)
    });
    let operator = weyl_quantize(&symbol);
    let recovered = weyl_symbol_of(&operator);
    println!(
        "round trip |symbol(quantize(A)) - A|_inf = {:.3e}",
        recovered.linf_distance(&symbol)?
    );

    // real symbols quantize to Hermitian operators
    let real_symbol = Symbol::from_fn(grid, |q, p| Complex64::new(q * q + p * p, 0.0));
    let h = weyl_quantize(&real_symbol);
    let hermiticity = h.max_abs_diff(&h.adjoint())?;
    println!("Hermiticity defect of quantized q^2 + p^2: {:.3e}", hermiticity);

    // the Wigner function of a coherent state is a Gaussian blob centred
    // on the classical point
    let psi = WaveFunction::coherent(grid, 1.5, -0.8, 1.0, 1.0);
    let wigner = wigner_of_state(&psi, true, 1e-8)?;
    let mut best = (0.0f64, 0.0f64, f64::MIN);
    for j in 0..grid.points() {
        for k in 0..grid.points() {
            let v = wigner.values()[[j, k]].re;
            if v > best.2 {
                best = (grid.q(j), grid.p(k), v);
            }
        }
    }
    println!(
        "Wigner peak of the coherent state at (q, p) = ({:.2}, {:.2}), expected (1.50, -0.80)",
        best.0, best.1
    );
    println!(
        "Wigner normalization: integral = {:.6} (expected 1), max imaginary part = {:.2e}",
        wigner.integral().re,
        wigner.max_imag()
    );
    Ok(())
}

//! The star product: noncommutative but associative, equal to the symbol
//! of the operator product, and collapsing to pointwise multiplication
//! and the Poisson bracket as hbar shrinks.
//!
//! Run with: cargo run --example star_product

use num_complex::Complex64;
use std::f64::consts::PI;
use weyl_moyal::moyal::{moyal_bracket, poisson_bracket, star, StarMethod};
use weyl_moyal::phase_space::{weyl_quantize, weyl_symbol_of, Symbol};
use weyl_moyal::PhaseSpaceGrid;

fn main() -> weyl_moyal::Result<()> {
    let grid = PhaseSpaceGrid::new(8.0, 64, 1.0)?;
    let f = Symbol::from_fn(grid, |q, p| {
        Complex64::new((-0.4 * ((q - 0.5) * (q - 0.5) + p * p)).exp(), 0.0)
    });
    let g = Symbol::from_fn(grid, |q, p| {
        Complex64::new((-0.4 * (q * q + (p + 0.3) * (p + 0.3))).exp() * q, 0.0)
    });

    let fg = star(&f, &g, StarMethod::SpectralIntegral)?;
    let gf = star(&g, &f, StarMethod::SpectralIntegral)?;
    println!("noncommutativity |f*g - g*f|_inf = {:.3e}", fg.linf_distance(&gf)?);

    let op = weyl_symbol_of(&weyl_quantize(&f).matmul(&weyl_quantize(&g))?);
    println!("|f*g - symbol(Q(f) Q(g))|_inf   = {:.3e}", fg.linf_distance(&op)?);

    let left = star(&fg, &f, StarMethod::SpectralIntegral)?;
    let right = star(&f, &star(&g, &f, StarMethod::SpectralIntegral)?, StarMethod::SpectralIntegral)?;
    println!("associativity defect             = {:.3e}", left.linf_distance(&right)?);

    // semiclassical collapse on balanced boxes
    println!("\n  hbar    |f*g - fg|      |bracket - Poisson|");
    for &hbar in &[0.4, 0.2, 0.1, 0.05] {
        let n = 128usize;
        let l = (n as f64 * PI * hbar / 2.0).sqrt();
        let gh = PhaseSpaceGrid::new(l, n, hbar)?;
        let a = Symbol::from_fn(gh, |q, p| {
            Complex64::new((-2.0 * ((q - 0.3) * (q - 0.3) + p * p)).exp(), 0.0)
        });
        let b = Symbol::from_fn(gh, |q, p| {
            Complex64::new((-2.0 * (q * q + (p - 0.2) * (p - 0.2))).exp(), 0.0)
        });
        let prod_err = star(&a, &b, StarMethod::SpectralIntegral)?
            .linf_distance(&a.mul_pointwise(&b)?)?;
        let br_err = moyal_bracket(&a, &b, StarMethod::SpectralIntegral)?
            .linf_distance(&poisson_bracket(&a, &b)?)?;
        println!("  {hbar:<6} {prod_err:.6e}    {br_err:.6e}");
    }
    println!("(first column decays like hbar, second like hbar^2)");
    Ok(())
}

//! Green functions by functional differentiation: perturb the drive with
//! narrow source pulses, difference the scattering symbols, extrapolate
//! the stencil away, and compare with the closed harmonic-oscillator
//! forms.
//!
//! Run with: cargo run --example green_functions

use num_complex::Complex64;
use weyl_moyal::dynamics::{PotentialSpec, QuadraticHamiltonian};
use weyl_moyal::green::{feynman_moment_check, green_function, GreenRequest};
use weyl_moyal::phase_space::Symbol;
use weyl_moyal::PhaseSpaceGrid;

fn main() -> weyl_moyal::Result<()> {
    let grid = PhaseSpaceGrid::new(8.0, 48, 1.0)?;
    let h0 = QuadraticHamiltonian::oscillator();
    let hbar = grid.hbar();

    // one-point function of the free theory: G(t1) = q_I(t1) / (i hbar)
    let t1 = 0.3f64;
    let request = GreenRequest {
        times: vec![t1],
        base: PotentialSpec::free((-1.25, 1.85)),
        epsilon: 0.1,
        sigma: 0.2,
        extrapolate: true,
        steps: 310,
    };
    let result = green_function(grid, &h0, &request)?;
    println!("one-point function at t1 = {t1}");
    println!("  epsilon   sigma    |estimate|      residual");
    for row in &result.report {
        println!(
            "  {:<8} {:<8} {:<14.6e} {:.6e}",
            row.epsilon, row.sigma, row.estimate_norm, row.residual
        );
    }
    let oracle = Symbol::from_fn(grid, |q, p| {
        Complex64::new(0.0, -(q * t1.cos() + p * t1.sin()) / hbar)
    });
    println!(
        "  interior distance to q_I(t1)/(i hbar): {:.3e}",
        result.symbol.linf_distance_interior(&oracle, 0.5)?
    );

    // two-point function: permutation symmetry and the moment identity
    let report = feynman_moment_check(
        grid,
        &h0,
        (0.3, 0.9),
        &PotentialSpec::free((-0.5, 1.7)),
        0.1,
        0.1,
        true,
        440,
    )?;
    println!("\ntwo-point function at (0.3, 0.9)");
    println!("  permutation defect |G(t1,t2) - G(t2,t1)| = {:.3e}", report.permutation_defect);
    println!("  second-moment identity residual          = {:.3e}", report.moment_residual);
    Ok(())
}

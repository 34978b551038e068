//! Covariant canonical formalism for the free scalar field: conjugate
//! momentum and Hamiltonian densities on flat and tilted spacelike
//! surfaces, lattice dynamics, and the functional Poisson bracket.
//!
//! Run with: cargo run --example covariant_surfaces

use std::f64::consts::PI;
use weyl_moyal::classical::{
    conjugate_momentum, covariant_hamiltonian_densities, energy_functional_derivative,
    functional_poisson_bracket, point_evaluation_derivative, solve_klein_gordon, LagrangianSpec,
    LatticeField, SurfaceParameterization, SurfaceFieldData,
};

fn main() -> weyl_moyal::Result<()> {
    let mass = 1.2f64;
    let spec = LagrangianSpec::new(mass)?;
    let n = 33usize;
    let s: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();

    // tilted surface x0 = 0.4 s + 0.2 with constant field data: the
    // momentum and densities have simple closed forms
    let x0: Vec<f64> = s.iter().map(|&x| 0.4 * x + 0.2).collect();
    let surface = SurfaceParameterization::new(s.clone(), x0, s.clone())?;
    let data = SurfaceFieldData {
        phi: vec![0.25; n],
        phi_x0: vec![0.5; n],
        phi_x1: vec![0.9; n],
    };
    let pi = conjugate_momentum(&surface, &data, &spec)?;
    println!("tilted surface: pi = {:.6} (closed form 0.5 + 0.9 * 0.4 = {:.6})", pi[0], 0.86);
    let (h0, h1) = covariant_hamiltonian_densities(&surface, &data, &pi, &spec)?;
    println!("densities at the first node: H0 = {:.6}, H1 = {:.6}", h0[0], h1[0]);

    // lattice Klein-Gordon dynamics conserves energy
    let nodes = 64usize;
    let a = 2.0 * PI / nodes as f64;
    let phi: Vec<f64> = (0..nodes).map(|i| (a * i as f64).sin()).collect();
    let momenta: Vec<f64> = (0..nodes).map(|i| 0.3 * (2.0 * a * i as f64).cos()).collect();
    let field = LatticeField::new(a, phi, momenta, 0.0)?;
    let e0 = field.energy(mass);
    let evolved = solve_klein_gordon(&field, &spec, 0.02, 500)?;
    println!(
        "\nKlein-Gordon over t = 10: energy drift |E(T) - E(0)| / E(0) = {:.3e}",
        (evolved.energy(mass) - e0).abs() / e0
    );

    // Hamilton equation through the functional Poisson bracket
    let point = point_evaluation_derivative(&field, 5, false);
    let energy = energy_functional_derivative(&field, mass);
    let bracket = functional_poisson_bracket(&point, &energy)?;
    println!(
        "{{phi(s5), H}} = {:.6e}, pi(s5) = {:.6e} (equal on the lattice)",
        bracket, field.pi[5]
    );
    Ok(())
}

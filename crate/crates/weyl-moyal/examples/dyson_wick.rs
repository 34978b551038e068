//! The formal Dyson expansion in the star algebra of field functionals is
//! term-by-term identical to the Wick expansion over the principal-value
//! time-ordered kernel, and the kernel family matches its closed forms.
//!
//! Run with: cargo run --example dyson_wick

use weyl_moyal::perturbation::{
    kernel_energy_transform, star_dyson, wick_expand, ContractionKernel, KernelName, TimeGrid,
};

fn main() -> weyl_moyal::Result<()> {
    let mass = 1.0;
    let grid = TimeGrid::midpoint((-0.5, 0.5), 16)?;
    let g_env = grid.sample(|t| 0.05 * (1.0 - 4.0 * t * t).max(0.0).powi(3));
    let j_env = grid.sample(|t| 0.1 * (1.0 - 9.0 * t * t).max(0.0).powi(3));

    let orders = (2u32, 4u32);
    let bound = (4 * orders.0 + orders.1) as usize;
    let dyson = star_dyson(&grid, &g_env, &j_env, mass, orders, bound)?;
    let pv = ContractionKernel::new(KernelName::PvTimeOrdered, mass, &grid)?;
    let wick = wick_expand(&grid, &g_env, &j_env, &pv, orders, bound)?;
    println!(
        "star-Dyson vs Wick(PV) at orders up to ({}, {}) in (g, j):",
        orders.0, orders.1
    );
    println!("  terms in the expansion:       {}", dyson.len());
    println!("  max coefficient distance:     {:.3e}", dyson.max_coeff_distance(&wick));

    // first-order coefficients are the discretized vertices exactly
    let node = 8usize;
    let w = grid.weights()[node];
    let got = dyson.coefficient(&(-1, 1, 0, vec![node; 4]));
    println!(
        "  (1,0) coefficient at node {node}: {got}  (vertex -i w g / 4! = {})",
        num_complex::Complex64::new(0.0, -w * g_env[node] / 24.0)
    );

    // energy transform of the PV kernel vs PV 1/(E^2 - m^2)
    println!("\nPV kernel energy transform (reference: 1/(E^2 - m^2)):");
    println!("  E       transform                 reference");
    let energies = [-2.2f64, -1.6, 0.0, 0.3, 1.6, 2.8];
    let transform = kernel_energy_transform(&pv, &energies, false)?;
    for (&e, t) in energies.iter().zip(transform.iter()) {
        println!(
            "  {e:<6} {:>10.6} + {:>9.6}i   {:.6}",
            t.re,
            t.im,
            1.0 / (e * e - mass * mass)
        );
    }
    Ok(())
}

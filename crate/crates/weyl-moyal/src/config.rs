use serde::{Deserialize, Serialize};

/// Default tolerances used across the crate.
///
/// Every numerical contract reads its threshold from one instance of this
/// table so convergence studies can tighten or loosen uniformly; all
/// operations that consult a tolerance accept an override.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Round trip symbol -> operator -> symbol, band-limited symbols.
    pub round_trip: f64,
    /// Hermitian operator gives a real symbol (max imaginary part).
    pub real_symbol: f64,
    /// Star product vs symbol of the operator product.
    pub correspondence: f64,
    /// Associativity defect of the spectral star product.
    pub associativity: f64,
    /// Wavefunction normalization defect.
    pub normalization: f64,
    /// Wigner-function integral and marginals.
    pub wigner: f64,
    /// Relative Fourier mass above half-Nyquist tolerated before a symbol
    /// stops counting as band-limited.
    pub band_limit_mass: f64,
    /// Mass allowed in the outer 10% of the box before transport reports a
    /// support escape.
    pub support_escape_mass: f64,
    /// Unitarity defect of scattering operators.
    pub unitarity: f64,
    /// Agreement between the Hilbert and star scattering routes.
    pub route_equivalence: f64,
    /// Cauchy criterion (relative) for Green-function ladders.
    pub green_cauchy: f64,
    /// dt * |H| heuristic bound for the Hilbert propagator.
    pub step_resolution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            round_trip: 1e-10,
            real_symbol: 1e-10,
            correspondence: 1e-8,
            associativity: 1e-9,
            normalization: 1e-12,
            wigner: 1e-8,
            band_limit_mass: 1e-10,
            support_escape_mass: 1e-10,
            unitarity: 1e-5,
            route_equivalence: 1e-5,
            green_cauchy: 1e-3,
            step_resolution: 0.5,
        }
    }
}

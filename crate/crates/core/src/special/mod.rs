pub mod bessel;
pub mod harmonics;

pub use bessel::{bessel_j, bessel_j_derivative, bessel_j_scaled, bessel_j_sequence, bessel_zero};
pub use harmonics::{lb_eigen, multiplicity, spherical_harmonic, HarmonicBasis, HarmonicExpansion};

//! Numerical building blocks: occupations, spectral densities, principal
//! values and oscillatory frequency integrals.

pub mod fourier;
pub mod pv;
pub mod quadrature;
pub mod spectral;
pub mod stats;

pub use fourier::{fourier_family, fourier_integral, fourier_real_times, truncated_window};
pub use pv::{cauchy_principal_value, principal_value};
pub use quadrature::{
    integrate, integrate_family, integrate_real, integrate_vector, Estimate, QuadratureSpec,
};
pub use spectral::{
    lamb_shift, spin_boson_frequency_shift, thermal_hilbert, weighted_complement,
    weighted_occupation, SpectralDensity,
};
pub use stats::{complementary_occupation, occupation, Statistics};

//! Scattering of acoustic waves from compactly supported, radially symmetric
//! media in two dimensions.
//!
//! The scattered field is expanded in angular modes; each mode satisfies a
//! radial integral equation of the second kind that is discretized on
//! adaptive Chebyshev panels and solved by hierarchical merging of per-panel
//! scattering matrices. Broadband (time-dependent) fields are synthesized
//! from a sweep of time-harmonic solves.
//!
//! Module map:
//! * [`bessel`]: cylinder functions `J_m`, `Y_m`, Hankel functions.
//! * [`cheb`]: Chebyshev panels, quadrature, spectral integration.
//! * [`config`]: TOML run descriptions and built-in presets for the CLI.
//! * [`gauss`]: Gauss-Legendre rules.
//! * [`potential`]: built-in and user-supplied radial media.
//! * [`rng`]: small deterministic RNG for reproducible built-in media.
//! * [`selftest`]: runtime invariant checks behind `radscat selftest`.

pub mod bessel;
pub mod cheb;
pub mod config;
pub mod gauss;
pub mod incident;
pub mod potential;
pub mod radial;
pub mod rng;
pub mod selftest;
pub mod solver;
pub mod timedomain;

mod error;

pub use error::Error;

/// Complex scalar used throughout the solver.
pub type C64 = num_complex::Complex64;

//! Numerical laboratory for Gaussian random holomorphic sections on model
//! Bergman spaces.
//!
//! The library is organized around a handful of model geometries (scaled
//! Bargmann-Fock spaces, the Bergman space of the unit disc, and custom finite
//! spans), random sections built from i.i.d. standard complex Gaussian
//! coefficients over their orthonormal bases, and the machinery needed to
//! study the zeros of those sections numerically:
//!
//! * [`model`] — orthonormal bases, frame weights, Bergman kernel functions,
//!   normalized kernels, expected-zero densities, truncation control.
//! * [`randgauss`] — reproducible complex Gaussian streams, section sampling
//!   and evaluation.
//! * [`zeros`] — root finding in disks (Aberth-Ehrlich), argument-principle
//!   validation, divisor pairings against test functions.
//! * [`toeplitz`] — truncated Toeplitz operators `T_f = PfP`, traces, spectra,
//!   Wiener-randomized L^2 sections and the kernel split for sign-changing
//!   symbols.
//! * [`semiclassical`] — expansion coefficients of `T^2_{f,p}(x,x)` on the
//!   flat Fock model, order-2 vanishing data, Planck-scale pairings.
//! * [`experiments`] — deterministic parallel Monte Carlo harness: zero-count
//!   statistics, hole probabilities and the analytic lower-bound certificate,
//!   linear statistics, tail frequencies, empirical density maps.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod quad;
pub mod randgauss;
pub mod semiclassical;
pub mod stats;
pub mod toeplitz;
pub mod zeros;

pub use error::Error;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;

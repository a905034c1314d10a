//! Pseudo-spectral incompressible Navier–Stokes on a periodic box, with
//! diagnostics for L^p a priori estimates.
//!
//! * [`spectral`] — grids, transforms, fields, derivatives, Riesz transforms, ℙ.
//! * [`solver`] — exponential Runge–Kutta integration of the projected
//!   equations and of the perturbed two-solution system.
//! * [`duhamel`] — heat semigroup, Picard iteration of the mild formulation,
//!   smoothing-rate fits.
//! * [`monitor`] — norms, functionals, exponent tables and inequality reports.
//! * [`initial`] — deterministic initial-condition library.

pub mod duhamel;
pub mod error;
pub mod initial;
pub mod monitor;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Grid, ScalarField, TensorField, VectorField};

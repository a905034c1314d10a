//! Field representation, transforms and spectral operators on the periodic box.

mod checkpoint;
pub(crate) mod fft;
mod field;
mod grid;
mod ops;

pub use checkpoint::{read_checkpoint, write_checkpoint, FORMAT_VERSION};
pub(crate) use field::check_same;
pub use field::{ScalarField, TensorField, VectorField};
pub use grid::{Grid, ModeTable};
pub(crate) use ops::tensor_divergence_coeffs;
pub use ops::{
    dealias_in_place, derivative, divergence, gradient, inner_product, laplacian, leray_in_place,
    leray_project, pressure_from_velocity, riesz, riesz_contract, tensor_divergence,
    vector_gradient, vector_laplacian, zero_pad, Dealias,
};

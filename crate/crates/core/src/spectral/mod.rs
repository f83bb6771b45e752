//! Periodic grids, spectral fields and Fourier-multiplier operators.

mod field;
mod grid;
pub mod ops;
pub mod random;
pub mod snapshot;

pub use field::{Components, SpectralField, TensorField, VectorField};
pub use grid::Grid;
pub use ops::{
    column_divergence, dealias, det_i_plus_e, dilate, divergence, gradient, lambda_power, laplacian, leray_project,
    partial_derivative, pointwise_product, riesz, row_divergence, velocity_gradient,
};

//! Periodic pseudospectral toolkit: grids, fields, transforms and the
//! constant-coefficient operators of the model.

mod fft;
mod field;
mod grid;
pub mod ops;
pub mod snapshot;
mod viscosity;

pub use field::Field;
pub use grid::Grid;
pub use ops::{
    advect, apply_multiplier, apply_real_symbol, dealias, dealiased_product, divergence, grad_inv_laplacian, gradient,
    gradient_projection, inv_laplacian_mean_free, lame_operator, laplacian, partial, transform, Direction,
};
pub use viscosity::ViscosityParams;

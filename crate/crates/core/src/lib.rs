//! Numerical twistor geometry of Hermitian surfaces.

// tensor code indexes several arrays per loop; `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exterior;
pub mod flag;
pub mod connection;
pub mod curvature_analysis;
pub mod manifold;
pub mod scalar;
pub mod twistor;
pub mod verify;

pub use error::{Error, Result};
pub use exterior::ComplexForm;
pub use manifold::{builtin, BuiltinName, DiffBackend, HermitianSurface, UnitaryFrame};
pub use scalar::Real;

/// Complex forms with floating coefficients.
pub type Form = ComplexForm<f64>;
/// Complex forms with exact Gaussian-rational coefficients.
pub type ExactForm = ComplexForm<num_rational::Rational64>;

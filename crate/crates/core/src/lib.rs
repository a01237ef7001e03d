//! Numerical toolkit for G₂-structures on ℝ⁷ and the G₂-monopole equation
//! `F_A ∧ ψ + ⋆(d_A σ) = 0` near an isolated singular point.
//!
//! The exterior-algebra and G₂ layers ([`forms`], [`g2`]) are generic over
//! the scalar type; the aliases below fix them to `f64`, which is what the
//! field, rescaling and solver layers use.

pub mod error;
pub mod fields;
pub mod forms;
pub mod g2;
pub mod lie;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod random;
pub mod rescale;
pub mod sampling;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type KForm = forms::KForm<f64>;
pub type MetricTensor = forms::MetricTensor<f64>;
pub type G2Structure = g2::G2Structure<f64>;
pub type Mat7 = linalg::Mat7<f64>;
pub type Point = [f64; 7];

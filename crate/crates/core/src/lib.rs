//! Spectral solver, well-posedness analysis and limit experiments for the
//! fourth-order Cattaneo heat equation
//!
//! ```text
//! θ'' = -a θ' + b Δθ - c Δθ''      on Ω × (0, T)
//! θ(0) = θ₀,  θ'(0) = θ₁,          θ = f on ∂Ω
//! ```
//!
//! on intervals and axis-aligned boxes, where the Dirichlet Laplacian has an
//! exact eigenbasis. Every eigen-coefficient obeys the mode equation
//! `(1 - cλ²)θ'' + aθ' + bλ²θ = 0`, which degenerates to first order when
//! `c = 1/λ²`; those values of `c` form the exceptional set.
//!
//! The crate is `no_std` and only needs `alloc`. Enable the `parallel`
//! feature to evaluate modes on the rayon pool; results are bit-identical to
//! the sequential path because every reduction runs in ascending mode order.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod boundary;
pub mod error;
pub mod experiments;
pub mod modal;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod spectrum;

mod par;

pub use error::{Error, Result};
pub use modal::{ModalInitialData, ModalSolution, ParameterSet};
pub use solver::Field;
pub use spectrum::{BasisDescriptor, EigenMode, ExceptionalSet};

/// Natural log of the largest magnitude reported as a plain number. Larger
/// exponentials are reported through their logarithm and flagged saturated.
pub const SATURATION_LOG: f64 = 700.0;

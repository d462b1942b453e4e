//! Numeric foundations: row-major matrices, recurrent cell forward/backward
//! passes with analytic gradients, the softmax + negative log-likelihood
//! loss, and the SGD-momentum and Adam optimizers.
//!
//! Everything is generic over [`Scalar`] so the same code runs in f64 for
//! gradient checking and f32 for training.

mod cell;
mod loss;
mod matrix;
mod optim;

pub use cell::{CellCache, CellKind, CellParams, Gate};
pub use loss::softmax_nll;
pub use matrix::{Matrix, Scalar};
pub use optim::{adam_step, sgd_momentum_step, OptimizerKind, OptimizerState};

//! Minimal reverse-mode automatic differentiation.
//!
//! A [`Graph`] is an append-only tape of 2-D tensors: leaves go in via
//! [`Graph::param`] / [`Graph::constant`], every op computes its value eagerly
//! (checking finiteness) and records its inputs, and [`Graph::backward`] walks
//! the tape once in reverse, accumulating gradients in insertion order —
//! which is automatically a topological order, so the backward pass is
//! deterministic down to the floating-point rounding.
//!
//! The op set is exactly what the localization network needs: `matmul`,
//! `add`, `add_bias`, `relu`, `softmax_rows`, `transpose`, `reshape`,
//! `mean_rows`, `scale`, and `mse`. Everything is generic over [`Scalar`]
//! (`f32` for training speed, `f64` for gradient checking).

mod adam;
mod check;
mod graph;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use check::{grad_check, GradCheckReport};
pub use graph::{Graph, NodeId};
pub use tensor::{Scalar, Tensor};

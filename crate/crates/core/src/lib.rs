//! Even-kernel convolutions with grouped symmetric padding.
//!
//! A from-scratch NCHW convolution stack (forward, backward, and a naive
//! reference oracle) built to study what even kernel sizes do to feature
//! maps: the half-pixel shift caused by asymmetric "same" padding, the
//! grouped symmetric padding scheme that cancels it, and the layerwise
//! information erosion of deep plain stacks. A small training stack
//! (BatchNorm, SGD with momentum, cross-entropy) and a synthetic
//! quadrant-blob task make the comparison end to end.

pub mod analysis;
pub mod cli;
pub mod conv;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod nn;
pub mod padding;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{Shape, Tensor};

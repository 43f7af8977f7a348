//! Scaled binary quantization of real-valued vectors and matrices.
//!
//! A `k`-bit scaled binary quantization writes `x ~ sum_j v_j s_j` with
//! positive levels `v_j` and sign vectors `s_j`. This crate provides the
//! least-squares 1-bit, 2-bit and ternary solvers, greedy foldable and
//! Lloyd-Max baselines, rank-1 binary matrix quantization, a bit-packed
//! XNOR/popcount dot-product kernel, and tools to measure quantization error
//! on synthetic data.

pub mod analysis;
pub mod bitkernel;
pub mod error;
pub mod quantizers;
pub mod rank1;
pub mod tensor;

pub use error::{Error, FormatError, Result};
pub use tensor::{FloatMatrix, FloatVector, Tensor};

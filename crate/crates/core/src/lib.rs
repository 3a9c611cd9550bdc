//! Tensor-train compression of dense tensors with a genetic search over
//! tensor shapes.
//!
//! A tensor is zero-padded into a candidate shape, decomposed by TT-SVD under
//! a relative error bound, and scored by its compression ratio. The genetic
//! search in [`ga`] looks for the shape with the best ratio; [`io`] persists
//! the resulting cores and reports.

pub mod error;
pub mod cli;
pub mod ga;
pub mod io;
pub mod svd;
pub mod tensor;
pub mod tt;

pub use error::{Error, Result};
pub use tensor::{DenseTensor, Shape};
pub use tt::{
    compression_ratio, decompose_shape, evaluate_shape, relative_error, tt_reconstruct, tt_svd,
    DecompositionReport, FitnessRecord, TtCores,
};

//! Minimal differentiable-layer toolkit.
//!
//! Every layer is a concrete struct with an explicit forward and backward
//! pass — there is no autodiff tape, because the classifier is a fixed
//! feed-forward composition. All arithmetic is double precision; analytic
//! gradients are verified against central finite differences by
//! [`gradcheck`]. Parameters live in [`ParamBlock`]s that bundle values,
//! gradient accumulators and SGD momentum, and every layer exposes its
//! blocks in a fixed declaration order used by the optimizer and by model
//! serialization.

pub mod activation;
pub mod batchnorm;
pub mod conv;
pub mod dense;
pub mod gradcheck;
pub mod loss;
pub mod optimizer;
pub mod param;
pub mod se;
pub mod tensor;

pub use activation::{silu_backward, silu_forward};
pub use batchnorm::BatchNorm2d;
pub use conv::{Conv2d, DepthwiseConv2d};
pub use dense::Dense;
pub use gradcheck::{check_values, max_rel_err, run_layer_suite, LayerCheck};
pub use loss::softmax_cross_entropy;
pub use optimizer::Sgd;
pub use param::{ParamBlock, ParamKind};
pub use tensor::Tensor4;

use thiserror::Error;

/// Errors from layer construction or application.
#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("batch normalization needs batch >= 2 in train mode, got {0}")]
    BatchTooSmall(usize),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
}

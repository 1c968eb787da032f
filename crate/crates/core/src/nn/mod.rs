//! Small reverse-mode kernels: each layer exposes an explicit forward and a
//! paired backward over row-major `f64` tensors.

pub mod activation;
pub mod adam;
pub mod batchnorm;
pub mod conv;
pub mod dense;
pub mod embedding;
pub mod gemm;
pub mod loss;
pub mod pool;
pub mod spec;
pub mod tensor;
pub mod weights;

pub use activation::{softmax, Activation, DEFAULT_LEAKY_SLOPE};
pub use adam::{adam_step, AdamConfig, AdamState, Param};
pub use batchnorm::{BatchNorm1d, BatchNormCache, Mode};
pub use conv::Conv1d;
pub use dense::Dense;
pub use embedding::Embedding;
pub use loss::{bce_loss, bce_with_logits, cross_entropy};
pub use spec::LayerSpec;
pub use tensor::Tensor;
pub use weights::WeightFile;

//! Autoregressive dilated-convolution network over 256 mu-law classes:
//! parameters, batch forward and hand-written backward, Adam, incremental
//! generation and checkpoints.

mod adam;
mod checkpoint;
mod config;
mod generate;
mod model;
mod params;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, CheckpointHeader, TensorEntry, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{NetConfig, TrainConfig};
pub use generate::{generate, incremental_logits, sample_class, GenerationMode, IncrementalGenerator};
pub use model::{
    argmax, dilated_causal_conv, nll_loss, nll_with_gradient, softmax_rows, teacher_forcing_inputs,
    BlockOutput, ForwardCache, WaveNet, START_SYMBOL,
};
pub use params::{tensor_specs, LayerTensor, Parameters, PostTensor, TensorSpec};

//! From-scratch multi-task CNN: shared trunk, per-task heads, masked
//! weighted loss, exact backpropagation, Adam and early stopping.

mod adam;
mod batch;
mod checkpoint;
mod config;
mod evaluate;
mod layers;
mod loss;
mod net;
mod tensor;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use batch::{Batch, Example, TaskLabels};
pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint,
    CHECKPOINT_FORMAT_VERSION,
};
pub use config::{
    conv_pool_len, pool_len, ConvSpec, LossKind, NetConfig, TaskKind, TaskSpec, ALLOWED_KERNELS,
    DEFAULT_FC_SHARED_UNITS, DEFAULT_FILTERS, DEFAULT_HEAD_UNITS,
};
pub use evaluate::{argmax, evaluate, MetricKind, TaskMetric};
pub use loss::{example_loss, multitask_loss};
pub use net::{Gradients, MultiTaskNet, TargetScaler, GRADIENT_CHUNK};
pub use tensor::Tensor;
pub use train::{dataset_loss, train, EpochRecord, History, Schedule};

//! Small from-scratch neural networks: tensors, layers with reverse-mode
//! gradients, SGD with momentum, layer freezing and JSON checkpoints.

mod arch;
mod checkpoint;
mod freeze;
pub mod gradcheck;
mod layer;
mod loss;
mod network;
mod tensor;
mod train;

pub use arch::{mask_input, ratio_input, Architecture, IMAGE_SIDE};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use freeze::{freeze_layers, FreezeSpec};
pub use layer::{ConvSpec, Layer, LayerGrad, LayerKind};
pub use loss::{cross_entropy, loss_and_grad, softmax};
pub use network::{predict, prediction_from_logits, Network, Prediction};
pub use tensor::Tensor;
pub use train::{evaluate, stratified_split, train, Dataset, EpochRecord, Evaluation, LossCurve, TrainConfig, TrainRun};

//! 1-D convolutional classifier over normalised spectra.

mod net;
mod train;

pub use net::{CnnCache, CnnNet, ConvStage, CONV_STAGES, HIDDEN, INPUT_LEN};
pub use train::{
    evaluate, predict, predictions_from_probs, train_cnn, ClassifierTrainConfig, ConfusionMatrix, Evaluation,
    LabeledSet,
};

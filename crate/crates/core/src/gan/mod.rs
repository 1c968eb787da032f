//! Label-conditioned GAN over normalized spectra, used to synthesize extra
//! training samples for sparse classes.

mod net;
mod train;

pub use net::{
    embed_label, CondMlp, DiscriminatorNet, GeneratorNet, NetCache, DEFAULT_DROPOUT, DISCRIMINATOR_WIDTHS,
    EMBED_DIM, GENERATOR_WIDTHS, Init, NOISE_LEN, SPECTRUM_WIDTH,
};
pub use train::{
    check_equilibrium, discriminator_step, epoch_batches, gan_train_step, generator_step, sample_augmentation,
    sample_synthetic, train_gan, train_gan_model, train_gan_with, EquilibriumConfig, EquilibriumReport, GanModel, GanTrainConfig,
    LossTrace,
};

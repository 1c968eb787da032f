use jamcgan_core::gan::{discriminator_step, generator_step, GanModel, GanTrainConfig};
use jamcgan_core::nn::Tensor;
use jamcgan_core::rng::Stream;

/// A model whose discriminator's last layer is zeroed, so it outputs 0.5 for
/// every input.
pub fn symmetric_model(seed: u64) -> GanModel {
    let mut m = GanModel::new(&GanTrainConfig { seed, ..Default::default() });
    let last = m.discriminator.0.layers.last_mut().unwrap();
    last.weight.value.data_mut().iter_mut().for_each(|w| *w = 0.0);
    last.bias.value.data_mut().iter_mut().for_each(|b| *b = 0.0);
    m
}

/// `(l_d, l_g)` of one discriminator step and one generator step, each taken
/// from a fresh symmetric model.
pub fn symmetric_losses(seed: u64) -> (f64, f64) {
    let labels: Vec<usize> = (0..16).map(|i| i % 8).collect();
    let mut rng = Stream::new(seed);
    let real = Tensor::randn(&[16, 800], 0.3, &mut rng).map(f64::tanh);
    let mut a = symmetric_model(seed);
    let l_d = discriminator_step(&a.generator, &mut a.discriminator, &real, &labels, &mut rng).unwrap();
    let mut b = symmetric_model(seed);
    let l_g = generator_step(&mut b.generator, &mut b.discriminator, &labels, &mut rng).unwrap();
    (l_d, l_g)
}

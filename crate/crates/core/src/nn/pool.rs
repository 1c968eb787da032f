use super::batchnorm::Mode;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Stream;

fn split3(x: &Tensor, what: &str) -> Result<(usize, usize, usize)> {
    match x.shape() {
        [b, c, m] => Ok((*b, *c, *m)),
        other => Err(Error::param(format!("{what} expects [batch, C, M], got {other:?}"))),
    }
}

/// Window-2, stride-2 max pooling. Odd lengths are padded with −∞, so the
/// last window reduces to its single real element.
pub fn maxpool1d_forward(x: &Tensor) -> Result<(Tensor, Vec<usize>)> {
    let (b, c, m) = split3(x, "maxpool1d")?;
    let m_out = m.div_ceil(2);
    let mut out = Vec::with_capacity(b * c * m_out);
    let mut argmax = Vec::with_capacity(b * c * m_out);
    for (r, row) in x.data().chunks_exact(m).enumerate() {
        for j in 0..m_out {
            let i0 = 2 * j;
            let pick = if i0 + 1 < m && row[i0 + 1] > row[i0] { i0 + 1 } else { i0 };
            out.push(row[pick]);
            argmax.push(r * m + pick);
        }
    }
    Ok((Tensor::new(vec![b, c, m_out], out)?, argmax))
}

pub fn maxpool1d_backward(input_shape: &[usize], argmax: &[usize], grad_out: &Tensor) -> Result<Tensor> {
    if argmax.len() != grad_out.len() {
        return Err(Error::param("maxpool1d gradient does not match saved indices"));
    }
    let mut dx = Tensor::zeros(input_shape);
    for (&i, &g) in argmax.iter().zip(grad_out.data()) {
        dx.data_mut()[i] += g;
    }
    Ok(dx)
}

/// Mean over the length axis: `[batch, C, M] → [batch, C]`.
pub fn global_avg_pool1d_forward(x: &Tensor) -> Result<Tensor> {
    let (b, c, m) = split3(x, "globalavgpool1d")?;
    let data = x.data().chunks_exact(m).map(|r| r.iter().sum::<f64>() / m as f64).collect();
    Tensor::new(vec![b, c], data)
}

pub fn global_avg_pool1d_backward(input_shape: &[usize], grad_out: &Tensor) -> Result<Tensor> {
    let m = *input_shape.last().ok_or_else(|| Error::param("empty shape"))?;
    let mut dx = Tensor::zeros(input_shape);
    for (chunk, &g) in dx.data_mut().chunks_exact_mut(m).zip(grad_out.data()) {
        chunk.fill(g / m as f64);
    }
    Ok(dx)
}

/// Inverted dropout. Returns the output and the per-element scale applied
/// (`0` or `1/(1−rate)`), which is also the backward multiplier.
pub fn dropout_forward(x: &Tensor, rate: f64, mode: Mode, seed: u64) -> Result<(Tensor, Option<Vec<f64>>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::param(format!("dropout rate {rate} outside [0, 1)")));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok((x.clone(), None));
    }
    let keep = 1.0 / (1.0 - rate);
    let mut rng = Stream::new(seed);
    let mask: Vec<f64> = (0..x.len())
        .map(|_| if rng.uniform() < rate { 0.0 } else { keep })
        .collect();
    let data = x.data().iter().zip(&mask).map(|(v, s)| v * s).collect();
    Ok((Tensor::new(x.shape().to_vec(), data)?, Some(mask)))
}

pub fn dropout_backward(mask: Option<&[f64]>, grad_out: &Tensor) -> Tensor {
    match mask {
        None => grad_out.clone(),
        Some(mask) => {
            let data = grad_out.data().iter().zip(mask).map(|(g, s)| g * s).collect();
            Tensor::new(grad_out.shape().to_vec(), data).expect("mask matches gradient")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxpool_pairs() {
        let x = Tensor::new(vec![1, 1, 4], vec![1.0, 3.0, 2.0, 2.0]).unwrap();
        let (y, idx) = maxpool1d_forward(&x).unwrap();
        assert_eq!(y.data(), &[3.0, 2.0]);
        let dx = maxpool1d_backward(x.shape(), &idx, &Tensor::new(vec![1, 1, 2], vec![5.0, 7.0]).unwrap()).unwrap();
        assert_eq!(dx.data(), &[0.0, 5.0, 7.0, 0.0]);
    }

    #[test]
    fn maxpool_odd_length_keeps_tail() {
        let x = Tensor::new(vec![1, 1, 3], vec![-4.0, -5.0, -9.0]).unwrap();
        let (y, _) = maxpool1d_forward(&x).unwrap();
        assert_eq!(y.data(), &[-4.0, -9.0]);
    }

    #[test]
    fn global_average() {
        let x = Tensor::new(vec![1, 2, 3], vec![1.0, 2.0, 3.0, 4.0, 4.0, 4.0]).unwrap();
        assert_eq!(global_avg_pool1d_forward(&x).unwrap().data(), &[2.0, 4.0]);
    }

    #[test]
    fn zero_rate_dropout_is_identity() {
        let x = Tensor::from_fn(&[3, 5], |i| i as f64 - 4.0);
        for mode in [Mode::Train, Mode::Eval] {
            assert_eq!(dropout_forward(&x, 0.0, mode, 1).unwrap().0, x);
        }
    }

    #[test]
    fn dropout_rate_out_of_range() {
        let x = Tensor::zeros(&[2]);
        assert!(dropout_forward(&x, 1.0, Mode::Train, 0).is_err());
        assert!(dropout_forward(&x, -0.1, Mode::Train, 0).is_err());
    }

    #[test]
    fn half_dropout_keeps_half_and_preserves_mean() {
        let x = Tensor::from_fn(&[10_000], |i| 1.0 + (i % 7) as f64 * 0.1);
        let mean_in = x.data().iter().sum::<f64>() / x.len() as f64;
        for seed in 0..5 {
            let (y, mask) = dropout_forward(&x, 0.5, Mode::Train, seed).unwrap();
            let kept = mask.unwrap().iter().filter(|&&s| s > 0.0).count() as f64 / 10_000.0;
            assert!((kept - 0.5).abs() < 0.02, "kept {kept}");
            let mean_out = y.data().iter().sum::<f64>() / y.len() as f64;
            assert!((mean_out - mean_in).abs() / mean_in < 0.03);
        }
    }
}

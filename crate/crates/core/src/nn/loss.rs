use super::activation::{sigmoid, softmax};
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const BCE_CLAMP: f64 = 1e-7;

/// Mean binary cross-entropy and its gradient with respect to `pred`.
/// Predictions are clamped to `[1e−7, 1 − 1e−7]` first.
pub fn bce_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::param(format!(
            "bce shape mismatch: pred {:?}, target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            loss -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
            -(t / p - (1.0 - t) / (1.0 - p)) / n
        })
        .collect();
    Ok((loss / n, Tensor::new(pred.shape().to_vec(), grad)?))
}

/// [`bce_loss`] of `sigmoid(logits)`, with the gradient taken with respect
/// to the logits: `(sigmoid(z) − t)/N`. This is the exact derivative of the
/// unclamped loss, so it stays informative when the clamp is active.
pub fn bce_with_logits(logits: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    let p = logits.map(sigmoid);
    let (loss, _) = bce_loss(&p, target)?;
    let n = p.len() as f64;
    let grad = p.data().iter().zip(target.data()).map(|(p, t)| (p - t) / n).collect();
    Ok((loss, Tensor::new(p.shape().to_vec(), grad)?))
}

/// Softmax cross-entropy over `[N, M]` logits with integer labels; returns
/// the mean loss and `(softmax − onehot)/N`.
pub fn cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    if logits.rank() != 2 || logits.dim(0) != labels.len() || labels.is_empty() {
        return Err(Error::param(format!(
            "cross-entropy expects [N, M] logits for {} labels, got {:?}",
            labels.len(),
            logits.shape()
        )));
    }
    let (n, m) = (logits.dim(0), logits.dim(1));
    if let Some(bad) = labels.iter().find(|&&l| l >= m) {
        return Err(Error::param(format!("label {bad} outside 0..{m}")));
    }
    let mut probs = softmax(logits);
    let mut loss = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[label];
        let prow = probs.row_mut(r);
        prow[label] -= 1.0;
        prow.iter_mut().for_each(|v| *v /= n as f64);
    }
    Ok((loss / n as f64, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn bce_at_one_half_is_ln_two() {
        let p = Tensor::full(&[16], 0.5);
        let (l, _) = bce_loss(&p, &Tensor::full(&[16], 1.0)).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn bce_perfect_prediction_is_tiny() {
        let t = Tensor::vector(vec![0.0, 1.0, 1.0, 0.0]);
        let (l, _) = bce_loss(&t, &t).unwrap();
        assert!((0.0..2e-6).contains(&l));
    }

    #[test]
    fn bce_shape_mismatch() {
        assert!(bce_loss(&Tensor::zeros(&[3]), &Tensor::zeros(&[4])).is_err());
    }

    #[test]
    fn bce_gradient_matches_finite_differences() {
        let mut rng = Stream::new(6);
        let p = Tensor::from_fn(&[9], |_| rng.uniform_in(0.05, 0.95));
        let t = Tensor::from_fn(&[9], |i| (i % 2) as f64);
        let (_, g) = bce_loss(&p, &t).unwrap();
        let h = 1e-6;
        for i in 0..9 {
            let mut up = p.clone();
            up.data_mut()[i] += h;
            let mut dn = p.clone();
            dn.data_mut()[i] -= h;
            let num = (bce_loss(&up, &t).unwrap().0 - bce_loss(&dn, &t).unwrap().0) / (2.0 * h);
            let ana = g.data()[i];
            assert!((num - ana).abs() / num.abs().max(ana.abs()) < 1e-6);
        }
    }

    #[test]
    fn logit_form_matches_probability_form() {
        let mut rng = Stream::new(8);
        let z = Tensor::randn(&[10], 2.0, &mut rng);
        let t = Tensor::from_fn(&[10], |i| (i % 3 == 0) as u8 as f64);
        let (l1, g1) = bce_with_logits(&z, &t).unwrap();
        let p = z.map(sigmoid);
        let (l2, gp) = bce_loss(&p, &t).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
        for i in 0..10 {
            let chain = gp.data()[i] * p.data()[i] * (1.0 - p.data()[i]);
            assert!((chain - g1.data()[i]).abs() < 1e-12);
        }
        // far past the clamp the logit gradient still points the right way
        let (_, g) = bce_with_logits(&Tensor::vector(vec![-60.0]), &Tensor::vector(vec![1.0])).unwrap();
        assert!((g.data()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_logits_give_ln_m() {
        let logits = Tensor::zeros(&[3, 8]);
        let (l, _) = cross_entropy(&logits, &[0, 4, 7]).unwrap();
        assert!((l - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn saturated_correct_logit() {
        let mut logits = Tensor::zeros(&[1, 8]);
        logits.data_mut()[2] = 1000.0;
        let (l, _) = cross_entropy(&logits, &[2]).unwrap();
        assert!(l < 1e-6);
    }

    #[test]
    fn out_of_range_label() {
        assert!(cross_entropy(&Tensor::zeros(&[1, 8]), &[8]).is_err());
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let mut rng = Stream::new(21);
        let logits = Tensor::randn(&[4, 8], 1.5, &mut rng);
        let labels = [1, 7, 0, 3];
        let (_, g) = cross_entropy(&logits, &labels).unwrap();
        let h = 1e-6;
        let num: Vec<f64> = (0..logits.len())
            .map(|i| {
                let mut up = logits.clone();
                up.data_mut()[i] += h;
                let mut dn = logits.clone();
                dn.data_mut()[i] -= h;
                (cross_entropy(&up, &labels).unwrap().0 - cross_entropy(&dn, &labels).unwrap().0) / (2.0 * h)
            })
            .collect();
        let diff: f64 = num.iter().zip(g.data()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = num.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(diff / norm < 1e-6);
    }
}

use super::adam::Param;
use super::gemm::gemm;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Gradients of a fully connected layer.
#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub dw: Option<Tensor>,
    pub db: Option<Tensor>,
    pub dx: Option<Tensor>,
}

fn check(w: &Tensor, b: &Tensor, x: &Tensor) -> Result<(usize, usize, usize)> {
    if w.rank() != 2 || b.rank() != 1 || x.rank() != 2 {
        return Err(Error::param("dense expects W[out,in], b[out], x[batch,in]"));
    }
    let (out, inp) = (w.dim(0), w.dim(1));
    if b.dim(0) != out || x.dim(1) != inp {
        return Err(Error::param(format!(
            "dense shape mismatch: W {:?}, b {:?}, x {:?}",
            w.shape(),
            b.shape(),
            x.shape()
        )));
    }
    Ok((x.dim(0), inp, out))
}

/// `y = x·Wᵀ + b`.
pub fn dense_forward(w: &Tensor, b: &Tensor, x: &Tensor) -> Result<Tensor> {
    let (batch, inp, out) = check(w, b, x)?;
    let mut y = Tensor::zeros(&[batch, out]);
    for r in 0..batch {
        y.row_mut(r).copy_from_slice(b.data());
    }
    gemm(batch, inp, out, x.data(), false, w.data(), true, y.data_mut(), 1.0);
    Ok(y)
}

/// Adjoints of [`dense_forward`]; `want_params`/`want_input` skip unneeded products.
pub fn dense_backward(
    w: &Tensor,
    x: &Tensor,
    grad_out: &Tensor,
    want_params: bool,
    want_input: bool,
) -> Result<DenseGrads> {
    let (out, inp) = (w.dim(0), w.dim(1));
    let batch = x.dim(0);
    grad_out.require_shape(&[batch, out], "dense upstream gradient")?;
    let (dw, db) = if want_params {
        let mut dw = Tensor::zeros(&[out, inp]);
        gemm(out, batch, inp, grad_out.data(), true, x.data(), false, dw.data_mut(), 0.0);
        let mut db = Tensor::zeros(&[out]);
        for r in 0..batch {
            for (d, g) in db.data_mut().iter_mut().zip(grad_out.row(r)) {
                *d += g;
            }
        }
        (Some(dw), Some(db))
    } else {
        (None, None)
    };
    let dx = want_input.then(|| {
        let mut dx = Tensor::zeros(&[batch, inp]);
        gemm(batch, out, inp, grad_out.data(), false, w.data(), false, dx.data_mut(), 0.0);
        dx
    });
    Ok(DenseGrads { dw, db, dx })
}

/// Fully connected layer with trainable weight and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Param,
    pub bias: Param,
}

impl Dense {
    /// Gaussian weights with standard deviation `std`, zero bias.
    pub fn new(inp: usize, out: usize, std: f64, rng: &mut Stream) -> Self {
        Dense {
            weight: Param::new(Tensor::randn(&[out, inp], std, rng)),
            bias: Param::new(Tensor::zeros(&[out])),
        }
    }

    pub fn in_features(&self) -> usize {
        self.weight.value.dim(1)
    }

    pub fn out_features(&self) -> usize {
        self.weight.value.dim(0)
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        dense_forward(&self.weight.value, &self.bias.value, x)
    }

    /// Accumulates parameter gradients when `train_params` and returns the input gradient if asked.
    pub fn backward(
        &mut self,
        x: &Tensor,
        grad_out: &Tensor,
        train_params: bool,
        want_input: bool,
    ) -> Result<Option<Tensor>> {
        let g = dense_backward(&self.weight.value, x, grad_out, train_params, want_input)?;
        if let (Some(dw), Some(db)) = (g.dw, g.db) {
            self.weight.grad.add_assign(&dw);
            self.bias.grad.add_assign(&db);
        }
        Ok(g.dx)
    }

    pub fn params_mut(&mut self) -> [&mut Param; 2] {
        [&mut self.weight, &mut self.bias]
    }
}

use super::adam::Param;
use super::gemm::gemm;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Output length of a 1-D convolution, if positive.
pub fn conv_out_len(m: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let span = (m + 2 * padding).checked_sub(kernel)?;
    Some(span / stride + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Geometry {
    batch: usize,
    c_in: usize,
    c_out: usize,
    m: usize,
    k: usize,
    m_out: usize,
    stride: usize,
    pad: usize,
}

fn geometry(kernels: &Tensor, x: &Tensor, stride: usize, pad: usize) -> Result<Geometry> {
    if kernels.rank() != 3 || x.rank() != 3 {
        return Err(Error::param("conv1d expects kernels[C_out,C_in,K] and x[batch,C_in,M]"));
    }
    if stride == 0 {
        return Err(Error::param("conv1d stride must be positive"));
    }
    let (c_out, c_in, k) = (kernels.dim(0), kernels.dim(1), kernels.dim(2));
    if x.dim(1) != c_in {
        return Err(Error::param(format!(
            "conv1d channel mismatch: kernels {:?}, x {:?}",
            kernels.shape(),
            x.shape()
        )));
    }
    let m = x.dim(2);
    let m_out = conv_out_len(m, k, stride, pad)
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::param(format!("conv1d output length is not positive (M={m}, K={k})")))?;
    Ok(Geometry {
        batch: x.dim(0),
        c_in,
        c_out,
        m,
        k,
        m_out,
        stride,
        pad,
    })
}

/// Unfolds one sample `[C_in, M]` into columns `[C_in·K, M_out]`.
fn im2col(x: &[f64], g: &Geometry, col: &mut [f64]) {
    for ci in 0..g.c_in {
        let xrow = &x[ci * g.m..(ci + 1) * g.m];
        for kk in 0..g.k {
            let out = &mut col[(ci * g.k + kk) * g.m_out..(ci * g.k + kk + 1) * g.m_out];
            for (mo, o) in out.iter_mut().enumerate() {
                let pos = (mo * g.stride + kk) as isize - g.pad as isize;
                *o = if pos >= 0 && (pos as usize) < g.m {
                    xrow[pos as usize]
                } else {
                    0.0
                };
            }
        }
    }
}

fn col2im(col: &[f64], g: &Geometry, dx: &mut [f64]) {
    for ci in 0..g.c_in {
        for kk in 0..g.k {
            let src = &col[(ci * g.k + kk) * g.m_out..(ci * g.k + kk + 1) * g.m_out];
            for (mo, &v) in src.iter().enumerate() {
                let pos = (mo * g.stride + kk) as isize - g.pad as isize;
                if pos >= 0 && (pos as usize) < g.m {
                    dx[ci * g.m + pos as usize] += v;
                }
            }
        }
    }
}

/// Cross-correlation with per-channel bias.
pub fn conv1d_forward(
    kernels: &Tensor,
    bias: &Tensor,
    x: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<Tensor> {
    let g = geometry(kernels, x, stride, padding)?;
    bias.require_shape(&[g.c_out], "conv1d bias")?;
    let ck = g.c_in * g.k;
    let mut out = Tensor::zeros(&[g.batch, g.c_out, g.m_out]);
    let mut col = vec![0.0; ck * g.m_out];
    for b in 0..g.batch {
        im2col(x.row(b), &g, &mut col);
        let y = out.row_mut(b);
        for (co, chunk) in y.chunks_exact_mut(g.m_out).enumerate() {
            chunk.fill(bias.data()[co]);
        }
        gemm(g.c_out, ck, g.m_out, kernels.data(), false, &col, false, y, 1.0);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub dk: Tensor,
    pub db: Tensor,
    pub dx: Option<Tensor>,
}

/// Kernel, bias and (optionally) input gradients of [`conv1d_forward`].
pub fn conv1d_backward(
    kernels: &Tensor,
    x: &Tensor,
    grad_out: &Tensor,
    stride: usize,
    padding: usize,
    want_input: bool,
) -> Result<ConvGrads> {
    let g = geometry(kernels, x, stride, padding)?;
    grad_out.require_shape(&[g.batch, g.c_out, g.m_out], "conv1d upstream gradient")?;
    let ck = g.c_in * g.k;
    let mut dk = Tensor::zeros(&[g.c_out, g.c_in, g.k]);
    let mut db = Tensor::zeros(&[g.c_out]);
    let mut dx = want_input.then(|| Tensor::zeros(&[g.batch, g.c_in, g.m]));
    let mut col = vec![0.0; ck * g.m_out];
    let mut dcol = vec![0.0; ck * g.m_out];
    for b in 0..g.batch {
        let gy = grad_out.row(b);
        im2col(x.row(b), &g, &mut col);
        gemm(g.c_out, g.m_out, ck, gy, false, &col, true, dk.data_mut(), 1.0);
        for (co, chunk) in gy.chunks_exact(g.m_out).enumerate() {
            db.data_mut()[co] += chunk.iter().sum::<f64>();
        }
        if let Some(dx) = dx.as_mut() {
            gemm(ck, g.c_out, g.m_out, kernels.data(), true, gy, false, &mut dcol, 0.0);
            col2im(&dcol, &g, dx.row_mut(b));
        }
    }
    Ok(ConvGrads { dk, db, dx })
}

/// 1-D convolution layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    pub kernels: Param,
    pub bias: Param,
    pub stride: usize,
    pub padding: usize,
}

impl Conv1d {
    /// He-normal kernels, zero bias.
    pub fn new(c_in: usize, c_out: usize, kernel: usize, stride: usize, padding: usize, rng: &mut Stream) -> Self {
        let std = (2.0 / (c_in * kernel) as f64).sqrt();
        Conv1d {
            kernels: Param::new(Tensor::randn(&[c_out, c_in, kernel], std, rng)),
            bias: Param::new(Tensor::zeros(&[c_out])),
            stride,
            padding,
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        conv1d_forward(&self.kernels.value, &self.bias.value, x, self.stride, self.padding)
    }

    pub fn backward(&mut self, x: &Tensor, grad_out: &Tensor, want_input: bool) -> Result<Option<Tensor>> {
        let g = conv1d_backward(&self.kernels.value, x, grad_out, self.stride, self.padding, want_input)?;
        self.kernels.grad.add_assign(&g.dk);
        self.bias.grad.add_assign(&g.db);
        Ok(g.dx)
    }
}

use super::adam::Param;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Trainable label lookup table `[classes, dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub table: Param,
}

impl Embedding {
    /// Standard-normal initialisation.
    pub fn new(classes: usize, dim: usize, rng: &mut Stream) -> Self {
        Embedding { table: Param::new(Tensor::randn(&[classes, dim], 1.0, rng)) }
    }

    pub fn classes(&self) -> usize {
        self.table.value.dim(0)
    }

    pub fn dim(&self) -> usize {
        self.table.value.dim(1)
    }

    fn check(&self, labels: &[usize]) -> Result<()> {
        match labels.iter().find(|&&l| l >= self.classes()) {
            Some(bad) => Err(Error::param(format!("class id {bad} outside 0..{}", self.classes()))),
            None => Ok(()),
        }
    }

    pub fn lookup(&self, labels: &[usize]) -> Result<Tensor> {
        self.check(labels)?;
        Ok(self.table.value.gather_rows(labels))
    }

    /// Adds each gradient row to the table row of its label.
    pub fn backward(&mut self, labels: &[usize], grad_out: &Tensor) -> Result<()> {
        self.check(labels)?;
        grad_out.require_shape(&[labels.len(), self.dim()], "embedding gradient")?;
        for (r, &label) in labels.iter().enumerate() {
            let src = grad_out.row(r);
            self.table.grad.row_mut(label).iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
        Ok(())
    }
}

//! Exact O(n²) t-SNE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::rng::{mix, Stream};

const TSNE_TAG: u64 = 0x5453_4e45;
const ENTROPY_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Real,
    Synthetic,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Real => "real",
            Source::Synthetic => "synthetic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub exaggeration: f64,
    /// Iterations with exaggeration and the low momentum.
    pub early_iterations: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            exaggeration: 12.0,
            early_iterations: 250,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub coords: Vec<[f64; 2]>,
    pub labels: Vec<usize>,
    pub sources: Vec<Source>,
    /// KL(P‖Q) after every iteration, measured against the unexaggerated P.
    pub kl_trace: Vec<f64>,
    /// Perplexity actually used (capped at `(n − 1)/3`).
    pub perplexity: f64,
}

impl ProjectionResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,class,source\n");
        for ((c, l), src) in self.coords.iter().zip(&self.labels).zip(&self.sources) {
            s.push_str(&format!("{},{},{l},{}\n", c[0], c[1], src.as_str()));
        }
        s
    }
}

fn sq_distances(x: &Tensor) -> Vec<f64> {
    let n = x.dim(0);
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b).powi(2)).sum();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Row `i` of the conditional affinities for precision `beta`; returns the
/// Shannon entropy (nats) of the row.
fn conditional_row(dist: &[f64], i: usize, beta: f64, row: &mut [f64]) -> f64 {
    let others = dist.iter().enumerate().filter(|&(j, _)| j != i);
    let dmin = others.clone().map(|(_, &d)| d).fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (j, &d) in dist.iter().enumerate() {
        row[j] = if j == i { 0.0 } else { (-(d - dmin) * beta).exp() };
        sum += row[j];
    }
    let mut weighted = 0.0;
    for (j, &d) in dist.iter().enumerate() {
        row[j] /= sum;
        if j != i {
            weighted += row[j] * (d - dmin);
        }
    }
    sum.ln() + beta * weighted
}

/// Conditional affinities `p_{j|i}` with each row's precision found by
/// bisection so that its entropy equals `ln(perplexity)`. Returns the
/// row-major matrix and the achieved entropies.
pub fn conditional_affinities(x: &Tensor, perplexity: f64) -> (Vec<f64>, Vec<f64>) {
    let n = x.dim(0);
    let dist = sq_distances(x);
    let target = perplexity.ln();
    let mut p = vec![0.0; n * n];
    let mut entropies = vec![0.0; n];
    for i in 0..n {
        let d = &dist[i * n..(i + 1) * n];
        let row = &mut p[i * n..(i + 1) * n];
        let (mut lo, mut hi, mut beta) = (0.0_f64, f64::INFINITY, 1.0);
        let mut h = conditional_row(d, i, beta, row);
        for _ in 0..200 {
            if (h - target).abs() < ENTROPY_TOL {
                break;
            }
            if h > target {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
            h = conditional_row(d, i, beta, row);
        }
        entropies[i] = h;
    }
    (p, entropies)
}

/// Projects the rows of `features` to two dimensions.
pub fn tsne_project(
    features: &Tensor,
    labels: &[usize],
    sources: &[Source],
    cfg: &TsneConfig,
) -> Result<ProjectionResult> {
    let n = features.dim(0);
    if features.rank() != 2 || n < 10 {
        return Err(Error::param(format!("t-SNE needs at least 10 rows, got {:?}", features.shape())));
    }
    if labels.len() != n || sources.len() != n {
        return Err(Error::param("t-SNE labels and sources must match the row count"));
    }
    if !(cfg.perplexity > 0.0) || cfg.iterations == 0 {
        return Err(Error::param("t-SNE needs a positive perplexity and iteration count"));
    }
    let perplexity = cfg.perplexity.min((n - 1) as f64 / 3.0);
    let (cond, _) = conditional_affinities(features, perplexity);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(1e-12);
        }
    }

    let mut rng = Stream::new(mix(&[cfg.seed, TSNE_TAG]));
    let mut y: Vec<f64> = (0..2 * n).map(|_| 1e-4 * rng.gaussian()).collect();
    let mut update = vec![0.0; 2 * n];
    let mut gains = vec![1.0_f64; 2 * n];
    let mut grad = vec![0.0; 2 * n];
    let mut num = vec![0.0; n * n];
    let mut kl_trace = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let early = it < cfg.early_iterations;
        let exag = if early { cfg.exaggeration } else { 1.0 };
        let momentum = if early { 0.5 } else { 0.8 };
        let mut zsum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let d = (y[2 * i] - y[2 * j]).powi(2) + (y[2 * i + 1] - y[2 * j + 1]).powi(2);
                let v = 1.0 / (1.0 + d);
                num[i * n + j] = v;
                num[j * n + i] = v;
                zsum += 2.0 * v;
            }
        }
        grad.fill(0.0);
        let mut kl = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let q = (num[i * n + j] / zsum).max(1e-12);
                let pij = p[i * n + j];
                kl += pij * (pij / q).ln();
                let mult = (exag * pij - q) * num[i * n + j];
                grad[2 * i] += 4.0 * mult * (y[2 * i] - y[2 * j]);
                grad[2 * i + 1] += 4.0 * mult * (y[2 * i + 1] - y[2 * j + 1]);
            }
        }
        for k in 0..2 * n {
            gains[k] = if (grad[k] > 0.0) != (update[k] > 0.0) { gains[k] + 0.2 } else { gains[k] * 0.8 };
            gains[k] = gains[k].max(0.01);
            update[k] = momentum * update[k] - cfg.learning_rate * gains[k] * grad[k];
            y[k] += update[k];
        }
        for axis in 0..2 {
            let mean = (0..n).map(|i| y[2 * i + axis]).sum::<f64>() / n as f64;
            (0..n).for_each(|i| y[2 * i + axis] -= mean);
        }
        kl_trace.push(kl);
    }
    let coords: Vec<[f64; 2]> = (0..n).map(|i| [y[2 * i], y[2 * i + 1]]).collect();
    if coords.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("t-SNE diverged".into()));
    }
    Ok(ProjectionResult { coords, labels: labels.to_vec(), sources: sources.to_vec(), kl_trace, perplexity })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perplexity_search_hits_target() {
        let mut rng = Stream::new(3);
        let x = Tensor::randn(&[120, 6], 1.0, &mut rng);
        let (p, h) = conditional_affinities(&x, 30.0);
        for i in 0..120 {
            assert!((h[i] - 30f64.ln()).abs() < 1e-4);
            assert!((p[i * 120..(i + 1) * 120].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(p[i * 120 + i], 0.0);
        }
    }

    #[test]
    fn too_few_rows() {
        let x = Tensor::zeros(&[9, 3]);
        assert!(tsne_project(&x, &[0; 9], &[Source::Real; 9], &TsneConfig::default()).is_err());
    }
}

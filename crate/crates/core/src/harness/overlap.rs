use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::synth::NUM_CLASSES;

fn centroids(x: &Tensor, labels: &[usize], what: &str) -> Result<Vec<Vec<f64>>> {
    let w = x.dim(1);
    let mut sums = vec![vec![0.0; w]; NUM_CLASSES];
    let mut counts = [0usize; NUM_CLASSES];
    for (r, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        sums[c].iter_mut().zip(x.row(r)).for_each(|(s, v)| *s += v);
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::param(format!("{what} set has no samples of class {c}")));
    }
    for (s, n) in sums.iter_mut().zip(counts) {
        s.iter_mut().for_each(|v| *v /= n as f64);
    }
    Ok(sums)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Per class `c`: distance between the real and synthetic centroids of `c`
/// over the distance from the real centroid of `c` to the nearest other
/// real centroid. Computed in the input space of the rows.
pub fn cluster_overlap(real: &Tensor, real_labels: &[usize], synth: &Tensor, synth_labels: &[usize]) -> Result<Vec<f64>> {
    if real.rank() != 2 || synth.rank() != 2 || real.dim(1) != synth.dim(1) {
        return Err(Error::param("real and synthetic rows must share a width"));
    }
    let rc = centroids(real, real_labels, "real")?;
    let sc = centroids(synth, synth_labels, "synthetic")?;
    Ok((0..NUM_CLASSES)
        .map(|c| {
            let nearest = (0..NUM_CLASSES)
                .filter(|&o| o != c)
                .map(|o| dist(&rc[c], &rc[o]))
                .fold(f64::INFINITY, f64::min);
            dist(&rc[c], &sc[c]) / nearest
        })
        .collect())
}

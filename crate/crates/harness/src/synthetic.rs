//! Planted-hyperplane binary classification data.

use adasamp::{Dataset, RngStream, Stream};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{HarnessError, Result};

/// Dense data with i.i.d. standard normal features. A weight vector `w` is drawn
/// first, each label is `sign(yᵀw)` and is then flipped with probability `flip_prob`.
pub fn gen_synthetic(n: usize, d: usize, flip_prob: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(HarnessError::Usage(format!("synthetic data needs N, d >= 1, got {n}, {d}")));
    }
    if !(0.0..0.5).contains(&flip_prob) {
        return Err(HarnessError::Usage(format!("flip probability must lie in [0, 0.5), got {flip_prob}")));
    }
    let mut rng = RngStream::new(seed, Stream::Synthetic);
    let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let margin: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
        let mut label = if margin > 0.0 { 1.0 } else { -1.0 };
        if flip_prob > 0.0 && rng.random_bool(flip_prob) {
            label = -label;
        }
        values.extend_from_slice(&row);
        labels.push(label);
    }
    Ok(Dataset::dense_flat(values, d, &labels)?)
}

/// The planted weight vector of [`gen_synthetic`] for the same seed and dimension.
pub fn planted_weights(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, Stream::Synthetic);
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

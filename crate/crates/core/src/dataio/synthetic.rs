//! Small synthetic datasets for examples and tests.

use rand::Rng as _;

use super::{DatasetSplit, Sample};
use crate::error::Result;
use crate::rng;

/// A standard normal draw (Box-Muller).
pub fn gaussian(r: &mut rng::Rng) -> f64 {
    let u: f64 = r.gen_range(f64::EPSILON..1.0);
    let v: f64 = r.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Gaussian blobs in `[0, 1]^dim`, one binary-pattern centre per class
/// (each coordinate 0.8 with probability 0.3, else 0.1), interleaved by class.
pub fn blobs(classes: usize, per_class: usize, dim: usize, spread: f64, seed: u64) -> Vec<Sample> {
    let mut r = rng::seeded(seed, 99);
    let centres: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| if r.gen_bool(0.3) { 0.8 } else { 0.1 }).collect())
        .collect();
    let mut out = Vec::with_capacity(classes * per_class);
    for _ in 0..per_class {
        for (c, centre) in centres.iter().enumerate() {
            let f = centre
                .iter()
                .map(|m| (m + spread * gaussian(&mut r)).clamp(0.0, 1.0) as f32)
                .collect();
            out.push(Sample::new(f, c));
        }
    }
    out
}

/// Train/test split of [`blobs`] sharing the same class centres.
pub fn blob_split(classes: usize, train: usize, test: usize, dim: usize, spread: f64, seed: u64) -> Result<DatasetSplit> {
    let mut all = blobs(classes, train + test, dim, spread, seed);
    let te = all.split_off(classes * train);
    DatasetSplit::new(all, te, classes)
}

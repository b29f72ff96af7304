//! Dataset distance metrics used to reason about how well a configuration
//! found on one dataset transfers to another.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataio::Sample;
use crate::error::{NnaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenDimension {
    pub value: f64,
    /// The covariance was zero; `value` is 1 by convention.
    pub degenerate: bool,
}

/// Covariance of the mean-centred features (divided by `n - 1`).
pub fn covariance(samples: &[Sample]) -> Result<DMatrix<f64>> {
    if samples.len() < 2 {
        return Err(NnaError::Degenerate("covariance needs at least 2 samples".into()));
    }
    let d = samples[0].features.len();
    if let Some(s) = samples.iter().find(|s| s.features.len() != d) {
        return Err(NnaError::DimensionMismatch {
            expected: d,
            actual: s.features.len(),
        });
    }
    let n = samples.len();
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, &x) in mean.iter_mut().zip(&s.features) {
            *m += f64::from(x);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    const CHUNK: usize = 2048;
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for block in samples.chunks(CHUNK) {
        let x = DMatrix::from_fn(block.len(), d, |r, c| f64::from(block[r].features[c]) - mean[c]);
        cov.gemm_tr(1.0, &x, &x, 1.0);
    }
    Ok(cov / (n - 1) as f64)
}

/// Participation ratio `(sum λ)^2 / sum λ^2` of the covariance spectrum.
pub fn eigen_dimension(samples: &[Sample]) -> Result<EigenDimension> {
    let cov = covariance(samples)?;
    let eig = SymmetricEigen::new(cov).eigenvalues;
    let sum: f64 = eig.iter().sum();
    let sq: f64 = eig.iter().map(|l| l * l).sum();
    if sq <= f64::MIN_POSITIVE || sum <= 0.0 {
        return Ok(EigenDimension {
            value: 1.0,
            degenerate: true,
        });
    }
    Ok(EigenDimension {
        value: sum * sum / sq,
        degenerate: false,
    })
}

/// Per-class mean feature vectors, indexed by label.
pub fn class_centroids(samples: &[Sample]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = samples.first() else {
        return Err(NnaError::EmptyTestSet);
    };
    let d = first.features.len();
    let classes = samples.iter().map(|s| s.label + 1).max().unwrap_or(0);
    let mut sums = vec![vec![0.0; d]; classes];
    let mut counts = vec![0usize; classes];
    for s in samples {
        if s.features.len() != d {
            return Err(NnaError::DimensionMismatch {
                expected: d,
                actual: s.features.len(),
            });
        }
        for (a, &x) in sums[s.label].iter_mut().zip(&s.features) {
            *a += f64::from(x);
        }
        counts[s.label] += 1;
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(NnaError::Degenerate(format!("class {c} has no samples")));
    }
    for (s, n) in sums.iter_mut().zip(counts) {
        s.iter_mut().for_each(|v| *v /= n as f64);
    }
    Ok(sums)
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(NnaError::Degenerate("zero-norm centroid".into()));
    }
    Ok(1.0 - dot / (na * nb))
}

/// Cosine distances between class centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidDistances {
    /// `matrix[i][j]`: distance between centroid `i` of the first dataset and
    /// centroid `j` of the second.
    pub matrix: Vec<Vec<f64>>,
    pub min: f64,
    pub max: f64,
}

fn distances(a: &[Vec<f64>], b: &[Vec<f64>], skip_diagonal: bool) -> Result<CentroidDistances> {
    let (d1, d2) = (a[0].len(), b[0].len());
    if d1 != d2 {
        return Err(NnaError::DimensionMismatch {
            expected: d1,
            actual: d2,
        });
    }
    let mut matrix = vec![vec![0.0; b.len()]; a.len()];
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            let v = cosine_distance(ca, cb)?;
            matrix[i][j] = v;
            if skip_diagonal && i == j {
                continue;
            }
            min = min.min(v);
            max = max.max(v);
        }
    }
    if !min.is_finite() {
        return Err(NnaError::Degenerate("need at least two classes".into()));
    }
    Ok(CentroidDistances { matrix, min, max })
}

/// Distances between every centroid of `a` and every centroid of `b`.
pub fn cosine_distance_matrix(a: &[Sample], b: &[Sample]) -> Result<CentroidDistances> {
    distances(&class_centroids(a)?, &class_centroids(b)?, false)
}

/// Distances between distinct centroids of one dataset.
pub fn self_cosine_distance_matrix(a: &[Sample]) -> Result<CentroidDistances> {
    let c = class_centroids(a)?;
    distances(&c, &c, true)
}

/// `D = |M1 - M2| / M1`. Not symmetric in its arguments.
pub fn transfer_coefficient(m1: f64, m2: f64) -> Result<f64> {
    if m1 == 0.0 {
        return Err(NnaError::Degenerate("transfer coefficient needs M1 != 0".into()));
    }
    Ok((m1 - m2).abs() / m1)
}

/// `dataset,eigen_dimension,degenerate` rows.
pub fn eigen_table_csv(rows: &[(String, EigenDimension)]) -> String {
    let mut s = String::from("dataset,eigen_dimension,degenerate\n");
    for (name, e) in rows {
        let _ = writeln!(s, "{name},{},{}", e.value, e.degenerate);
    }
    s
}

/// `dataset_a,dataset_b,min,max` rows.
pub fn cosine_table_csv(rows: &[(String, String, CentroidDistances)]) -> String {
    let mut s = String::from("dataset_a,dataset_b,min,max\n");
    for (a, b, c) in rows {
        let _ = writeln!(s, "{a},{b},{},{}", c.min, c.max);
    }
    s
}

/// `metric_a,metric_b,d` rows of pairwise transfer coefficients.
pub fn transfer_table_csv(metrics: &[(String, f64)]) -> Result<String> {
    let mut s = String::from("from,to,transfer_coefficient\n");
    for (a, m1) in metrics {
        for (b, m2) in metrics {
            let _ = writeln!(s, "{a},{b},{}", transfer_coefficient(*m1, *m2)?);
        }
    }
    Ok(s)
}

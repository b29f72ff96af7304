use crate::dataio::Sample;
use crate::encoder::Encoder;
use crate::error::{NnaError, Result};
use crate::plasticity::Learner;

/// Arg-max of `x_o`, over `allowed` when given. Ties go to the lowest index.
pub fn predict(x_o: &[f64], allowed: Option<&[usize]>) -> usize {
    match allowed {
        Some(a) => crate::plasticity::argmax_over(x_o, a),
        None => {
            let mut best = 0;
            for (k, v) in x_o.iter().enumerate() {
                if *v > x_o[best] {
                    best = k;
                }
            }
            best
        }
    }
}

/// One-hot modulatory vector of width `width` with a 1 at `label`.
pub fn make_modulatory(label: usize, width: usize) -> Result<Vec<f64>> {
    if label >= width {
        return Err(NnaError::LabelOutOfRange {
            label,
            classes: width,
        });
    }
    let mut m = vec![0.0; width];
    m[label] = 1.0;
    Ok(m)
}

/// Fraction of `samples` classified correctly. Does not touch the learner.
pub fn evaluate<'s>(
    encoder: &Encoder,
    learner: &Learner,
    samples: impl IntoIterator<Item = &'s Sample>,
    allowed: Option<&[usize]>,
) -> Result<f64> {
    let mut x_e = vec![0.0; encoder.output_dim()];
    let (mut hits, mut n) = (0usize, 0usize);
    for s in samples {
        encoder.encode_into(&s.features, &mut x_e)?;
        let x_o = learner.forward(&x_e)?;
        hits += usize::from(predict(&x_o, allowed) == s.label);
        n += 1;
    }
    if n == 0 {
        return Err(NnaError::EmptyTestSet);
    }
    Ok(hits as f64 / n as f64)
}

/// Average forgetting after task `i` (1-based, `i >= 2`):
///
/// `F_i = 1/(i-1) * sum_{j<i} ( max_{j<=l<i} a[l][j] - a[i][j] )`
///
/// `a` is lower-triangular with 0-based rows; row `i-1` holds accuracies
/// after the `i`-th task.
pub fn average_forgetting(a: &[Vec<f64>], i: usize) -> Result<f64> {
    if i < 2 || i > a.len() {
        return Err(NnaError::InvalidConfig(format!(
            "forgetting needs 2 <= i <= {}, got {i}",
            a.len()
        )));
    }
    let last = &a[i - 1];
    let mut total = 0.0;
    for j in 0..i - 1 {
        let best = (j..i - 1).map(|l| a[l][j]).fold(f64::NEG_INFINITY, f64::max);
        total += best - last[j];
    }
    Ok(total / (i - 1) as f64)
}

/// Mean of each learner row.
pub fn weight_trace(learner: &Learner) -> Vec<f64> {
    learner.weight_trace()
}

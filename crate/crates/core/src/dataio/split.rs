use rand::seq::SliceRandom;

use super::Sample;
use crate::error::{NnaError, Result};
use crate::rng;

/// Draw `holdout` samples uniformly without replacement into a validation
/// set. Both halves keep the input's relative order.
pub fn split_validation(
    train: Vec<Sample>,
    holdout: usize,
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if holdout == 0 {
        return Ok((train, Vec::new()));
    }
    if holdout >= train.len() {
        return Err(NnaError::HoldoutTooLarge {
            holdout,
            available: train.len(),
        });
    }
    let mut idx: Vec<usize> = (0..train.len()).collect();
    idx.shuffle(&mut rng::seeded(seed, 0x5eed_0001));
    let mut is_val = vec![false; train.len()];
    for &i in &idx[..holdout] {
        is_val[i] = true;
    }
    Ok(partition(train, &is_val))
}

/// Like [`split_validation`] but draws per class in proportion to class
/// frequency (largest-remainder rounding).
pub fn split_validation_stratified(
    train: Vec<Sample>,
    holdout: usize,
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if holdout == 0 {
        return Ok((train, Vec::new()));
    }
    if holdout >= train.len() {
        return Err(NnaError::HoldoutTooLarge {
            holdout,
            available: train.len(),
        });
    }
    let classes = train.iter().map(|s| s.label + 1).max().unwrap_or(0);
    let mut by_class = vec![Vec::new(); classes];
    for (i, s) in train.iter().enumerate() {
        by_class[s.label].push(i);
    }
    let n = train.len() as f64;
    let mut quota: Vec<(usize, f64)> = by_class
        .iter()
        .map(|v| {
            let exact = v.len() as f64 * holdout as f64 / n;
            (exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut short = holdout - quota.iter().map(|q| q.0).sum::<usize>();
    let mut order: Vec<usize> = (0..classes).collect();
    order.sort_by(|&a, &b| quota[b].1.total_cmp(&quota[a].1).then(a.cmp(&b)));
    for c in order {
        if short == 0 {
            break;
        }
        if quota[c].0 < by_class[c].len() {
            quota[c].0 += 1;
            short -= 1;
        }
    }

    let mut rng = rng::seeded(seed, 0x5eed_0002);
    let mut is_val = vec![false; train.len()];
    for (c, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        for &i in &members[..quota[c].0] {
            is_val[i] = true;
        }
    }
    Ok(partition(train, &is_val))
}

fn partition(train: Vec<Sample>, is_val: &[bool]) -> (Vec<Sample>, Vec<Sample>) {
    let mut keep = Vec::with_capacity(train.len());
    let mut val = Vec::new();
    for (s, &v) in train.into_iter().zip(is_val) {
        if v {
            val.push(s);
        } else {
            keep.push(s);
        }
    }
    (keep, val)
}

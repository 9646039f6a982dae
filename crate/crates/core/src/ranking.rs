use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Indices of the `k` largest scores, highest first; equal scores are
/// ordered by ascending index.
pub fn top_k_indices(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > scores.len() {
        return Err(Error::Argument(format!(
            "top-K must be in 1..={}, got {k}",
            scores.len()
        )));
    }
    let order = |a: &usize, b: &usize| -> Ordering {
        scores[*b].total_cmp(&scores[*a]).then(a.cmp(b))
    };
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, order);
        idx.truncate(k);
    }
    idx.sort_unstable_by(order);
    Ok(idx)
}

use serde::{Deserialize, Serialize};

use super::SessionLog;
use crate::error::{Error, Result};

/// Dwell cap taken at a percentile of the training corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub cap: f64,
    pub percentile: f64,
}

impl NormalizationStats {
    pub fn normalize(&self, dwell: f64) -> f64 {
        normalize_dwell(dwell, self)
    }
}

/// Nearest-rank percentile of every dwell value in `sessions`.
pub fn fit_normalizer(sessions: &[SessionLog], percentile: f64) -> Result<NormalizationStats> {
    if !(percentile > 0.0 && percentile <= 100.0) {
        return Err(Error::Argument(format!(
            "percentile must be in (0, 100], got {percentile}"
        )));
    }
    let mut dwells: Vec<f64> = sessions
        .iter()
        .flat_map(|s| s.events.iter().map(|e| e.dwell))
        .collect();
    if dwells.is_empty() {
        return Err(Error::Data("cannot fit dwell normalizer on an empty corpus".into()));
    }
    dwells.sort_by(f64::total_cmp);
    let n = dwells.len();
    let rank = ((percentile * n as f64) / 100.0).ceil() as usize;
    let cap = dwells[rank.clamp(1, n) - 1];
    if cap <= 0.0 {
        return Err(Error::Data(format!(
            "dwell p{percentile} is {cap}; cannot normalize by a non-positive cap"
        )));
    }
    Ok(NormalizationStats { cap, percentile })
}

/// `min(dwell, cap) / cap`, clamped into `[0, 1]`.
pub fn normalize_dwell(dwell: f64, stats: &NormalizationStats) -> f64 {
    (dwell.min(stats.cap) / stats.cap).clamp(0.0, 1.0)
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Recommender;
use crate::data::{sessions_digest, AttrId, SessionLog};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithm: String,
    pub is_baseline: bool,
    /// List length K.
    pub top_k: usize,
    /// Window length k.
    pub k: usize,
    pub hits: u64,
    pub steps: u64,
    pub hit_rate: f64,
    pub sessions_used: usize,
    pub sessions_skipped: usize,
    /// Steps where the recommender could not score meaningfully.
    pub degenerate_states: u64,
    pub seed: Option<u64>,
    pub test_set_digest: String,
    pub config: serde_json::Value,
}

/// Micro-averaged Hit-Rate@K: for every step `t` in `k..=N` of every session
/// with more than `k` events, ask for a top-K list from the true previous `k`
/// attributes and count a hit when `a_t` is in it.
pub fn hit_rate_at_k<R: Recommender + ?Sized>(
    rec: &R,
    sessions: &[SessionLog],
    k: usize,
    top_k: usize,
) -> Result<EvalReport> {
    if k == 0 || top_k == 0 {
        return Err(Error::Argument("k and top-K must be >= 1".into()));
    }
    let usable: Vec<&SessionLog> = sessions.iter().filter(|s| s.is_usable(k)).collect();
    let (hits, steps, degenerate) = usable
        .par_iter()
        .map(|s| -> Result<(u64, u64, u64)> {
            let attrs: Vec<AttrId> = s.attributes().collect();
            let mut tally = (0, 0, 0);
            for t in k..attrs.len() {
                let rec = rec.recommend(&attrs[t - k..t], top_k)?;
                if rec.items.len() != top_k {
                    return Err(Error::Data(format!(
                        "recommender returned {} items for top-{top_k}",
                        rec.items.len()
                    )));
                }
                tally.0 += u64::from(rec.items.contains(&attrs[t]));
                tally.1 += 1;
                tally.2 += u64::from(rec.degenerate);
            }
            Ok(tally)
        })
        .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))?;
    if steps == 0 {
        return Err(Error::Data(format!(
            "no test session has at least k + 1 = {} events",
            k + 1
        )));
    }
    let info = rec.info();
    Ok(EvalReport {
        algorithm: info.name,
        is_baseline: info.is_baseline,
        top_k,
        k,
        hits,
        steps,
        hit_rate: hits as f64 / steps as f64,
        sessions_used: usable.len(),
        sessions_skipped: sessions.len() - usable.len(),
        degenerate_states: degenerate,
        seed: info.seed,
        test_set_digest: sessions_digest(sessions),
        config: info.config,
    })
}

use serde::{Deserialize, Serialize};

use super::EvalReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub hit_rate: f64,
    pub hits: u64,
    pub steps: u64,
    /// `hit_rate - reference`; absent on the reference row itself.
    pub delta_abs: Option<f64>,
    /// `delta_abs / reference`.
    pub delta_rel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub top_k: usize,
    pub test_set_digest: String,
    /// Best-scoring baseline row, when there is one to compare against.
    pub reference: Option<String>,
    pub rows: Vec<ComparisonRow>,
}

/// Sorts reports by hit rate and measures each against the best baseline.
/// All reports must share K, the window length, and the test set.
pub fn compare(reports: &[EvalReport]) -> Result<Comparison> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Argument("nothing to compare".into()))?;
    for r in reports {
        if r.top_k != first.top_k || r.k != first.k {
            return Err(Error::Mismatch(format!(
                "{} uses K={} k={}, {} uses K={} k={}",
                r.algorithm, r.top_k, r.k, first.algorithm, first.top_k, first.k
            )));
        }
        if r.test_set_digest != first.test_set_digest {
            return Err(Error::Mismatch(format!(
                "{} and {} were evaluated on different test sets",
                r.algorithm, first.algorithm
            )));
        }
    }
    let mut sorted: Vec<&EvalReport> = reports.iter().collect();
    sorted.sort_by(|a, b| b.hit_rate.total_cmp(&a.hit_rate).then_with(|| a.algorithm.cmp(&b.algorithm)));

    let reference = if sorted.len() > 1 {
        sorted.iter().find(|r| r.is_baseline).copied()
    } else {
        None
    };
    let rows = sorted
        .iter()
        .map(|r| {
            let (delta_abs, delta_rel) = match reference {
                Some(base) if !std::ptr::eq(*r, base) => {
                    let d = r.hit_rate - base.hit_rate;
                    (Some(d), (base.hit_rate > 0.0).then(|| d / base.hit_rate))
                }
                _ => (None, None),
            };
            ComparisonRow {
                algorithm: r.algorithm.clone(),
                hit_rate: r.hit_rate,
                hits: r.hits,
                steps: r.steps,
                delta_abs,
                delta_rel,
            }
        })
        .collect();
    Ok(Comparison {
        top_k: first.top_k,
        test_set_digest: first.test_set_digest.clone(),
        reference: reference.map(|r| r.algorithm.clone()),
        rows,
    })
}

fn signed(v: Option<f64>, scale: f64, suffix: &str) -> String {
    v.map_or_else(|| "-".to_string(), |d| format!("{:+.4}{suffix}", d * scale))
}

impl Comparison {
    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let header = [
            "algorithm".to_string(),
            format!("hit_rate@{}", self.top_k),
            "hits/steps".to_string(),
            "delta".to_string(),
            "delta_rel".to_string(),
        ];
        let body: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.algorithm.clone(),
                    format!("{:.4}", r.hit_rate),
                    format!("{}/{}", r.hits, r.steps),
                    signed(r.delta_abs, 1.0, ""),
                    signed(r.delta_rel, 100.0, "%"),
                ]
            })
            .collect();
        let mut widths = header.each_ref().map(String::len);
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let fmt_row = |cells: &[String; 5]| {
            let mut line = format!("{:<w$}", cells[0], w = widths[0]);
            for (cell, w) in cells.iter().zip(widths).skip(1) {
                line.push_str(&format!("  {cell:>w$}"));
            }
            line.trim_end().to_string()
        };
        let mut out = fmt_row(&header);
        out.push('\n');
        for row in &body {
            out.push_str(&fmt_row(row));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer
                .serialize(row)
                .map_err(|e| Error::Data(format!("csv: {e}")))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Data(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Data(format!("csv: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(name: &str, baseline: bool, hit_rate: f64) -> EvalReport {
        let steps = 10_000;
        EvalReport {
            algorithm: name.into(),
            is_baseline: baseline,
            top_k: 10,
            k: 4,
            hits: (hit_rate * steps as f64).round() as u64,
            steps,
            hit_rate,
            sessions_used: 1,
            sessions_skipped: 0,
            degenerate_states: 0,
            seed: None,
            test_set_digest: "abc".into(),
            config: serde_json::Value::Null,
        }
    }

    #[test]
    fn single_report_has_no_deltas() {
        let c = compare(&[report("drqn", false, 0.5)]).unwrap();
        assert_eq!(c.rows.len(), 1);
        assert_eq!(c.reference, None);
        assert_eq!(c.rows[0].delta_abs, None);
    }

    #[test]
    fn mismatched_setups_are_rejected() {
        let mut other = report("random", true, 0.05);
        other.top_k = 5;
        assert!(compare(&[report("drqn", false, 0.5), other]).is_err());
        let mut other = report("random", true, 0.05);
        other.test_set_digest = "xyz".into();
        assert!(compare(&[report("drqn", false, 0.5), other]).is_err());
    }

    #[test]
    fn headline_delta_formatting() {
        let c = compare(&[
            report("similar_attributes", true, 0.5334),
            report("drqn", false, 0.6736),
            report("random", true, 0.05),
        ])
        .unwrap();
        assert_eq!(c.reference.as_deref(), Some("similar_attributes"));
        let names: Vec<_> = c.rows.iter().map(|r| r.algorithm.as_str()).collect();
        assert_eq!(names, ["drqn", "similar_attributes", "random"]);
        assert!((c.rows[0].delta_abs.unwrap() - 0.1402).abs() < 1e-12);
        assert_eq!(c.rows[1].delta_abs, None);
        let text = c.to_text();
        assert!(text.contains("+0.1402"), "{text}");
        assert!(text.contains("+26.2842%"), "{text}");
        let csv = c.to_csv().unwrap();
        assert!(csv.starts_with("algorithm,hit_rate,hits,steps,delta_abs,delta_rel\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}

//! Verdict scoring: detection metrics plus cumulative label accuracies.

use crate::taxonomy::labels::{Leaf, PostVerdict};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("length mismatch: {verdicts} verdicts vs {truth} truth rows")]
    LengthMismatch { verdicts: usize, truth: usize },
    #[error("row {index} misaligned: verdict {verdict_key} vs truth {truth_key}")]
    Misaligned { index: usize, verdict_key: String, truth_key: String },
}

/// Confusion-matrix metrics for the binary piracy decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Full evaluation record. Label accuracies are cumulative: a row counts
/// toward `primary_s1` only if the primary already matched, and toward
/// `primary_s1_s2` only if the first secondary also matched, so the three
/// values are non-increasing by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalMetrics {
    pub detection: BinaryMetrics,
    pub labeled_rows: usize,
    pub primary_accuracy: f64,
    pub primary_s1_accuracy: f64,
    pub primary_s1_s2_accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Secondary labels in canonical priority order, so adapters that emit
/// secondaries in a different order are not penalized for ordering.
fn canonical_secondaries(v: &PostVerdict) -> Vec<Leaf> {
    let mut s: Vec<Leaf> = v.secondaries();
    s.sort_by_key(|l| (l.group().default_priority(), l.index_in_group()));
    s.dedup();
    s
}

pub fn evaluate(verdicts: &[PostVerdict], truth: &[PostVerdict]) -> Result<EvalMetrics, EvalError> {
    if verdicts.len() != truth.len() {
        return Err(EvalError::LengthMismatch { verdicts: verdicts.len(), truth: truth.len() });
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    let mut labeled_rows = 0usize;
    let (mut p_ok, mut s1_ok, mut s2_ok) = (0usize, 0usize, 0usize);

    for (i, (v, t)) in verdicts.iter().zip(truth).enumerate() {
        if v.channel_id != t.channel_id || v.post_id != t.post_id {
            return Err(EvalError::Misaligned {
                index: i,
                verdict_key: format!("{}/{}", v.channel_id, v.post_id),
                truth_key: format!("{}/{}", t.channel_id, t.post_id),
            });
        }
        match (v.is_piracy, t.is_piracy) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
        if t.is_piracy && !t.labels.is_empty() {
            labeled_rows += 1;
            let primary = v.is_piracy && v.primary() == t.primary();
            if primary {
                p_ok += 1;
                let vs = canonical_secondaries(v);
                let ts = canonical_secondaries(t);
                if vs.first() == ts.first() {
                    s1_ok += 1;
                    if vs.get(1) == ts.get(1) {
                        s2_ok += 1;
                    }
                }
            }
        }
    }

    let precision = if tp + fp == 0 {
        if tp + fn_ == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EvalMetrics {
        detection: BinaryMetrics {
            tp,
            fp,
            tn,
            fn_,
            accuracy: ratio(tp + tn, verdicts.len()),
            precision,
            recall,
            f1,
        },
        labeled_rows,
        primary_accuracy: ratio(p_ok, labeled_rows),
        primary_s1_accuracy: ratio(s1_ok, labeled_rows),
        primary_s1_s2_accuracy: ratio(s2_ok, labeled_rows),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::labels::AssignedLabel;

    fn verdict(id: i64, piracy: bool, leaves: &[Leaf]) -> PostVerdict {
        PostVerdict {
            channel_id: "ch0001".into(),
            post_id: id,
            is_piracy: piracy,
            labels: leaves.iter().map(|&l| AssignedLabel::new(l, "t")).collect(),
        }
    }

    #[test]
    fn perfect_verdicts_score_one() {
        let truth = vec![
            verdict(1, true, &[Leaf::DirectDownload, Leaf::ResolutionEncoding]),
            verdict(2, false, &[]),
        ];
        let m = evaluate(&truth, &truth).unwrap();
        assert_eq!(m.detection.accuracy, 1.0);
        assert_eq!(m.detection.f1, 1.0);
        assert_eq!(m.primary_accuracy, 1.0);
        assert_eq!(m.primary_s1_accuracy, 1.0);
        assert_eq!(m.primary_s1_s2_accuracy, 1.0);
    }

    #[test]
    fn all_benign_verdicts_on_all_piracy_truth_give_zero_recall() {
        let truth = vec![
            verdict(1, true, &[Leaf::CloudStorage]),
            verdict(2, true, &[Leaf::CloudStorage]),
        ];
        let preds = vec![verdict(1, false, &[]), verdict(2, false, &[])];
        let m = evaluate(&preds, &truth).unwrap();
        assert_eq!(m.detection.recall, 0.0);
        assert_eq!(m.detection.accuracy, 0.0);
        assert_eq!(m.primary_accuracy, 0.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        let truth = vec![verdict(1, false, &[])];
        assert_eq!(
            evaluate(&[], &truth).unwrap_err(),
            EvalError::LengthMismatch { verdicts: 0, truth: 1 }
        );
    }

    #[test]
    fn misalignment_rejected() {
        let truth = vec![verdict(2, false, &[])];
        let preds = vec![verdict(1, false, &[])];
        assert!(matches!(evaluate(&preds, &truth), Err(EvalError::Misaligned { index: 0, .. })));
    }

    #[test]
    fn cumulative_accuracies_are_monotone_under_planted_errors() {
        // Row 1: fully correct. Row 2: primary right, S1 wrong.
        // Row 3: primary and S1 right, S2 wrong. Row 4: primary wrong.
        let truth = vec![
            verdict(1, true, &[Leaf::DirectDownload, Leaf::ResolutionEncoding, Leaf::SubtitlesDubs]),
            verdict(2, true, &[Leaf::CloudStorage, Leaf::ResolutionEncoding]),
            verdict(3, true, &[Leaf::CloudStorage, Leaf::ResolutionEncoding, Leaf::SubtitlesDubs]),
            verdict(4, true, &[Leaf::BackupChannel]),
        ];
        let preds = vec![
            verdict(1, true, &[Leaf::DirectDownload, Leaf::ResolutionEncoding, Leaf::SubtitlesDubs]),
            verdict(2, true, &[Leaf::CloudStorage, Leaf::BundledCollection]),
            verdict(3, true, &[Leaf::CloudStorage, Leaf::ResolutionEncoding, Leaf::BundledCollection]),
            verdict(4, true, &[Leaf::ChannelReferral]),
        ];
        let m = evaluate(&preds, &truth).unwrap();
        assert_eq!(m.primary_accuracy, 0.75);
        assert_eq!(m.primary_s1_accuracy, 0.5);
        assert_eq!(m.primary_s1_s2_accuracy, 0.25);
        assert!(m.primary_accuracy >= m.primary_s1_accuracy);
        assert!(m.primary_s1_accuracy >= m.primary_s1_s2_accuracy);
    }

    #[test]
    fn secondary_order_does_not_matter() {
        let truth = vec![verdict(
            1,
            true,
            &[Leaf::DirectDownload, Leaf::ResolutionEncoding, Leaf::SubtitlesDubs],
        )];
        let preds = vec![verdict(
            1,
            true,
            &[Leaf::DirectDownload, Leaf::SubtitlesDubs, Leaf::ResolutionEncoding],
        )];
        let m = evaluate(&preds, &truth).unwrap();
        assert_eq!(m.primary_s1_s2_accuracy, 1.0);
    }

    #[test]
    fn empty_inputs_are_vacuously_perfect() {
        let m = evaluate(&[], &[]).unwrap();
        assert_eq!(m.detection.accuracy, 1.0);
        assert_eq!(m.primary_accuracy, 1.0);
        assert_eq!(m.labeled_rows, 0);
    }
}

//! Binary classification reports: per-class precision/recall/F1 and the
//! class-size-weighted F1 used as the primary evaluation metric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("prediction/gold length mismatch: {preds} vs {golds}")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("cannot score an empty label list")]
    Empty,
    #[error("labels must be 0 or 1, found {0}")]
    NonBinaryLabel(u8),
}

/// Confusion counts with the positive class meaning "feature present".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn from_labels(preds: &[u8], golds: &[u8]) -> Result<Self, MetricsError> {
        if preds.len() != golds.len() {
            return Err(MetricsError::LengthMismatch {
                preds: preds.len(),
                golds: golds.len(),
            });
        }
        if preds.is_empty() {
            return Err(MetricsError::Empty);
        }
        let mut counts = ConfusionCounts::default();
        for (&p, &g) in preds.iter().zip(golds) {
            if p > 1 {
                return Err(MetricsError::NonBinaryLabel(p));
            }
            if g > 1 {
                return Err(MetricsError::NonBinaryLabel(g));
            }
            match (p, g) {
                (1, 1) => counts.tp += 1,
                (1, 0) => counts.fp += 1,
                (0, 0) => counts.tn += 1,
                (0, 1) => counts.fn_ += 1,
                _ => unreachable!(),
            }
        }
        Ok(counts)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Per-class precision/recall/F1 plus weighted F1, in the layout of the
/// LLM-vs-baseline comparison tables (rows P+, P-, R+, R-, F1w).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub precision_pos: f64,
    pub precision_neg: f64,
    pub recall_pos: f64,
    pub recall_neg: f64,
    pub f1_pos: f64,
    pub f1_neg: f64,
    pub f1_weighted: f64,
    pub support_pos: usize,
    pub support_neg: usize,
    pub counts: ConfusionCounts,
    /// Set when any cell hit a 0/0 division and was defined as 0.
    pub zero_division: bool,
}

fn ratio(num: usize, den: usize, flag: &mut bool) -> f64 {
    if den == 0 {
        *flag = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64, flag: &mut bool) -> f64 {
    if p + r == 0.0 {
        *flag = true;
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl ClassificationReport {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let mut zero_division = false;
        let precision_pos = ratio(counts.tp, counts.tp + counts.fp, &mut zero_division);
        let precision_neg = ratio(counts.tn, counts.tn + counts.fn_, &mut zero_division);
        let recall_pos = ratio(counts.tp, counts.tp + counts.fn_, &mut zero_division);
        let recall_neg = ratio(counts.tn, counts.tn + counts.fp, &mut zero_division);
        let f1_pos = f1(precision_pos, recall_pos, &mut zero_division);
        let f1_neg = f1(precision_neg, recall_neg, &mut zero_division);
        let support_pos = counts.tp + counts.fn_;
        let support_neg = counts.tn + counts.fp;
        let f1_weighted = if support_pos + support_neg == 0 {
            zero_division = true;
            0.0
        } else {
            (support_pos as f64 * f1_pos + support_neg as f64 * f1_neg)
                / (support_pos + support_neg) as f64
        };
        ClassificationReport {
            precision_pos,
            precision_neg,
            recall_pos,
            recall_neg,
            f1_pos,
            f1_neg,
            f1_weighted,
            support_pos,
            support_neg,
            counts,
            zero_division,
        }
    }

    /// Aligned text table mirroring the published report layout.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<6}{:>8}\n", "P+", format!("{:.3}", self.precision_pos)));
        out.push_str(&format!("{:<6}{:>8}\n", "P-", format!("{:.3}", self.precision_neg)));
        out.push_str(&format!("{:<6}{:>8}\n", "R+", format!("{:.3}", self.recall_pos)));
        out.push_str(&format!("{:<6}{:>8}\n", "R-", format!("{:.3}", self.recall_neg)));
        out.push_str(&format!("{:<6}{:>8}\n", "F1w", format!("{:.3}", self.f1_weighted)));
        out.push_str(&format!(
            "support: {}+ / {}-\n",
            self.support_pos, self.support_neg
        ));
        if self.zero_division {
            out.push_str("warning: one or more cells had zero denominator (reported as 0)\n");
        }
        out
    }
}

/// Score predictions against gold labels (1 = feature present).
pub fn score(preds: &[u8], golds: &[u8]) -> Result<ClassificationReport, MetricsError> {
    Ok(ClassificationReport::from_counts(ConfusionCounts::from_labels(preds, golds)?))
}

/// Unweighted arithmetic mean per field; supports and counts are summed.
pub fn average_reports(
    reports: &[ClassificationReport],
) -> Result<ClassificationReport, MetricsError> {
    if reports.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = reports.len() as f64;
    let mean = |f: fn(&ClassificationReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let mut counts = ConfusionCounts::default();
    for r in reports {
        counts.tp += r.counts.tp;
        counts.fp += r.counts.fp;
        counts.tn += r.counts.tn;
        counts.fn_ += r.counts.fn_;
    }
    Ok(ClassificationReport {
        precision_pos: mean(|r| r.precision_pos),
        precision_neg: mean(|r| r.precision_neg),
        recall_pos: mean(|r| r.recall_pos),
        recall_neg: mean(|r| r.recall_neg),
        f1_pos: mean(|r| r.f1_pos),
        f1_neg: mean(|r| r.f1_neg),
        f1_weighted: mean(|r| r.f1_weighted),
        support_pos: reports.iter().map(|r| r.support_pos).sum(),
        support_neg: reports.iter().map(|r| r.support_neg).sum(),
        counts,
        zero_division: reports.iter().any(|r| r.zero_division),
    })
}

//! Binary evaluation: confusion matrix, accuracy, macro-averaged
//! precision/recall/F1, and the cached score set the threshold search probes.
//!
//! Anomaly is the positive class everywhere. Degenerate 0/0 precision or
//! recall is defined as 0 so macro averages stay defined.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::model::{decide, DaeMlp, Verdict};

/// Counts with anomaly as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Accuracy plus macro-averaged precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub matrix: ConfusionMatrix,
}

/// Exact confusion counts from 0/1 label vectors.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::shape("confusion labels", y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(Error::domain("confusion needs at least one sample"));
    }
    let mut m = ConfusionMatrix {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred.iter()) {
        if t > 1 || p > 1 {
            return Err(Error::domain(format!("labels must be 0 or 1, got ({t}, {p})")));
        }
        match (t, p) {
            (1, 1) => m.tp += 1,
            (0, 1) => m.fp += 1,
            (0, 0) => m.tn += 1,
            (1, 0) => m.fn_ += 1,
            _ => unreachable!(),
        }
    }
    Ok(m)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Accuracy and macro metrics from a confusion matrix.
pub fn report(matrix: ConfusionMatrix) -> Result<EvalReport> {
    let total = matrix.total();
    if total == 0 {
        return Err(Error::domain("cannot report on an empty confusion matrix"));
    }
    // Anomaly side.
    let p_pos = ratio(matrix.tp, matrix.tp + matrix.fp);
    let r_pos = ratio(matrix.tp, matrix.tp + matrix.fn_);
    // Normal side (predicted-normal / actually-normal).
    let p_neg = ratio(matrix.tn, matrix.tn + matrix.fn_);
    let r_neg = ratio(matrix.tn, matrix.tn + matrix.fp);

    Ok(EvalReport {
        accuracy: (matrix.tp + matrix.tn) as f64 / total as f64,
        precision_macro: (p_pos + p_neg) / 2.0,
        recall_macro: (r_pos + r_neg) / 2.0,
        f1_macro: (f1(p_pos, r_pos) + f1(p_neg, r_neg)) / 2.0,
        matrix,
    })
}

/// Anomaly scores of a labeled dataset, computed once so that repeated
/// threshold probes cost a binary search instead of a model pass.
#[derive(Debug, Clone)]
pub struct ScoredSet {
    /// (score, true label), input order.
    entries: Vec<(f64, Label)>,
    normal_sorted: Vec<f64>,
    anomaly_sorted: Vec<f64>,
}

impl ScoredSet {
    /// Scores every record with the model under the given score weights.
    pub fn compute(model: &DaeMlp, ds: &Dataset, lambda: f64, gamma: f64) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::domain("cannot score an empty dataset"));
        }
        let mut entries = Vec::with_capacity(ds.len());
        let mut scorer = model.scorer_with(lambda, gamma);
        for (i, rec) in ds.records().iter().enumerate() {
            let label = rec.label().ok_or_else(|| {
                Error::domain(format!("record {i} is unlabeled; evaluation needs labels"))
            })?;
            let parts = scorer.score(rec.features())?;
            entries.push((parts.score, label));
        }
        Ok(Self::from_entries(entries))
    }

    /// Builds the cache from precomputed (score, label) pairs.
    pub fn from_entries(entries: Vec<(f64, Label)>) -> Self {
        let mut normal_sorted: Vec<f64> = entries
            .iter()
            .filter(|(_, l)| *l == Label::Normal)
            .map(|(s, _)| *s)
            .collect();
        let mut anomaly_sorted: Vec<f64> = entries
            .iter()
            .filter(|(_, l)| *l == Label::Anomaly)
            .map(|(s, _)| *s)
            .collect();
        normal_sorted.sort_unstable_by(f64::total_cmp);
        anomaly_sorted.sort_unstable_by(f64::total_cmp);
        ScoredSet {
            entries,
            normal_sorted,
            anomaly_sorted,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(f64, Label)] {
        &self.entries
    }

    pub fn normal_count(&self) -> usize {
        self.normal_sorted.len()
    }

    pub fn anomaly_count(&self) -> usize {
        self.anomaly_sorted.len()
    }

    pub fn has_both_classes(&self) -> bool {
        !self.normal_sorted.is_empty() && !self.anomaly_sorted.is_empty()
    }

    /// Confusion counts of `decide(score, tau)` against the true labels.
    pub fn confusion_at(&self, tau: f64) -> ConfusionMatrix {
        // decide() flags score >= tau, so partition both sorted arrays at tau.
        let normal_flagged = self.normal_sorted.len() - self.normal_sorted.partition_point(|&s| s < tau);
        let anomaly_flagged = self.anomaly_sorted.len() - self.anomaly_sorted.partition_point(|&s| s < tau);
        ConfusionMatrix {
            tp: anomaly_flagged,
            fn_: self.anomaly_sorted.len() - anomaly_flagged,
            fp: normal_flagged,
            tn: self.normal_sorted.len() - normal_flagged,
        }
    }

    pub fn accuracy_at(&self, tau: f64) -> f64 {
        let m = self.confusion_at(tau);
        (m.tp + m.tn) as f64 / m.total() as f64
    }

    pub fn report_at(&self, tau: f64) -> Result<EvalReport> {
        report(self.confusion_at(tau))
    }

    /// Per-record verdicts at `tau`, input order.
    pub fn verdicts_at(&self, tau: f64) -> Vec<Verdict> {
        self.entries.iter().map(|&(s, _)| decide(s, tau)).collect()
    }
}

/// Accuracy of the model on a labeled dataset at score weights `lambda`,
/// `gamma` and threshold `tau`.
pub fn evaluate_model(model: &DaeMlp, ds: &Dataset, lambda: f64, gamma: f64, tau: f64) -> Result<f64> {
    Ok(ScoredSet::compute(model, ds, lambda, gamma)?.accuracy_at(tau))
}

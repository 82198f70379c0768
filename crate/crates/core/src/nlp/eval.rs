use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::LabeledSnippet;
use super::model::{train, Hyperparams, TrainError};
use super::stratify::{stratified_kfold, StratifyError};
use crate::taxonomy::IndicatorTaxonomy;

const DECISION_THRESHOLD: f64 = 0.5;

/// Confusion counts and derived ratios for one label on one held-out fold.
///
/// A ratio with a zero denominator is recorded as 0 and flagged undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldLabelMetrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
}

impl FoldLabelMetrics {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { (0.0, true) } else { (num as f64 / den as f64, false) };
        let (precision, precision_undefined) = ratio(tp, tp + fp);
        let (recall, recall_undefined) = ratio(tp, tp + fn_);
        FoldLabelMetrics {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            support: tp + fn_,
            precision,
            recall,
            precision_undefined,
            recall_undefined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub category: String,
    pub folds: Vec<FoldLabelMetrics>,
    pub mean_precision: f64,
    pub std_precision: f64,
    pub mean_recall: f64,
    pub std_recall: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub k: usize,
    pub seed: u64,
    pub labels: Vec<LabelSummary>,
    /// Mean of per-label mean precision over labels with nonzero support.
    pub macro_precision: f64,
    /// Pooled `Σtp / Σ(tp+fp)` over all labels and folds.
    pub micro_precision: f64,
    /// Standard deviation of the per-label mean precisions.
    pub inter_label_std: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Stratify(#[from] StratifyError),
    #[error("fold {fold}: {source}")]
    Train { fold: usize, source: TrainError },
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// k-fold cross-validation over stratified folds with a 0.5 decision threshold.
/// Folds are evaluated in parallel and merged in fold order.
pub fn evaluate_cv(
    corpus: &[LabeledSnippet],
    taxonomy: &IndicatorTaxonomy,
    k: usize,
    seed: u64,
    hyperparams: Hyperparams,
) -> Result<MetricsReport, EvalError> {
    let folds = stratified_kfold(corpus, k, seed)?;
    let per_fold: Vec<Vec<FoldLabelMetrics>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train_set: Vec<LabeledSnippet> =
                corpus.iter().zip(&folds.assignment).filter(|(_, &f)| f != fold).map(|(s, _)| s.clone()).collect();
            let model =
                train(&train_set, taxonomy, hyperparams, seed).map_err(|source| EvalError::Train { fold, source })?;
            let mut counts = vec![(0usize, 0usize, 0usize); taxonomy.len()];
            for (s, _) in corpus.iter().zip(&folds.assignment).filter(|(_, &f)| f == fold) {
                for (c, p) in model.probabilities(&s.text).into_iter().enumerate() {
                    let predicted = p >= DECISION_THRESHOLD;
                    let actual = s.labels.contains(&taxonomy.categories()[c]);
                    let slot = &mut counts[c];
                    match (predicted, actual) {
                        (true, true) => slot.0 += 1,
                        (true, false) => slot.1 += 1,
                        (false, true) => slot.2 += 1,
                        (false, false) => {}
                    }
                }
            }
            Ok(counts.into_iter().map(|(tp, fp, fn_)| FoldLabelMetrics::from_counts(tp, fp, fn_)).collect())
        })
        .collect::<Result<_, EvalError>>()?;

    let labels: Vec<LabelSummary> = taxonomy
        .categories()
        .iter()
        .enumerate()
        .map(|(c, category)| {
            let folds: Vec<FoldLabelMetrics> = per_fold.iter().map(|f| f[c].clone()).collect();
            let (mean_precision, std_precision) = mean_std(&folds.iter().map(|m| m.precision).collect::<Vec<_>>());
            let (mean_recall, std_recall) = mean_std(&folds.iter().map(|m| m.recall).collect::<Vec<_>>());
            let support = folds.iter().map(|m| m.support).sum();
            LabelSummary {
                category: category.clone(),
                folds,
                mean_precision,
                std_precision,
                mean_recall,
                std_recall,
                support,
            }
        })
        .collect();

    let supported: Vec<f64> = labels.iter().filter(|l| l.support > 0).map(|l| l.mean_precision).collect();
    let (macro_precision, inter_label_std) = mean_std(&supported);
    let (tp, predicted) = labels
        .iter()
        .flat_map(|l| &l.folds)
        .fold((0, 0), |(tp, pp), m| (tp + m.true_positives, pp + m.true_positives + m.false_positives));
    let micro_precision = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
    Ok(MetricsReport { k, seed, labels, macro_precision, micro_precision, inter_label_std })
}

impl MetricsReport {
    /// Fixed-width per-label precision table: one row per label, one column per
    /// fold, then mean and standard deviation. Undefined precisions print as `-`.
    pub fn table(&self) -> String {
        let width = self.labels.iter().map(|l| l.category.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}", "label");
        for f in 0..self.k {
            let _ = write!(out, " {:>6}", format!("f{f}"));
        }
        let _ = writeln!(out, " {:>6} {:>6} {:>7}", "mean", "std", "support");
        for l in &self.labels {
            let _ = write!(out, "{:<width$}", l.category);
            for m in &l.folds {
                if m.precision_undefined {
                    let _ = write!(out, " {:>6}", "-");
                } else {
                    let _ = write!(out, " {:>6.3}", m.precision);
                }
            }
            let _ = writeln!(out, " {:>6.3} {:>6.3} {:>7}", l.mean_precision, l.std_precision, l.support);
        }
        let _ = writeln!(
            out,
            "macro precision {:.4}  micro precision {:.4}  inter-label std {:.4}",
            self.macro_precision, self.micro_precision, self.inter_label_std
        );
        out
    }
}

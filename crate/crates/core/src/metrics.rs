//! Evaluation metrics: Dice overlap, MAE/RMSE, EF range classes and
//! multiclass confusion-matrix scores.

use crate::geometry::BinaryMask;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("mask dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("Dice is undefined for two empty masks")]
    UndefinedDice,
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("input is empty")]
    EmptyInput,
    #[error("ejection fraction {0} is outside [0, 1]")]
    OutOfRange(f64),
}

/// What Dice returns when both masks are empty (0/0).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EmptyDice {
    /// Perfect agreement on emptiness.
    #[default]
    One,
    Error,
}

/// Dice coefficient `2|X ∩ Y| / (|X| + |Y|)`; two empty masks score 1.0.
pub fn dice(x: &BinaryMask, y: &BinaryMask) -> Result<f64, MetricsError> {
    dice_with(x, y, EmptyDice::One)
}

pub fn dice_with(x: &BinaryMask, y: &BinaryMask, empty: EmptyDice) -> Result<f64, MetricsError> {
    if !x.same_shape(y) {
        return Err(MetricsError::DimensionMismatch(x.width(), x.height(), y.width(), y.height()));
    }
    let total = x.count() + y.count();
    if total == 0 {
        return match empty {
            EmptyDice::One => Ok(1.0),
            EmptyDice::Error => Err(MetricsError::UndefinedDice),
        };
    }
    Ok(2.0 * x.intersection_count(y) as f64 / total as f64)
}

fn paired(predicted: &[f64], truth: &[f64]) -> Result<(), MetricsError> {
    if predicted.len() != truth.len() {
        return Err(MetricsError::LengthMismatch(predicted.len(), truth.len()));
    }
    if predicted.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(predicted: &[f64], truth: &[f64]) -> Result<f64, MetricsError> {
    paired(predicted, truth)?;
    let sum: f64 = predicted.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / predicted.len() as f64)
}

/// Root mean squared error.
pub fn rmse(predicted: &[f64], truth: &[f64]) -> Result<f64, MetricsError> {
    paired(predicted, truth)?;
    let sum: f64 = predicted.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sum / predicted.len() as f64).sqrt())
}

/// Ejection-fraction range. Ordered `Reduced < ModeratelyReduced < Preserved`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EfClass {
    #[serde(rename = "rEF")]
    Reduced,
    #[serde(rename = "mrEF")]
    ModeratelyReduced,
    #[serde(rename = "pEF")]
    Preserved,
}

impl EfClass {
    /// Row/column order of [`ConfusionMatrix`]: pEF, rEF, mrEF.
    pub const MATRIX_ORDER: [EfClass; 3] = [EfClass::Preserved, EfClass::Reduced, EfClass::ModeratelyReduced];

    pub fn label(self) -> &'static str {
        match self {
            EfClass::Reduced => "rEF",
            EfClass::ModeratelyReduced => "mrEF",
            EfClass::Preserved => "pEF",
        }
    }

    pub fn matrix_index(self) -> usize {
        match self {
            EfClass::Preserved => 0,
            EfClass::Reduced => 1,
            EfClass::ModeratelyReduced => 2,
        }
    }
}

impl fmt::Display for EfClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Lower bound of the moderately reduced range.
pub const MREF_LOWER: f64 = 0.40;
/// Lower bound of the preserved range. `[0.49, 0.50)` is assigned to mrEF so the
/// three ranges cover `[0, 1]` without a gap.
pub const PEF_LOWER: f64 = 0.50;

/// rEF below 0.40, mrEF in `[0.40, 0.50)`, pEF from 0.50 up. EF is a fraction.
pub fn classify_ef(ef: f64) -> Result<EfClass, MetricsError> {
    if !(0.0..=1.0).contains(&ef) {
        return Err(MetricsError::OutOfRange(ef));
    }
    Ok(if ef < MREF_LOWER {
        EfClass::Reduced
    } else if ef < PEF_LOWER {
        EfClass::ModeratelyReduced
    } else {
        EfClass::Preserved
    })
}

/// Rows are true classes, columns predicted, both in [`EfClass::MATRIX_ORDER`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: EfClass,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScores {
    /// Equals accuracy for single-label multiclass data.
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub macro_recall: f64,
    pub macro_precision: f64,
    pub per_class: Vec<ClassScore>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        Self { counts }
    }

    pub fn from_labels(truth: &[EfClass], predicted: &[EfClass]) -> Result<Self, MetricsError> {
        if truth.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch(truth.len(), predicted.len()));
        }
        let mut counts = [[0u64; 3]; 3];
        for (t, p) in truth.iter().zip(predicted) {
            counts[t.matrix_index()][p.matrix_index()] += 1;
        }
        Ok(Self { counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    /// Expands the counts back into (truth, predicted) label lists.
    pub fn to_labels(&self) -> (Vec<EfClass>, Vec<EfClass>) {
        let mut truth = Vec::new();
        let mut predicted = Vec::new();
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                for _ in 0..n {
                    truth.push(EfClass::MATRIX_ORDER[i]);
                    predicted.push(EfClass::MATRIX_ORDER[j]);
                }
            }
        }
        (truth, predicted)
    }

    /// Micro and macro scores. Classes without support or predictions score 0
    /// for the undefined ratio and log a warning.
    pub fn scores(&self) -> ClassificationScores {
        let per_class: Vec<ClassScore> = EfClass::MATRIX_ORDER
            .iter()
            .enumerate()
            .map(|(i, &class)| {
                let tp = self.counts[i][i];
                let support = self.row_sum(i);
                let predicted = self.col_sum(i);
                if support == 0 {
                    log::warn!("class {class} has no true samples; recall counted as 0");
                }
                if predicted == 0 {
                    log::warn!("class {class} is never predicted; precision counted as 0");
                }
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let f1 = if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                };
                ClassScore {
                    class,
                    support,
                    precision,
                    recall,
                    f1,
                }
            })
            .collect();
        let mean = |f: fn(&ClassScore) -> f64| per_class.iter().map(f).sum::<f64>() / 3.0;
        ClassificationScores {
            micro_f1: ratio(self.trace(), self.total()),
            macro_f1: mean(|c| c.f1),
            macro_recall: mean(|c| c.recall),
            macro_precision: mean(|c| c.precision),
            per_class,
        }
    }
}

/// Confusion matrix and scores for paired true/predicted labels.
pub fn confusion_and_scores(
    truth: &[EfClass],
    predicted: &[EfClass],
) -> Result<(ConfusionMatrix, ClassificationScores), MetricsError> {
    if truth.is_empty() && predicted.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let cm = ConfusionMatrix::from_labels(truth, predicted)?;
    let scores = cm.scores();
    Ok((cm, scores))
}

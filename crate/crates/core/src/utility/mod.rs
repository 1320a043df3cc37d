//! Downstream utility: a bag-of-words softmax regression predicts ratings
//! from review text. Training on synthetic rows and testing on held-out real
//! rows (TSTR) is compared with training on real rows (TRTR) over the same
//! test split.

mod logreg;
mod vocab;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{parse_number, split_rows, Column, ColumnKind, DatasetError, Table};

pub use logreg::{predict_rating, train_logreg, LogRegHyper, LogRegModel, Objective};
pub use vocab::{fit_vocabulary, vectorize, SparseVector, Vocabulary};

#[derive(Debug, Error)]
pub enum UtilityError {
    #[error("empty input")]
    EmptyInput,
    #[error("no token reaches the minimum document frequency")]
    EmptyVocabulary,
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("column {0:?} not found")]
    UnknownColumn(String),
    #[error("column {column:?} has kind {kind}, expected {expected}")]
    WrongKind {
        column: String,
        kind: ColumnKind,
        expected: &'static str,
    },
    #[error("column {column:?}: rating {value:?} is not numeric")]
    NonNumericRating { column: String, value: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Fraction of predictions within `tolerance` of the actual rating.
pub fn tolerance_accuracy(pred: &[f64], actual: &[f64], tolerance: f64) -> Result<f64, UtilityError> {
    check_lengths(pred, actual)?;
    let hits = pred
        .iter()
        .zip(actual)
        .filter(|(p, a)| (*p - *a).abs() <= tolerance)
        .count();
    Ok(hits as f64 / pred.len() as f64)
}

pub fn mae(pred: &[f64], actual: &[f64]) -> Result<f64, UtilityError> {
    check_lengths(pred, actual)?;
    Ok(pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum::<f64>() / pred.len() as f64)
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<(), UtilityError> {
    if a.len() != b.len() {
        return Err(UtilityError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(UtilityError::EmptyInput);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UtilityMode {
    #[serde(rename = "TSTR")]
    Tstr,
    #[serde(rename = "TRTR")]
    Trtr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityConfig {
    pub text_col: String,
    pub rating_col: String,
    pub tolerance: f64,
    pub hyper: LogRegHyper,
    pub min_df: usize,
    pub max_features: usize,
    /// Share of the real table held out as the untouched test set.
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        UtilityConfig {
            text_col: "text".into(),
            rating_col: "rating".into(),
            tolerance: 1.0,
            hyper: LogRegHyper::default(),
            min_df: 1,
            max_features: 5000,
            holdout_fraction: 0.3,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub mode: UtilityMode,
    pub accuracy: f64,
    pub mae: f64,
    pub tolerance: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub vocabulary_size: usize,
    pub classes: Vec<f64>,
}

/// (text, rating) pairs of a table; rows where either is null are dropped.
pub fn review_pairs<'a>(
    table: &'a Table,
    text_col: &str,
    rating_col: &str,
) -> Result<(Vec<&'a str>, Vec<f64>), UtilityError> {
    let text = table
        .column(text_col)
        .ok_or_else(|| UtilityError::UnknownColumn(text_col.to_string()))?;
    if text.kind() != ColumnKind::Text {
        return Err(UtilityError::WrongKind {
            column: text_col.to_string(),
            kind: text.kind(),
            expected: "text",
        });
    }
    let rating = table
        .column(rating_col)
        .ok_or_else(|| UtilityError::UnknownColumn(rating_col.to_string()))?;
    let ratings: Vec<Option<f64>> = match (rating.kind(), rating.data) {
        (ColumnKind::Continuous, Column::Numbers(v)) => v.clone(),
        (ColumnKind::Discrete, Column::Strings(v)) => v
            .iter()
            .map(|s| match s {
                None => Ok(None),
                Some(s) => parse_number(s).map(Some).ok_or_else(|| UtilityError::NonNumericRating {
                    column: rating_col.to_string(),
                    value: s.clone(),
                }),
            })
            .collect::<Result<_, _>>()?,
        (kind, _) => {
            return Err(UtilityError::WrongKind {
                column: rating_col.to_string(),
                kind,
                expected: "continuous or discrete",
            })
        }
    };
    let Column::Strings(texts) = text.data else {
        unreachable!("text columns store strings")
    };
    Ok(texts
        .iter()
        .zip(ratings)
        .filter_map(|(t, r)| Some((t.as_deref()?, r?)))
        .unzip())
}

/// Fits vocabulary and model on `train`, scores predictions on `test_real`.
pub fn tstr_evaluate(
    train: &Table,
    test_real: &Table,
    config: &UtilityConfig,
    mode: UtilityMode,
) -> Result<UtilityReport, UtilityError> {
    let (train_texts, train_y) = review_pairs(train, &config.text_col, &config.rating_col)?;
    let (test_texts, test_y) = review_pairs(test_real, &config.text_col, &config.rating_col)?;
    if test_texts.is_empty() {
        return Err(UtilityError::EmptyInput);
    }
    let vocab = fit_vocabulary(&train_texts, config.min_df, config.max_features)?;
    let train_x: Vec<SparseVector> = train_texts.iter().map(|t| vectorize(t, &vocab)).collect();
    let model = train_logreg(&train_x, &train_y, config.hyper, config.seed)?;
    let pred = test_texts
        .iter()
        .map(|t| model.predict(&vectorize(t, &vocab)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(UtilityReport {
        mode,
        accuracy: tolerance_accuracy(&pred, &test_y, config.tolerance)?,
        mae: mae(&pred, &test_y)?,
        tolerance: config.tolerance,
        n_train: train_texts.len(),
        n_test: test_texts.len(),
        vocabulary_size: vocab.len(),
        classes: model.classes.clone(),
    })
}

/// TSTR and TRTR runs sharing one held-out real test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilitySection {
    pub holdout_fraction: f64,
    pub n_holdout: usize,
    pub runs: Vec<UtilityReport>,
    /// TRTR accuracy minus TSTR accuracy.
    pub accuracy_gap: Option<f64>,
    /// TSTR MAE minus TRTR MAE.
    pub mae_gap: Option<f64>,
}

impl UtilitySection {
    pub fn run(&self, mode: UtilityMode) -> Option<&UtilityReport> {
        self.runs.iter().find(|r| r.mode == mode)
    }
}

/// Holds out `holdout_fraction` of `real` as the test set, then trains on
/// the synthetic table (TSTR) and on the remaining real rows (TRTR).
pub fn evaluate_utility(
    real: &Table,
    synthetic: Option<&Table>,
    config: &UtilityConfig,
) -> Result<UtilitySection, UtilityError> {
    let (test, real_train) = split_rows(real, config.holdout_fraction, config.seed)?;
    let mut runs = Vec::new();
    if let Some(syn) = synthetic {
        runs.push(tstr_evaluate(syn, &test, config, UtilityMode::Tstr)?);
    }
    runs.push(tstr_evaluate(&real_train, &test, config, UtilityMode::Trtr)?);
    let tstr = runs.iter().find(|r| r.mode == UtilityMode::Tstr);
    let trtr = runs.iter().find(|r| r.mode == UtilityMode::Trtr);
    let (accuracy_gap, mae_gap) = match (tstr, trtr) {
        (Some(s), Some(r)) => (Some(r.accuracy - s.accuracy), Some(s.mae - r.mae)),
        _ => (None, None),
    };
    Ok(UtilitySection {
        holdout_fraction: config.holdout_fraction,
        n_holdout: test.row_count(),
        runs,
        accuracy_gap,
        mae_gap,
    })
}

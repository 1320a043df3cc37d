//! Membership inference: a random forest learns to tell real training
//! members (label 1) from synthetic rows (label 0), and is then asked to
//! label held-out real non-members against the other half of the
//! synthetic rows. A success rate near 0.5 means the synthetic data leaks
//! little about which real rows it was fitted on.

mod encode;
mod forest;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{partition_indices, Schema, Table};

pub use encode::{
    build_feature_matrix, fit_label_encoder, ColumnTransformer, Feature, FeatureKind, LabelEncoder, TransformOptions,
    UNSEEN_CODE,
};
pub use forest::{
    forest_predict, midpoint, train_forest, weighted_gini, DecisionTree, FeatureSubsample, ForestModel, ForestParams,
    Node, MIN_IMPURITY_DECREASE,
};

pub const MEMBER: usize = 1;
pub const SYNTHETIC: usize = 0;

#[derive(Debug, Error)]
pub enum PrivacyError {
    #[error("{0} table is empty")]
    EmptyTable(&'static str),
    #[error("no column is shared by members, non-members and synthetic rows")]
    NoSharedColumns,
    #[error("no usable feature columns")]
    NoFeatures,
    #[error("column {0:?} not found")]
    UnknownColumn(String),
    #[error("cannot fit transformer: {0}")]
    FitError(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("need at least 2 training rows, got {0}")]
    TooFewRows(usize),
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSource {
    Member,
    NonMember,
    Synthetic,
}

/// Where a feature row came from: source table and row index in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowOrigin {
    pub source: RowSource,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiaSplit {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub origins: Vec<RowOrigin>,
}

impl MiaSplit {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct MiaDatasets {
    pub train: MiaSplit,
    pub test: MiaSplit,
    pub transformer: ColumnTransformer,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MiaConfig {
    pub forest: ForestParams,
    pub transform: TransformOptions,
}

fn shared_schema(members: &Table, others: &[&Table]) -> Result<Schema, PrivacyError> {
    let specs: Vec<_> = members
        .schema()
        .columns()
        .iter()
        .filter(|s| others.iter().all(|t| t.column(&s.name).is_some()))
        .cloned()
        .collect();
    if specs.is_empty() {
        return Err(PrivacyError::NoSharedColumns);
    }
    Ok(Schema::new(specs).expect("subset of a valid schema"))
}

fn labelled(
    transformer: &ColumnTransformer,
    parts: &[(&Table, RowSource, usize, Option<&[usize]>)],
) -> Result<MiaSplit, PrivacyError> {
    let mut split = MiaSplit {
        features: Vec::new(),
        labels: Vec::new(),
        origins: Vec::new(),
    };
    for &(table, source, label, rows) in parts {
        split.features.extend(transformer.transform(table)?);
        let n = table.row_count();
        split.labels.extend(std::iter::repeat_n(label, n));
        let idx: Vec<usize> = rows.map_or_else(|| (0..n).collect(), <[usize]>::to_vec);
        split.origins.extend(idx.into_iter().map(|row| RowOrigin { source, row }));
    }
    Ok(split)
}

/// Train set: members (1) and half the synthetic rows (0). Test set:
/// non-members (1) and the other synthetic half (0). Features use the member
/// schema restricted to columns present in all three tables, fitted on the
/// training rows.
pub fn assemble_mia(
    members: &Table,
    nonmembers: &Table,
    synthetic: &Table,
    options: &TransformOptions,
    seed: u64,
) -> Result<MiaDatasets, PrivacyError> {
    for (t, name) in [(members, "members"), (nonmembers, "non-members"), (synthetic, "synthetic")] {
        if t.row_count() == 0 {
            return Err(PrivacyError::EmptyTable(name));
        }
    }
    let schema = shared_schema(members, &[nonmembers, synthetic])?;
    let mut warnings = Vec::new();
    for spec in members.schema().columns() {
        if schema.index_of(&spec.name).is_none() {
            warnings.push(format!("column {:?} is not shared by all tables and was left out", spec.name));
        }
    }
    let (syn_train_idx, syn_test_idx) = partition_indices(synthetic.row_count(), 0.5, seed);
    let syn_train = synthetic.take_rows(&syn_train_idx);
    let syn_test = synthetic.take_rows(&syn_test_idx);
    if syn_test.row_count() == 0 {
        warnings.push("synthetic table too small to split; test set has no synthetic rows".into());
    }
    let transformer = ColumnTransformer::fit(&schema, &[members, &syn_train], options)?;
    let train = labelled(
        &transformer,
        &[
            (members, RowSource::Member, MEMBER, None),
            (&syn_train, RowSource::Synthetic, SYNTHETIC, Some(&syn_train_idx)),
        ],
    )?;
    let test = labelled(
        &transformer,
        &[
            (nonmembers, RowSource::NonMember, MEMBER, None),
            (&syn_test, RowSource::Synthetic, SYNTHETIC, Some(&syn_test_idx)),
        ],
    )?;
    Ok(MiaDatasets {
        train,
        test,
        transformer,
        warnings,
    })
}

/// Counts with "real" (label 1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(pred: &[usize], actual: &[usize]) -> Self {
        let mut c = Confusion::default();
        for (&p, &a) in pred.iter().zip(actual) {
            match (p == MEMBER, a == MEMBER) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    /// Test-set accuracy of the attacker.
    pub success_rate: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: Confusion,
    pub features: Vec<String>,
    pub forest: ForestParams,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn mia_success_rate(
    members: &Table,
    nonmembers: &Table,
    synthetic: &Table,
    config: &MiaConfig,
    seed: u64,
) -> Result<PrivacyReport, PrivacyError> {
    let data = assemble_mia(members, nonmembers, synthetic, &config.transform, seed)?;
    let model = train_forest(&data.train.features, &data.train.labels, &config.forest, seed)?;
    let pred = data
        .test
        .features
        .iter()
        .map(|r| forest_predict(&model, r))
        .collect::<Result<Vec<_>, _>>()?;
    let confusion = Confusion::from_predictions(&pred, &data.test.labels);
    Ok(PrivacyReport {
        success_rate: confusion.accuracy(),
        n_train: data.train.len(),
        n_test: data.test.len(),
        confusion,
        features: data.transformer.feature_names(),
        forest: config.forest,
        seed,
        warnings: data.warnings,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::dataset::{ColumnKind, ColumnSpec};

    fn table(prefix: &str, n: usize, extra: bool) -> Table {
        let mut specs = vec![
            ColumnSpec::new("id", ColumnKind::Identifier),
            ColumnSpec::new("v", ColumnKind::Continuous),
        ];
        if extra {
            specs.push(ColumnSpec::new("only_here", ColumnKind::Continuous));
        }
        let rows: Vec<Vec<Option<String>>> = (0..n)
            .map(|i| {
                let mut r = vec![Some(format!("{prefix}{i}")), Some(format!("{}", i % 7))];
                if extra {
                    r.push(Some("1".into()));
                }
                r
            })
            .collect();
        Table::from_cells(Schema::new(specs).unwrap(), &rows).unwrap()
    }

    #[test]
    fn splits_are_labelled_and_disjoint() {
        let m = table("m", 10, true);
        let nm = table("n", 8, false);
        let s = table("s", 11, false);
        let d = assemble_mia(&m, &nm, &s, &TransformOptions::default(), 5).unwrap();
        assert_eq!(d.train.len() + d.test.len(), 29);
        assert_eq!(d.train.labels.iter().filter(|&&l| l == MEMBER).count(), 10);
        assert_eq!(d.test.labels.iter().filter(|&&l| l == MEMBER).count(), 8);
        let train: HashSet<_> = d.train.origins.iter().collect();
        assert!(d.test.origins.iter().all(|o| !train.contains(o)));
        assert_eq!(d.transformer.feature_names(), vec!["id", "v"]);
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn empty_and_disjoint_inputs_are_rejected() {
        let m = table("m", 4, false);
        let empty = table("x", 0, false);
        assert!(matches!(
            assemble_mia(&m, &empty, &m, &TransformOptions::default(), 0),
            Err(PrivacyError::EmptyTable("non-members"))
        ));
        let other = Table::from_cells(
            Schema::new(vec![ColumnSpec::new("z", ColumnKind::Continuous)]).unwrap(),
            &[vec![Some("1".into())]],
        )
        .unwrap();
        assert!(matches!(
            assemble_mia(&m, &m, &other, &TransformOptions::default(), 0),
            Err(PrivacyError::NoSharedColumns)
        ));
    }

    #[test]
    fn confusion_counts() {
        let c = Confusion::from_predictions(&[1, 1, 0, 0, 1], &[1, 0, 0, 1, 1]);
        assert_eq!(c, Confusion { tp: 2, fp: 1, tn: 1, fn_: 1 });
        assert!((c.accuracy() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn single_synthetic_row_warns() {
        let m = table("m", 4, false);
        let s = table("s", 1, false);
        let d = assemble_mia(&m, &m, &s, &TransformOptions::default(), 0).unwrap();
        assert!(d.test.labels.iter().all(|&l| l == MEMBER));
        assert!(!d.warnings.is_empty());
    }
}

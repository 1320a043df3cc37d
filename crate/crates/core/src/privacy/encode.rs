use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::dataset::{parse_number, Column, ColumnKind, Schema, Table};
use crate::textfid::tokenize;

use super::PrivacyError;

/// Per-column category codes in first-seen order, starting at 1. Code 0 is
/// reserved for categories (and nulls) not seen at fit time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelEncoder {
    columns: IndexMap<String, IndexMap<String, u32>>,
}

pub const UNSEEN_CODE: u32 = 0;

impl LabelEncoder {
    /// Fits the named columns over the tables, visited in order.
    pub fn fit(tables: &[&Table], columns: &[&str]) -> Result<Self, PrivacyError> {
        let mut out = IndexMap::new();
        for &name in columns {
            let mut codes: IndexMap<String, u32> = IndexMap::new();
            for t in tables {
                let col = t
                    .column(name)
                    .ok_or_else(|| PrivacyError::UnknownColumn(name.to_string()))?;
                for r in 0..t.row_count() {
                    if let Some(v) = col.data.cell_text(r) {
                        let next = codes.len() as u32 + 1;
                        codes.entry(v).or_insert(next);
                    }
                }
            }
            out.insert(name.to_string(), codes);
        }
        Ok(LabelEncoder { columns: out })
    }

    pub fn encode(&self, column: &str, value: Option<&str>) -> u32 {
        value
            .and_then(|v| self.columns.get(column)?.get(v).copied())
            .unwrap_or(UNSEEN_CODE)
    }

    pub fn decode(&self, column: &str, code: u32) -> Option<&str> {
        if code == UNSEEN_CODE {
            return None;
        }
        self.columns
            .get(column)?
            .get_index(code as usize - 1)
            .map(|(k, _)| k.as_str())
    }

    pub fn n_categories(&self, column: &str) -> Option<usize> {
        self.columns.get(column).map(IndexMap::len)
    }

    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }
}

pub fn fit_label_encoder(table: &Table, id_columns: &[&str]) -> Result<LabelEncoder, PrivacyError> {
    LabelEncoder::fit(&[table], id_columns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    /// Passed through; nulls replaced by the fitted median.
    Numeric { median: f64 },
    /// Label-encoded category.
    Code,
    /// Token count of a text cell.
    TokenCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub column: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

/// Turns table rows into numeric feature rows, one feature per column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnTransformer {
    features: Vec<Feature>,
    encoder: LabelEncoder,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformOptions {
    /// Leave text columns out instead of reducing them to token counts.
    pub drop_text: bool,
    /// Extra columns to label-encode regardless of their schema kind.
    pub id_columns: Vec<String>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

fn numbers_of(col: &Column) -> Vec<Option<f64>> {
    match col {
        Column::Numbers(v) => v.clone(),
        Column::Strings(v) => v.iter().map(|s| s.as_deref().and_then(parse_number)).collect(),
    }
}

impl ColumnTransformer {
    /// Feature order follows `schema`. Medians and category codes come from
    /// `fit_tables` only.
    pub fn fit(schema: &Schema, fit_tables: &[&Table], options: &TransformOptions) -> Result<Self, PrivacyError> {
        let mut features = Vec::new();
        let mut code_columns = Vec::new();
        for spec in schema.columns() {
            let forced_code = options.id_columns.iter().any(|c| c == &spec.name);
            let kind = if forced_code || spec.kind.is_categorical() {
                code_columns.push(spec.name.as_str());
                FeatureKind::Code
            } else if spec.kind == ColumnKind::Text {
                if options.drop_text {
                    continue;
                }
                FeatureKind::TokenCount
            } else {
                let mut values = Vec::new();
                for t in fit_tables {
                    let col = t
                        .column(&spec.name)
                        .ok_or_else(|| PrivacyError::UnknownColumn(spec.name.clone()))?;
                    values.extend(numbers_of(col.data).into_iter().flatten());
                }
                let median = median(values).ok_or_else(|| {
                    PrivacyError::FitError(format!("column {:?} has no non-null values to take a median of", spec.name))
                })?;
                FeatureKind::Numeric { median }
            };
            features.push(Feature {
                column: spec.name.clone(),
                kind,
            });
        }
        if features.is_empty() {
            return Err(PrivacyError::NoFeatures);
        }
        let encoder = LabelEncoder::fit(fit_tables, &code_columns)?;
        Ok(ColumnTransformer { features, encoder })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn encoder(&self) -> &LabelEncoder {
        &self.encoder
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.column.clone()).collect()
    }

    pub fn transform(&self, table: &Table) -> Result<Vec<Vec<f64>>, PrivacyError> {
        let mut rows = vec![Vec::with_capacity(self.features.len()); table.row_count()];
        for feat in &self.features {
            let col = table.column(&feat.column).ok_or_else(|| {
                PrivacyError::SchemaMismatch(format!("column {:?} missing from table", feat.column))
            })?;
            match &feat.kind {
                FeatureKind::Numeric { median } => {
                    for (row, v) in rows.iter_mut().zip(numbers_of(col.data)) {
                        row.push(v.unwrap_or(*median));
                    }
                }
                FeatureKind::Code => {
                    for (r, row) in rows.iter_mut().enumerate() {
                        let cell = col.data.cell_text(r);
                        row.push(self.encoder.encode(&feat.column, cell.as_deref()) as f64);
                    }
                }
                FeatureKind::TokenCount => {
                    for (r, row) in rows.iter_mut().enumerate() {
                        let n = col.data.cell_text(r).map_or(0, |s| tokenize(&s).len());
                        row.push(n as f64);
                    }
                }
            }
        }
        Ok(rows)
    }
}

pub fn build_feature_matrix(table: &Table, transformer: &ColumnTransformer) -> Result<Vec<Vec<f64>>, PrivacyError> {
    transformer.transform(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnSpec;

    fn table(specs: Vec<ColumnSpec>, rows: &[&[&str]]) -> Table {
        let schema = Schema::new(specs).unwrap();
        let rows: Vec<Vec<Option<String>>> = rows
            .iter()
            .map(|r| r.iter().map(|s| Some(s.to_string()).filter(|s| !s.is_empty())).collect())
            .collect();
        Table::from_cells(schema, &rows).unwrap()
    }

    #[test]
    fn first_seen_codes_and_unseen() {
        let t = table(vec![ColumnSpec::new("c", ColumnKind::Identifier)], &[&["B"], &["A"], &["B"]]);
        let enc = fit_label_encoder(&t, &["c"]).unwrap();
        assert_eq!(enc.encode("c", Some("B")), 1);
        assert_eq!(enc.encode("c", Some("A")), 2);
        assert_eq!(enc.encode("c", Some("C")), 0);
        assert_eq!(enc.encode("c", None), 0);
        assert_eq!(enc.decode("c", 2), Some("A"));
        assert_eq!(enc.decode("c", 0), None);
    }

    #[test]
    fn columns_encode_independently() {
        let t = table(
            vec![
                ColumnSpec::new("x", ColumnKind::Identifier),
                ColumnSpec::new("y", ColumnKind::Identifier),
            ],
            &[&["p", "q"], &["q", "p"]],
        );
        let enc = fit_label_encoder(&t, &["x", "y"]).unwrap();
        assert_eq!(enc.encode("x", Some("p")), 1);
        assert_eq!(enc.encode("y", Some("q")), 1);
        assert_eq!(enc.encode("y", Some("p")), 2);
        assert!(matches!(fit_label_encoder(&t, &["z"]), Err(PrivacyError::UnknownColumn(_))));
    }

    #[test]
    fn feature_row_example() {
        let specs = vec![
            ColumnSpec::new("rating", ColumnKind::Continuous),
            ColumnSpec::new("user", ColumnKind::Identifier),
            ColumnSpec::new("text", ColumnKind::Text),
        ];
        let fit = table(specs.clone(), &[&["3", "Z", "x"], &["4", "A", "y"], &["5", "B", "z"]]);
        let tf = ColumnTransformer::fit(fit.schema(), &[&fit], &TransformOptions::default()).unwrap();
        let t = table(specs, &[&["5", "A", "a b"], &["", "Q", ""]]);
        let rows = build_feature_matrix(&t, &tf).unwrap();
        assert_eq!(rows[0], vec![5.0, 2.0, 2.0]);
        assert_eq!(rows[1], vec![4.0, 0.0, 0.0]);
    }

    #[test]
    fn all_null_numeric_column_cannot_be_fitted() {
        let specs = vec![ColumnSpec::new("v", ColumnKind::Continuous)];
        let fit = table(specs, &[&[""], &[""]]);
        assert!(matches!(
            ColumnTransformer::fit(fit.schema(), &[&fit], &TransformOptions::default()),
            Err(PrivacyError::FitError(_))
        ));
    }

    #[test]
    fn drop_text_and_forced_codes() {
        let specs = vec![
            ColumnSpec::new("n", ColumnKind::Continuous),
            ColumnSpec::new("text", ColumnKind::Text),
        ];
        let fit = table(specs, &[&["10", "a"], &["20", "b"]]);
        let opts = TransformOptions {
            drop_text: true,
            id_columns: vec!["n".into()],
        };
        let tf = ColumnTransformer::fit(fit.schema(), &[&fit], &opts).unwrap();
        assert_eq!(tf.feature_names(), vec!["n".to_string()]);
        assert_eq!(tf.transform(&fit).unwrap(), vec![vec![1.0], vec![2.0]]);
    }

    #[test]
    fn transform_requires_fitted_columns() {
        let specs = vec![ColumnSpec::new("n", ColumnKind::Continuous)];
        let fit = table(specs, &[&["1"]]);
        let tf = ColumnTransformer::fit(fit.schema(), &[&fit], &TransformOptions::default()).unwrap();
        let other = table(vec![ColumnSpec::new("m", ColumnKind::Continuous)], &[&["1"]]);
        assert!(matches!(tf.transform(&other), Err(PrivacyError::SchemaMismatch(_))));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }
}

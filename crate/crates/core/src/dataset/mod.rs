//! Tabular data model shared by every metric module.
//!
//! A [`Table`] is column-ordered: each column stores its values as either
//! parsed numbers (continuous columns) or strings (discrete, identifier and
//! text columns). Empty CSV cells and JSON nulls load as `None`; every metric
//! excludes nulls from the column it is computing unless it says otherwise.

mod io;
mod schema;

use std::collections::HashSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use io::{infer_schema, infer_schema_from_cells, load_table, load_table_partial, write_table};
pub use schema::{ColumnKind, ColumnSpec, Schema};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("column {column:?} row {row}: {value:?} is not a valid {kind} value")]
    KindViolation {
        column: String,
        row: usize,
        value: String,
        kind: ColumnKind,
    },
    #[error("column {column:?} row {row}: null in a non-nullable column")]
    NullViolation { column: String, row: usize },
    #[error("table needs at least 2 rows, has {0}")]
    EmptyTable(usize),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("split fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("unsupported input format for {0} (expected .csv or .jsonl)")]
    UnsupportedFormat(PathBuf),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
}

/// Values of one column, row-aligned with the owning table.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numbers(Vec<Option<f64>>),
    Strings(Vec<Option<String>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numbers(v) => v.len(),
            Column::Strings(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn null_count(&self) -> usize {
        match self {
            Column::Numbers(v) => v.iter().filter(|x| x.is_none()).count(),
            Column::Strings(v) => v.iter().filter(|x| x.is_none()).count(),
        }
    }

    /// Non-null numeric values; empty for string columns.
    pub fn numbers(&self) -> Vec<f64> {
        match self {
            Column::Numbers(v) => v.iter().flatten().copied().collect(),
            Column::Strings(_) => Vec::new(),
        }
    }

    /// Non-null string values; empty for numeric columns.
    pub fn strings(&self) -> Vec<&str> {
        match self {
            Column::Numbers(_) => Vec::new(),
            Column::Strings(v) => v.iter().flatten().map(String::as_str).collect(),
        }
    }

    /// Canonical textual form of a cell, as written to CSV.
    pub fn cell_text(&self, row: usize) -> Option<String> {
        match self {
            Column::Numbers(v) => v[row].map(format_number),
            Column::Strings(v) => v[row].clone(),
        }
    }

    fn take(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numbers(v) => Column::Numbers(rows.iter().map(|&r| v[r]).collect()),
            Column::Strings(v) => Column::Strings(rows.iter().map(|&r| v[r].clone()).collect()),
        }
    }

    fn key(&self, row: usize) -> CellKey<'_> {
        match self {
            Column::Numbers(v) => match v[row] {
                None => CellKey::Null,
                // -0.0 and 0.0 compare equal, so they must hash equal too.
                Some(0.0) => CellKey::Number(0),
                Some(x) => CellKey::Number(x.to_bits()),
            },
            Column::Strings(v) => match &v[row] {
                None => CellKey::Null,
                Some(s) => CellKey::Str(s),
            },
        }
    }
}

pub(crate) fn format_number(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum CellKey<'a> {
    Null,
    Number(u64),
    Str(&'a str),
}

/// A borrowed view of one column together with its specification.
#[derive(Debug, Clone, Copy)]
pub struct ColumnRef<'a> {
    pub spec: &'a ColumnSpec,
    pub data: &'a Column,
}

impl ColumnRef<'_> {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn kind(&self) -> ColumnKind {
        self.spec.kind
    }
}

/// Immutable, column-ordered dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Schema,
    columns: Vec<Column>,
    row_count: usize,
}

impl Table {
    /// Builds a table from already-typed columns, checking lengths, storage
    /// types and nullability against the schema.
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self, DatasetError> {
        if schema.len() != columns.len() {
            return Err(DatasetError::SchemaMismatch(format!(
                "schema has {} columns, got {}",
                schema.len(),
                columns.len()
            )));
        }
        let row_count = columns.first().map_or(0, Column::len);
        for (spec, col) in schema.columns().iter().zip(&columns) {
            if col.len() != row_count {
                return Err(DatasetError::SchemaMismatch(format!(
                    "column {:?} has {} rows, expected {row_count}",
                    spec.name,
                    col.len()
                )));
            }
            let numeric = matches!(col, Column::Numbers(_));
            if numeric != (spec.kind == ColumnKind::Continuous) {
                return Err(DatasetError::SchemaMismatch(format!(
                    "column {:?} storage does not match kind {}",
                    spec.name, spec.kind
                )));
            }
            if let Column::Numbers(v) = col {
                if let Some(row) = v.iter().position(|x| x.is_some_and(|x| !x.is_finite())) {
                    return Err(DatasetError::KindViolation {
                        column: spec.name.clone(),
                        row: row + 1,
                        value: format!("{}", v[row].unwrap()),
                        kind: spec.kind,
                    });
                }
            }
            if !spec.nullable {
                let null_row = match col {
                    Column::Numbers(v) => v.iter().position(Option::is_none),
                    Column::Strings(v) => v.iter().position(Option::is_none),
                };
                if let Some(row) = null_row {
                    return Err(DatasetError::NullViolation {
                        column: spec.name.clone(),
                        row: row + 1,
                    });
                }
            }
        }
        Ok(Table {
            schema,
            columns,
            row_count,
        })
    }

    /// Parses raw string cells (row-major, `None` for missing) per column kind.
    /// Row numbers in errors are 1-based data rows.
    pub fn from_cells(schema: Schema, rows: &[Vec<Option<String>>]) -> Result<Self, DatasetError> {
        let mut columns: Vec<Column> = schema
            .columns()
            .iter()
            .map(|spec| match spec.kind {
                ColumnKind::Continuous => Column::Numbers(Vec::with_capacity(rows.len())),
                _ => Column::Strings(Vec::with_capacity(rows.len())),
            })
            .collect();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(DatasetError::Parse {
                    row: r + 1,
                    message: format!("expected {} fields, found {}", schema.len(), row.len()),
                });
            }
            for ((spec, col), cell) in schema.columns().iter().zip(&mut columns).zip(row) {
                let cell = cell.as_deref().filter(|s| !s.is_empty());
                match col {
                    Column::Numbers(v) => v.push(match cell {
                        None => None,
                        Some(s) => Some(parse_number(s).ok_or_else(|| {
                            DatasetError::KindViolation {
                                column: spec.name.clone(),
                                row: r + 1,
                                value: s.to_string(),
                                kind: spec.kind,
                            }
                        })?),
                    }),
                    Column::Strings(v) => v.push(cell.map(str::to_string)),
                }
            }
        }
        if rows.is_empty() {
            return Ok(Table {
                schema,
                columns,
                row_count: 0,
            });
        }
        Table::new(schema, columns)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column(&self, name: &str) -> Option<ColumnRef<'_>> {
        let idx = self.schema.index_of(name)?;
        Some(ColumnRef {
            spec: &self.schema.columns()[idx],
            data: &self.columns[idx],
        })
    }

    pub fn iter_columns(&self) -> impl Iterator<Item = ColumnRef<'_>> {
        self.schema
            .columns()
            .iter()
            .zip(&self.columns)
            .map(|(spec, data)| ColumnRef { spec, data })
    }

    /// New table holding the given rows, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Table {
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            row_count: rows.len(),
        }
    }

    /// Row `row` rendered as canonical cell strings.
    pub fn row_cells(&self, row: usize) -> Vec<Option<String>> {
        self.columns.iter().map(|c| c.cell_text(row)).collect()
    }
}

pub(crate) fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Shuffles `0..n` with `seed` and cuts off the first `round(fraction * n)`
/// indices (half rounds up). No size precondition.
pub fn partition_indices(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let cut = ((fraction * n as f64) + 0.5).floor().clamp(0.0, n as f64) as usize;
    let rest = idx.split_off(cut);
    (idx, rest)
}

/// Seeded random partition of the rows into two disjoint tables whose union is `table`.
pub fn split_rows(table: &Table, fraction: f64, seed: u64) -> Result<(Table, Table), DatasetError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(fraction));
    }
    if table.row_count() < 2 {
        return Err(DatasetError::EmptyTable(table.row_count()));
    }
    let (first, second) = partition_indices(table.row_count(), fraction, seed);
    Ok((table.take_rows(&first), table.take_rows(&second)))
}

/// Drops rows whose key tuple was already seen, keeping first occurrences in
/// order. An empty key list keys on every column.
pub fn dedup_rows(table: &Table, key_columns: &[&str]) -> Result<Table, DatasetError> {
    let key_idx: Vec<usize> = if key_columns.is_empty() {
        (0..table.schema().len()).collect()
    } else {
        key_columns
            .iter()
            .map(|name| {
                table
                    .schema()
                    .index_of(name)
                    .ok_or_else(|| DatasetError::UnknownColumn(name.to_string()))
            })
            .collect::<Result<_, _>>()?
    };
    let mut seen = HashSet::new();
    let keep: Vec<usize> = (0..table.row_count())
        .filter(|&r| {
            let key: Vec<CellKey<'_>> = key_idx.iter().map(|&c| table.columns[c].key(r)).collect();
            seen.insert(key)
        })
        .collect();
    Ok(table.take_rows(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(rows: &[&[&str]]) -> Vec<Vec<Option<String>>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|s| if s.is_empty() { None } else { Some(s.to_string()) })
                    .collect()
            })
            .collect()
    }

    fn sample(n: usize) -> Table {
        let schema = Schema::new(vec![
            ColumnSpec::new("id", ColumnKind::Continuous),
            ColumnSpec::new("tag", ColumnKind::Discrete),
        ])
        .unwrap();
        let rows: Vec<Vec<Option<String>>> = (0..n)
            .map(|i| vec![Some(i.to_string()), Some(format!("t{}", i % 3))])
            .collect();
        Table::from_cells(schema, &rows).unwrap()
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let t = sample(10);
        let (a, b) = split_rows(&t, 0.5, 42).unwrap();
        assert_eq!((a.row_count(), b.row_count()), (5, 5));
        let ids = |t: &Table| t.column("id").unwrap().data.numbers();
        let mut all: Vec<f64> = ids(&a).into_iter().chain(ids(&b)).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic() {
        let t = sample(10);
        assert_eq!(split_rows(&t, 0.5, 42).unwrap(), split_rows(&t, 0.5, 42).unwrap());
        assert_ne!(split_rows(&t, 0.5, 42).unwrap(), split_rows(&t, 0.5, 43).unwrap());
    }

    #[test]
    fn split_rounds_half_up() {
        let (a, b) = split_rows(&sample(3), 0.5, 1).unwrap();
        assert_eq!((a.row_count(), b.row_count()), (2, 1));
    }

    #[test]
    fn split_rejects_tiny_tables_and_bad_fractions() {
        assert!(matches!(split_rows(&sample(1), 0.5, 0), Err(DatasetError::EmptyTable(1))));
        assert!(matches!(split_rows(&sample(4), 1.0, 0), Err(DatasetError::InvalidFraction(_))));
        assert!(matches!(split_rows(&sample(4), 0.0, 0), Err(DatasetError::InvalidFraction(_))));
    }

    #[test]
    fn dedup_keeps_first_occurrence() {
        let schema = Schema::new(vec![
            ColumnSpec::new("title", ColumnKind::Text),
            ColumnSpec::new("n", ColumnKind::Continuous),
        ])
        .unwrap();
        let t = Table::from_cells(schema, &cells(&[&["A", "1"], &["B", "2"], &["A", "3"]])).unwrap();
        let d = dedup_rows(&t, &["title"]).unwrap();
        assert_eq!(d.row_count(), 2);
        assert_eq!(d.column("n").unwrap().data.numbers(), vec![1.0, 2.0]);
    }

    #[test]
    fn dedup_identity_on_unique_rows() {
        let t = sample(6);
        assert_eq!(dedup_rows(&t, &["id"]).unwrap(), t);
    }

    #[test]
    fn dedup_unknown_column() {
        assert!(matches!(
            dedup_rows(&sample(3), &["nope"]),
            Err(DatasetError::UnknownColumn(c)) if c == "nope"
        ));
    }

    #[test]
    fn dedup_two_key_columns_matches_pairwise_scan() {
        // tag cycles with period 3 and k with period 2, so (tag, k) repeats every 6 rows
        let schema = Schema::new(vec![
            ColumnSpec::new("tag", ColumnKind::Discrete),
            ColumnSpec::new("k", ColumnKind::Continuous),
            ColumnSpec::new("payload", ColumnKind::Continuous),
        ])
        .unwrap();
        let rows: Vec<Vec<Option<String>>> = (0..20)
            .map(|i| {
                vec![
                    Some(format!("t{}", i % 3)),
                    Some((i % 2).to_string()),
                    Some(i.to_string()),
                ]
            })
            .collect();
        let t = Table::from_cells(schema, &rows).unwrap();
        let d = dedup_rows(&t, &["tag", "k"]).unwrap();

        let expected: Vec<f64> = (0..rows.len())
            .filter(|&i| !(0..i).any(|j| rows[j][0] == rows[i][0] && rows[j][1] == rows[i][1]))
            .map(|i| i as f64)
            .collect();
        assert_eq!(d.column("payload").unwrap().data.numbers(), expected);
    }

    #[test]
    fn new_rejects_ragged_columns() {
        let schema = Schema::new(vec![
            ColumnSpec::new("a", ColumnKind::Continuous),
            ColumnSpec::new("b", ColumnKind::Discrete),
        ])
        .unwrap();
        let err = Table::new(
            schema,
            vec![
                Column::Numbers(vec![Some(1.0)]),
                Column::Strings(vec![Some("x".into()), None]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::SchemaMismatch(_)));
    }

    #[test]
    fn non_nullable_column_rejects_nulls() {
        let schema = Schema::new(vec![ColumnSpec::new("a", ColumnKind::Discrete).required()]).unwrap();
        let err = Table::from_cells(schema, &cells(&[&["x"], &[""]])).unwrap_err();
        assert!(matches!(err, DatasetError::NullViolation { row: 2, .. }));
    }
}

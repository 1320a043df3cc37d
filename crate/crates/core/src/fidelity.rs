//! Non-text fidelity scores: structure preservation (column-name overlap),
//! integrity (range and category adherence) and column shapes (KS / TVD
//! complements of the marginal distributions).

use std::borrow::Cow;
use std::collections::HashSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{format_number, parse_number, Column, ColumnKind, ColumnRef, Table};

#[derive(Debug, Error, PartialEq)]
pub enum FidelityError {
    #[error("column {column:?}: real kind {real} is incompatible with synthetic kind {synthetic}")]
    KindMismatch {
        column: String,
        real: ColumnKind,
        synthetic: ColumnKind,
    },
    #[error("column {0:?}: real column has no non-null values")]
    EmptyRealColumn(String),
    #[error("column {0:?}: synthetic column has no non-null values")]
    EmptySyntheticColumn(String),
    #[error("column {0:?}: text columns are scored by the text metrics")]
    TextColumn(String),
    #[error("empty input sample")]
    EmptyInput,
    #[error("no shared continuous, discrete or identifier columns to score")]
    NoScorableColumns,
}

/// |R ∩ S| / |R ∪ S| over the two tables' column names; 1.0 when both are empty.
pub fn structure_preserving_score(real: &Table, synthetic: &Table) -> f64 {
    let r: HashSet<&str> = real.schema().names().collect();
    let s: HashSet<&str> = synthetic.schema().names().collect();
    let union = r.union(&s).count();
    if union == 0 {
        return 1.0;
    }
    r.intersection(&s).count() as f64 / union as f64
}

/// Whether the shared columns appear in the same relative order in both tables.
pub fn column_order_matches(real: &Table, synthetic: &Table) -> bool {
    let s: HashSet<&str> = synthetic.schema().names().collect();
    let r: HashSet<&str> = real.schema().names().collect();
    let a = real.schema().names().filter(|n| s.contains(n));
    let b = synthetic.schema().names().filter(|n| r.contains(n));
    a.eq(b)
}

fn compatible(real: ColumnKind, synthetic: ColumnKind) -> bool {
    real == synthetic || (real.is_categorical() && synthetic.is_categorical())
}

/// Fraction of non-null synthetic values that stay inside the real column's
/// closed [min, max] range (continuous) or inside its category set
/// (discrete and identifier).
pub fn integrity_score_column(real: ColumnRef<'_>, synthetic: ColumnRef<'_>) -> Result<f64, FidelityError> {
    if real.kind() == ColumnKind::Text {
        return Err(FidelityError::TextColumn(real.name().to_string()));
    }
    if !compatible(real.kind(), synthetic.kind()) {
        return Err(FidelityError::KindMismatch {
            column: real.name().to_string(),
            real: real.kind(),
            synthetic: synthetic.kind(),
        });
    }
    match (real.data, synthetic.data) {
        (Column::Numbers(_), Column::Numbers(_)) => {
            let r = real.data.numbers();
            if r.is_empty() {
                return Err(FidelityError::EmptyRealColumn(real.name().to_string()));
            }
            let s = synthetic.data.numbers();
            if s.is_empty() {
                return Err(FidelityError::EmptySyntheticColumn(synthetic.name().to_string()));
            }
            let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let inside = s.iter().filter(|&&v| lo <= v && v <= hi).count();
            Ok(inside as f64 / s.len() as f64)
        }
        (Column::Strings(_), Column::Strings(_)) => {
            let r: HashSet<&str> = real.data.strings().into_iter().collect();
            if r.is_empty() {
                return Err(FidelityError::EmptyRealColumn(real.name().to_string()));
            }
            let s = synthetic.data.strings();
            if s.is_empty() {
                return Err(FidelityError::EmptySyntheticColumn(synthetic.name().to_string()));
            }
            let inside = s.iter().filter(|v| r.contains(*v)).count();
            Ok(inside as f64 / s.len() as f64)
        }
        _ => unreachable!("compatible kinds share a storage type"),
    }
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the two
/// right-continuous ECDFs, checked at every pooled sample point.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, FidelityError> {
    if a.is_empty() || b.is_empty() {
        return Err(FidelityError::EmptyInput);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    Ok(d)
}

/// `1 - D` for the KS statistic `D`; 1.0 means identical ECDFs.
pub fn ks_complement(real: &[f64], synthetic: &[f64]) -> Result<f64, FidelityError> {
    Ok(1.0 - ks_statistic(real, synthetic)?)
}

fn sorted_counts<'a>(values: &[&'a str]) -> Vec<(&'a str, usize)> {
    let mut v = values.to_vec();
    v.sort_unstable();
    let mut out: Vec<(&str, usize)> = Vec::new();
    for s in v {
        match out.last_mut() {
            Some((last, c)) if *last == s => *c += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

/// Total variation distance between the two empirical category distributions.
pub fn tv_distance<S: AsRef<str>>(a: &[S], b: &[S]) -> Result<f64, FidelityError> {
    if a.is_empty() || b.is_empty() {
        return Err(FidelityError::EmptyInput);
    }
    let a: Vec<&str> = a.iter().map(AsRef::as_ref).collect();
    let b: Vec<&str> = b.iter().map(AsRef::as_ref).collect();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ca = sorted_counts(&a);
    let cb = sorted_counts(&b);
    // merge walk over the union of categories in ascending order
    let (mut i, mut j) = (0, 0);
    let mut l1 = 0.0;
    while i < ca.len() || j < cb.len() {
        let (x, y) = match (ca.get(i), cb.get(j)) {
            (Some(&(ka, xa)), Some(&(kb, xb))) => match ka.cmp(kb) {
                std::cmp::Ordering::Less => {
                    i += 1;
                    (xa, 0)
                }
                std::cmp::Ordering::Greater => {
                    j += 1;
                    (0, xb)
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (xa, xb)
                }
            },
            (Some(&(_, xa)), None) => {
                i += 1;
                (xa, 0)
            }
            (None, Some(&(_, xb))) => {
                j += 1;
                (0, xb)
            }
            (None, None) => unreachable!(),
        };
        l1 += (x as f64 / na - y as f64 / nb).abs();
    }
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

/// `1 - TVD`, clamped to [0, 1].
pub fn tv_complement<S: AsRef<str>>(real: &[S], synthetic: &[S]) -> Result<f64, FidelityError> {
    Ok((1.0 - tv_distance(real, synthetic)?).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeMethod {
    #[serde(rename = "KS")]
    Ks,
    #[serde(rename = "TVD")]
    Tvd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnShape {
    pub method: ShapeMethod,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedColumn {
    pub column: String,
    pub reason: String,
}

/// Shared non-text columns with the synthetic side read as the real side's
/// kind, plus the columns that could not be paired.
struct Alignment<'a> {
    pairs: Vec<(ColumnRef<'a>, Cow<'a, Column>)>,
    skipped: Vec<SkippedColumn>,
}

fn coerce(col: &Column, to: ColumnKind) -> Option<Cow<'_, Column>> {
    match (col, to) {
        (Column::Numbers(_), ColumnKind::Continuous) => Some(Cow::Borrowed(col)),
        (Column::Strings(_), k) if k.is_categorical() => Some(Cow::Borrowed(col)),
        (Column::Strings(v), ColumnKind::Continuous) => v
            .iter()
            .map(|c| match c {
                None => Some(None),
                Some(s) => parse_number(s).map(Some),
            })
            .collect::<Option<Vec<_>>>()
            .map(|v| Cow::Owned(Column::Numbers(v))),
        (Column::Numbers(v), k) if k.is_categorical() => Some(Cow::Owned(Column::Strings(
            v.iter().map(|x| x.map(format_number)).collect(),
        ))),
        _ => None,
    }
}

fn align<'a>(real: &'a Table, synthetic: &'a Table) -> Alignment<'a> {
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for col in real.iter_columns() {
        if col.kind() == ColumnKind::Text {
            continue;
        }
        let Some(syn) = synthetic.column(col.name()) else {
            skipped.push(SkippedColumn {
                column: col.name().to_string(),
                reason: "missing from synthetic table".into(),
            });
            continue;
        };
        match coerce(syn.data, col.kind()).filter(|_| syn.kind() != ColumnKind::Text) {
            Some(data) => pairs.push((col, data)),
            None => skipped.push(SkippedColumn {
                column: col.name().to_string(),
                reason: format!(
                    "kind mismatch: real {} vs synthetic {}",
                    col.kind(),
                    syn.kind()
                ),
            }),
        }
    }
    for col in synthetic.iter_columns() {
        if col.kind() != ColumnKind::Text && real.column(col.name()).is_none() {
            skipped.push(SkippedColumn {
                column: col.name().to_string(),
                reason: "missing from real table".into(),
            });
        }
    }
    Alignment { pairs, skipped }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrityResult {
    pub overall: f64,
    pub continuous_mean: Option<f64>,
    pub discrete_mean: Option<f64>,
    pub by_column: IndexMap<String, f64>,
    pub skipped: Vec<SkippedColumn>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Per-column integrity on shared non-text columns; the overall score is the
/// mean of the continuous-group mean and the discrete-group mean (or the one
/// group present).
pub fn integrity_score(real: &Table, synthetic: &Table) -> Result<IntegrityResult, FidelityError> {
    let Alignment { pairs, mut skipped } = align(real, synthetic);
    let mut by_column = IndexMap::new();
    let (mut cont, mut disc) = (Vec::new(), Vec::new());
    for (rc, data) in &pairs {
        // the synthetic side has already been coerced to the real column's kind
        let syn = ColumnRef { spec: rc.spec, data };
        match integrity_score_column(*rc, syn) {
            Ok(score) => {
                by_column.insert(rc.name().to_string(), score);
                if rc.kind() == ColumnKind::Continuous {
                    cont.push(score);
                } else {
                    disc.push(score);
                }
            }
            Err(e) => skipped.push(SkippedColumn {
                column: rc.name().to_string(),
                reason: e.to_string(),
            }),
        }
    }
    let continuous_mean = mean(&cont);
    let discrete_mean = mean(&disc);
    let groups: Vec<f64> = continuous_mean.into_iter().chain(discrete_mean).collect();
    let overall = mean(&groups).ok_or(FidelityError::NoScorableColumns)?;
    Ok(IntegrityResult {
        overall,
        continuous_mean,
        discrete_mean,
        by_column,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapesResult {
    pub overall: f64,
    pub by_column: IndexMap<String, ColumnShape>,
    pub skipped: Vec<SkippedColumn>,
}

/// KS complement for continuous columns, TVD complement for discrete and
/// identifier columns, averaged without weights.
pub fn column_shapes_score(real: &Table, synthetic: &Table) -> Result<ShapesResult, FidelityError> {
    let Alignment { pairs, mut skipped } = align(real, synthetic);
    let mut by_column = IndexMap::new();
    for (rc, data) in &pairs {
        let shape = if rc.kind() == ColumnKind::Continuous {
            ks_complement(&rc.data.numbers(), &data.numbers()).map(|score| ColumnShape {
                method: ShapeMethod::Ks,
                score,
            })
        } else {
            tv_complement(&rc.data.strings(), &data.strings()).map(|score| ColumnShape {
                method: ShapeMethod::Tvd,
                score,
            })
        };
        match shape {
            Ok(shape) => {
                by_column.insert(rc.name().to_string(), shape);
            }
            Err(_) => skipped.push(SkippedColumn {
                column: rc.name().to_string(),
                reason: "no non-null values on one side".into(),
            }),
        }
    }
    let scores: Vec<f64> = by_column.values().map(|s| s.score).collect();
    let overall = mean(&scores).ok_or(FidelityError::NoScorableColumns)?;
    Ok(ShapesResult {
        overall,
        by_column,
        skipped,
    })
}

/// Distinct / non-null count of the synthetic values in each column that
/// either schema flags as unique. Reported next to integrity, not folded in.
pub fn uniqueness_ratios(real: &Table, synthetic: &Table) -> IndexMap<String, f64> {
    synthetic
        .iter_columns()
        .filter(|c| c.spec.unique || real.schema().get(c.name()).is_some_and(|s| s.unique))
        .filter_map(|c| {
            let values: Vec<String> = (0..synthetic.row_count()).filter_map(|r| c.data.cell_text(r)).collect();
            if values.is_empty() {
                return None;
            }
            let distinct: HashSet<&String> = values.iter().collect();
            Some((c.name().to_string(), distinct.len() as f64 / values.len() as f64))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub sps: f64,
    pub column_order_matches: bool,
    pub integrity: f64,
    pub integrity_continuous_mean: Option<f64>,
    pub integrity_discrete_mean: Option<f64>,
    pub integrity_by_column: IndexMap<String, f64>,
    pub column_shapes: f64,
    pub shapes_by_column: IndexMap<String, ColumnShape>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub uniqueness_by_column: IndexMap<String, f64>,
    pub skipped_columns: Vec<SkippedColumn>,
    pub warnings: Vec<String>,
}

pub fn evaluate_fidelity(real: &Table, synthetic: &Table) -> Result<FidelityReport, FidelityError> {
    let sps = structure_preserving_score(real, synthetic);
    let order = column_order_matches(real, synthetic);
    let integrity = integrity_score(real, synthetic)?;
    let shapes = column_shapes_score(real, synthetic)?;
    let mut warnings = Vec::new();
    if !order {
        warnings.push("shared columns appear in a different order in the synthetic table".into());
    }
    let mut skipped = integrity.skipped;
    for s in shapes.skipped {
        if !skipped.contains(&s) {
            skipped.push(s);
        }
    }
    Ok(FidelityReport {
        sps,
        column_order_matches: order,
        integrity: integrity.overall,
        integrity_continuous_mean: integrity.continuous_mean,
        integrity_discrete_mean: integrity.discrete_mean,
        integrity_by_column: integrity.by_column,
        column_shapes: shapes.overall,
        shapes_by_column: shapes.by_column,
        uniqueness_by_column: uniqueness_ratios(real, synthetic),
        skipped_columns: skipped,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSpec, Schema};

    fn table(cols: &[(&str, ColumnKind, &[&str])]) -> Table {
        let schema = Schema::new(cols.iter().map(|(n, k, _)| ColumnSpec::new(*n, *k)).collect()).unwrap();
        let n = cols.first().map_or(0, |c| c.2.len());
        let rows: Vec<Vec<Option<String>>> = (0..n)
            .map(|r| cols.iter().map(|c| Some(c.2[r].to_string()).filter(|s| !s.is_empty())).collect())
            .collect();
        Table::from_cells(schema, &rows).unwrap()
    }

    fn names(ns: &[&str]) -> Table {
        table(&ns.iter().map(|n| (*n, ColumnKind::Discrete, &[][..])).collect::<Vec<_>>())
    }

    #[test]
    fn sps_examples() {
        let ten: Vec<String> = (0..10).map(|i| format!("c{i}")).collect();
        let ten: Vec<&str> = ten.iter().map(String::as_str).collect();
        assert_eq!(structure_preserving_score(&names(&ten), &names(&ten)), 1.0);
        assert_eq!(structure_preserving_score(&names(&["a", "b", "c", "d"]), &names(&["a", "b", "e"])), 0.4);
        assert_eq!(structure_preserving_score(&names(&["a"]), &names(&["b"])), 0.0);
        assert_eq!(structure_preserving_score(&names(&[]), &names(&[])), 1.0);
    }

    #[test]
    fn column_order_is_reported_not_scored() {
        let a = names(&["a", "b", "c"]);
        let b = names(&["c", "b", "a"]);
        assert_eq!(structure_preserving_score(&a, &b), 1.0);
        assert!(!column_order_matches(&a, &b));
        assert!(column_order_matches(&a, &names(&["a", "x", "c"])));
    }

    #[test]
    fn integrity_column_examples() {
        let r = table(&[("v", ColumnKind::Continuous, &["0", "10", "3"])]);
        let s = table(&[("v", ColumnKind::Continuous, &["1", "5", "11", "-2"])]);
        assert_eq!(integrity_score_column(r.column("v").unwrap(), s.column("v").unwrap()), Ok(0.5));

        let r = table(&[("b", ColumnKind::Discrete, &["true", "false"])]);
        let s = table(&[("b", ColumnKind::Discrete, &["true", "true", "false"])]);
        assert_eq!(integrity_score_column(r.column("b").unwrap(), s.column("b").unwrap()), Ok(1.0));

        let r = table(&[("r", ColumnKind::Discrete, &["1", "2", "3", "4", "5"])]);
        let s = table(&[("r", ColumnKind::Discrete, &["1", "2", "6", "6"])]);
        assert_eq!(integrity_score_column(r.column("r").unwrap(), s.column("r").unwrap()), Ok(0.5));
    }

    #[test]
    fn integrity_endpoints_are_inclusive() {
        let r = table(&[("v", ColumnKind::Continuous, &["0", "10"])]);
        let s = table(&[("v", ColumnKind::Continuous, &["0", "10"])]);
        assert_eq!(integrity_score_column(r.column("v").unwrap(), s.column("v").unwrap()), Ok(1.0));
    }

    #[test]
    fn integrity_column_errors() {
        let r = table(&[("v", ColumnKind::Continuous, &["1"])]);
        let s = table(&[("v", ColumnKind::Discrete, &["1"])]);
        assert!(matches!(
            integrity_score_column(r.column("v").unwrap(), s.column("v").unwrap()),
            Err(FidelityError::KindMismatch { .. })
        ));
        let r = table(&[("v", ColumnKind::Discrete, &[""])]);
        let s = table(&[("v", ColumnKind::Discrete, &["x"])]);
        assert_eq!(
            integrity_score_column(r.column("v").unwrap(), s.column("v").unwrap()),
            Err(FidelityError::EmptyRealColumn("v".into()))
        );
    }

    #[test]
    fn identifier_counts_as_discrete() {
        let r = table(&[("id", ColumnKind::Identifier, &["u1", "u2"])]);
        let s = table(&[("id", ColumnKind::Discrete, &["u1", "u9"])]);
        assert_eq!(integrity_score_column(r.column("id").unwrap(), s.column("id").unwrap()), Ok(0.5));
    }

    #[test]
    fn integrity_group_averaging() {
        let r = table(&[
            ("c", ColumnKind::Continuous, &["0", "1"]),
            ("d1", ColumnKind::Discrete, &["a", "b"]),
            ("d2", ColumnKind::Discrete, &["a", "b"]),
        ]);
        let s = table(&[
            ("c", ColumnKind::Continuous, &["0.5", "1"]),
            ("d1", ColumnKind::Discrete, &["a", "z"]),
            ("d2", ColumnKind::Discrete, &["a", "z"]),
        ]);
        let res = integrity_score(&r, &s).unwrap();
        assert_eq!(res.continuous_mean, Some(1.0));
        assert_eq!(res.discrete_mean, Some(0.5));
        assert_eq!(res.overall, 0.75);
    }

    #[test]
    fn integrity_single_group_and_no_columns() {
        let r = table(&[("d", ColumnKind::Discrete, &["a", "b"])]);
        let s = table(&[(
            "d",
            ColumnKind::Discrete,
            &["a", "a", "a", "a", "a", "b", "b", "b", "b", "z"],
        )]);
        let res = integrity_score(&r, &s).unwrap();
        assert!((res.overall - 0.9).abs() < 1e-15);
        assert_eq!(res.continuous_mean, None);

        let r = table(&[("t", ColumnKind::Text, &["hello"])]);
        assert_eq!(integrity_score(&r, &r), Err(FidelityError::NoScorableColumns));
    }

    #[test]
    fn out_of_range_injection_is_exact() {
        let n = 50;
        let real: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        for k in 0..=n {
            let syn: Vec<String> = (0..n).map(|i| if i < k { "1000".into() } else { i.to_string() }).collect();
            let r = table(&[("v", ColumnKind::Continuous, &real.iter().map(String::as_str).collect::<Vec<_>>())]);
            let s = table(&[("v", ColumnKind::Continuous, &syn.iter().map(String::as_str).collect::<Vec<_>>())]);
            let is = integrity_score(&r, &s).unwrap().overall;
            assert_eq!(is, (n - k) as f64 / n as f64);
        }
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_complement(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]), Ok(1.0));
        assert_eq!(ks_complement(&[0.0; 5], &[1.0; 3]), Ok(0.0));
        assert_eq!(ks_complement(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 9.0]), Ok(0.75));
        assert_eq!(ks_complement(&[], &[1.0]), Err(FidelityError::EmptyInput));
    }

    #[test]
    fn ks_handles_ties() {
        // ECDFs at 1: 0.5 vs 0.75; at 4: 1 vs 1
        assert_eq!(ks_statistic(&[1.0, 1.0, 4.0, 4.0], &[1.0, 1.0, 1.0, 4.0]), Ok(0.25));
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_complement(&["a", "b", "a"], &["b", "a", "a"]), Ok(1.0));
        assert_eq!(tv_complement(&["A", "A"], &["B"]), Ok(0.0));
        assert_eq!(tv_complement(&["A", "B"], &["A", "A", "A", "B"]), Ok(0.75));
        assert_eq!(tv_complement::<&str>(&[], &["x"]), Err(FidelityError::EmptyInput));
    }

    #[test]
    fn shapes_average_and_identity() {
        let r = table(&[
            ("c", ColumnKind::Continuous, &["1", "2"]),
            ("d", ColumnKind::Discrete, &["A", "B"]),
        ]);
        let s = table(&[
            ("c", ColumnKind::Continuous, &["2", "1"]),
            ("d", ColumnKind::Discrete, &["A", "A"]),
        ]);
        let res = column_shapes_score(&r, &s).unwrap();
        assert_eq!(res.by_column["c"].method, ShapeMethod::Ks);
        assert_eq!(res.by_column["d"], ColumnShape { method: ShapeMethod::Tvd, score: 0.5 });
        assert_eq!(res.overall, 0.75);
        assert_eq!(column_shapes_score(&r, &r).unwrap().overall, 1.0);
    }

    #[test]
    fn one_sided_columns_are_skipped_and_listed() {
        let r = table(&[
            ("a", ColumnKind::Discrete, &["x"]),
            ("only_real", ColumnKind::Discrete, &["x"]),
        ]);
        let s = table(&[
            ("a", ColumnKind::Discrete, &["x"]),
            ("only_syn", ColumnKind::Continuous, &["1"]),
        ]);
        let rep = evaluate_fidelity(&r, &s).unwrap();
        assert!((rep.sps - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rep.integrity, 1.0);
        let cols: Vec<&str> = rep.skipped_columns.iter().map(|s| s.column.as_str()).collect();
        assert_eq!(cols, vec!["only_real", "only_syn"]);
    }

    #[test]
    fn synthetic_read_with_real_kind() {
        // an all-zero column infers as discrete; it is read back as continuous
        let r = table(&[("hv", ColumnKind::Continuous, &["0", "3", "7"])]);
        let s = table(&[("hv", ColumnKind::Discrete, &["0", "0", "0"])]);
        let res = column_shapes_score(&r, &s).unwrap();
        assert_eq!(res.by_column["hv"].method, ShapeMethod::Ks);
        assert!((res.overall - (1.0 - 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn uniqueness_ratio_on_flagged_columns() {
        let schema = Schema::new(vec![ColumnSpec::new("title", ColumnKind::Text).unique()]).unwrap();
        let rows: Vec<Vec<Option<String>>> =
            ["a", "b", "a", "c"].iter().map(|s| vec![Some(s.to_string())]).collect();
        let t = Table::from_cells(schema, &rows).unwrap();
        assert_eq!(uniqueness_ratios(&t, &t)["title"], 0.75);
    }
}

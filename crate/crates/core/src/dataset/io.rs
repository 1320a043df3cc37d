use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use super::{parse_number, Column, ColumnKind, ColumnSpec, DatasetError, Schema, Table};

/// Header plus row-major string cells, before any typing.
pub(crate) struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    JsonLines,
}

fn format_of(path: &Path) -> Result<Format, DatasetError> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("csv") => Ok(Format::Csv),
        Some("jsonl") => Ok(Format::JsonLines),
        _ => Err(DatasetError::UnsupportedFormat(path.to_path_buf())),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn read_raw(path: &Path) -> Result<RawTable, DatasetError> {
    let format = format_of(path)?;
    let file = File::open(path).map_err(io_err(path))?;
    let raw = match format {
        Format::Csv => read_csv(BufReader::new(file))?,
        Format::JsonLines => read_jsonl(BufReader::new(file))?,
    };
    let mut seen = HashSet::new();
    for name in &raw.header {
        if !seen.insert(name.as_str()) {
            return Err(DatasetError::SchemaMismatch(format!("duplicate header column {name:?}")));
        }
    }
    Ok(raw)
}

fn read_csv(reader: impl std::io::Read) -> Result<RawTable, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| DatasetError::Parse {
            row: 0,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| DatasetError::Parse {
            row: i + 1,
            message: e.to_string(),
        })?;
        rows.push(
            record
                .iter()
                .map(|s| if s.is_empty() { None } else { Some(s.to_string()) })
                .collect(),
        );
    }
    Ok(RawTable { header, rows })
}

fn json_cell(value: &Value, row: usize) -> Result<Option<String>, DatasetError> {
    Ok(match value {
        Value::Null => None,
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) if s.is_empty() => None,
        Value::String(s) => Some(s.clone()),
        Value::Array(_) | Value::Object(_) => {
            return Err(DatasetError::Parse {
                row,
                message: "nested values are not supported".into(),
            })
        }
    })
}

fn read_jsonl(reader: impl BufRead) -> Result<RawTable, DatasetError> {
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut row = 0;
    for line in reader.lines() {
        let line = line.map_err(|e| DatasetError::Parse {
            row: row + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        row += 1;
        let obj: Map<String, Value> = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            row,
            message: e.to_string(),
        })?;
        let keys = header.get_or_insert_with(|| obj.keys().cloned().collect());
        if obj.len() != keys.len() || !keys.iter().all(|k| obj.contains_key(k)) {
            return Err(DatasetError::Parse {
                row,
                message: "keys differ from the first record".into(),
            });
        }
        rows.push(keys.iter().map(|k| json_cell(&obj[k], row)).collect::<Result<_, _>>()?);
    }
    Ok(RawTable {
        header: header.unwrap_or_default(),
        rows,
    })
}

/// Infers a schema from the raw cells: a column is discrete when its distinct
/// non-null values number at most `max(20, 5% of rows)`, else continuous when
/// every non-null value is a finite number, else text. Identifier is never
/// inferred.
pub fn infer_schema_from_cells(header: &[String], rows: &[Vec<Option<String>>]) -> Schema {
    let threshold = (0.05 * rows.len() as f64).max(20.0);
    let columns = header
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let mut distinct = HashSet::new();
            let mut numeric = true;
            let mut nulls = false;
            for row in rows {
                match row.get(c).and_then(|v| v.as_deref()) {
                    None => nulls = true,
                    Some(v) => {
                        numeric &= parse_number(v).is_some();
                        distinct.insert(v);
                    }
                }
            }
            let kind = if distinct.len() as f64 <= threshold {
                ColumnKind::Discrete
            } else if numeric {
                ColumnKind::Continuous
            } else {
                ColumnKind::Text
            };
            ColumnSpec {
                name: name.clone(),
                kind,
                nullable: nulls,
                unique: false,
            }
        })
        .collect();
    Schema::new(columns).expect("header names are checked for duplicates on read")
}

pub fn infer_schema(path: impl AsRef<Path>) -> Result<Schema, DatasetError> {
    let raw = read_raw(path.as_ref())?;
    Ok(infer_schema_from_cells(&raw.header, &raw.rows))
}

/// Loads a CSV or JSON-lines file. With a schema, the file's columns must be
/// exactly the schema's columns (any order; the table follows file order).
/// Without one, the schema is inferred.
pub fn load_table(path: impl AsRef<Path>, schema: Option<&Schema>) -> Result<Table, DatasetError> {
    let raw = read_raw(path.as_ref())?;
    let schema = match schema {
        None => infer_schema_from_cells(&raw.header, &raw.rows),
        Some(schema) => {
            let file: HashSet<&str> = raw.header.iter().map(String::as_str).collect();
            let expected: HashSet<&str> = schema.names().collect();
            if file != expected {
                let mut missing: Vec<&str> = expected.difference(&file).copied().collect();
                let mut extra: Vec<&str> = file.difference(&expected).copied().collect();
                missing.sort_unstable();
                extra.sort_unstable();
                return Err(DatasetError::SchemaMismatch(format!(
                    "missing columns {missing:?}, unexpected columns {extra:?}"
                )));
            }
            reorder(schema, &raw.header)
        }
    };
    Table::from_cells(schema, &raw.rows)
}

/// Lenient variant used when one schema file describes several tables that
/// may not all carry every column: header columns found in the schema use
/// its spec, the rest are inferred from this file. Returns the schema columns
/// the file lacks.
pub fn load_table_partial(
    path: impl AsRef<Path>,
    schema: &Schema,
) -> Result<(Table, Vec<String>), DatasetError> {
    let raw = read_raw(path.as_ref())?;
    let inferred = infer_schema_from_cells(&raw.header, &raw.rows);
    let columns = inferred
        .columns()
        .iter()
        .map(|c| schema.get(&c.name).cloned().unwrap_or_else(|| c.clone()))
        .collect();
    let missing = schema
        .names()
        .filter(|n| !raw.header.iter().any(|h| h == n))
        .map(str::to_string)
        .collect();
    let table = Table::from_cells(Schema::new(columns)?, &raw.rows)?;
    Ok((table, missing))
}

fn reorder(schema: &Schema, header: &[String]) -> Schema {
    let columns = header
        .iter()
        .map(|h| schema.get(h).cloned().expect("header checked against schema"))
        .collect();
    Schema::new(columns).expect("reordering keeps names unique")
}

/// Writes a table as CSV or JSON lines, chosen by extension.
pub fn write_table(table: &Table, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let format = format_of(path)?;
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            let csv_err = |e: csv::Error| DatasetError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e),
            };
            w.write_record(table.schema().names()).map_err(csv_err)?;
            for r in 0..table.row_count() {
                let cells = table.row_cells(r);
                w.write_record(cells.iter().map(|c| c.as_deref().unwrap_or("")))
                    .map_err(csv_err)?;
            }
            w.flush().map_err(io_err(path))?;
        }
        Format::JsonLines => {
            for r in 0..table.row_count() {
                let mut obj = Map::new();
                for col in table.iter_columns() {
                    let value = match col.data {
                        Column::Numbers(v) => v[r].map_or(Value::Null, Value::from),
                        Column::Strings(v) => v[r].clone().map_or(Value::Null, Value::String),
                    };
                    obj.insert(col.name().to_string(), value);
                }
                serde_json::to_writer(&mut out, &obj).map_err(|e| DatasetError::Io {
                    path: path.to_path_buf(),
                    source: e.into(),
                })?;
                out.write_all(b"\n").map_err(io_err(path))?;
            }
        }
    }
    out.flush().map_err(io_err(path))
}

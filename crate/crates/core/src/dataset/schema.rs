use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DatasetError;

/// How a column's values are interpreted by the metric modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    /// Finite real numbers. Unix timestamps live here as epoch seconds.
    Continuous,
    /// Categories compared by exact string equality. Booleans are `"true"`/`"false"`.
    Discrete,
    /// Free text, scored only by the text-fidelity metrics.
    Text,
    /// Categorical keys such as product or user ids. Treated as discrete for
    /// fidelity and label-encoded for the membership attack.
    Identifier,
}

impl ColumnKind {
    /// Discrete and identifier columns share the categorical code paths.
    pub fn is_categorical(self) -> bool {
        matches!(self, ColumnKind::Discrete | ColumnKind::Identifier)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Continuous => "continuous",
            ColumnKind::Discrete => "discrete",
            ColumnKind::Text => "text",
            ColumnKind::Identifier => "identifier",
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default = "default_nullable")]
    pub nullable: bool,
    /// Columns whose values are expected to be distinct per row. Only used for
    /// the informational uniqueness ratio in the fidelity report.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unique: bool,
}

fn default_nullable() -> bool {
    true
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        ColumnSpec {
            name: name.into(),
            kind,
            nullable: true,
            unique: false,
        }
    }

    pub fn required(mut self) -> Self {
        self.nullable = false;
        self
    }

    pub fn unique(mut self) -> Self {
        self.unique = true;
        self
    }
}

/// Ordered list of column specifications with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchemaFile", into = "SchemaFile")]
pub struct Schema {
    columns: Vec<ColumnSpec>,
}

#[derive(Serialize, Deserialize)]
struct SchemaFile {
    columns: Vec<ColumnSpec>,
}

impl TryFrom<SchemaFile> for Schema {
    type Error = DatasetError;

    fn try_from(file: SchemaFile) -> Result<Self, Self::Error> {
        Schema::new(file.columns)
    }
}

impl From<Schema> for SchemaFile {
    fn from(schema: Schema) -> Self {
        SchemaFile {
            columns: schema.columns,
        }
    }
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for col in &columns {
            if !seen.insert(col.name.as_str()) {
                return Err(DatasetError::InvalidSchema(format!(
                    "duplicate column name {:?}",
                    col.name
                )));
            }
        }
        Ok(Schema { columns })
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn from_json_str(s: &str) -> Result<Self, DatasetError> {
        serde_json::from_str(s).map_err(|e| DatasetError::InvalidSchema(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serialization is infallible")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

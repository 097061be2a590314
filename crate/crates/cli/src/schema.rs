use std::collections::HashSet;

use streamclucd_core::AttributeKind;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SchemaError {
    #[error("duplicate column name {0:?}")]
    Duplicate(String),
    #[error("column {0:?} not found in header")]
    UnknownColumn(String),
    #[error("header has no attribute columns")]
    NoAttributes,
}

/// Column layout of a CSV stream. The label column, if any, is carried
/// alongside each record but never clustered.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamSchema {
    /// Attribute names in file order, label column excluded.
    pub names: Vec<String>,
    pub kinds: Vec<AttributeKind>,
    pub missing_token: String,
    pub label_column: Option<String>,
    /// Position of the label column in the raw header.
    label_position: Option<usize>,
}

pub const DEFAULT_MISSING_TOKEN: &str = "?";

impl StreamSchema {
    /// Builds a schema from a header. Every attribute is categorical unless
    /// listed in `numeric`.
    pub fn from_header(
        header: &[String],
        label_column: Option<&str>,
        numeric: &[String],
        missing_token: &str,
    ) -> Result<Self, SchemaError> {
        let mut seen = HashSet::new();
        for h in header {
            if !seen.insert(h.as_str()) {
                return Err(SchemaError::Duplicate(h.clone()));
            }
        }
        let label_position = match label_column {
            Some(l) => Some(
                header
                    .iter()
                    .position(|h| h == l)
                    .ok_or_else(|| SchemaError::UnknownColumn(l.to_string()))?,
            ),
            None => None,
        };
        if let Some(n) = numeric.iter().find(|n| !seen.contains(n.as_str()) || Some(n.as_str()) == label_column) {
            return Err(SchemaError::UnknownColumn(n.clone()));
        }
        let names: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_position)
            .map(|(_, h)| h.clone())
            .collect();
        if names.is_empty() {
            return Err(SchemaError::NoAttributes);
        }
        let kinds = names
            .iter()
            .map(|n| {
                if numeric.contains(n) {
                    AttributeKind::Numeric
                } else {
                    AttributeKind::Categorical
                }
            })
            .collect();
        Ok(StreamSchema {
            names,
            kinds,
            missing_token: missing_token.to_string(),
            label_column: label_column.map(str::to_string),
            label_position,
        })
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    /// Raw header width (attributes plus label).
    pub fn width(&self) -> usize {
        self.names.len() + usize::from(self.label_position.is_some())
    }

    pub fn label_position(&self) -> Option<usize> {
        self.label_position
    }
}

/// Parses a `--schema` value: comma-separated `name=kind` pairs, kind being
/// `numeric` or `categorical`. Returns the names declared numeric.
pub fn parse_kind_overrides(spec: &str) -> Result<Vec<String>, String> {
    let mut numeric = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, kind) = part
            .split_once('=')
            .ok_or_else(|| format!("expected name=kind, got {part:?}"))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "numeric" | "n" => numeric.push(name.trim().to_string()),
            "categorical" | "c" => {}
            other => return Err(format!("unknown attribute kind {other:?}")),
        }
    }
    Ok(numeric)
}

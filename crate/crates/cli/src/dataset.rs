//! Whole-file loading for experiments that run several algorithms over the
//! same data.

use std::path::Path;

use streamclucd_core::{ClusterModel, ClustererConfig, MissingPolicy, Record, SymbolTable};

use crate::reader::{read_stream, ReadError, ReadOptions};
use crate::schema::StreamSchema;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error(transparent)]
    Core(#[from] streamclucd_core::Error),
    #[error("line {line}: {source}")]
    Preprocess { line: u64, source: streamclucd_core::Error },
}

/// Preprocessed records with their labels and the symbol table they were
/// interned into.
#[derive(Clone, Debug)]
pub struct LabeledData {
    pub schema: StreamSchema,
    pub records: Vec<Record>,
    /// Empty when the source has no label column.
    pub labels: Vec<String>,
    pub symbols: SymbolTable,
}

impl LabeledData {
    /// Reads and preprocesses every line. Any malformed line aborts the load.
    pub fn load(
        path: &Path,
        options: &ReadOptions,
        bin_width: Option<f64>,
        missing_policy: MissingPolicy,
    ) -> Result<Self, LoadError> {
        let stream = read_stream(path, options)?;
        let schema = stream.schema().clone();
        let config = ClustererConfig::new(schema.kinds.clone(), 0.5, 0.5)
            .with_bin_width(bin_width)
            .with_missing_policy(missing_policy);
        let mut model = ClusterModel::new(config)?;
        let mut records = Vec::new();
        let mut labels = Vec::new();
        for row in stream {
            let row = row?;
            let record = model
                .preprocess(&row.values)
                .map_err(|source| LoadError::Preprocess { line: row.line, source })?;
            records.push(record);
            if let Some(l) = row.label {
                labels.push(l);
            }
        }
        Ok(LabeledData {
            schema,
            records,
            labels,
            symbols: model.symbols().clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_labels(&self) -> bool {
        !self.labels.is_empty()
    }

    /// Number of distinct records.
    pub fn distinct_records(&self) -> usize {
        let mut seen: std::collections::HashSet<&[Option<streamclucd_core::Symbol>]> = Default::default();
        for r in &self.records {
            seen.insert(r.cells());
        }
        seen.len()
    }
}

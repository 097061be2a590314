//! Single-pass CSV ingestion.

use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::Path;

use streamclucd_core::{AttributeKind, Value};

use crate::schema::{SchemaError, StreamSchema};

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error("cannot open {path}: {source}")]
    Open { path: String, source: io::Error },
    #[error("input has no header line")]
    MissingHeader,
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected {expected} fields, found {found}")]
    Arity { line: u64, expected: usize, found: usize },
    #[error("line {line}, column {column:?}: cannot parse {value:?} as a number")]
    Numeric { line: u64, column: String, value: String },
}

/// One parsed data line.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    /// 1-based line number in the source (header is line 1).
    pub line: u64,
    pub values: Vec<Value>,
    pub label: Option<String>,
}

/// Options applied when the header is read.
#[derive(Clone, Debug, Default)]
pub struct ReadOptions {
    pub label_column: Option<String>,
    pub numeric: Vec<String>,
    pub missing_token: Option<String>,
}

/// Iterator over the data lines of a CSV source. Each line is read exactly
/// once into a reused buffer; malformed lines come out as errors and the
/// stream continues.
pub struct CsvStream<R> {
    reader: csv::Reader<R>,
    schema: StreamSchema,
    buffer: csv::StringRecord,
}

impl<R: Read> CsvStream<R> {
    pub fn new(source: R, options: &ReadOptions) -> Result<Self, ReadError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(source);
        let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
            return Err(ReadError::MissingHeader);
        }
        let schema = StreamSchema::from_header(
            &header,
            options.label_column.as_deref(),
            &options.numeric,
            options
                .missing_token
                .as_deref()
                .unwrap_or(crate::schema::DEFAULT_MISSING_TOKEN),
        )?;
        Ok(CsvStream {
            reader,
            schema,
            buffer: csv::StringRecord::new(),
        })
    }

    pub fn schema(&self) -> &StreamSchema {
        &self.schema
    }

    fn parse(&self, line: u64) -> Result<Row, ReadError> {
        let rec = &self.buffer;
        if rec.len() != self.schema.width() {
            return Err(ReadError::Arity {
                line,
                expected: self.schema.width(),
                found: rec.len(),
            });
        }
        let label_pos = self.schema.label_position();
        let mut values = Vec::with_capacity(self.schema.arity());
        let mut label = None;
        let mut attr = 0;
        for (i, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            if Some(i) == label_pos {
                label = Some(cell.to_string());
                continue;
            }
            let value = if cell == self.schema.missing_token {
                Value::Missing
            } else if self.schema.kinds[attr] == AttributeKind::Numeric {
                Value::Numeric(cell.parse().map_err(|_| ReadError::Numeric {
                    line,
                    column: self.schema.names[attr].clone(),
                    value: cell.to_string(),
                })?)
            } else {
                Value::Categorical(cell.to_string())
            };
            values.push(value);
            attr += 1;
        }
        Ok(Row { line, values, label })
    }
}

impl<R: Read> Iterator for CsvStream<R> {
    type Item = Result<Row, ReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.reader.read_record(&mut self.buffer) {
            Ok(false) => None,
            Ok(true) => {
                let line = self.buffer.position().map_or(0, |p| p.line());
                Some(self.parse(line))
            }
            Err(e) => Some(Err(e.into())),
        }
    }
}

/// Opens `path` (`-` for standard input) as a CSV record stream.
pub fn read_stream(path: &Path, options: &ReadOptions) -> Result<CsvStream<Box<dyn Read>>, ReadError> {
    let source: Box<dyn Read> = if path == Path::new("-") {
        Box::new(io::stdin().lock())
    } else {
        let f = File::open(path).map_err(|source| ReadError::Open {
            path: path.display().to_string(),
            source,
        })?;
        Box::new(BufReader::new(f))
    };
    CsvStream::new(source, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream<'a>(text: &'a str, options: &ReadOptions) -> Result<CsvStream<&'a [u8]>, ReadError> {
        CsvStream::new(text.as_bytes(), options)
    }

    #[test]
    fn header_only_is_empty() {
        let s = stream("a,b\n", &ReadOptions::default()).unwrap();
        assert_eq!(s.count(), 0);
    }

    #[test]
    fn empty_input_has_no_header() {
        assert!(matches!(stream("", &ReadOptions::default()), Err(ReadError::MissingHeader)));
    }

    #[test]
    fn missing_token_becomes_missing() {
        let rows: Vec<Row> = stream("a,b\nx,?\n", &ReadOptions::default())
            .unwrap()
            .map(Result::unwrap)
            .collect();
        assert_eq!(rows[0].values, [Value::categorical("x"), Value::Missing]);
        assert_eq!(rows[0].line, 2);
    }

    #[test]
    fn label_and_numeric_columns() {
        let options = ReadOptions {
            label_column: Some("class".into()),
            numeric: vec!["w".into()],
            missing_token: None,
        };
        let rows: Vec<_> = stream("w,class,c\n1.5,e,red\nabc,p,blue\n2,e,?\n", &options)
            .unwrap()
            .collect();
        let first = rows[0].as_ref().unwrap();
        assert_eq!(first.values, [Value::Numeric(1.5), Value::categorical("red")]);
        assert_eq!(first.label.as_deref(), Some("e"));
        assert!(matches!(rows[1], Err(ReadError::Numeric { line: 3, .. })));
        assert_eq!(rows[2].as_ref().unwrap().values[1], Value::Missing);
    }

    #[test]
    fn bad_arity_is_reported_and_reading_continues() {
        let rows: Vec<_> = stream("a,b\nx,y\nx\nx,y,z\nq,r\n", &ReadOptions::default())
            .unwrap()
            .collect();
        assert_eq!(rows.len(), 4);
        assert!(matches!(rows[1], Err(ReadError::Arity { line: 3, expected: 2, found: 1 })));
        assert!(matches!(rows[2], Err(ReadError::Arity { found: 3, .. })));
        assert!(rows[3].is_ok());
    }

    #[test]
    fn quoted_fields() {
        let rows: Vec<Row> = stream("a,b\n\"x,1\",y\n", &ReadOptions::default())
            .unwrap()
            .map(Result::unwrap)
            .collect();
        assert_eq!(rows[0].values[0], Value::categorical("x,1"));
    }
}

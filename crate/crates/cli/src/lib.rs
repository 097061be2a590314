//! Streaming IO, output formats and the experiment harness around
//! [`streamclucd_core`].

pub mod dataset;
pub mod output;
pub mod reader;
pub mod schema;
pub mod sweep;

pub use dataset::LabeledData;
pub use reader::{read_stream, CsvStream, ReadError, Row};
pub use schema::StreamSchema;

//! One-pass, memory-bounded clustering of categorical data streams.
//!
//! Clusters are summarised by per-attribute value histograms. Each histogram
//! entry is a Lossy Counting triple `(value, f, delta)`, so a cluster only keeps
//! values whose frequency is large relative to its own size, and the total
//! number of entries grows at most logarithmically with the stream.
//!
//! The crate is `no_std` (it needs `alloc`). IO, CSV parsing and the command
//! line live in the `streamclucd` crate.
//!
//! ```
//! use streamclucd_core::{AttributeKind, ClustererConfig, ClusterModel, Value};
//!
//! let config = ClustererConfig::new(vec![AttributeKind::Categorical; 3], 0.01, 0.5)
//!     .with_sim_threshold(2.0);
//! let mut model = ClusterModel::new(config).unwrap();
//! for row in [["a", "b", "c"], ["a", "b", "c"], ["x", "y", "z"]] {
//!     let raw: Vec<Value> = row.iter().map(|t| Value::categorical(*t)).collect();
//!     model.ingest(&raw).unwrap();
//! }
//! assert_eq!(model.cluster_count(), 2);
//! ```
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod clusterer;
pub mod datagen;
mod error;
pub mod evaluation;
pub mod lossy;
pub mod record;
pub mod similarity;
mod symbol;

pub use clusterer::{
    run_preprocessed, run_stream, selection_score, AssignmentOutcome, ClusterModel,
    ClustererConfig, MissingPolicy, ModelSnapshot, Rejection, StreamOutcome, MISSING_TOKEN,
};
pub use error::{Error, Result};
pub use lossy::{AttributeHistogram, ClusterHistogram, LossyEntry, LossyParams};
pub use record::{AttributeKind, Record, Value};
pub use symbol::{Symbol, SymbolTable};

pub(crate) type FxHashMap<K, V> = hashbrown::HashMap<K, V, rustc_hash::FxBuildHasher>;

//! Reference algorithms the streaming clusterer is compared against.

mod kmodes;
mod squeezer;

pub use kmodes::{chunked_kmodes_stream, kmodes_fit, weighted_kmodes, KModesResult, Mode};
pub use squeezer::{squeezer_run, ExactCluster, SqueezerModel};

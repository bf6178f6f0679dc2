//! Feature assembly, the persistent reference index and fused species ranking.

mod features;
mod index;
mod rank;

pub use features::{extract_features, FeatureGroup, FeatureParams, FeatureVector, FEATURE_LEN};
pub use index::{
    build_index, extract_all, layout_hash, scan_dataset, BuildOutcome, DatasetEntry, FeatureIndex, NormStats, Weights,
    INDEX_FORMAT, INDEX_VERSION,
};
pub use rank::{rank, score_leaves, top_k, GroupDistances, LeafScore, RankedEntry, RankedResult};

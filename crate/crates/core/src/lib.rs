//! Content-based retrieval of foliage-plant leaf images.
//!
//! The pipeline segments a leaf, extracts four feature groups (shape, color,
//! texture, vein), normalizes them against a reference index and ranks
//! species under one of seven interchangeable distance measures fused with
//! per-group weights. [`evalharness`] runs top-k accuracy, precision/recall
//! and timing experiments over a labelled dataset.

pub mod colorvein;
pub mod distances;
pub mod error;
pub mod evalharness;
pub mod gfd;
pub mod imgproc;
pub mod retrieval;
pub mod scalar;
pub mod shape_features;
pub mod synth;
pub mod texture;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Real;

pub use distances::{Measure, Metric};
pub use retrieval::{FeatureIndex, FeatureParams, FeatureVector, RankedResult, Weights};

pub type Metric32 = distances::Metric<f32>;
pub type Metric64 = distances::Metric<f64>;
pub type GeometricFeatures32 = shape_features::GeometricFeatures<f32>;
pub type GeometricFeatures64 = shape_features::GeometricFeatures<f64>;
pub type PolarGrid32 = gfd::PolarGrid<f32>;
pub type PolarGrid64 = gfd::PolarGrid<f64>;
pub type GfdVector32 = gfd::GfdVector<f32>;
pub type GfdVector64 = gfd::GfdVector<f64>;
pub type Glcm32 = texture::Glcm<f32>;
pub type Glcm64 = texture::Glcm<f64>;
pub type TextureFeatures32 = texture::TextureFeatures<f32>;
pub type TextureFeatures64 = texture::TextureFeatures<f64>;
pub type ColorFeatures32 = colorvein::ColorFeatures<f32>;
pub type ColorFeatures64 = colorvein::ColorFeatures<f64>;
pub type VeinFeatures32 = colorvein::VeinFeatures<f32>;
pub type VeinFeatures64 = colorvein::VeinFeatures<f64>;

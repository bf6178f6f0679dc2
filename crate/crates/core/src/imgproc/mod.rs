//! Raster handling and leaf segmentation: grayscale conversion, Otsu segmentation,
//! boundary tracing, convex hull and flat disk morphology.

pub mod contour;
pub mod hull;
pub mod morphology;
pub mod raster;
pub mod segment;

pub use hull::{convex_hull, Point};
pub use morphology::{erode_binary, morphological_open, top_hat};
pub use raster::{gray_of, to_grayscale, RasterImage};
pub use segment::{axis_lengths, otsu_threshold, segment_leaf, LeafMask};

use serde::{Deserialize, Serialize};

use crate::colorvein::{color_moments, vein_features_with, VeinThreshold};
use crate::error::{Error, Result};
use crate::gfd::{generic_fourier_descriptors, DEFAULT_ANGULAR_BINS, DEFAULT_RADIAL_BINS, DESCRIPTOR_LEN};
use crate::imgproc::{gray_of, segment_leaf, RasterImage};
use crate::shape_features::{geometric_features, GeometricFeatures};
use crate::texture::{texture_features, IdmForm, TextureFeatures, DEFAULT_GRAY_LEVELS};

/// One of the four feature groups fused at ranking time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureGroup {
    Shape,
    Color,
    Texture,
    Vein,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 4] = [
        FeatureGroup::Shape,
        FeatureGroup::Color,
        FeatureGroup::Texture,
        FeatureGroup::Vein,
    ];

    #[allow(clippy::len_without_is_empty)]
    pub const fn len(self) -> usize {
        match self {
            FeatureGroup::Shape => GeometricFeatures::<f64>::LEN + DESCRIPTOR_LEN,
            FeatureGroup::Color => 9,
            FeatureGroup::Texture => TextureFeatures::<f64>::LEN,
            FeatureGroup::Vein => 2,
        }
    }

    /// Position of the group's first value in the flattened 56-vector.
    pub const fn offset(self) -> usize {
        match self {
            FeatureGroup::Shape => 0,
            FeatureGroup::Color => FeatureGroup::Shape.len(),
            FeatureGroup::Texture => FeatureGroup::Color.offset() + FeatureGroup::Color.len(),
            FeatureGroup::Vein => FeatureGroup::Texture.offset() + FeatureGroup::Texture.len(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Shape => "shape",
            FeatureGroup::Color => "color",
            FeatureGroup::Texture => "texture",
            FeatureGroup::Vein => "vein",
        }
    }

    /// Human-readable label of each value in the group.
    pub fn labels(self) -> Vec<String> {
        match self {
            FeatureGroup::Shape => ["eccentricity", "roundness", "dispersion", "solidity", "convexity"]
                .iter()
                .map(|s| s.to_string())
                .chain((0..DESCRIPTOR_LEN).map(|i| format!("gfd_{i:02}")))
                .collect(),
            FeatureGroup::Color => ["red", "green", "blue"]
                .iter()
                .flat_map(|c| ["mean", "std_dev", "skewness"].map(|m| format!("{c}_{m}")))
                .collect(),
            FeatureGroup::Texture => ["asm", "contrast", "idm", "entropy", "correlation"]
                .map(String::from)
                .to_vec(),
            FeatureGroup::Vein => ["v1", "v2"].map(String::from).to_vec(),
        }
    }
}

pub const FEATURE_LEN: usize = FeatureGroup::Vein.offset() + FeatureGroup::Vein.len();

/// Extraction settings; stored in the index so queries are featurized identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureParams {
    pub gray_levels: usize,
    pub radial_bins: usize,
    pub angular_bins: usize,
    pub idm_form: IdmForm,
    pub vein_threshold: VeinThreshold,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            gray_levels: DEFAULT_GRAY_LEVELS,
            radial_bins: DEFAULT_RADIAL_BINS,
            angular_bins: DEFAULT_ANGULAR_BINS,
            idm_form: IdmForm::default(),
            vein_threshold: VeinThreshold::default(),
        }
    }
}

/// The 56 raw or normalized features of one leaf, with its identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub leaf_id: String,
    pub species: String,
    pub shape: Vec<f64>,
    pub color: Vec<f64>,
    pub texture: Vec<f64>,
    pub vein: Vec<f64>,
}

impl FeatureVector {
    /// Builds a vector from a flat 56-value slice.
    pub fn from_flat(leaf_id: impl Into<String>, species: impl Into<String>, values: &[f64]) -> Result<Self> {
        if values.len() != FEATURE_LEN {
            return Err(Error::ShapeMismatch {
                expected: FEATURE_LEN,
                found: values.len(),
            });
        }
        let part = |g: FeatureGroup| values[g.offset()..g.offset() + g.len()].to_vec();
        Ok(Self {
            leaf_id: leaf_id.into(),
            species: species.into(),
            shape: part(FeatureGroup::Shape),
            color: part(FeatureGroup::Color),
            texture: part(FeatureGroup::Texture),
            vein: part(FeatureGroup::Vein),
        })
    }

    pub fn group(&self, g: FeatureGroup) -> &[f64] {
        match g {
            FeatureGroup::Shape => &self.shape,
            FeatureGroup::Color => &self.color,
            FeatureGroup::Texture => &self.texture,
            FeatureGroup::Vein => &self.vein,
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        FeatureGroup::ALL.iter().flat_map(|&g| self.group(g).iter().copied()).collect()
    }

    pub fn with_identity(mut self, leaf_id: impl Into<String>, species: impl Into<String>) -> Self {
        self.leaf_id = leaf_id.into();
        self.species = species.into();
        self
    }

    /// Checks group lengths and rejects NaN values.
    pub fn validate(&self) -> Result<()> {
        for g in FeatureGroup::ALL {
            let v = self.group(g);
            if v.len() != g.len() {
                return Err(Error::ShapeMismatch {
                    expected: g.len(),
                    found: v.len(),
                });
            }
            if let Some(i) = v.iter().position(|x| x.is_nan()) {
                return Err(Error::NanInput(g.offset() + i));
            }
        }
        Ok(())
    }
}

/// Segments the leaf and computes all four feature groups. Identity fields are left empty.
pub fn extract_features(img: &RasterImage, params: &FeatureParams) -> Result<FeatureVector> {
    let mask = segment_leaf(img)?;
    let gray = gray_of(img);
    let mut shape = geometric_features::<f64>(&mask)?.to_array().to_vec();
    shape.extend(generic_fourier_descriptors::<f64>(&mask, params.radial_bins, params.angular_bins)?.values);
    let color = color_moments::<f64>(img, &mask)?.to_array().to_vec();
    let texture = texture_features::<f64>(&gray, &mask, params.gray_levels, params.idm_form)?
        .to_array()
        .to_vec();
    let vein = vein_features_with::<f64>(&gray, &mask, params.vein_threshold)?
        .to_array()
        .to_vec();
    let v = FeatureVector {
        leaf_id: String::new(),
        species: String::new(),
        shape,
        color,
        texture,
        vein,
    };
    v.validate()?;
    Ok(v)
}

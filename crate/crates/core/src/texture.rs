//! Gray-level co-occurrence matrices and the five texture statistics derived from
//! them (ASM, contrast, IDM, entropy, correlation), averaged over four directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{LeafMask, RasterImage};
use crate::scalar::Real;

pub const DEFAULT_GRAY_LEVELS: usize = 8;

/// Pixel-pair direction at distance one. Angles are measured counter-clockwise
/// on screen, so 45° pairs a pixel with its upper-right neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Deg0,
        Direction::Deg45,
        Direction::Deg90,
        Direction::Deg135,
    ];

    /// `(dx, dy)` in image coordinates (y down).
    pub fn offset(self) -> (i64, i64) {
        match self {
            Direction::Deg0 => (1, 0),
            Direction::Deg45 => (1, -1),
            Direction::Deg90 => (0, -1),
            Direction::Deg135 => (-1, -1),
        }
    }
}

/// Inverse difference moment variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdmForm {
    /// `Σ GLCM(i,j)² / (1 + (i−j)²)`, squared numerator.
    #[default]
    Literal,
    /// `Σ GLCM(i,j) / (1 + (i−j)²)`, the usual homogeneity.
    Conventional,
}

/// Normalized, symmetric co-occurrence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm<T = f64> {
    levels: usize,
    direction: Direction,
    values: Vec<T>,
}

impl<T: Real> Glcm<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.levels + j]
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Builds from raw (not yet normalized) counts.
    pub fn from_counts(levels: usize, direction: Direction, counts: &[u64]) -> Result<Self> {
        if counts.len() != levels * levels {
            return Err(Error::InvalidInput("count matrix is not levels × levels".into()));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::DegenerateTexture("no pixel pairs inside the region".into()));
        }
        let total = T::of(total as f64);
        Ok(Self {
            levels,
            direction,
            values: counts.iter().map(|&c| T::of(c as f64) / total).collect(),
        })
    }
}

/// Uniform quantization of `[0, 255]` into `levels` bins.
pub fn quantize(gray: &RasterImage, levels: usize) -> Vec<u8> {
    gray.pixels()
        .iter()
        .map(|&v| (v as usize * levels / 256) as u8)
        .collect()
}

fn check_inputs(gray: &RasterImage, levels: usize) -> Result<()> {
    if gray.channels() != 1 {
        return Err(Error::InvalidInput("texture needs a single-channel image".into()));
    }
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidInput(format!("gray levels must be in 2..=256, got {levels}")));
    }
    Ok(())
}

/// Co-occurrence counts over pairs whose both pixels lie in `region` (all pixels when `None`).
/// Each pair is counted in both orders.
pub fn cooccurrence_counts(
    quantized: &[u8],
    width: usize,
    height: usize,
    region: Option<&RasterImage>,
    direction: Direction,
    levels: usize,
) -> Vec<u64> {
    let (dx, dy) = direction.offset();
    let inside = |x: usize, y: usize| region.is_none_or(|m| m.get(x, y, 0) != 0);
    let mut counts = vec![0u64; levels * levels];
    for y in 0..height {
        for x in 0..width {
            if !inside(x, y) {
                continue;
            }
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !inside(nx, ny) {
                continue;
            }
            let a = quantized[y * width + x] as usize;
            let b = quantized[ny * width + nx] as usize;
            counts[a * levels + b] += 1;
            counts[b * levels + a] += 1;
        }
    }
    counts
}

/// GLCM of `gray` restricted to an optional binary region.
pub fn build_glcm_in<T: Real>(
    gray: &RasterImage,
    region: Option<&RasterImage>,
    direction: Direction,
    levels: usize,
) -> Result<Glcm<T>> {
    check_inputs(gray, levels)?;
    let q = quantize(gray, levels);
    let counts = cooccurrence_counts(&q, gray.width(), gray.height(), region, direction, levels);
    Glcm::from_counts(levels, direction, &counts)
}

/// GLCM over pixel pairs that both fall inside the leaf.
pub fn build_glcm<T: Real>(
    gray: &RasterImage,
    mask: &LeafMask,
    direction: Direction,
    levels: usize,
) -> Result<Glcm<T>> {
    build_glcm_in(gray, Some(mask.mask()), direction, levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureFeatures<T = f64> {
    pub asm: T,
    pub contrast: T,
    pub idm: T,
    pub entropy: T,
    pub correlation: T,
}

impl<T: Real> TextureFeatures<T> {
    pub const LEN: usize = 5;

    pub fn to_array(&self) -> [T; 5] {
        [self.asm, self.contrast, self.idm, self.entropy, self.correlation]
    }
}

/// Statistics of a single GLCM. Correlation is `(Σ i·j·g − μ_i μ_j) / (σ_i σ_j)`,
/// defined as 0 when either marginal has zero variance.
pub fn glcm_features<T: Real>(glcm: &Glcm<T>, idm_form: IdmForm) -> TextureFeatures<T> {
    let l = glcm.levels;
    let (mut asm, mut contrast, mut idm, mut entropy) = (T::zero(), T::zero(), T::zero(), T::zero());
    let (mut mu_i, mut mu_j, mut sum_ij) = (T::zero(), T::zero(), T::zero());
    for i in 0..l {
        for j in 0..l {
            let g = glcm.get(i, j);
            if g == T::zero() {
                continue;
            }
            let (fi, fj) = (T::of_usize(i), T::of_usize(j));
            let d2 = (fi - fj) * (fi - fj);
            asm = asm + g * g;
            contrast = contrast + d2 * g;
            let num = match idm_form {
                IdmForm::Literal => g * g,
                IdmForm::Conventional => g,
            };
            idm = idm + num / (T::one() + d2);
            entropy = entropy - g * g.ln();
            mu_i = mu_i + fi * g;
            mu_j = mu_j + fj * g;
            sum_ij = sum_ij + fi * fj * g;
        }
    }
    let (mut var_i, mut var_j) = (T::zero(), T::zero());
    for i in 0..l {
        for j in 0..l {
            let g = glcm.get(i, j);
            let (fi, fj) = (T::of_usize(i), T::of_usize(j));
            var_i = var_i + g * (fi - mu_i) * (fi - mu_i);
            var_j = var_j + g * (fj - mu_j) * (fj - mu_j);
        }
    }
    let denom = (var_i * var_j).sqrt();
    let correlation = if denom > T::zero() {
        ((sum_ij - mu_i * mu_j) / denom).max(-T::one()).min(T::one())
    } else {
        T::zero()
    };
    TextureFeatures {
        asm,
        contrast,
        idm,
        entropy: entropy.max(T::zero()),
        correlation,
    }
}

/// Mean of the per-direction statistics over 0°, 45°, 90° and 135°.
pub fn texture_features_in<T: Real>(
    gray: &RasterImage,
    region: Option<&RasterImage>,
    levels: usize,
    idm_form: IdmForm,
) -> Result<TextureFeatures<T>> {
    let mut acc = [T::zero(); 5];
    for d in Direction::ALL {
        let f = glcm_features(&build_glcm_in::<T>(gray, region, d, levels)?, idm_form).to_array();
        for (a, v) in acc.iter_mut().zip(f) {
            *a = *a + v;
        }
    }
    let n = T::of(4.0);
    Ok(TextureFeatures {
        asm: acc[0] / n,
        contrast: acc[1] / n,
        idm: acc[2] / n,
        entropy: acc[3] / n,
        correlation: acc[4] / n,
    })
}

pub fn texture_features<T: Real>(
    gray: &RasterImage,
    mask: &LeafMask,
    levels: usize,
    idm_form: IdmForm,
) -> Result<TextureFeatures<T>> {
    texture_features_in(gray, Some(mask.mask()), levels, idm_form)
}

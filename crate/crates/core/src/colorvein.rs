//! Color moments of the leaf pixels and vein-density features from top-hat residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::morphology::{erode_binary, top_hat};
use crate::imgproc::segment::{histogram, otsu_threshold};
use crate::imgproc::{LeafMask, RasterImage};
use crate::scalar::Real;

/// Mean, standard deviation and skewness of one color plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneMoments<T = f64> {
    pub mean: T,
    pub std_dev: T,
    pub skewness: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorFeatures<T = f64> {
    pub red: PlaneMoments<T>,
    pub green: PlaneMoments<T>,
    pub blue: PlaneMoments<T>,
}

impl<T: Real> ColorFeatures<T> {
    pub const LEN: usize = 9;

    /// `[μR, σR, θR, μG, σG, θG, μB, σB, θB]`.
    pub fn to_array(&self) -> [T; 9] {
        let p = [self.red, self.green, self.blue];
        let mut out = [T::zero(); 9];
        for (k, m) in p.iter().enumerate() {
            out[3 * k] = m.mean;
            out[3 * k + 1] = m.std_dev;
            out[3 * k + 2] = m.skewness;
        }
        out
    }
}

/// Population moments of a sample. Skewness is 0 when the deviation is 0.
pub fn moments<T: Real>(values: &[T]) -> Result<PlaneMoments<T>> {
    if values.is_empty() {
        return Err(Error::DegenerateGeometry("no pixels to take moments of".into()));
    }
    let n = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let (mut m2, mut m3) = (T::zero(), T::zero());
    for &v in values {
        let d = v - mean;
        m2 = m2 + d * d;
        m3 = m3 + d * d * d;
    }
    let std_dev = (m2 / n).sqrt();
    let skewness = if std_dev > T::zero() {
        m3 / (n * std_dev * std_dev * std_dev)
    } else {
        T::zero()
    };
    Ok(PlaneMoments {
        mean,
        std_dev,
        skewness,
    })
}

/// Per-plane moments over the pixels of `region` (every pixel when `None`).
/// Single-channel images are treated as three identical planes.
pub fn color_moments_in<T: Real>(img: &RasterImage, region: Option<&RasterImage>) -> Result<ColorFeatures<T>> {
    let rgb = img.to_rgb();
    let mut planes: [Vec<T>; 3] = Default::default();
    for y in 0..rgb.height() {
        for x in 0..rgb.width() {
            if region.is_some_and(|m| m.get(x, y, 0) == 0) {
                continue;
            }
            for (c, plane) in planes.iter_mut().enumerate() {
                plane.push(T::of(f64::from(rgb.get(x, y, c))));
            }
        }
    }
    Ok(ColorFeatures {
        red: moments(&planes[0])?,
        green: moments(&planes[1])?,
        blue: moments(&planes[2])?,
    })
}

pub fn color_moments<T: Real>(img: &RasterImage, mask: &LeafMask) -> Result<ColorFeatures<T>> {
    color_moments_in(img, Some(mask.mask()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VeinFeatures<T = f64> {
    pub v1: T,
    pub v2: T,
}

impl<T: Real> VeinFeatures<T> {
    pub const LEN: usize = 2;

    pub fn to_array(&self) -> [T; 2] {
        [self.v1, self.v2]
    }
}

/// How the top-hat residual is binarized into vein pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VeinThreshold {
    /// Otsu over the nonzero residuals inside the leaf interior, per radius.
    #[default]
    Otsu,
    /// Residual must exceed this value.
    Fixed(u8),
}

/// Width of the leaf margin excluded from vein detection.
pub const MARGIN_RADIUS: usize = 2;

/// Vein pixels for one structuring-element radius: interior pixels whose
/// top-hat residual exceeds the threshold.
pub fn vein_mask(
    gray: &RasterImage,
    interior: &RasterImage,
    radius: usize,
    threshold: VeinThreshold,
) -> Result<RasterImage> {
    let residual = top_hat(gray, radius)?;
    let inner = residual
        .pixels()
        .iter()
        .zip(interior.pixels())
        .filter(|(_, &m)| m != 0)
        .map(|(&r, _)| r);
    let t = match threshold {
        VeinThreshold::Fixed(t) => t,
        VeinThreshold::Otsu => otsu_threshold(&histogram(inner.filter(|&r| r > 0))),
    };
    let px = residual
        .pixels()
        .iter()
        .zip(interior.pixels())
        .map(|(&r, &m)| u8::from(m != 0 && r > 0 && r > t))
        .collect();
    RasterImage::new(gray.width(), gray.height(), 1, px)
}

/// `(A₁ / A, A₂ / A)` with `A_k` the vein pixel count at disk radius `k` and `A` the leaf area.
pub fn vein_features_with<T: Real>(
    gray: &RasterImage,
    mask: &LeafMask,
    threshold: VeinThreshold,
) -> Result<VeinFeatures<T>> {
    if gray.channels() != 1 {
        return Err(Error::InvalidInput("vein features need a grayscale image".into()));
    }
    if gray.width() != mask.width() || gray.height() != mask.height() {
        return Err(Error::InvalidInput("image and mask sizes differ".into()));
    }
    let area = mask.area();
    if area == 0 {
        return Err(Error::DegenerateGeometry("leaf has zero area".into()));
    }
    let interior = erode_binary(mask.mask(), MARGIN_RADIUS)?;
    let count = |radius| -> Result<usize> {
        Ok(vein_mask(gray, &interior, radius, threshold)?
            .pixels()
            .iter()
            .filter(|&&p| p != 0)
            .count())
    };
    let a = T::of_usize(area);
    Ok(VeinFeatures {
        v1: T::of_usize(count(1)?) / a,
        v2: T::of_usize(count(2)?) / a,
    })
}

pub fn vein_features<T: Real>(gray: &RasterImage, mask: &LeafMask) -> Result<VeinFeatures<T>> {
    vein_features_with(gray, mask, VeinThreshold::Otsu)
}

//! Flat grayscale morphology with disk structuring elements.
//!
//! Pixels outside the frame are ignored by both erosion and dilation, which keeps
//! erosion/dilation an adjoint pair on the finite domain; the opening is therefore
//! idempotent and anti-extensive right up to the border.

use crate::error::{Error, Result};

use super::raster::RasterImage;

/// Offsets `(dx, dy)` with `dx² + dy² <= radius²`.
pub fn disk_offsets(radius: usize) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

fn check(img: &RasterImage, radius: usize) -> Result<()> {
    if img.channels() != 1 {
        return Err(Error::InvalidInput(format!(
            "morphology needs a single-channel image, got {} channels",
            img.channels()
        )));
    }
    if radius < 1 {
        return Err(Error::InvalidInput("structuring element radius must be >= 1".into()));
    }
    Ok(())
}

fn filter(img: &RasterImage, offsets: &[(i64, i64)], take_max: bool) -> RasterImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let src = img.pixels();
    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = if take_max { u8::MIN } else { u8::MAX };
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let v = src[(ny * w + nx) as usize];
                acc = if take_max { acc.max(v) } else { acc.min(v) };
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    RasterImage::new(img.width(), img.height(), 1, out).expect("same geometry")
}

pub fn erode(img: &RasterImage, radius: usize) -> Result<RasterImage> {
    check(img, radius)?;
    Ok(filter(img, &disk_offsets(radius), false))
}

pub fn dilate(img: &RasterImage, radius: usize) -> Result<RasterImage> {
    check(img, radius)?;
    Ok(filter(img, &disk_offsets(radius), true))
}

/// Grayscale opening: erosion followed by dilation with the same flat disk.
pub fn morphological_open(img: &RasterImage, radius: usize) -> Result<RasterImage> {
    check(img, radius)?;
    let offsets = disk_offsets(radius);
    let eroded = filter(img, &offsets, false);
    Ok(filter(&eroded, &offsets, true))
}

/// White top-hat `img - open(img, radius)`; never underflows since opening is anti-extensive.
pub fn top_hat(img: &RasterImage, radius: usize) -> Result<RasterImage> {
    let opened = morphological_open(img, radius)?;
    let px = img
        .pixels()
        .iter()
        .zip(opened.pixels())
        .map(|(&a, &b)| a - b)
        .collect();
    RasterImage::new(img.width(), img.height(), 1, px)
}

/// Binary erosion where everything outside the frame counts as background.
pub fn erode_binary(mask: &RasterImage, radius: usize) -> Result<RasterImage> {
    check(mask, radius)?;
    let offsets = disk_offsets(radius);
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let src = mask.pixels();
    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            let keep = offsets.iter().all(|&(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                nx >= 0 && ny >= 0 && nx < w && ny < h && src[(ny * w + nx) as usize] != 0
            });
            out[(y * w + x) as usize] = u8::from(keep);
        }
    }
    RasterImage::new(mask.width(), mask.height(), 1, out)
}

use std::path::Path;

use crate::error::{Error, Result};

/// Row-major 8-bit raster with one (gray or binary) or three (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("image has zero extent".into()));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::InvalidInput(format!(
                "pixel buffer holds {} values, {}x{}x{} expected",
                pixels.len(),
                width,
                height,
                channels
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Single-channel image filled with `value`.
    pub fn filled_gray(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image has zero extent");
        Self {
            width,
            height,
            channels: 1,
            pixels: vec![value; width * height],
        }
    }

    /// Three-channel image filled with `rgb`.
    pub fn filled_rgb(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image has zero extent");
        let mut pixels = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            pixels.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            channels: 3,
            pixels,
        }
    }

    /// Builds a single-channel image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn_gray(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image has zero extent");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            channels: 1,
            pixels,
        }
    }

    /// Builds an RGB image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn_rgb(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Self {
        assert!(width > 0 && height > 0, "image has zero extent");
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            channels: 3,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, channel: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.channels + channel]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, channel: usize, value: u8) {
        self.pixels[(y * self.width + x) * self.channels + channel] = value;
    }

    /// Gray value at signed coordinates, `None` outside the frame. Single-channel only.
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> Option<u8> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            None
        } else {
            Some(self.pixels[y as usize * self.width + x as usize])
        }
    }

    #[inline]
    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn is_binary(&self) -> bool {
        self.channels == 1 && self.pixels.iter().all(|&p| p <= 1)
    }

    /// Replicates a single-channel image into three identical planes.
    pub fn to_rgb(&self) -> RasterImage {
        if self.channels == 3 {
            return self.clone();
        }
        let mut pixels = Vec::with_capacity(self.pixels.len() * 3);
        for &p in &self.pixels {
            pixels.extend_from_slice(&[p, p, p]);
        }
        RasterImage {
            width: self.width,
            height: self.height,
            channels: 3,
            pixels,
        }
    }

    /// Reads a PNG, JPEG or PBM/PGM/PPM file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let decode_err = |e: image::ImageError| Error::ImageDecode {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let reader = image::ImageReader::open(path)
            .map_err(|e| Error::io(path, e))?
            .with_guessed_format()
            .map_err(|e| Error::io(path, e))?;
        let dynamic = reader.decode().map_err(decode_err)?;
        let color = dynamic.color();
        if color.has_color() {
            let rgb = dynamic.into_rgb8();
            let (w, h) = rgb.dimensions();
            RasterImage::new(w as usize, h as usize, 3, rgb.into_raw())
        } else {
            let gray = dynamic.into_luma8();
            let (w, h) = gray.dimensions();
            RasterImage::new(w as usize, h as usize, 1, gray.into_raw())
        }
    }

    /// Writes the image; the format follows the file extension (`png`, `jpg`, `pgm`, `ppm`, `pnm`).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let color = if self.channels == 3 {
            image::ExtendedColorType::Rgb8
        } else {
            image::ExtendedColorType::L8
        };
        image::save_buffer(
            path,
            &self.pixels,
            self.width as u32,
            self.height as u32,
            color,
        )
        .map_err(|e| Error::ImageDecode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Luminance conversion `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn to_grayscale(img: &RasterImage) -> Result<RasterImage> {
    if img.channels() != 3 {
        return Err(Error::InvalidInput(format!(
            "grayscale conversion needs 3 channels, got {}",
            img.channels()
        )));
    }
    let pixels = img
        .pixels()
        .chunks_exact(3)
        .map(|p| luminance(p[0], p[1], p[2]))
        .collect();
    RasterImage::new(img.width(), img.height(), 1, pixels)
}

#[inline]
fn luminance(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

/// Grayscale view of any image: converts RGB, passes single-channel through.
pub fn gray_of(img: &RasterImage) -> RasterImage {
    if img.channels() == 3 {
        to_grayscale(img).expect("three channels checked")
    } else {
        img.clone()
    }
}

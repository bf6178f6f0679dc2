//! Procedural leaf images with controllable shape, color, texture and veins.
//!
//! Used to build reproducible datasets for the test and acceptance suites and for
//! the `synth` CLI command. Everything is driven by a seeded ChaCha generator.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imgproc::RasterImage;

/// One cosine term of a star-shaped outline: `amplitude · cos(order·θ + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub order: u32,
    pub amplitude: f64,
    pub phase: f64,
}

/// Closed outline described by its radius as a function of polar angle.
#[derive(Debug, Clone, PartialEq)]
pub enum Outline {
    /// `r(θ) = radius · (1 + Σ terms)`.
    Harmonic { radius: f64, terms: Vec<Harmonic> },
    /// Axis-aligned ellipse before rotation.
    Ellipse { semi_major: f64, semi_minor: f64 },
}

impl Outline {
    pub fn circle(radius: f64) -> Self {
        Outline::Harmonic {
            radius,
            terms: Vec::new(),
        }
    }

    pub fn radius_at(&self, theta: f64) -> f64 {
        match self {
            Outline::Harmonic { radius, terms } => {
                let s: f64 = terms
                    .iter()
                    .map(|h| h.amplitude * (f64::from(h.order) * theta + h.phase).cos())
                    .sum();
                radius * (1.0 + s)
            }
            Outline::Ellipse {
                semi_major: a,
                semi_minor: b,
            } => {
                let (s, c) = theta.sin_cos();
                a * b / ((b * c).powi(2) + (a * s).powi(2)).sqrt()
            }
        }
    }

    /// Largest radius over a fine angular sweep.
    pub fn max_radius(&self) -> f64 {
        (0..3600)
            .map(|i| self.radius_at(i as f64 * TAU / 3600.0))
            .fold(0.0, f64::max)
    }

    /// Whether the point `(u, v)` in outline coordinates lies inside.
    #[inline]
    pub fn contains(&self, u: f64, v: f64) -> bool {
        let rho = u.hypot(v);
        rho <= self.radius_at(v.atan2(u))
    }
}

/// Placement of an outline on a canvas: scale, rotation (radians, counter-clockwise
/// on screen) and centre in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub scale: f64,
    pub rotation: f64,
    pub center: (f64, f64),
}

impl Placement {
    pub fn centered(size: usize) -> Self {
        let c = (size as f64 - 1.0) / 2.0;
        Self {
            scale: 1.0,
            rotation: 0.0,
            center: (c, c),
        }
    }

    /// Maps a pixel to outline coordinates.
    #[inline]
    fn to_local(self, x: f64, y: f64) -> (f64, f64) {
        // screen y points down; flip so positive rotation is counter-clockwise on screen
        let dx = x - self.center.0;
        let dy = self.center.1 - y;
        let (s, c) = self.rotation.sin_cos();
        let u = (c * dx + s * dy) / self.scale;
        let v = (-s * dx + c * dy) / self.scale;
        (u, v)
    }
}

/// Binary mask (0/1) of an outline placed on a `width × height` canvas.
pub fn render_mask(outline: &Outline, width: usize, height: usize, place: Placement) -> RasterImage {
    RasterImage::from_fn_gray(width, height, |x, y| {
        let (u, v) = place.to_local(x as f64, y as f64);
        u8::from(outline.contains(u, v))
    })
}

/// Appearance of one synthetic species.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafStyle {
    pub outline: Outline,
    pub base_rgb: [f64; 3],
    /// Stripe period in pixels (outline coordinates) and peak-to-peak amplitude in gray levels.
    pub stripe_period: f64,
    pub stripe_amplitude: f64,
    pub stripe_angle: f64,
    /// Number of lateral veins on each side of the midrib; brightness added on vein pixels.
    pub vein_pairs: u32,
    pub vein_boost: f64,
}

/// Per-instance perturbation applied when rendering a style.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jitter {
    /// Relative scale deviation bound (e.g. 0.05 for ±5%).
    pub scale: f64,
    /// Relative per-channel color deviation bound.
    pub color: f64,
    /// Additive per-pixel noise bound in gray levels.
    pub noise: f64,
    /// Whether to draw a uniformly random rotation.
    pub rotate: bool,
}

impl Jitter {
    pub const NONE: Jitter = Jitter {
        scale: 0.0,
        color: 0.0,
        noise: 0.0,
        rotate: false,
    };

    pub const MILD: Jitter = Jitter {
        scale: 0.05,
        color: 0.05,
        noise: 3.0,
        rotate: true,
    };
}

const BACKGROUND: f64 = 245.0;

/// Renders one RGB leaf on a light background.
pub fn render_leaf(style: &LeafStyle, size: usize, jitter: Jitter, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = |bound: f64| {
        if bound > 0.0 {
            rng.gen_range(-bound..=bound)
        } else {
            0.0
        }
    };
    let scale = 1.0 + unit(jitter.scale);
    let color_gain = [1.0 + unit(jitter.color), 1.0 + unit(jitter.color), 1.0 + unit(jitter.color)];
    let rotation = if jitter.rotate { unit(PI) } else { 0.0 };
    let noise_seed = rng.gen::<u64>();

    let mut place = Placement::centered(size);
    place.scale = scale;
    place.rotation = rotation;

    let mut noise_rng = ChaCha8Rng::seed_from_u64(noise_seed);
    let (sa, ca) = style.stripe_angle.sin_cos();
    let reach = style.outline.max_radius();
    RasterImage::from_fn_rgb(size, size, |x, y| {
        let n = if jitter.noise > 0.0 {
            noise_rng.gen_range(-jitter.noise..=jitter.noise)
        } else {
            0.0
        };
        let (u, v) = place.to_local(x as f64, y as f64);
        if !style.outline.contains(u, v) {
            let g = (BACKGROUND + n).round().clamp(0.0, 255.0) as u8;
            return [g, g, g];
        }
        let phase = (ca * u + sa * v) * TAU / style.stripe_period;
        let mut delta = 0.5 * style.stripe_amplitude * phase.sin();
        if on_vein(u, v, reach, style.vein_pairs) {
            delta += style.vein_boost;
        }
        let mut px = [0u8; 3];
        for (c, out) in px.iter_mut().enumerate() {
            let val = style.base_rgb[c] * color_gain[c] + delta + n;
            *out = val.round().clamp(0.0, 255.0) as u8;
        }
        px
    })
}

/// Midrib along the u axis plus `pairs` lateral veins at ±45°, one pixel wide.
fn on_vein(u: f64, v: f64, reach: f64, pairs: u32) -> bool {
    if v.abs() < 0.6 {
        return true;
    }
    if pairs == 0 {
        return false;
    }
    let spacing = 2.0 * reach / f64::from(pairs + 1);
    for k in 1..=pairs {
        let u0 = -reach + spacing * f64::from(k);
        // vein leaving the midrib at (u0, 0) towards +u at 45° on both sides
        let along = u - u0;
        if along > 0.0 && (along - v.abs()).abs() < 0.6 * std::f64::consts::SQRT_2 {
            return true;
        }
    }
    false
}

/// Ten visually distinct species used by tests and the `synth` command.
pub fn default_styles(classes: usize) -> Vec<LeafStyle> {
    const PALETTE: [[f64; 3]; 10] = [
        [40.0, 120.0, 40.0],
        [150.0, 40.0, 60.0],
        [60.0, 60.0, 150.0],
        [120.0, 110.0, 30.0],
        [30.0, 100.0, 110.0],
        [110.0, 50.0, 120.0],
        [90.0, 140.0, 70.0],
        [160.0, 90.0, 40.0],
        [70.0, 80.0, 60.0],
        [130.0, 130.0, 130.0],
    ];
    (0..classes)
        .map(|c| {
            let order = 2 + (c % 4) as u32;
            let amp = 0.10 + 0.06 * ((c / 4) % 3) as f64;
            LeafStyle {
                outline: Outline::Harmonic {
                    radius: 38.0,
                    terms: vec![
                        Harmonic {
                            order,
                            amplitude: amp,
                            phase: 0.0,
                        },
                        Harmonic {
                            order: 1 + (c % 3) as u32,
                            amplitude: 0.04 + 0.02 * (c % 2) as f64,
                            phase: 0.7 * c as f64,
                        },
                    ],
                },
                base_rgb: PALETTE[c % PALETTE.len()],
                stripe_period: 3.0 + (c % 5) as f64 * 2.0,
                stripe_amplitude: 10.0 + 4.0 * (c % 3) as f64,
                stripe_angle: 0.3 * c as f64,
                vein_pairs: (c % 4) as u32,
                vein_boost: 25.0 + 5.0 * (c % 2) as f64,
            }
        })
        .collect()
}

/// Writes `<root>/<species>/<nn>.png` for every class and instance.
pub fn write_dataset(
    root: &Path,
    styles: &[LeafStyle],
    per_class: usize,
    size: usize,
    jitter: Jitter,
    seed: u64,
) -> Result<()> {
    for (c, style) in styles.iter().enumerate() {
        let dir = root.join(format!("species_{c:02}"));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for i in 0..per_class {
            let img = render_leaf(style, size, jitter, seed ^ ((c as u64) << 32) ^ i as u64);
            img.save(dir.join(format!("{i:03}.png")))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_radius_at_axes() {
        let e = Outline::Ellipse {
            semi_major: 20.0,
            semi_minor: 10.0,
        };
        assert!((e.radius_at(0.0) - 20.0).abs() < 1e-12);
        assert!((e.radius_at(PI / 2.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rendering_is_deterministic() {
        let styles = default_styles(3);
        let a = render_leaf(&styles[1], 64, Jitter::MILD, 9);
        let b = render_leaf(&styles[1], 64, Jitter::MILD, 9);
        assert_eq!(a, b);
        let c = render_leaf(&styles[1], 64, Jitter::MILD, 10);
        assert_ne!(a, c);
    }

    #[test]
    fn rotation_turns_counter_clockwise_on_screen() {
        let e = Outline::Ellipse {
            semi_major: 20.0,
            semi_minor: 5.0,
        };
        let mut p = Placement::centered(61);
        p.rotation = PI / 2.0;
        let m = render_mask(&e, 61, 61, p);
        // major axis now vertical
        assert_eq!(m.get(30, 12, 0), 1);
        assert_eq!(m.get(12, 30, 0), 0);
    }
}

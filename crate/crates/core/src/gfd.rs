//! Generic Fourier descriptors from a polar Fourier transform of the leaf mask.
//!
//! The mask is resampled on a polar grid centred on the leaf centroid and
//! spanning the leaf's maximum radius. The 2-D transform over (radius, angle)
//! is summed directly; only coefficient magnitudes are kept, which removes the
//! dependence on rotation (a shift along the angular axis). Translation is
//! removed by the centroid origin and scale by the max-radius span.

use std::f64::consts::TAU;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{LeafMask, Point};
use crate::scalar::Real;

pub const DEFAULT_RADIAL_BINS: usize = 64;
pub const DEFAULT_ANGULAR_BINS: usize = 90;
pub const RADIAL_FREQUENCIES: usize = 6;
pub const ANGULAR_FREQUENCIES: usize = 4;
/// `(m + 1)(n + 1)` for the default frequency limits.
pub const DESCRIPTOR_LEN: usize = (RADIAL_FREQUENCIES + 1) * (ANGULAR_FREQUENCIES + 1);

/// Samples `f(r, θ_i)` on `radial_bins × angular_bins`, row-major by radius.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid<T = f64> {
    radial_bins: usize,
    angular_bins: usize,
    samples: Vec<T>,
    max_radius: f64,
    origin: Point,
}

impl<T: Real> PolarGrid<T> {
    /// Wraps arbitrary samples; used for direct transforms of synthetic grids.
    pub fn from_samples(radial_bins: usize, angular_bins: usize, samples: Vec<T>) -> Result<Self> {
        if radial_bins == 0 || angular_bins == 0 || samples.len() != radial_bins * angular_bins {
            return Err(Error::InvalidInput(format!(
                "polar grid {radial_bins}x{angular_bins} cannot hold {} samples",
                samples.len()
            )));
        }
        Ok(Self {
            radial_bins,
            angular_bins,
            samples,
            max_radius: radial_bins as f64,
            origin: Point::new(0.0, 0.0),
        })
    }

    pub fn radial_bins(&self) -> usize {
        self.radial_bins
    }

    pub fn angular_bins(&self) -> usize {
        self.angular_bins
    }

    #[inline]
    pub fn get(&self, r: usize, i: usize) -> T {
        self.samples[r * self.angular_bins + i]
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub fn origin(&self) -> Point {
        self.origin
    }
}

/// Resamples the binary leaf mask on a polar grid about its centroid.
///
/// Ring `r` sits at radius `r · R / radial_bins` where `R` is the largest
/// centroid distance of any leaf pixel; ray `i` at angle `2π i / angular_bins`.
/// Each sample takes the nearest pixel; samples off the frame are 0.
pub fn to_polar<T: Real>(mask: &LeafMask, radial_bins: usize, angular_bins: usize) -> Result<PolarGrid<T>> {
    if radial_bins == 0 || angular_bins == 0 {
        return Err(Error::InvalidInput("polar grid needs at least one bin per axis".into()));
    }
    if mask.area() == 0 {
        return Err(Error::DegenerateGeometry("empty mask".into()));
    }
    let c = mask.centroid();
    let (x0, y0, x1, y1) = mask.bbox();
    let mut max_r2 = 0.0f64;
    for y in y0..=y1 {
        for x in x0..=x1 {
            if mask.contains(x, y) {
                let d2 = (x as f64 - c.x).powi(2) + (y as f64 - c.y).powi(2);
                max_r2 = max_r2.max(d2);
            }
        }
    }
    let max_radius = max_r2.sqrt();
    if max_radius <= 0.0 {
        return Err(Error::DegenerateGeometry("mask has zero radial extent".into()));
    }

    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let trig: Vec<(f64, f64)> = (0..angular_bins)
        .map(|i| (TAU * i as f64 / angular_bins as f64).sin_cos())
        .collect();
    let mut samples = Vec::with_capacity(radial_bins * angular_bins);
    for r in 0..radial_bins {
        let rho = r as f64 * max_radius / radial_bins as f64;
        for &(s, co) in &trig {
            let x = (c.x + rho * co).round() as i64;
            let y = (c.y + rho * s).round() as i64;
            let on = x >= 0 && y >= 0 && x < w && y < h && mask.contains(x as usize, y as usize);
            samples.push(if on { T::one() } else { T::zero() });
        }
    }
    Ok(PolarGrid {
        radial_bins,
        angular_bins,
        samples,
        max_radius,
        origin: c,
    })
}

/// Complex coefficients `PF(ρ, φ)` for `0 ≤ ρ ≤ m`, `0 ≤ φ ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSpectrum<T = f64> {
    m: usize,
    n: usize,
    values: Vec<Complex<T>>,
}

impl<T: Real> PolarSpectrum<T> {
    #[inline]
    pub fn get(&self, rho: usize, phi: usize) -> Complex<T> {
        self.values[rho * (self.n + 1) + phi]
    }

    pub fn radial_frequencies(&self) -> usize {
        self.m
    }

    pub fn angular_frequencies(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }
}

/// `PF(ρ, φ) = Σ_r Σ_i f(r, θ_i) · exp[j2π(r ρ / R_s + i φ / T_s)]`.
///
/// Evaluated as a direct sum, factored by ring: the angular sum per ring is
/// formed first, then combined across rings. No FFT.
pub fn polar_fourier<T: Real>(grid: &PolarGrid<T>, m: usize, n: usize) -> PolarSpectrum<T> {
    let (rb, ab) = (grid.radial_bins, grid.angular_bins);
    let twiddle = |k: usize, period: usize| {
        let angle = TAU * (k % period) as f64 / period as f64;
        Complex::new(T::of(angle.cos()), T::of(angle.sin()))
    };

    // ring_sums[r][φ] = Σ_i f(r, i) e^{j2π iφ/T}
    let mut ring_sums = vec![Complex::new(T::zero(), T::zero()); rb * (n + 1)];
    for r in 0..rb {
        let row = &grid.samples[r * ab..(r + 1) * ab];
        for phi in 0..=n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (i, &f) in row.iter().enumerate() {
                if f != T::zero() {
                    acc = acc + twiddle(i * phi, ab) * f;
                }
            }
            ring_sums[r * (n + 1) + phi] = acc;
        }
    }

    let mut values = Vec::with_capacity((m + 1) * (n + 1));
    for rho in 0..=m {
        for phi in 0..=n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for r in 0..rb {
                acc = acc + twiddle(r * rho, rb) * ring_sums[r * (n + 1) + phi];
            }
            values.push(acc);
        }
    }
    PolarSpectrum { m, n, values }
}

/// Rotation-, scale- and translation-normalized shape descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GfdVector<T = f64> {
    pub values: Vec<T>,
}

impl<T: Real> GfdVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// First value `|PF(0,0)| / (2π ρ_max²)`, the rest `|PF(ρ,φ)| / |PF(0,0)|` in
/// row-major `(ρ, φ)` order.
///
/// `circle_radius` is the radius of the sampled circle in the grid's own radial
/// units, i.e. the number of radial bins for grids from [`to_polar`]. Measuring
/// it in bins rather than pixels keeps the first descriptor independent of the
/// leaf's size.
pub fn gfd_descriptors<T: Real>(spectrum: &PolarSpectrum<T>, circle_radius: T) -> Result<GfdVector<T>> {
    let dc = spectrum.get(0, 0).norm();
    if dc.is_nan() || dc <= T::zero() {
        return Err(Error::EmptyShape);
    }
    let circle = T::of(TAU) * circle_radius * circle_radius;
    let values = spectrum
        .values
        .iter()
        .enumerate()
        .map(|(k, c)| if k == 0 { dc / circle } else { c.norm() / dc })
        .collect();
    Ok(GfdVector { values })
}

/// Full descriptor pipeline with the given grid resolution and `m = 6`, `n = 4`.
pub fn generic_fourier_descriptors<T: Real>(
    mask: &LeafMask,
    radial_bins: usize,
    angular_bins: usize,
) -> Result<GfdVector<T>> {
    let grid = to_polar::<T>(mask, radial_bins, angular_bins)?;
    let spectrum = polar_fourier(&grid, RADIAL_FREQUENCIES, ANGULAR_FREQUENCIES);
    gfd_descriptors(&spectrum, T::of_usize(radial_bins))
}

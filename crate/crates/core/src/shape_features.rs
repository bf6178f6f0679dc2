//! The five geometric leaf descriptors: eccentricity, roundness, dispersion,
//! solidity and convexity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{axis_lengths, LeafMask};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFeatures<T = f64> {
    pub eccentricity: T,
    pub roundness: T,
    pub dispersion: T,
    pub solidity: T,
    pub convexity: T,
}

impl<T: Real> GeometricFeatures<T> {
    pub const LEN: usize = 5;

    pub fn to_array(&self) -> [T; 5] {
        [
            self.eccentricity,
            self.roundness,
            self.dispersion,
            self.solidity,
            self.convexity,
        ]
    }
}

fn ratio<T: Real>(num: f64, den: f64, what: &str) -> Result<T> {
    if den <= 0.0 || !den.is_finite() {
        return Err(Error::DegenerateGeometry(format!("{what}: zero denominator")));
    }
    Ok(T::of(num / den))
}

/// Minor over major axis length, `w / l`.
pub fn eccentricity<T: Real>(mask: &LeafMask) -> Result<T> {
    let (l, w) = axis_lengths(mask);
    eccentricity_from(w, l)
}

pub fn eccentricity_from<T: Real>(minor: f64, major: f64) -> Result<T> {
    ratio(minor, major, "eccentricity")
}

/// `A / P²`, without the usual `4π` factor.
pub fn roundness<T: Real>(mask: &LeafMask) -> Result<T> {
    roundness_from(mask.area() as f64, mask.perimeter())
}

pub fn roundness_from<T: Real>(area: f64, perimeter: f64) -> Result<T> {
    ratio(area, perimeter * perimeter, "roundness")
}

/// Largest over smallest centroid distance among contour pixels.
pub fn dispersion<T: Real>(mask: &LeafMask) -> Result<T> {
    let c = mask.centroid();
    let (lo, hi) = mask
        .contour()
        .iter()
        .map(|&(x, y)| (x as f64 - c.x).hypot(y as f64 - c.y))
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
    if mask.contour().is_empty() {
        return Err(Error::DegenerateGeometry("dispersion: empty contour".into()));
    }
    ratio(hi, lo, "dispersion (centroid on contour)")
}

/// Region area over convex hull area.
pub fn solidity<T: Real>(mask: &LeafMask) -> Result<T> {
    ratio(mask.area() as f64, mask.convex_area() as f64, "solidity")
}

/// Convex hull perimeter over region perimeter.
pub fn convexity<T: Real>(mask: &LeafMask) -> Result<T> {
    ratio(mask.convex_perimeter(), mask.perimeter(), "convexity")
}

pub fn geometric_features<T: Real>(mask: &LeafMask) -> Result<GeometricFeatures<T>> {
    Ok(GeometricFeatures {
        eccentricity: eccentricity(mask)?,
        roundness: roundness(mask)?,
        dispersion: dispersion(mask)?,
        solidity: solidity(mask)?,
        convexity: convexity(mask)?,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::imgproc::RasterImage;
    use crate::synth::{render_mask, Harmonic, Outline, Placement};

    fn measure(outline: &Outline, size: usize, place: Placement) -> LeafMask {
        LeafMask::from_binary(&render_mask(outline, size, size, place)).unwrap()
    }

    fn feats(outline: &Outline, size: usize, place: Placement) -> GeometricFeatures<f64> {
        geometric_features(&measure(outline, size, place)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn blob() -> Outline {
        Outline::Harmonic {
            radius: 45.0,
            terms: vec![
                Harmonic { order: 2, amplitude: 0.18, phase: 0.3 },
                Harmonic { order: 3, amplitude: 0.07, phase: 1.1 },
            ],
        }
    }

    #[test]
    fn direct_formulas() {
        assert_eq!(eccentricity_from::<f64>(5.0, 10.0).unwrap(), 0.5);
        let r = 10.0;
        let ideal: f64 = roundness_from(PI * r * r, 2.0 * PI * r).unwrap();
        assert!((ideal - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(roundness_from::<f64>(10.0, 0.0).is_err());
        assert!(eccentricity_from::<f64>(1.0, 0.0).is_err());
    }

    #[test]
    fn disk_values() {
        let f = feats(&Outline::circle(50.0), 121, Placement::centered(121));
        assert!((f.eccentricity - 1.0).abs() < 0.02, "{f:?}");
        assert!((f.dispersion - 1.0).abs() < 0.05, "{f:?}");
        assert!((f.solidity - 1.0).abs() < 0.02, "{f:?}");
        assert!((f.convexity - 1.0).abs() < 0.02, "{f:?}");
        assert!(rel(f.roundness, 1.0 / (4.0 * PI)) < 0.10, "{f:?}");
    }

    #[test]
    fn rectangle_eccentricity() {
        let img = RasterImage::from_fn_gray(80, 40, |x, y| {
            u8::from((20..60).contains(&x) && (15..25).contains(&y))
        });
        let e: f64 = eccentricity(&LeafMask::from_binary(&img).unwrap()).unwrap();
        let oracle = ((10.0f64 * 10.0 - 1.0) / (40.0 * 40.0 - 1.0)).sqrt();
        assert!((e - oracle).abs() < 1e-12);
        assert!((e - 0.25).abs() < 0.02);
    }

    #[test]
    fn thin_strip_is_far_less_round_than_disk() {
        // 1×100 strip: A = 100, contour walks out and back, P = 2·99
        let strip: f64 = roundness_from(100.0, 198.0).unwrap();
        let disk = feats(&Outline::circle(50.0), 121, Placement::centered(121)).roundness;
        assert!(strip < disk / 10.0);
        // a 2-pixel strip survives segmentation and agrees with the formula
        let img = RasterImage::from_fn_gray(110, 6, |x, y| u8::from((5..105).contains(&x) && (2..4).contains(&y)));
        let m = LeafMask::from_binary(&img).unwrap();
        assert_eq!(m.area(), 200);
        assert_eq!(m.perimeter(), 200.0);
        assert!(roundness::<f64>(&m).unwrap() < disk / 10.0);
    }

    #[test]
    fn ellipse_dispersion() {
        let e = Outline::Ellipse { semi_major: 60.0, semi_minor: 30.0 };
        let d = feats(&e, 141, Placement::centered(141)).dispersion;
        assert!((d - 2.0).abs() < 0.1, "{d}");
    }

    #[test]
    fn dispersion_is_scale_invariant() {
        let e = Outline::Ellipse { semi_major: 40.0, semi_minor: 25.0 };
        let d1 = feats(&e, 101, Placement::centered(101)).dispersion;
        let mut p = Placement::centered(201);
        p.scale = 2.0;
        let d2 = feats(&e, 201, p).dispersion;
        assert!((d1 - d2).abs() < 0.05, "{d1} {d2}");
    }

    #[test]
    fn star_has_low_solidity() {
        let star = Outline::Harmonic {
            radius: 40.0,
            terms: vec![Harmonic { order: 5, amplitude: 0.5, phase: 0.0 }],
        };
        let m = measure(&star, 121, Placement::centered(121));
        // oracle: count pixel centres inside the hull polygon independently
        let hull = m.hull();
        let mut inside = 0usize;
        for y in 0..121 {
            for x in 0..121 {
                let p = crate::imgproc::Point::new(x as f64, y as f64);
                let n = hull.len();
                if (0..n).all(|i| crate::imgproc::hull::cross(hull[i], hull[(i + 1) % n], p) >= 0.0) {
                    inside += 1;
                }
            }
        }
        assert_eq!(inside, m.convex_area());
        let s: f64 = solidity(&m).unwrap();
        assert!(s < 0.8, "{s}");
    }

    #[test]
    fn features_are_translation_invariant() {
        let o = blob();
        let a = feats(&o, 160, Placement { scale: 1.0, rotation: 0.4, center: (70.0, 75.0) });
        let b = feats(&o, 160, Placement { scale: 1.0, rotation: 0.4, center: (83.0, 69.0) });
        assert_eq!(a, b);
    }

    #[test]
    fn features_are_rotation_invariant() {
        let o = blob();
        let base = feats(&o, 161, Placement::centered(161));
        for deg in [30.0f64, 45.0, 90.0] {
            let mut p = Placement::centered(161);
            p.rotation = deg.to_radians();
            let f = feats(&o, 161, p);
            for (a, b) in f.to_array().iter().zip(base.to_array()) {
                assert!(rel(*a, b) < 0.05, "rotation {deg}: {f:?} vs {base:?}");
            }
        }
    }

    #[test]
    fn features_are_scale_invariant() {
        let o = blob();
        let base = feats(&o, 161, Placement::centered(161));
        for s in [0.5f64, 2.0] {
            let size = (161.0 * s) as usize + 1;
            let mut p = Placement::centered(size);
            p.scale = s;
            let f = feats(&o, size, p);
            let tol = [0.05, 0.10, 0.05, 0.05, 0.05];
            for ((a, b), t) in f.to_array().iter().zip(base.to_array()).zip(tol) {
                assert!(rel(*a, b) < t, "scale {s}: {f:?} vs {base:?}");
            }
        }
    }

    #[test]
    fn concavity_lowers_solidity() {
        let convex = Outline::Ellipse { semi_major: 45.0, semi_minor: 35.0 };
        let m = render_mask(&convex, 121, 121, Placement::centered(121));
        let mut dented = m.clone();
        for y in 50..71 {
            for x in 80..121 {
                dented.set(x, y, 0, 0);
            }
        }
        let s0: f64 = solidity(&LeafMask::from_binary(&m).unwrap()).unwrap();
        let s1: f64 = solidity(&LeafMask::from_binary(&dented).unwrap()).unwrap();
        assert!(s1 < s0);
    }

    #[test]
    fn bounds_hold_and_f32_agrees() {
        let m = measure(&blob(), 161, Placement::centered(161));
        let f: GeometricFeatures<f64> = geometric_features(&m).unwrap();
        assert!(f.eccentricity > 0.0 && f.eccentricity <= 1.0);
        assert!(f.dispersion >= 1.0);
        assert!(f.solidity > 0.0 && f.solidity <= 1.0);
        assert!(f.convexity > 0.0 && f.convexity <= 1.01);
        let g: GeometricFeatures<f32> = geometric_features(&m).unwrap();
        assert!((g.solidity as f64 - f.solidity).abs() < 1e-6);
    }
}

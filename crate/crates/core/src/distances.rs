//! The seven dissimilarity measures used to compare feature vectors.
//!
//! | measure | definition |
//! |---|---|
//! | city block | `Σ |q−r|` |
//! | Euclidean | `Σ (q−r)²` (no square root; ranking is unaffected) |
//! | Canberra | `Σ |q−r| / (|q|+|r|)`, 0/0 terms are 0 |
//! | Bray-Curtis | `Σ |q−r| / Σ (q+r)`, 0 when the denominator is 0 |
//! | χ² | `Σ (q−r)² / m`, `m = (q+r)/2`, terms with `m = 0` are 0 |
//! | Kullback-Leibler | `Σ q·ln((q+ε)/(r+ε)) − q + r` |
//! | Jensen-Shannon | `Σ q·ln((2q+ε)/(q+r+ε)) + r·ln((2r+ε)/(q+r+ε))` |
//!
//! KL and JS clamp their inputs to `[0, ∞)`. The `− q + r` terms of KL vanish when
//! both vectors carry equal mass and keep the divergence nonnegative on the
//! unnormalized feature vectors the retrieval pipeline feeds it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    CityBlock,
    Euclidean,
    Canberra,
    BrayCurtis,
    ChiSquare,
    KullbackLeibler,
    JensenShannon,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::CityBlock,
        Measure::Euclidean,
        Measure::Canberra,
        Measure::BrayCurtis,
        Measure::ChiSquare,
        Measure::KullbackLeibler,
        Measure::JensenShannon,
    ];

    /// Kebab-case token used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            Measure::CityBlock => "city-block",
            Measure::Euclidean => "euclidean",
            Measure::Canberra => "canberra",
            Measure::BrayCurtis => "bray-curtis",
            Measure::ChiSquare => "chi-square",
            Measure::KullbackLeibler => "kullback-leibler",
            Measure::JensenShannon => "jensen-shannon",
        }
    }

    pub fn is_symmetric(self) -> bool {
        self != Measure::KullbackLeibler
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown measure `{s}` (expected one of: {})",
                    Measure::ALL.map(Measure::name).join(", ")
                ))
            })
    }
}

/// A measure together with its zero guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric<T = f64> {
    pub measure: Measure,
    pub epsilon: T,
}

impl<T: Real> Metric<T> {
    pub fn new(measure: Measure) -> Self {
        Self {
            measure,
            epsilon: T::of(DEFAULT_EPSILON),
        }
    }

    pub fn with_epsilon(measure: Measure, epsilon: T) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= T::zero() {
            return Err(Error::InvalidInput("epsilon must be a positive finite number".into()));
        }
        Ok(Self { measure, epsilon })
    }

    /// Checked evaluation: rejects length mismatches and NaNs.
    pub fn distance(&self, q: &[T], r: &[T]) -> Result<T> {
        if q.len() != r.len() {
            return Err(Error::ShapeMismatch {
                expected: q.len(),
                found: r.len(),
            });
        }
        if q.is_empty() {
            return Err(Error::InvalidInput("distance between empty vectors".into()));
        }
        if let Some(i) = q.iter().chain(r).position(|v| v.is_nan()) {
            return Err(Error::NanInput(i % q.len()));
        }
        Ok(self.eval(q, r))
    }

    /// Evaluation without validation; callers guarantee equal lengths.
    #[inline]
    pub fn eval(&self, q: &[T], r: &[T]) -> T {
        debug_assert_eq!(q.len(), r.len());
        let eps = self.epsilon;
        let zero = T::zero();
        let pairs = q.iter().copied().zip(r.iter().copied());
        match self.measure {
            Measure::CityBlock => pairs.map(|(a, b)| (a - b).abs()).sum(),
            Measure::Euclidean => pairs.map(|(a, b)| (a - b) * (a - b)).sum(),
            Measure::Canberra => pairs
                .map(|(a, b)| {
                    let den = a.abs() + b.abs();
                    if den > zero {
                        (a - b).abs() / den
                    } else {
                        zero
                    }
                })
                .sum(),
            Measure::BrayCurtis => {
                let (num, den) = pairs.fold((zero, zero), |(n, d), (a, b)| (n + (a - b).abs(), d + (a + b)));
                if den != zero {
                    num / den
                } else {
                    zero
                }
            }
            Measure::ChiSquare => {
                let half = T::of(0.5);
                pairs
                    .map(|(a, b)| {
                        let m = (a + b) * half;
                        if m != zero {
                            (a - b) * (a - b) / m
                        } else {
                            zero
                        }
                    })
                    .sum()
            }
            Measure::KullbackLeibler => pairs
                .map(|(a, b)| {
                    let (a, b) = (a.max(zero), b.max(zero));
                    if a == zero {
                        return b;
                    }
                    (a * ((a + eps) / (b + eps)).ln() - a + b).max(zero)
                })
                .sum(),
            Measure::JensenShannon => {
                let two = T::of(2.0);
                pairs
                    .map(|(a, b)| {
                        let (a, b) = (a.max(zero), b.max(zero));
                        let mid = a + b + eps;
                        let t = a * ((two * a + eps) / mid).ln() + b * ((two * b + eps) / mid).ln();
                        t.max(zero)
                    })
                    .sum()
            }
        }
    }
}

/// Checked distance with the default epsilon.
pub fn distance<T: Real>(measure: Measure, q: &[T], r: &[T]) -> Result<T> {
    Metric::new(measure).distance(q, r)
}

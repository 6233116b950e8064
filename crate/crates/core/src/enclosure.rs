//! Closed intervals of extended reals certifying `lo <= value <= hi`.

use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative amount by which `lo` may exceed `hi` before construction fails.
/// Analytically tight pairs (the sharp equality cases) can come out one or
/// two ulps apart; such pairs are stored widened, never narrowed.
const INVERSION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Enclosure {
    #[serde(serialize_with = "serialize_extended")]
    lo: f64,
    #[serde(serialize_with = "serialize_extended")]
    hi: f64,
}

impl Enclosure {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::InvertedEnclosure { lo, hi });
        }
        if lo <= hi {
            return Ok(Self { lo, hi });
        }
        let scale = 1f64.max(lo.abs()).max(hi.abs());
        if lo - hi <= INVERSION_SLACK * scale {
            Ok(Self { lo: hi, hi: lo })
        } else {
            Err(Error::InvertedEnclosure { lo, hi })
        }
    }

    pub fn point(value: f64) -> Self {
        Self { lo: value, hi: value }
    }

    /// The trivially true enclosure.
    pub fn everything() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        if self.lo == self.hi {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }

    pub fn contains_with_slack(&self, value: f64, slack: f64) -> bool {
        self.lo - slack <= value && value <= self.hi + slack
    }

    /// `self` lies inside `other`.
    pub fn is_subset_of(&self, other: &Enclosure) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Intersection of two enclosures of the same quantity. Returns `None`
    /// when they are disjoint beyond the inversion slack.
    pub fn intersect(&self, other: &Enclosure) -> Option<Enclosure> {
        Enclosure::new(self.lo.max(other.lo), self.hi.min(other.hi)).ok()
    }

    /// `c * [lo, hi]`, flipping the ends for negative `c`.
    pub fn scale(&self, c: f64) -> Enclosure {
        let (a, b) = (scaled(c, self.lo), scaled(c, self.hi));
        if a <= b {
            Enclosure { lo: a, hi: b }
        } else {
            Enclosure { lo: b, hi: a }
        }
    }

    pub fn shift(&self, c: f64) -> Enclosure {
        Enclosure {
            lo: self.lo + c,
            hi: self.hi + c,
        }
    }

    /// `c - [lo, hi]`.
    pub fn subtract_from(&self, c: f64) -> Enclosure {
        Enclosure {
            lo: c - self.hi,
            hi: c - self.lo,
        }
    }
}

impl Add for Enclosure {
    type Output = Enclosure;

    fn add(self, rhs: Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl std::iter::Sum for Enclosure {
    fn sum<I: Iterator<Item = Enclosure>>(iter: I) -> Enclosure {
        iter.fold(Enclosure::point(0.0), |acc, e| acc + e)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn scaled(c: f64, v: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * v
    }
}

/// `w * d` with the convention `0 * (+-inf) = 0`. Bounds multiply possibly
/// infinite one-sided derivatives by squared distances that vanish at cell
/// endpoints; those terms drop out.
pub(crate) fn weighted(w: f64, d: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * d
    }
}

/// Like [`weighted`] but only evaluates `d` when the weight is nonzero.
pub(crate) fn weighted_with<F>(w: f64, d: F) -> Result<f64>
where
    F: FnOnce() -> Result<f64>,
{
    if w == 0.0 {
        Ok(0.0)
    } else {
        Ok(w * d()?)
    }
}

/// Infinite values are written as the strings `"inf"` / `"-inf"` since JSON
/// has no literal for them.
pub(crate) fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

//! Closed real intervals, possibly empty.

use serde::de::Deserializer;
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]` or the empty set.
///
/// Serialized as `{"lo": .., "hi": .., "empty": ..}` with `null` endpoints
/// when empty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealInterval {
    lo: f64,
    hi: f64,
    empty: bool,
}

impl RealInterval {
    /// `[lo, hi]`, or empty when `lo > hi`.
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo > hi || lo.is_nan() || hi.is_nan() {
            Self::empty()
        } else {
            Self { lo, hi, empty: false }
        }
    }

    pub fn empty() -> Self {
        Self { lo: f64::NAN, hi: f64::NAN, empty: true }
    }

    pub fn singleton(x: f64) -> Self {
        Self::new(x, x)
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn lo(&self) -> Option<f64> {
        (!self.empty).then_some(self.lo)
    }

    pub fn hi(&self) -> Option<f64> {
        (!self.empty).then_some(self.hi)
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        (!self.empty).then_some((self.lo, self.hi))
    }

    pub fn width(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.contains_tol(x, 0.0)
    }

    pub fn contains_tol(&self, x: f64, tol: f64) -> bool {
        !self.empty && x >= self.lo - tol && x <= self.hi + tol
    }

    /// `self ⊆ other` up to `tol` on each endpoint.
    pub fn is_subset_of(&self, other: &Self, tol: f64) -> bool {
        match (self.bounds(), other.bounds()) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some((a, b)), Some((c, d))) => a >= c - tol && b <= d + tol,
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        match (self.bounds(), other.bounds()) {
            (Some((a, b)), Some((c, d))) => Self::new(a.max(c), b.min(d)),
            _ => Self::empty(),
        }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Self) -> Self {
        match (self.bounds(), other.bounds()) {
            (None, _) => *other,
            (_, None) => *self,
            (Some((a, b)), Some((c, d))) => Self::new(a.min(c), b.max(d)),
        }
    }

    /// Smallest interval containing every point.
    pub fn hull_of_points(points: impl IntoIterator<Item = f64>) -> Self {
        points.into_iter().fold(Self::empty(), |acc, x| acc.hull(&Self::singleton(x)))
    }

    /// Set of products `{xy : x ∈ self, y ∈ other}`.
    pub fn product(&self, other: &Self) -> Self {
        match (self.bounds(), other.bounds()) {
            (Some((a, b)), Some((c, d))) => Self::hull_of_points([a * c, a * d, b * c, b * d]),
            _ => Self::empty(),
        }
    }

    /// Minkowski sum.
    pub fn sum(&self, other: &Self) -> Self {
        match (self.bounds(), other.bounds()) {
            (Some((a, b)), Some((c, d))) => Self::new(a + c, b + d),
            _ => Self::empty(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        match self.bounds() {
            Some((a, b)) => Self::hull_of_points([a * s, b * s]),
            None => Self::empty(),
        }
    }

    pub fn shift(&self, t: f64) -> Self {
        match self.bounds() {
            Some((a, b)) => Self::new(a + t, b + t),
            None => Self::empty(),
        }
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        self.intersect(&Self::new(lo, hi))
    }
}

impl std::fmt::Display for RealInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.bounds() {
            None => write!(f, "∅"),
            Some((a, b)) => write!(f, "[{a}, {b}]"),
        }
    }
}

impl Serialize for RealInterval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RealInterval", 3)?;
        st.serialize_field("lo", &self.lo())?;
        st.serialize_field("hi", &self.hi())?;
        st.serialize_field("empty", &self.empty)?;
        st.end()
    }
}

#[derive(Deserialize)]
struct Raw {
    lo: Option<f64>,
    hi: Option<f64>,
    #[serde(default)]
    empty: bool,
}

impl<'de> Deserialize<'de> for RealInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Raw::deserialize(d)?;
        match (raw.empty, raw.lo, raw.hi) {
            (true, _, _) => Ok(Self::empty()),
            (false, Some(lo), Some(hi)) if lo <= hi => Ok(Self::new(lo, hi)),
            _ => Err(serde::de::Error::custom("non-empty interval needs lo <= hi")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = RealInterval::new(0.0, 1.0);
        let b = RealInterval::new(0.5, 2.0);
        assert_eq!(a.intersect(&b), RealInterval::new(0.5, 1.0));
        assert_eq!(a.hull(&b), RealInterval::new(0.0, 2.0));
        assert!(RealInterval::new(2.0, 1.0).is_empty());
        assert!(a.intersect(&RealInterval::new(3.0, 4.0)).is_empty());
        assert!(RealInterval::empty().is_subset_of(&a, 0.0));
        assert!(!a.is_subset_of(&RealInterval::empty(), 0.0));
        assert!(RealInterval::new(0.1, 0.9).is_subset_of(&a, 0.0));
    }

    #[test]
    fn product_with_negatives() {
        let a = RealInterval::new(-1.0, 2.0);
        let b = RealInterval::new(-3.0, 0.5);
        assert_eq!(a.product(&b), RealInterval::new(-6.0, 3.0));
        assert!(a.product(&RealInterval::empty()).is_empty());
    }

    #[test]
    fn serde_round_trip() {
        let a = RealInterval::new(0.25, 0.75);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"lo":0.25,"hi":0.75,"empty":false}"#);
        assert_eq!(serde_json::from_str::<RealInterval>(&s).unwrap(), a);
        let e = serde_json::to_string(&RealInterval::empty()).unwrap();
        assert_eq!(e, r#"{"lo":null,"hi":null,"empty":true}"#);
        assert!(serde_json::from_str::<RealInterval>(&e).unwrap().is_empty());
        assert!(serde_json::from_str::<RealInterval>(r#"{"lo":1.0,"hi":0.0}"#).is_err());
    }
}

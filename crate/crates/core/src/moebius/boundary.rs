//! Points of the closed upper half-plane and the boundary circle metric.
//!
//! The boundary ∂H = ℝ ∪ {∞} is identified with the unit circle by the
//! Cayley transform z ↦ (z − i)/(z + i). Distances are angles on that
//! circle, so ∞ (sent to 1) is an ordinary point and every distance lies
//! in [0, π].

use std::cmp::Ordering;

use crate::scalar::{Scalar, DEFAULT_PRECISION};

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryPoint {
    Finite(Scalar),
    Infinity,
}

impl BoundaryPoint {
    pub fn finite(x: Scalar) -> Self {
        BoundaryPoint::Finite(x)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<&Scalar> {
        match self {
            BoundaryPoint::Finite(x) => Some(x),
            BoundaryPoint::Infinity => None,
        }
    }

    pub fn prec(&self) -> Option<u32> {
        self.as_finite().map(Scalar::prec)
    }

    /// `atan2(1, x)` in (0, π); ∞ has half-angle 0. The Cayley image of
    /// `x` is `exp(−2i·half_angle)`.
    pub fn half_angle(&self, prec: u32) -> Scalar {
        match self {
            BoundaryPoint::Finite(x) => Scalar::one(prec).atan2(x),
            BoundaryPoint::Infinity => Scalar::zero(prec),
        }
    }

    /// Argument of the Cayley image in (−π, π].
    pub fn cayley_angle(&self, prec: u32) -> Scalar {
        let pi = Scalar::pi(prec);
        let theta = -(Scalar::from_int(2, prec) * self.half_angle(prec));
        if theta <= -&pi {
            theta + Scalar::from_int(2, prec) * pi
        } else {
            theta
        }
    }

    /// Inverse of [`half_angle`](Self::half_angle): the point `cot(phi)`,
    /// with multiples of π mapped to ∞.
    pub fn from_half_angle(phi: &Scalar) -> Self {
        let s = phi.sin();
        if s.is_zero() {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(phi.cos() / s)
        }
    }

    pub fn to_decimal(&self) -> String {
        match self {
            BoundaryPoint::Finite(x) => x.to_decimal(),
            BoundaryPoint::Infinity => "inf".to_string(),
        }
    }

    pub fn to_display(&self, digits: usize) -> String {
        match self {
            BoundaryPoint::Finite(x) => x.to_display(digits),
            BoundaryPoint::Infinity => "inf".to_string(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            BoundaryPoint::Finite(x) => x.to_f64(),
            BoundaryPoint::Infinity => f64::INFINITY,
        }
    }
}

impl serde::Serialize for BoundaryPoint {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_decimal())
    }
}

impl std::fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryPoint::Finite(x) => x.fmt(f),
            BoundaryPoint::Infinity => write!(f, "inf"),
        }
    }
}

fn common_prec(x: &BoundaryPoint, y: &BoundaryPoint) -> u32 {
    match (x.prec(), y.prec()) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => DEFAULT_PRECISION,
    }
}

/// Angular distance between the Cayley images of `x` and `y`.
pub fn chordal_distance(x: &BoundaryPoint, y: &BoundaryPoint) -> Scalar {
    let prec = common_prec(x, y);
    half_angle_distance(&x.half_angle(prec), &y.half_angle(prec))
}

/// Distance between two half-angles in [0, π), as a circle angle.
pub(crate) fn half_angle_distance(a: &Scalar, b: &Scalar) -> Scalar {
    let prec = a.prec().max(b.prec());
    let pi = Scalar::pi(prec);
    let d = (a - b).abs();
    let d = if d > pi { &d - &pi } else { d };
    let other = &pi - &d;
    Scalar::from_int(2, prec) * d.min(other)
}

/// Largest pairwise chordal distance in `points` (0 for fewer than two).
pub fn chordal_diameter(points: &[BoundaryPoint]) -> Scalar {
    let prec = points
        .iter()
        .filter_map(BoundaryPoint::prec)
        .max()
        .unwrap_or(DEFAULT_PRECISION);
    let angles: Vec<Scalar> = points.iter().map(|p| p.half_angle(prec)).collect();
    half_angle_diameter(angles, prec)
}

/// Diameter of a set of half-angles in [0, π). Sorts once, then sweeps
/// each point against its approximate antipode.
pub(crate) fn half_angle_diameter(mut angles: Vec<Scalar>, prec: u32) -> Scalar {
    let n = angles.len();
    if n < 2 {
        return Scalar::zero(prec);
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let pi = Scalar::pi(prec);
    let half_pi = &pi / Scalar::from_int(2, prec);
    let ext: Vec<Scalar> = angles.iter().cloned().chain(angles.iter().map(|a| a + &pi)).collect();
    let mut best = Scalar::zero(prec);
    let mut j = 0usize;
    for i in 0..n {
        if j < i {
            j = i;
        }
        while j + 1 < i + n && &ext[j + 1] - &ext[i] <= half_pi {
            j += 1;
        }
        for k in [j, j + 1] {
            if k > i && k < i + n {
                let d = half_angle_distance(&ext[i], &ext[k]);
                if d > best {
                    best = d;
                }
            }
        }
    }
    best
}

/// Point of the closed upper half-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfPlanePoint {
    pub re: Scalar,
    pub im: Scalar,
}

impl HalfPlanePoint {
    /// Returns `None` when `im < 0`.
    pub fn new(re: Scalar, im: Scalar) -> Option<Self> {
        if im.is_negative() {
            None
        } else {
            Some(HalfPlanePoint { re, im })
        }
    }

    pub fn is_boundary(&self) -> bool {
        self.im.is_zero()
    }

    /// Euclidean distance, for residual checks.
    pub fn distance(&self, other: &HalfPlanePoint) -> Scalar {
        let dr = &self.re - &other.re;
        let di = &self.im - &other.im;
        (dr.square() + di.square()).sqrt()
    }
}

use crate::error::{Error, Result};
use crate::moebius::boundary::{BoundaryPoint, HalfPlanePoint};
use crate::scalar::Scalar;

/// Real Möbius transformation `x ↦ (m11·x + m12)/(m21·x + m22)` of the
/// closed upper half-plane.
///
/// Matrices are kept in projective normal form: determinant 1 and the
/// first nonzero entry (row-major) positive. Every constructor and every
/// product renormalizes, so long compositions stay well conditioned.
#[derive(Clone, Debug, PartialEq)]
pub struct MoebiusMap {
    m: [Scalar; 4],
}

impl MoebiusMap {
    pub fn new(m11: Scalar, m12: Scalar, m21: Scalar, m22: Scalar) -> Result<Self> {
        let det = &m11 * &m22 - &m12 * &m21;
        if !det.is_positive() {
            return Err(Error::NonPositiveDeterminant);
        }
        Ok(Self::normalized([m11, m12, m21, m22], det))
    }

    pub fn identity(prec: u32) -> Self {
        MoebiusMap {
            m: [
                Scalar::one(prec),
                Scalar::zero(prec),
                Scalar::zero(prec),
                Scalar::one(prec),
            ],
        }
    }

    fn normalized(m: [Scalar; 4], det: Scalar) -> Self {
        let s = det.sqrt();
        Self::scaled(m, s)
    }

    /// Sign fix only, for products of maps already of determinant 1.
    ///
    /// Once entries are large the computed determinant cancels
    /// catastrophically, so it is only re-divided out while the entries
    /// stay below `2^(prec/8)`.
    fn renormalized(m: [Scalar; 4]) -> Self {
        let prec = m[0].prec();
        let limit = Scalar::pow2((prec / 8) as i32, prec);
        let big = m.iter().any(|e| e.abs() > limit);
        if big {
            Self::scaled(m, Scalar::one(prec))
        } else {
            let det = &m[0] * &m[3] - &m[1] * &m[2];
            Self::normalized(m, det)
        }
    }

    fn scaled(m: [Scalar; 4], s: Scalar) -> Self {
        let flip = m
            .iter()
            .find(|e| !e.is_zero())
            .map(Scalar::is_negative)
            .unwrap_or(false);
        let s = if flip { -s } else { s };
        let [a, b, c, d] = m;
        MoebiusMap {
            m: [a / &s, b / &s, c / &s, d / &s],
        }
    }

    pub fn entries(&self) -> &[Scalar; 4] {
        &self.m
    }

    pub fn prec(&self) -> u32 {
        self.m[0].prec()
    }

    pub fn det(&self) -> Scalar {
        &self.m[0] * &self.m[3] - &self.m[1] * &self.m[2]
    }

    pub fn trace(&self) -> Scalar {
        &self.m[0] + &self.m[3]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        let [a, b, c, d] = &self.m;
        let [e, f, g, h] = &other.m;
        Self::renormalized([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    pub fn inverse(&self) -> MoebiusMap {
        let [a, b, c, d] = &self.m;
        Self::renormalized([d.clone(), -b, -c, a.clone()])
    }

    /// `self` composed with itself `n` times, by repeated squaring.
    pub fn power(&self, mut n: u64) -> MoebiusMap {
        let mut result = MoebiusMap::identity(self.prec());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.compose(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base);
            }
        }
        result
    }

    /// The finite point sent to ∞, if any.
    pub fn pole(&self) -> BoundaryPoint {
        let [_, _, c, d] = &self.m;
        if c.is_zero() {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(-(d / c))
        }
    }

    pub fn apply_boundary(&self, x: &BoundaryPoint) -> BoundaryPoint {
        let [a, b, c, d] = &self.m;
        match x {
            BoundaryPoint::Finite(x) => {
                let den = c * x + d;
                if den.is_zero() {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((a * x + b) / den)
                }
            }
            BoundaryPoint::Infinity => {
                if c.is_zero() {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(a / c)
                }
            }
        }
    }

    /// Image of an interior or boundary point under the same formula in
    /// complex arithmetic.
    pub fn apply_interior(&self, z: &HalfPlanePoint) -> Result<HalfPlanePoint> {
        let [a, b, c, d] = &self.m;
        let (x, y) = (&z.re, &z.im);
        let den_re = c * x + d;
        let den_im = c * y;
        let den_norm = den_re.square() + den_im.square();
        if den_norm.is_zero() {
            return Err(Error::PoleOnBoundary);
        }
        let num_re = a * x + b;
        let num_im = a * y;
        let re = (&num_re * &den_re + &num_im * &den_im) / &den_norm;
        // Im((a z + b)/(c z + d)) = det · Im z / |c z + d|², det = 1
        let im = y / &den_norm;
        Ok(HalfPlanePoint { re, im })
    }

    /// Derivative of the boundary action at `x`.
    ///
    /// At a finite point this is `det/(m21·x + m22)²`. At ∞ the source is
    /// read in the chart `u = 1/x`; the target uses the same chart when ∞
    /// is fixed and the finite chart otherwise.
    pub fn derivative_at(&self, x: &BoundaryPoint) -> Result<Scalar> {
        let [a, _, c, d] = &self.m;
        let det = Scalar::one(self.prec());
        match x {
            BoundaryPoint::Finite(x) => {
                let den = c * x + d;
                if den.is_zero() {
                    Err(Error::PoleDerivative)
                } else {
                    Ok(det / den.square())
                }
            }
            BoundaryPoint::Infinity => {
                if c.is_zero() {
                    Ok(det / a.square())
                } else {
                    Ok(-(det / c.square()))
                }
            }
        }
    }

    /// Sup-norm distance to the projective identity (either sign).
    pub fn distance_to_identity(&self) -> Scalar {
        let prec = self.prec();
        let one = Scalar::one(prec);
        let [a, b, c, d] = &self.m;
        let off = b.abs().max(c.abs());
        let plus = (a - &one).abs().max((d - &one).abs());
        let minus = (a + &one).abs().max((d + &one).abs());
        off.max(plus.min(minus))
    }

    pub fn is_projective_identity(&self, tol: &Scalar) -> bool {
        self.distance_to_identity() <= *tol
    }
}

/// `first ∘ second`.
pub fn compose(first: &MoebiusMap, second: &MoebiusMap) -> MoebiusMap {
    first.compose(second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::boundary::chordal_distance;

    const P: u32 = 128;

    fn s(v: f64) -> Scalar {
        Scalar::from_f64(v, P)
    }

    fn map(a: f64, b: f64, c: f64, d: f64) -> MoebiusMap {
        MoebiusMap::new(s(a), s(b), s(c), s(d)).unwrap()
    }

    #[test]
    fn normal_form() {
        let m = map(-2.0, 0.0, 0.0, -8.0);
        let e = m.entries();
        assert_eq!(e[0], s(0.5));
        assert_eq!(e[3], s(2.0));
        assert!((m.det() - s(1.0)).abs() < Scalar::epsilon(P - 2));
    }

    #[test]
    fn rejects_orientation_reversing() {
        assert_eq!(
            MoebiusMap::new(s(1.0), s(0.0), s(0.0), s(-1.0)),
            Err(Error::NonPositiveDeterminant)
        );
        assert!(MoebiusMap::new(s(0.0), s(0.0), s(0.0), s(0.0)).is_err());
    }

    #[test]
    fn poles_and_infinity() {
        let m = map(0.0, -1.0, 1.0, 1.0);
        assert_eq!(
            m.apply_boundary(&BoundaryPoint::Finite(s(-1.0))),
            BoundaryPoint::Infinity
        );
        assert_eq!(
            m.apply_boundary(&BoundaryPoint::Infinity),
            BoundaryPoint::Finite(s(0.0))
        );
        assert_eq!(m.pole(), BoundaryPoint::Finite(s(-1.0)));
        let lin = map(2.0, 1.0, 0.0, 1.0);
        assert_eq!(lin.apply_boundary(&BoundaryPoint::Infinity), BoundaryPoint::Infinity);
        assert_eq!(lin.pole(), BoundaryPoint::Infinity);
    }

    #[test]
    fn interior_pole_is_an_error() {
        let m = map(0.0, -1.0, 1.0, 1.0);
        let z = HalfPlanePoint {
            re: s(-1.0),
            im: s(0.0),
        };
        assert_eq!(m.apply_interior(&z), Err(Error::PoleOnBoundary));
        let i = HalfPlanePoint { re: s(0.0), im: s(1.0) };
        let w = MoebiusMap::identity(P).apply_interior(&i).unwrap();
        assert_eq!(w, i);
    }

    #[test]
    fn inverse_and_power() {
        let m = map(3.0, 1.0, 2.0, 1.0);
        assert!(m.compose(&m.inverse()).is_projective_identity(&Scalar::epsilon(P - 8)));
        let p5 = m.power(5);
        let mut slow = MoebiusMap::identity(P);
        for _ in 0..5 {
            slow = slow.compose(&m);
        }
        let x = BoundaryPoint::Finite(s(0.3));
        assert!(chordal_distance(&p5.apply_boundary(&x), &slow.apply_boundary(&x)).to_f64() < 1e-30);
        assert_eq!(m.power(0), MoebiusMap::identity(P));
    }

    #[test]
    fn derivative_at_infinity_for_linear_maps() {
        let shrink = map(1.0, 0.0, 0.0, 4.0);
        assert_eq!(shrink.derivative_at(&BoundaryPoint::Infinity).unwrap(), s(4.0));
        assert_eq!(shrink.derivative_at(&BoundaryPoint::Finite(s(0.0))).unwrap(), s(0.25));
        let m = map(0.0, -1.0, 1.0, 1.0);
        assert_eq!(
            m.derivative_at(&BoundaryPoint::Finite(s(-1.0))),
            Err(Error::PoleDerivative)
        );
    }
}

use crate::error::{Error, Result};
use crate::moebius::boundary::BoundaryPoint;
use crate::moebius::map::MoebiusMap;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum MapClass {
    Identity,
    /// Rotation number in [0, 1); the orientation is fixed so that
    /// `T_a` has rotation number in (0, ½).
    Elliptic {
        rotation_number: Scalar,
    },
    Parabolic,
    Hyperbolic {
        attractor: BoundaryPoint,
        repeller: BoundaryPoint,
        multiplier: Scalar,
    },
}

impl MapClass {
    pub fn name(&self) -> &'static str {
        match self {
            MapClass::Identity => "identity",
            MapClass::Elliptic { .. } => "elliptic",
            MapClass::Parabolic => "parabolic",
            MapClass::Hyperbolic { .. } => "hyperbolic",
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, MapClass::Hyperbolic { .. })
    }
}

/// Default tolerance on `|trace| − 2`: `2^-(prec/2)`.
pub fn default_eps_class(prec: u32) -> Scalar {
    Scalar::pow2(-((prec / 2) as i32), prec)
}

impl MoebiusMap {
    pub fn classify(&self, eps_class: &Scalar) -> MapClass {
        let prec = self.prec();
        let two = Scalar::from_int(2, prec);
        if self.distance_to_identity() <= *eps_class {
            return MapClass::Identity;
        }
        let t = self.trace();
        let at = t.abs();
        if at < &two - eps_class {
            MapClass::Elliptic {
                rotation_number: self.elliptic_rotation_number(&t),
            }
        } else if at > &two + eps_class {
            let (attractor, repeller, multiplier) = self.hyperbolic_parts();
            MapClass::Hyperbolic {
                attractor,
                repeller,
                multiplier,
            }
        } else {
            MapClass::Parabolic
        }
    }

    pub fn classify_default(&self) -> MapClass {
        self.classify(&default_eps_class(self.prec()))
    }

    fn elliptic_rotation_number(&self, trace: &Scalar) -> Scalar {
        let prec = self.prec();
        let pi = Scalar::pi(prec);
        let half = trace / Scalar::from_int(2, prec);
        let mut phi = half.acos();
        if self.entries()[2].is_negative() {
            phi = Scalar::from_int(2, prec) * &pi - phi;
        }
        let rho = phi / &pi;
        &rho - rho.floor()
    }

    /// Attractor, repeller and multiplier of a hyperbolic map.
    pub fn fixed_points_hyperbolic(&self) -> Result<(BoundaryPoint, BoundaryPoint, Scalar)> {
        match self.classify_default() {
            MapClass::Hyperbolic {
                attractor,
                repeller,
                multiplier,
            } => Ok((attractor, repeller, multiplier)),
            _ => Err(Error::NotHyperbolic),
        }
    }

    /// Multiplier `λ²` with `λ = 2/(|t| + √(t² − 4))`; assumes `|t| > 2`.
    pub fn multiplier(&self) -> Result<Scalar> {
        let prec = self.prec();
        let t = self.trace().abs();
        let disc = t.square() - Scalar::from_int(4, prec);
        if !disc.is_positive() {
            return Err(Error::NotHyperbolic);
        }
        let lambda = Scalar::from_int(2, prec) / (t + disc.sqrt());
        Ok(lambda.square())
    }

    fn hyperbolic_parts(&self) -> (BoundaryPoint, BoundaryPoint, Scalar) {
        let prec = self.prec();
        let [m11, m12, m21, m22] = self.entries();
        // m21·x² + (m22 − m11)·x − m12 = 0, solved without cancellation.
        let b = m22 - m11;
        let disc = (self.trace().square() - Scalar::from_int(4, prec)).abs();
        let sq = disc.sqrt();
        let qv = if b.is_negative() {
            -((&b - &sq) / Scalar::from_int(2, prec))
        } else {
            -((&b + &sq) / Scalar::from_int(2, prec))
        };
        let r1 = if m21.is_zero() {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(&qv / m21)
        };
        let r2 = BoundaryPoint::Finite(-(m12 / &qv));
        let multiplier = self.multiplier().expect("trace checked by caller");
        let d1 = self.derivative_at(&r1).map(|d| d.abs());
        let d2 = self.derivative_at(&r2).map(|d| d.abs());
        let r1_attracts = match (d1, d2) {
            (Ok(d1), Ok(d2)) => d1 < d2,
            (Ok(_), Err(_)) => true,
            _ => false,
        };
        if r1_attracts {
            (r1, r2, multiplier)
        } else {
            (r2, r1, multiplier)
        }
    }
}

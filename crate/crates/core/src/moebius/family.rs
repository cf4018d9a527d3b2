//! The family `T_b(z) = −b/(z + 1)`.
//!
//! `T_b` is elliptic exactly when `b > 1/4`. Its normalized trace is
//! `1/√b`, so the rotation number is `ρ(b) = arccos(1/(2√b))/π ∈ (0, ½)`
//! and the interior fixed point is `c(b) = −1/2 + i·√(4b − 1)/2`. When
//! `ρ(b) = p/q` the map has finite order: `T_b^q = Id`. For `b = 1` the
//! orbit of 0 is the 3-cycle `0 → −1 → ∞ → 0`.

use crate::error::{Error, Result};
use crate::moebius::boundary::HalfPlanePoint;
use crate::moebius::map::MoebiusMap;
use crate::scalar::Scalar;

/// Matrix of `z ↦ −b/(z + 1)`; requires `b > 0`.
pub fn t_map(b: &Scalar) -> Result<MoebiusMap> {
    if !b.is_positive() {
        return Err(Error::NonPositiveCoefficient {
            index: 0,
            value: b.to_decimal(),
        });
    }
    let prec = b.prec();
    MoebiusMap::new(Scalar::zero(prec), -b, Scalar::one(prec), Scalar::one(prec))
}

fn quarter(prec: u32) -> Scalar {
    Scalar::ratio(1, 4, prec)
}

fn check_elliptic(a: &Scalar) -> Result<()> {
    if *a <= quarter(a.prec()) {
        Err(Error::NotElliptic(a.to_decimal()))
    } else {
        Ok(())
    }
}

pub fn rotation_number(a: &Scalar) -> Result<Scalar> {
    check_elliptic(a)?;
    let prec = a.prec();
    let x = (Scalar::from_int(2, prec) * a.sqrt()).recip();
    Ok(x.acos() / Scalar::pi(prec))
}

/// The unique `a > 1/4` with `ρ(a) = rho`, i.e. `1/(4·cos²(π·rho))`.
pub fn rho_inverse(rho: &Scalar) -> Result<Scalar> {
    let prec = rho.prec();
    if !rho.is_positive() || *rho >= Scalar::ratio(1, 2, prec) {
        return Err(Error::OutOfRange(rho.to_decimal()));
    }
    let c = (Scalar::pi(prec) * rho).cos();
    Ok((Scalar::from_int(4, prec) * c.square()).recip())
}

pub fn fixed_point_interior(a: &Scalar) -> Result<HalfPlanePoint> {
    check_elliptic(a)?;
    let prec = a.prec();
    let two = Scalar::from_int(2, prec);
    let im = (Scalar::from_int(4, prec) * a - Scalar::one(prec)).sqrt() / &two;
    Ok(HalfPlanePoint {
        re: -(Scalar::one(prec) / two),
        im,
    })
}

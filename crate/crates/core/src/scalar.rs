//! Fixed-precision real numbers.
//!
//! [`Scalar`] wraps an MPFR float. Every scalar carries its mantissa
//! precision; binary operations round to the larger of the two operand
//! precisions with round-to-nearest, so one computation started at one
//! precision stays at that precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};

/// Smallest supported working precision in bits.
pub const MIN_PRECISION: u32 = 64;
/// Precision used when nothing else is configured.
pub const DEFAULT_PRECISION: u32 = 256;
/// Environment variable that overrides [`DEFAULT_PRECISION`] for the CLI.
pub const PRECISION_ENV: &str = "RAMCF_PRECISION_BITS";

pub fn check_precision(bits: u32) -> Result<u32> {
    if bits < MIN_PRECISION {
        Err(Error::PrecisionTooLow(bits))
    } else {
        Ok(bits)
    }
}

#[derive(Clone, PartialEq, PartialOrd)]
pub struct Scalar(Float);

impl Scalar {
    pub fn zero(prec: u32) -> Self {
        Scalar(Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        Scalar(Float::with_val(prec, 1))
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        Scalar(Float::with_val(prec, v))
    }

    /// Exact binary value of `v`, rounded to `prec`.
    pub fn from_f64(v: f64, prec: u32) -> Self {
        Scalar(Float::with_val(prec, v))
    }

    pub fn ratio(num: i64, den: i64, prec: u32) -> Self {
        let n = Float::with_val(prec, num);
        Scalar(Float::with_val(prec, n / den))
    }

    /// Parses a decimal literal (`"0.25"`, `"-1e-3"`) or a fraction
    /// (`"1/3"`) and rounds it once to `prec`.
    pub fn parse(text: &str, prec: u32) -> Result<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let r = rug::Rational::from_str_radix(&format!("{}/{}", n.trim(), d.trim()), 10)
                .map_err(|_| Error::Parse(text.to_string()))?;
            return Ok(Scalar(Float::with_val(prec, r)));
        }
        let parsed = Float::parse(text).map_err(|_| Error::Parse(text.to_string()))?;
        let v = Float::with_val(prec, parsed);
        if v.is_finite() {
            Ok(Scalar(v))
        } else {
            Err(Error::Parse(text.to_string()))
        }
    }

    pub fn pi(prec: u32) -> Self {
        Scalar(Float::with_val(prec, Constant::Pi))
    }

    /// `2^exp` at precision `prec`.
    pub fn pow2(exp: i32, prec: u32) -> Self {
        Scalar(Float::with_val(prec, Float::i_exp(1, exp)))
    }

    /// Unit roundoff scale `2^-prec`.
    pub fn epsilon(prec: u32) -> Self {
        Self::pow2(-(prec as i32), prec)
    }

    pub fn from_float(f: Float) -> Self {
        Scalar(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Same value rounded to another precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        Scalar(Float::with_val(prec, &self.0))
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        Scalar(self.0.clone().sqrt())
    }

    pub fn square(&self) -> Self {
        Scalar(self.0.clone().square())
    }

    pub fn recip(&self) -> Self {
        Scalar(self.0.clone().recip())
    }

    pub fn cos(&self) -> Self {
        Scalar(self.0.clone().cos())
    }

    pub fn sin(&self) -> Self {
        Scalar(self.0.clone().sin())
    }

    pub fn acos(&self) -> Self {
        Scalar(self.0.clone().acos())
    }

    /// Four-quadrant arctangent of `self / x`.
    pub fn atan2(&self, x: &Scalar) -> Self {
        Scalar(self.0.clone().atan2(&x.0))
    }

    pub fn ln(&self) -> Self {
        Scalar(self.0.clone().ln())
    }

    pub fn exp(&self) -> Self {
        Scalar(self.0.clone().exp())
    }

    pub fn powi(&self, n: i32) -> Self {
        use rug::ops::Pow;
        Scalar(self.0.clone().pow(n))
    }

    pub fn floor(&self) -> Self {
        Scalar(self.0.clone().floor())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Shortest decimal text that reads back to the identical value at
    /// this precision.
    pub fn to_decimal(&self) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, None)
    }

    /// Decimal text with `digits` significant digits, for display.
    pub fn to_display(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, Some(digits))
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_decimal())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_display(20))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => write!(f, "{}", self.to_display(d.max(1))),
            None => write!(f, "{}", self.to_decimal()),
        }
    }
}

fn out_prec(a: &Float, b: &Float) -> u32 {
    a.prec().max(b.prec())
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar(Float::with_val(out_prec(&self.0, &rhs.0), &self.0 $op &rhs.0))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                &self $op &rhs
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                &self $op rhs
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(Float::with_val(self.0.prec(), -&self.0))
    }
}

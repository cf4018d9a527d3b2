use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A coefficient sequence `a₁, a₂, …` of the fraction.
///
/// Implementations are pure: the same index always yields the same value,
/// and every emitted value is positive.
#[allow(clippy::len_without_is_empty)]
pub trait CoefficientSource: Send + Sync {
    /// The coefficient `a_i` for `i ≥ 1`.
    fn coefficient(&self, i: usize) -> Result<Scalar>;

    /// Declared limit of the sequence, when there is one.
    fn limit(&self) -> Option<Scalar>;

    /// Number of available coefficients; `None` for an infinite stream.
    fn len(&self) -> Option<usize> {
        None
    }

    fn prec(&self) -> u32;

    /// Short tag for reports (`"constant"`, `"gill"`, …).
    fn kind(&self) -> &'static str;
}

impl<T: CoefficientSource + ?Sized> CoefficientSource for Arc<T> {
    fn coefficient(&self, i: usize) -> Result<Scalar> {
        (**self).coefficient(i)
    }
    fn limit(&self) -> Option<Scalar> {
        (**self).limit()
    }
    fn len(&self) -> Option<usize> {
        (**self).len()
    }
    fn prec(&self) -> u32 {
        (**self).prec()
    }
    fn kind(&self) -> &'static str {
        (**self).kind()
    }
}

impl<T: CoefficientSource + ?Sized> CoefficientSource for Box<T> {
    fn coefficient(&self, i: usize) -> Result<Scalar> {
        (**self).coefficient(i)
    }
    fn limit(&self) -> Option<Scalar> {
        (**self).limit()
    }
    fn len(&self) -> Option<usize> {
        (**self).len()
    }
    fn prec(&self) -> u32 {
        (**self).prec()
    }
    fn kind(&self) -> &'static str {
        (**self).kind()
    }
}

/// Checks index and sign of an emitted coefficient.
pub(crate) fn checked(i: usize, value: Scalar) -> Result<Scalar> {
    if i == 0 {
        return Err(Error::IndexOutOfRange(0));
    }
    if value.is_positive() {
        Ok(value)
    } else {
        Err(Error::NonPositiveCoefficient {
            index: i,
            value: value.to_decimal(),
        })
    }
}

/// The first `n` coefficients (fewer if the source is shorter).
pub fn prefix(src: &dyn CoefficientSource, n: usize) -> Result<Vec<Scalar>> {
    let n = src.len().map_or(n, |len| len.min(n));
    (1..=n).map(|i| src.coefficient(i)).collect()
}

#[derive(Clone, Debug)]
pub struct ConstantSource {
    a: Scalar,
}

impl ConstantSource {
    pub fn new(a: Scalar) -> Result<Self> {
        checked(1, a.clone()).map_err(|_| Error::NonPositiveCoefficient {
            index: 0,
            value: a.to_decimal(),
        })?;
        Ok(ConstantSource { a })
    }
}

impl CoefficientSource for ConstantSource {
    fn coefficient(&self, i: usize) -> Result<Scalar> {
        checked(i, self.a.clone())
    }
    fn limit(&self) -> Option<Scalar> {
        Some(self.a.clone())
    }
    fn prec(&self) -> u32 {
        self.a.prec()
    }
    fn kind(&self) -> &'static str {
        "constant"
    }
}

/// A finite list `a₁, …, a_n`.
#[derive(Clone, Debug)]
pub struct ExplicitSource {
    values: Vec<Scalar>,
    limit: Option<Scalar>,
    prec: u32,
}

impl ExplicitSource {
    pub fn new(values: Vec<Scalar>, prec: u32) -> Result<Self> {
        for (k, v) in values.iter().enumerate() {
            checked(k + 1, v.clone())?;
        }
        Ok(ExplicitSource {
            values,
            limit: None,
            prec,
        })
    }

    pub fn with_limit(mut self, limit: Scalar) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }
}

impl CoefficientSource for ExplicitSource {
    fn coefficient(&self, i: usize) -> Result<Scalar> {
        if i == 0 || i > self.values.len() {
            return Err(Error::IndexOutOfRange(i));
        }
        Ok(self.values[i - 1].clone())
    }
    fn limit(&self) -> Option<Scalar> {
        self.limit.clone()
    }
    fn len(&self) -> Option<usize> {
        Some(self.values.len())
    }
    fn prec(&self) -> u32 {
        self.prec
    }
    fn kind(&self) -> &'static str {
        "explicit"
    }
}

/// Perturbation `εᵢ ≥ 0` added to a constant limit.
#[derive(Clone, Debug, PartialEq)]
pub enum PerturbationRule {
    Zero,
    /// `base^-i`, `base > 1`.
    Geometric {
        base: String,
    },
    /// `1/i`.
    Harmonic,
    /// `i^-exponent`, `exponent > 0`.
    Power {
        exponent: String,
    },
    /// Explicit values `ε₁, ε₂, …`; zero past the end.
    List(Vec<String>),
}

impl PerturbationRule {
    /// Parses `"0"`, `"2^-i"`, `"1/i"`, `"1/i^2"`, `"i^-1.5"`.
    pub fn parse(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("perturbation rule `{text}`"));
        let number = |s: &str| -> Result<String> {
            let v = Scalar::parse(s, 64).map_err(|_| bad())?;
            if v.is_positive() {
                Ok(s.to_string())
            } else {
                Err(bad())
            }
        };
        if t == "0" || t.eq_ignore_ascii_case("zero") {
            return Ok(PerturbationRule::Zero);
        }
        if t == "1/i" || t.eq_ignore_ascii_case("harmonic") {
            return Ok(PerturbationRule::Harmonic);
        }
        if let Some(base) = t.strip_suffix("^-i") {
            let base = number(base)?;
            if Scalar::parse(&base, 64)? <= Scalar::one(64) {
                return Err(bad());
            }
            return Ok(PerturbationRule::Geometric { base });
        }
        if let Some(e) = t.strip_prefix("1/i^") {
            return Ok(PerturbationRule::Power { exponent: number(e)? });
        }
        if let Some(e) = t.strip_prefix("i^-") {
            return Ok(PerturbationRule::Power { exponent: number(e)? });
        }
        Err(bad())
    }

    pub fn value(&self, i: usize, prec: u32) -> Result<Scalar> {
        let iv = Scalar::from_int(i as i64, prec);
        Ok(match self {
            PerturbationRule::Zero => Scalar::zero(prec),
            PerturbationRule::Harmonic => iv.recip(),
            PerturbationRule::Geometric { base } => {
                let b = Scalar::parse(base, prec)?;
                b.powi(-(i as i32))
            }
            PerturbationRule::Power { exponent } => {
                let e = Scalar::parse(exponent, prec)?;
                (-(e * iv.ln())).exp()
            }
            PerturbationRule::List(values) => match values.get(i - 1) {
                Some(v) => Scalar::parse(v, prec)?,
                None => Scalar::zero(prec),
            },
        })
    }

    /// Whether `Σ εᵢ` is known to converge.
    pub fn is_summable(&self) -> bool {
        match self {
            PerturbationRule::Zero | PerturbationRule::Geometric { .. } | PerturbationRule::List(_) => true,
            PerturbationRule::Harmonic => false,
            PerturbationRule::Power { exponent } => Scalar::parse(exponent, 64)
                .map(|e| e > Scalar::one(64))
                .unwrap_or(false),
        }
    }
}

impl fmt::Display for PerturbationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationRule::Zero => write!(f, "0"),
            PerturbationRule::Geometric { base } => write!(f, "{base}^-i"),
            PerturbationRule::Harmonic => write!(f, "1/i"),
            PerturbationRule::Power { exponent } => write!(f, "1/i^{exponent}"),
            PerturbationRule::List(v) => write!(f, "list[{}]", v.len()),
        }
    }
}

/// `aᵢ = a + εᵢ`.
#[derive(Clone, Debug)]
pub struct GillSource {
    a: Scalar,
    rule: PerturbationRule,
}

impl GillSource {
    pub fn new(a: Scalar, rule: PerturbationRule) -> Result<Self> {
        ConstantSource::new(a.clone())?;
        // validates the rule at this precision
        rule.value(1, a.prec())?;
        Ok(GillSource { a, rule })
    }

    pub fn rule(&self) -> &PerturbationRule {
        &self.rule
    }
}

impl CoefficientSource for GillSource {
    fn coefficient(&self, i: usize) -> Result<Scalar> {
        if i == 0 {
            return Err(Error::IndexOutOfRange(0));
        }
        let eps = self.rule.value(i, self.a.prec())?;
        checked(i, &self.a + eps)
    }
    fn limit(&self) -> Option<Scalar> {
        Some(self.a.clone())
    }
    fn prec(&self) -> u32 {
        self.a.prec()
    }
    fn kind(&self) -> &'static str {
        "gill"
    }
}

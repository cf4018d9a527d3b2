use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::periodic_parameter;
use crate::scalar::Scalar;

/// An exactly known rotation number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RhoSpec {
    /// `(p + √d)/q`.
    Quadratic { p: i64, q: i64, d: i64 },
    /// Decimal (`"0.3819660112501051…"`) or fraction (`"1/3"`) text, read
    /// exactly.
    Literal(String),
}

impl RhoSpec {
    /// `1/φ² = (3 − √5)/2`.
    pub fn golden() -> Self {
        RhoSpec::Quadratic { p: -3, q: -2, d: 5 }
    }

    pub fn value(&self, prec: u32) -> Result<Scalar> {
        match self {
            RhoSpec::Quadratic { p, q, d } => {
                if *q == 0 || *d < 0 {
                    return Err(Error::InvalidConfig(format!("bad quadratic form ({p} + √{d})/{q}")));
                }
                let root = Scalar::from_int(*d, prec).sqrt();
                Ok((Scalar::from_int(*p, prec) + root) / Scalar::from_int(*q, prec))
            }
            RhoSpec::Literal(text) => Ok(Scalar::from_float(rug::Float::with_val(prec, literal(text)?))),
        }
    }

    /// Partial quotients `[a₀; a₁, a₂, …]`, at most `max_terms` of them.
    pub fn partial_quotients(&self, max_terms: usize) -> Result<Vec<Integer>> {
        match self {
            RhoSpec::Literal(text) => Ok(rational_quotients(literal(text)?, max_terms)),
            RhoSpec::Quadratic { p, q, d } => {
                if *q == 0 || *d < 0 {
                    return Err(Error::InvalidConfig(format!("bad quadratic form ({p} + √{d})/{q}")));
                }
                let (root, rem) = Integer::from(*d).sqrt_rem(Integer::new());
                if rem == 0 {
                    let r = Rational::from((Integer::from(*p) + root, Integer::from(*q)));
                    return Ok(rational_quotients(r, max_terms));
                }
                Ok(quadratic_quotients(*p, *q, *d, max_terms))
            }
        }
    }
}

fn literal(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("rotation number literal `{t}`"));
    if t.contains('/') {
        return Rational::from_str_radix(t, 10).map_err(|_| bad());
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{}{}", if int.is_empty() { "0" } else { int }, frac);
    let num = Integer::from_str_radix(&digits, 10).map_err(|_| bad())?;
    let den = Integer::from(10).pow(frac.len() as u32);
    let r = Rational::from((num, den));
    Ok(if neg { -r } else { r })
}

fn rational_quotients(mut x: Rational, max_terms: usize) -> Vec<Integer> {
    let mut out = Vec::new();
    while out.len() < max_terms {
        let a = x.clone().floor().into_numer_denom().0;
        out.push(a.clone());
        let frac = x - Rational::from(a);
        if frac == 0 {
            break;
        }
        x = frac.recip();
    }
    out
}

/// Floor division for integers, rounding toward −∞.
fn floor_div(n: &Integer, d: &Integer) -> Integer {
    let (q, _) = n.clone().div_rem_floor(d.clone());
    q
}

/// Exact expansion of `(p + √d)/q` with `d` not a square, using the
/// standard `(P_k, Q_k)` recurrence with `Q_k | d − P_k²`.
fn quadratic_quotients(p: i64, q: i64, d: i64, max_terms: usize) -> Vec<Integer> {
    let (mut pp, mut qq, mut dd) = (Integer::from(p), Integer::from(q), Integer::from(d));
    if (dd.clone() - pp.clone() * &pp) % &qq != 0 {
        // rewrite as (p|q| + √(d q²))/(q|q|)
        let aq = qq.clone().abs();
        pp *= &aq;
        dd *= qq.clone() * &qq;
        qq *= &aq;
    }
    let s = dd.clone().sqrt();
    let mut out = Vec::with_capacity(max_terms);
    while out.len() < max_terms {
        // (P + √D)/Q lies strictly between (P + s)/Q and (P + s + 1)/Q
        let a = if qq > 0 {
            floor_div(&(pp.clone() + &s), &qq)
        } else {
            floor_div(&(pp.clone() + &s + 1u32), &qq)
        };
        let next_p = a.clone() * &qq - &pp;
        let next_q = (dd.clone() - next_p.clone() * &next_p) / &qq;
        out.push(a);
        pp = next_p;
        qq = next_q;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Approximation {
    pub p: u64,
    pub q: u64,
    /// `ã = ρ⁻¹(p/q)`.
    pub a: Scalar,
}

/// The first `k` convergents `p/q` of `rho` with `q ≥ 3` (and `p/q < ½`),
/// each with `ã = ρ⁻¹(p/q)`.
pub fn rational_approximations(rho: &RhoSpec, k: usize, prec: u32) -> Result<Vec<Approximation>> {
    let value = rho.value(prec)?;
    if !value.is_positive() || value >= Scalar::ratio(1, 2, prec) {
        return Err(Error::OutOfRange(value.to_display(20)));
    }
    let quotients = rho.partial_quotients(64 + 4 * k)?;
    let (mut h_prev, mut h) = (Integer::from(0), Integer::from(1));
    let (mut k_prev, mut kk) = (Integer::from(1), Integer::from(0));
    let mut out: Vec<Approximation> = Vec::new();
    for a in quotients {
        let h_next = a.clone() * &h + &h_prev;
        let k_next = a * &kk + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut kk, k_next);
        let (Some(p), Some(q)) = (h.to_u64(), kk.to_u64()) else {
            break;
        };
        if q < 3 || 2 * p >= q || p == 0 || out.last().is_some_and(|l| l.q >= q) {
            continue;
        }
        out.push(Approximation {
            p,
            q,
            a: periodic_parameter(p, q, prec)?,
        });
        if out.len() == k {
            return Ok(out);
        }
    }
    Err(Error::NotEnoughConvergents {
        needed: k,
        found: out.len(),
    })
}

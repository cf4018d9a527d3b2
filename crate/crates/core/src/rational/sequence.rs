use std::fmt;

use serde::Serialize;

use crate::cf::{CoefficientSource, PerturbationRule};
use crate::error::{Error, Result};
use crate::moebius::{rho_inverse, t_map, BoundaryPoint, MoebiusMap};
use crate::rational::lemma::{choose_r_avoiding, family_map, solve_lemma, LemmaSolution};
use crate::scalar::Scalar;

/// Starting amplitude `t₀` of the perturbation schedule.
pub const DEFAULT_AMPLITUDE: f64 = 4.0;
/// Chordal margin of `R` from `C_a ∪ {0, ∞}`.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Shape of the schedule `t_r = t₀·f(r)`, `r = 0, 1, …`.
#[derive(Clone, Debug, PartialEq)]
pub enum TRule {
    /// `f(r) = 1/(r + 1)`.
    Harmonic,
    /// `f(r) = 2^-r`.
    Geometric,
    Zero,
    /// `f(r) = rule(r + 1)`, e.g. `rᵢ = 1/i` or an explicit list.
    Custom(PerturbationRule),
}

impl TRule {
    pub fn factor(&self, r: usize, prec: u32) -> Result<Scalar> {
        match self {
            TRule::Harmonic => Ok(Scalar::from_int(r as i64 + 1, prec).recip()),
            TRule::Geometric => Ok(Scalar::pow2(-(r.min(i32::MAX as usize) as i32), prec)),
            TRule::Zero => Ok(Scalar::zero(prec)),
            TRule::Custom(rule) => rule.value(r + 1, prec),
        }
    }

    /// Whether `Σ f(r)` diverges. Custom rules are judged by their
    /// dyadic block sums over the first 2¹⁴ terms.
    pub fn is_divergent(&self) -> bool {
        match self {
            TRule::Harmonic => true,
            TRule::Geometric | TRule::Zero => false,
            TRule::Custom(PerturbationRule::List(_)) => false,
            TRule::Custom(rule) => {
                let prec = 64;
                let blocks: Vec<f64> = (0..14)
                    .map(|j| {
                        (1usize << j..1usize << (j + 1))
                            .map(|i| rule.value(i, prec).map(|v| v.to_f64()).unwrap_or(0.0))
                            .sum()
                    })
                    .collect();
                blocks
                    .windows(2)
                    .rev()
                    .take(3)
                    .all(|w| w[0] > 0.0 && w[1] / w[0] >= 0.9)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TRule::Harmonic => "harmonic",
            TRule::Geometric => "geometric",
            TRule::Zero => "zero",
            TRule::Custom(_) => "custom",
        }
    }
}

impl fmt::Display for TRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TRule::Custom(rule) => write!(f, "custom({rule})"),
            other => write!(f, "{}", other.name()),
        }
    }
}

/// How `R` is picked.
#[derive(Clone, Debug, PartialEq)]
pub enum RChoice {
    Auto { seed: u64, margin: Scalar },
    Fixed(BoundaryPoint),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalRotationParams {
    pub p: u64,
    pub q: u64,
    pub a: Scalar,
    pub lemma: LemmaSolution,
    #[serde(serialize_with = "crate::rational::sequence::display")]
    pub t_rule: TRule,
    pub amplitude: Scalar,
}

pub(crate) fn display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn check_rotation(p: u64, q: u64) -> Result<()> {
    if q < 3 || p == 0 || 2 * p >= q || gcd(p, q) != 1 {
        return Err(Error::InvalidConfig(format!(
            "need coprime p/q with q ≥ 3 and 0 < p/q < 1/2, got {p}/{q}"
        )));
    }
    Ok(())
}

/// `ρ⁻¹(p/q)` without range checks; exact where `cos²(πp/q)` is rational.
fn exact_or_rounded(p: u64, q: u64, prec: u32) -> Result<Scalar> {
    match (p, q) {
        (1, 3) => Ok(Scalar::one(prec)),
        (1, 4) => Ok(Scalar::ratio(1, 2, prec)),
        (1, 6) => Ok(Scalar::ratio(1, 3, prec)),
        _ => rho_inverse(&Scalar::ratio(p as i64, q as i64, prec)),
    }
}

/// `ρ⁻¹(p/q)`, checked to have finite order `q`.
pub fn periodic_parameter(p: u64, q: u64, prec: u32) -> Result<Scalar> {
    check_rotation(p, q)?;
    let a = exact_or_rounded(p, q, prec)?;
    let tol = Scalar::pow2(-((prec / 2) as i32), prec);
    if !t_map(&a)?.power(q).is_projective_identity(&tol) {
        return Err(Error::NotPeriodic(q as usize));
    }
    Ok(a)
}

impl RationalRotationParams {
    /// Solves the lemma for the chosen `R` and halves `t₀` from
    /// [`DEFAULT_AMPLITUDE`] until stage 0 is hyperbolic with positive
    /// coefficients. The zero rule keeps `t₀` as is.
    pub fn new(p: u64, q: u64, prec: u32, r: RChoice, t_rule: TRule) -> Result<Self> {
        let a = periodic_parameter(p, q, prec)?;
        let lemma = match r {
            RChoice::Auto { seed, margin } => choose_r_avoiding(&a, q as usize, &margin, seed, &[])?.1,
            RChoice::Fixed(r) => solve_lemma(&a, q as usize, &r)?,
        };
        let mut params = RationalRotationParams {
            p,
            q,
            a,
            lemma,
            t_rule,
            amplitude: Scalar::from_f64(DEFAULT_AMPLITUDE, prec),
        };
        if params.t_rule != TRule::Zero {
            params.shrink_amplitude()?;
        }
        Ok(params)
    }

    /// Same parameters with another `t₀`.
    pub fn with_amplitude(mut self, amplitude: Scalar) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    fn shrink_amplitude(&mut self) -> Result<()> {
        for _ in 0..200 {
            if self.first_stage_ok()? {
                return Ok(());
            }
            self.amplitude = &self.amplitude / Scalar::from_int(2, self.prec());
        }
        Err(Error::StageNotHyperbolic(0))
    }

    fn first_stage_ok(&self) -> Result<bool> {
        let positive = match &self.t_rule {
            TRule::Custom(PerturbationRule::List(values)) => (0..values.len()).all(|r| self.perturbed(r).is_ok()),
            _ => self.perturbed(0).is_ok(),
        };
        if !positive {
            return Ok(false);
        }
        Ok(self.stage_map(0)?.classify_default().is_hyperbolic())
    }

    pub fn t(&self, r: usize) -> Result<Scalar> {
        Ok(&self.amplitude * self.t_rule.factor(r, self.prec())?)
    }

    /// `(α_r, β_r) = (a + c1·t_r, a + c2·t_r)`, both required positive.
    pub fn perturbed(&self, r: usize) -> Result<(Scalar, Scalar)> {
        let t = self.t(r)?;
        let alpha = &self.a + &self.lemma.c1 * &t;
        let beta = &self.a + &self.lemma.c2 * &t;
        for (slot, v) in [(1, &alpha), (2, &beta)] {
            if !v.is_positive() {
                return Err(Error::NonPositiveCoefficient {
                    index: self.q as usize * r + slot,
                    value: v.to_decimal(),
                });
            }
        }
        Ok((alpha, beta))
    }

    /// `ψ_r = T_{α_r}∘T_{β_r}∘T_a^{q−2}`.
    pub fn stage_map(&self, r: usize) -> Result<MoebiusMap> {
        let (alpha, beta) = self.perturbed(r)?;
        family_map(&self.a, self.q as usize, &alpha, &beta)
    }

    /// `ψ_r` rebuilt at precision `prec`, with `a` recomputed there so
    /// that `T_a^q = Id` holds to the new precision.
    pub fn stage_map_at(&self, r: usize, prec: u32) -> Result<(MoebiusMap, Scalar, Scalar)> {
        let a = exact_or_rounded(self.p, self.q, prec)?;
        let t = self.amplitude.with_prec(prec) * self.t_rule.factor(r, prec)?;
        let alpha = &a + self.lemma.c1.with_prec(prec) * &t;
        let beta = &a + self.lemma.c2.with_prec(prec) * &t;
        if !alpha.is_positive() || !beta.is_positive() {
            return Err(Error::NonPositiveCoefficient {
                index: self.q as usize * r + 1,
                value: alpha.min(beta).to_decimal(),
            });
        }
        Ok((family_map(&a, self.q as usize, &alpha, &beta)?, alpha, beta))
    }
}

/// Coefficients `a_{qr+1} = α_r`, `a_{qr+2} = β_r`, `a_i = a` otherwise.
#[derive(Clone, Debug)]
pub struct RationalSequence {
    params: RationalRotationParams,
}

pub fn build_sequence(params: &RationalRotationParams) -> RationalSequence {
    RationalSequence { params: params.clone() }
}

impl RationalSequence {
    pub fn params(&self) -> &RationalRotationParams {
        &self.params
    }
}

impl CoefficientSource for RationalSequence {
    fn coefficient(&self, i: usize) -> Result<Scalar> {
        if i == 0 {
            return Err(Error::IndexOutOfRange(0));
        }
        let q = self.params.q as usize;
        let (r, j) = ((i - 1) / q, (i - 1) % q + 1);
        match j {
            1 | 2 => {
                let (alpha, beta) = self.params.perturbed(r)?;
                Ok(if j == 1 { alpha } else { beta })
            }
            _ => Ok(self.params.a.clone()),
        }
    }
    fn limit(&self) -> Option<Scalar> {
        Some(self.params.a.clone())
    }
    fn prec(&self) -> u32 {
        self.params.prec()
    }
    fn kind(&self) -> &'static str {
        "rational"
    }
}

/// Outcome of the layout check for a supplied schedule `rᵢ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayoutCheck {
    pub terms: usize,
    /// `aᵢ = a` exactly off residues 1, 2 mod q.
    pub off_residue_exact: bool,
    /// Smallest `C` with `|a_{qr+j} − a| ≤ C·f(r)` over the checked terms.
    pub constant: Scalar,
    /// The declared bound `t₀·max(|c1|, |c2|)`.
    pub declared_constant: Scalar,
    pub holds: bool,
}

/// Checks the first `terms` coefficients against the block layout and the
/// bound `|a_{qr+j} − a| ≤ C·f(r)` with one `C`.
pub fn check_layout(seq: &RationalSequence, terms: usize) -> Result<LayoutCheck> {
    let params = seq.params();
    let prec = params.prec();
    let q = params.q as usize;
    let declared = &params.amplitude * params.lemma.c1.abs().max(params.lemma.c2.abs());
    // rounding of a + t·c leaves an error of a few ulps of a
    let rounding = params.a.abs() * Scalar::pow2(-(prec as i32 - 4), prec);
    let mut off_exact = true;
    let mut constant = Scalar::zero(prec);
    for i in 1..=terms {
        let d = (seq.coefficient(i)? - &params.a).abs();
        let (r, j) = ((i - 1) / q, (i - 1) % q + 1);
        if j > 2 {
            off_exact &= d.is_zero();
            continue;
        }
        let f = params.t_rule.factor(r, prec)?;
        if f.is_zero() {
            off_exact &= d.is_zero();
            continue;
        }
        let excess = (d - &rounding).max(Scalar::zero(prec));
        constant = constant.max(excess / f);
    }
    let slack = Scalar::one(prec) + Scalar::pow2(-((prec / 2) as i32), prec);
    let holds = off_exact && constant <= &declared * &slack;
    Ok(LayoutCheck {
        terms,
        off_residue_exact: off_exact,
        constant,
        declared_constant: declared,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::prefix;

    const P: u32 = 256;

    fn params(rule: TRule) -> RationalRotationParams {
        RationalRotationParams::new(
            1,
            3,
            P,
            RChoice::Fixed(BoundaryPoint::Finite(Scalar::ratio(-1, 2, P))),
            rule,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_rotation() {
        for (p, q) in [(1, 2), (2, 4), (0, 5), (3, 5)] {
            assert!(matches!(periodic_parameter(p, q, P), Err(Error::InvalidConfig(_))));
        }
        assert_eq!(periodic_parameter(1, 3, P).unwrap(), Scalar::one(P));
    }

    #[test]
    fn zero_rule_is_constant() {
        let seq = build_sequence(&params(TRule::Zero));
        for v in prefix(&seq, 30).unwrap() {
            assert_eq!(v, Scalar::one(P));
        }
        assert!(params(TRule::Zero)
            .stage_map(0)
            .unwrap()
            .is_projective_identity(&Scalar::epsilon(P - 8)));
    }

    #[test]
    fn harmonic_layout() {
        let pr = params(TRule::Harmonic);
        let seq = build_sequence(&pr);
        let t0 = pr.amplitude.clone();
        let expect_a4 = &pr.a + &pr.lemma.c1 * (&t0 / Scalar::from_int(2, P));
        assert_eq!(seq.coefficient(4).unwrap(), expect_a4);
        assert_eq!(seq.coefficient(1).unwrap(), &pr.a + &pr.lemma.c1 * &t0);
        assert_eq!(seq.coefficient(2).unwrap(), &pr.a + &pr.lemma.c2 * &t0);
        assert_eq!(seq.coefficient(3).unwrap(), pr.a);
        assert!(check_layout(&seq, 3000).unwrap().holds);
    }

    #[test]
    fn layout_survives_underflowing_schedule() {
        // 2^-r drops below one ulp of a long before r = 1000
        let seq = build_sequence(&params(TRule::Geometric));
        let check = check_layout(&seq, 3000).unwrap();
        assert!(check.holds, "{check:?}");
    }

    #[test]
    fn stage_maps_are_hyperbolic_for_small_t() {
        let pr = params(TRule::Harmonic);
        assert!(pr.stage_map(0).unwrap().classify_default().is_hyperbolic());
        assert!(pr.stage_map(999).unwrap().classify_default().is_hyperbolic());
        // ψ_t and ψ_−t differ at first order in t
        let small = pr.clone().with_amplitude(Scalar::parse("1e-3", P).unwrap());
        let neg = small.clone().with_amplitude(Scalar::parse("-1e-3", P).unwrap());
        let gap = small
            .stage_map(0)
            .unwrap()
            .compose(&neg.stage_map(0).unwrap().inverse())
            .distance_to_identity()
            .to_f64();
        assert!(gap > 1e-4 && gap < 1e-1, "{gap}");
    }

    #[test]
    fn high_precision_stage_agrees() {
        let pr = params(TRule::Harmonic);
        let (m, _, _) = pr.stage_map_at(7, 512).unwrap();
        let low = pr.stage_map(7).unwrap();
        let d = low.compose(
            &MoebiusMap::new(
                m.entries()[0].with_prec(P),
                m.entries()[1].with_prec(P),
                m.entries()[2].with_prec(P),
                m.entries()[3].with_prec(P),
            )
            .unwrap()
            .inverse(),
        );
        assert!(d.is_projective_identity(&Scalar::epsilon(P - 16)));
    }

    #[test]
    fn divergence_tags() {
        assert!(TRule::Harmonic.is_divergent());
        assert!(!TRule::Geometric.is_divergent());
        assert!(TRule::Custom(PerturbationRule::Harmonic).is_divergent());
        assert!(!TRule::Custom(PerturbationRule::parse("1/i^2").unwrap()).is_divergent());
    }
}

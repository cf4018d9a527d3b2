use serde::Serialize;

use crate::error::{Error, Result};
use crate::moebius::{chordal_diameter, chordal_distance, BoundaryPoint, MapClass, MoebiusMap};
use crate::rational::sequence::RationalRotationParams;
use crate::scalar::Scalar;

/// Stages before this index are ignored by the tail checks.
pub const TAIL_START: usize = 50;
/// Tail distance allowed between `A_r, R_r` and `A, R`.
pub const TAIL_DISTANCE: f64 = 1e-2;
/// Allowed relative gap between `−ln μ_r` and `|s|·t_r` in the tail.
pub const FIT_TOLERANCE: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub r: usize,
    pub t: Scalar,
    pub alpha: Scalar,
    pub beta: Scalar,
    pub class: &'static str,
    #[serde(rename = "A_r")]
    pub attractor: BoundaryPoint,
    #[serde(rename = "R_r")]
    pub repeller: BoundaryPoint,
    pub mu: Scalar,
    pub neg_log_mu: Scalar,
    /// Precision the stage was classified at.
    pub work_prec: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub stages: usize,
    pub all_hyperbolic: bool,
    pub tail_start: usize,
    pub max_attractor_distance: Scalar,
    pub max_repeller_distance: Scalar,
    /// Tail distances to `A` and `R` never increase (up to rounding).
    pub monotone_tail: bool,
    /// `(r + 1, Σ_{r′ ≤ r} −ln μ_{r′})` at powers of ten and at the end.
    pub neg_log_mu_partial_sums: Vec<(usize, Scalar)>,
    pub neg_log_mu_total: Scalar,
    pub fit_max_relative_error: Scalar,
    pub fit_ok: bool,
    /// The schedule is declared divergent and the dyadic block sums of
    /// `−ln μ_r` do not shrink.
    pub unbounded_heuristic: bool,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionCertificate {
    pub stages: Vec<StageRecord>,
    pub summary: CertificateSummary,
}

/// Bits needed to resolve a stage with perturbation `t`: the trace of
/// `ψ_r` departs from 2 by about `t²`, and classification only trusts
/// the upper half of the mantissa.
fn work_prec(base: u32, t: &Scalar) -> u32 {
    let lost = if t.is_zero() {
        0
    } else {
        (-t.abs().ln().to_f64() / std::f64::consts::LN_2).ceil().max(0.0) as u32
    };
    (base + 64 + 4 * lost).div_ceil(64) * 64
}

fn stage_record(params: &RationalRotationParams, r: usize) -> Result<StageRecord> {
    let prec = params.prec();
    let t = params.t(r)?;
    let wp = work_prec(prec, &t);
    let (psi, alpha, beta) = params.stage_map_at(r, wp)?;
    match psi.classify_default() {
        MapClass::Hyperbolic {
            attractor,
            repeller,
            multiplier,
        } => {
            let neg_log_mu = (-multiplier.ln()).with_prec(prec);
            let round = |p: BoundaryPoint| match p {
                BoundaryPoint::Finite(x) => BoundaryPoint::Finite(x.with_prec(prec)),
                inf => inf,
            };
            Ok(StageRecord {
                r,
                t,
                alpha: alpha.with_prec(prec),
                beta: beta.with_prec(prec),
                class: "hyperbolic",
                attractor: round(attractor),
                repeller: round(repeller),
                mu: multiplier.with_prec(prec),
                neg_log_mu,
                work_prec: wp,
            })
        }
        _ => Err(Error::StageNotHyperbolic(r)),
    }
}

/// Classifies `ψ_0, …, ψ_{num_stages−1}` and checks that every stage is
/// hyperbolic, that `A_r, R_r` settle at `A, R`, that `−ln μ_r` follows
/// `|s|·t_r`, and that `Σ −ln μ_r` keeps growing.
///
/// Each stage is evaluated at a precision large enough to resolve its
/// perturbation, so tiny `t_r` still classify correctly.
pub fn certify(params: &RationalRotationParams, num_stages: usize) -> Result<ConstructionCertificate> {
    if num_stages < 10 {
        return Err(Error::InvalidConfig(format!(
            "certify needs at least 10 stages, got {num_stages}"
        )));
    }
    let prec = params.prec();
    let stages = (0..num_stages)
        .map(|r| stage_record(params, r))
        .collect::<Result<Vec<_>>>()?;

    let target_a = &params.lemma.attractor;
    let target_r = &params.lemma.repeller;
    let tail_start = TAIL_START.min(num_stages / 2);
    let slack = Scalar::pow2(-((prec / 2) as i32), prec);
    let mut max_a = Scalar::zero(prec);
    let mut max_r = Scalar::zero(prec);
    let mut monotone = true;
    let mut prev: Option<(Scalar, Scalar)> = None;
    for s in &stages[tail_start..] {
        let da = chordal_distance(&s.attractor, target_a);
        let dr = chordal_distance(&s.repeller, target_r);
        if let Some((pa, pr)) = &prev {
            monotone &= da <= pa + &slack && dr <= pr + &slack;
        }
        max_a = max_a.max(da.clone());
        max_r = max_r.max(dr.clone());
        prev = Some((da, dr));
    }

    let mut partial = Vec::new();
    let mut sum = Scalar::zero(prec);
    let mut next_mark = 10usize;
    for (k, s) in stages.iter().enumerate() {
        sum = &sum + &s.neg_log_mu;
        if k + 1 == next_mark || k + 1 == num_stages {
            partial.push((k + 1, sum.clone()));
            if k + 1 == next_mark {
                next_mark *= 10;
            }
        }
    }

    let s_abs = params.lemma.slope_s.abs();
    let mut fit = Scalar::zero(prec);
    for s in &stages[num_stages / 2..] {
        let model = &s_abs * &s.t;
        if model.is_zero() {
            continue;
        }
        fit = fit.max((&s.neg_log_mu - &model).abs() / model);
    }
    let fit_ok = fit < Scalar::from_f64(FIT_TOLERANCE, prec);

    let unbounded = params.t_rule.is_divergent() && blocks_do_not_shrink(&stages);
    let tail_ok = max_a < Scalar::from_f64(TAIL_DISTANCE, prec) && max_r < Scalar::from_f64(TAIL_DISTANCE, prec);
    let summary = CertificateSummary {
        stages: num_stages,
        all_hyperbolic: true,
        tail_start,
        max_attractor_distance: max_a,
        max_repeller_distance: max_r,
        monotone_tail: monotone,
        neg_log_mu_partial_sums: partial,
        neg_log_mu_total: sum,
        fit_max_relative_error: fit.clone(),
        fit_ok,
        unbounded_heuristic: unbounded,
        passes: tail_ok && monotone && fit_ok && unbounded,
    };
    Ok(ConstructionCertificate { stages, summary })
}

/// Dyadic block sums of `−ln μ_r`; the last ratio must stay above 0.9.
fn blocks_do_not_shrink(stages: &[StageRecord]) -> bool {
    let mut blocks = Vec::new();
    let mut start = 1usize;
    while 2 * start - 1 <= stages.len() {
        let sum: f64 = stages[start - 1..2 * start - 1]
            .iter()
            .map(|s| s.neg_log_mu.to_f64())
            .sum();
        blocks.push(sum);
        start *= 2;
    }
    match blocks.as_slice() {
        [.., x, y] => *x > 0.0 && y / x >= 0.9,
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionPoint {
    /// Number of composed stages.
    pub stages: usize,
    pub diameter: Scalar,
}

/// Image diameters of a sample under `Ĥ_r = ψ_0∘…∘ψ_{r−1}`.
///
/// The sample is `points` half-angle-spaced points of the boundary arc
/// that stays at chordal distance `≥ avoid` from `R`, endpoints
/// included.
pub fn contraction_profile(
    params: &RationalRotationParams,
    num_stages: usize,
    points: usize,
    avoid: &Scalar,
) -> Result<Vec<ContractionPoint>> {
    let prec = params.prec();
    let pi = Scalar::pi(prec);
    let phi_r = params.lemma.repeller.half_angle(prec);
    // chordal distance is twice the half-angle gap
    let gap = avoid / Scalar::from_int(2, prec);
    let span = &pi - Scalar::from_int(2, prec) * &gap;
    let denom = Scalar::from_int(points.saturating_sub(1).max(1) as i64, prec);
    let sample: Vec<BoundaryPoint> = (0..points)
        .map(|k| {
            let phi = &phi_r + &gap + &span * Scalar::from_int(k as i64, prec) / &denom;
            BoundaryPoint::from_half_angle(&phi)
        })
        .collect();
    let mut marks: Vec<usize> = std::iter::successors(Some(1usize), |m| Some(m * 10))
        .take_while(|&m| m <= num_stages)
        .flat_map(|m| [m, 2 * m, 5 * m])
        .filter(|&m| m <= num_stages)
        .collect();
    marks.push(num_stages);
    marks.dedup();
    let mut h = MoebiusMap::identity(prec);
    let mut out = Vec::new();
    for r in 0..num_stages {
        h = h.compose(&params.stage_map(r)?);
        if marks.contains(&(r + 1)) {
            let image: Vec<BoundaryPoint> = sample.iter().map(|x| h.apply_boundary(x)).collect();
            out.push(ContractionPoint {
                stages: r + 1,
                diameter: chordal_diameter(&image),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::sequence::{RChoice, TRule};

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
    fn harmonic_certificate_passes() {
        let cert = certify(&params(TRule::Harmonic), 1000).unwrap();
        let s = &cert.summary;
        assert!(s.passes, "{s:?}");
        assert!(s.neg_log_mu_total.to_f64() > 5.0);
        assert_eq!(s.neg_log_mu_partial_sums.last().unwrap().0, 1000);
    }

    #[test]
    fn small_amplitude_tracks_harmonic_number() {
        let pr = params(TRule::Harmonic).with_amplitude(Scalar::ratio(1, 8, P));
        let cert = certify(&pr, 1000).unwrap();
        let h: f64 = (1..=1000).map(|k| 1.0 / k as f64).sum();
        let model = pr.lemma.slope_s.abs().to_f64() * pr.amplitude.to_f64() * h;
        let got = cert.summary.neg_log_mu_total.to_f64();
        assert!((got / model - 1.0).abs() < 0.15, "{got} vs {model}");
    }

    #[test]
    fn geometric_is_hyperbolic_but_bounded() {
        let cert = certify(&params(TRule::Geometric), 1000).unwrap();
        assert!(cert.summary.all_hyperbolic);
        assert!(!cert.summary.unbounded_heuristic);
        assert!(!cert.summary.passes);
        assert!(cert.summary.neg_log_mu_total.to_f64() < 10.0);
    }

    #[test]
    fn zero_rule_fails_at_first_stage() {
        assert_eq!(certify(&params(TRule::Zero), 10), Err(Error::StageNotHyperbolic(0)));
    }

    #[test]
    fn contraction_shrinks() {
        let prof = contraction_profile(&params(TRule::Harmonic), 1000, 20, &Scalar::from_f64(0.1, P)).unwrap();
        assert_eq!(prof.last().unwrap().stages, 1000);
        assert!(prof.last().unwrap().diameter.to_f64() < 1e-3);
        assert!(prof.first().unwrap().diameter > prof.last().unwrap().diameter);
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moebius::{chordal_distance, half_angle_distance, t_map, BoundaryPoint, MoebiusMap};
use crate::scalar::Scalar;

/// Tolerance for "same point" and "returns to 0": `2^-(prec/2)`.
fn point_tol(prec: u32) -> Scalar {
    Scalar::pow2(-((prec / 2) as i32), prec)
}

/// `C_a = {T_a^l(0) : 0 ≤ l < q}` in orbit order.
pub fn orbit_of_zero(a: &Scalar, q: usize) -> Result<Vec<BoundaryPoint>> {
    let prec = a.prec();
    let t = t_map(a)?;
    let zero = BoundaryPoint::Finite(Scalar::zero(prec));
    let mut orbit = Vec::with_capacity(q);
    let mut x = zero.clone();
    for _ in 0..q {
        orbit.push(x.clone());
        x = t.apply_boundary(&x);
    }
    let tol = point_tol(prec);
    if q == 0 || chordal_distance(&x, &zero) > tol {
        return Err(Error::NotPeriodic(q));
    }
    for i in 0..q {
        for j in i + 1..q {
            if chordal_distance(&orbit[i], &orbit[j]) <= tol {
                return Err(Error::NotPeriodic(q));
            }
        }
    }
    Ok(orbit)
}

/// `T_α∘T_β∘T_a^{q−2}`.
pub fn family_map(a: &Scalar, q: usize, alpha: &Scalar, beta: &Scalar) -> Result<MoebiusMap> {
    let rest = t_map(a)?.power(q.saturating_sub(2) as u64);
    Ok(t_map(alpha)?.compose(&t_map(beta)?).compose(&rest))
}

/// α-derivative of `T_{α,a,q}` at `α = a`: `v₁(x) = x/a`. At ∞ the value
/// is read in the chart `u = 1/x`, where it vanishes.
pub fn vector_field_v1(a: &Scalar, x: &BoundaryPoint) -> Scalar {
    match x {
        BoundaryPoint::Finite(x) => x / a,
        BoundaryPoint::Infinity => Scalar::zero(a.prec()),
    }
}

/// β-derivative at `(a, a)`: `v₂(x) = −x(a + x)/a²`, the pushforward of
/// `v₁` under `T_a`. In the chart `u = 1/x` its value at ∞ is `1/a²`.
pub fn vector_field_v2(a: &Scalar, x: &BoundaryPoint) -> Scalar {
    match x {
        BoundaryPoint::Finite(x) => -(x * (a + x)) / a.square(),
        BoundaryPoint::Infinity => a.square().recip(),
    }
}

/// `v = c1·v₁ + c2·v₂` and its derivative at a finite point.
fn field_and_slope(a: &Scalar, c1: &Scalar, c2: &Scalar, x: &Scalar) -> (Scalar, Scalar) {
    let a2 = a.square();
    let v = c1 * x / a - c2 * x * (a + x) / &a2;
    let dv = c1 / a - c2 * (a + Scalar::from_int(2, a.prec()) * x) / &a2;
    (v, dv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Alpha,
    Beta,
}

/// Central difference of the family in α or β at a finite point whose
/// image stays finite.
pub fn field_by_difference(a: &Scalar, q: usize, x: &Scalar, which: Field, h: &Scalar) -> Result<Scalar> {
    let image = |d: &Scalar| -> Result<Scalar> {
        let (alpha, beta) = match which {
            Field::Alpha => (a + d, a.clone()),
            Field::Beta => (a.clone(), a + d),
        };
        match family_map(a, q, &alpha, &beta)?.apply_boundary(&BoundaryPoint::Finite(x.clone())) {
            BoundaryPoint::Finite(y) => Ok(y),
            BoundaryPoint::Infinity => Err(Error::FieldMismatch(format!("image of {x} is infinite"))),
        }
    };
    let two_h = Scalar::from_int(2, a.prec()) * h;
    Ok((image(h)? - image(&-h)?) / two_h)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub x: Scalar,
    pub v1: Scalar,
    pub v1_difference: Scalar,
    pub v2: Scalar,
    pub v2_difference: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldCheck {
    pub step: Scalar,
    pub samples: Vec<FieldSample>,
    pub max_relative_error: Scalar,
}

/// Compares the closed forms of `v₁`, `v₂` with central differences
/// (step `10⁻¹⁰`) at the given finite points.
pub fn check_fields(a: &Scalar, q: usize, points: &[Scalar]) -> Result<FieldCheck> {
    let prec = a.prec();
    let h = Scalar::parse("1e-10", prec)?;
    let mut worst = Scalar::zero(prec);
    let mut samples = Vec::with_capacity(points.len());
    for x in points {
        let p = BoundaryPoint::Finite(x.clone());
        let v1 = vector_field_v1(a, &p);
        let v2 = vector_field_v2(a, &p);
        let d1 = field_by_difference(a, q, x, Field::Alpha, &h)?;
        let d2 = field_by_difference(a, q, x, Field::Beta, &h)?;
        for (exact, fd) in [(&v1, &d1), (&v2, &d2)] {
            let err = (exact - fd).abs();
            let rel = if exact.is_zero() { err } else { &err / &exact.abs() };
            worst = worst.max(rel);
        }
        samples.push(FieldSample {
            x: x.clone(),
            v1,
            v1_difference: d1,
            v2,
            v2_difference: d2,
        });
    }
    Ok(FieldCheck {
        step: h,
        samples,
        max_relative_error: worst,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    /// Richardson-extrapolated `dμ/dt` at `t = 0`.
    pub slope: Scalar,
    /// `(t, (μ(t) − μ(−t))/2t)` for `t = 10⁻³, 10⁻⁴, 10⁻⁵`.
    pub differences: Vec<(Scalar, Scalar)>,
    /// Relative gap between the two Richardson values.
    pub relative_spread: Scalar,
}

/// `μ(t) = ψ_t′(0)` for `ψ_t = T_{a+c1·t}∘T_{a+c2·t}∘T_a^{q−2}`. Every
/// `ψ_t` fixes 0: `T_a^{q−2}(0) = T_a^{−2}(0) = −1` is the pole of
/// `T_β`, and `T_α(∞) = 0`.
fn mu_at_zero(a: &Scalar, q: usize, c1: &Scalar, c2: &Scalar, t: &Scalar) -> Result<Scalar> {
    let psi = family_map(a, q, &(a + c1 * t), &(a + c2 * t))?;
    psi.derivative_at(&BoundaryPoint::Finite(Scalar::zero(a.prec())))
}

/// Slope `s` in `μ(t) = 1 + s·t + O(t²)`.
pub fn multiplier_slope(a: &Scalar, q: usize, c1: &Scalar, c2: &Scalar) -> Result<SlopeEstimate> {
    let prec = a.prec();
    let mut differences = Vec::new();
    for exp in [-3i32, -4, -5] {
        let t = Scalar::parse(&format!("1e{exp}"), prec)?;
        let up = mu_at_zero(a, q, c1, c2, &t)?;
        let down = mu_at_zero(a, q, c1, c2, &-&t)?;
        let d = (up - down) / (Scalar::from_int(2, prec) * &t);
        differences.push((t, d));
    }
    // central differences have an O(t²) error: R = (100·D(t/10) − D(t))/99
    let rich =
        |coarse: &Scalar, fine: &Scalar| (Scalar::from_int(100, prec) * fine - coarse) / Scalar::from_int(99, prec);
    let r1 = rich(&differences[0].1, &differences[1].1);
    let r2 = rich(&differences[1].1, &differences[2].1);
    let relative_spread = if r2.is_zero() {
        (&r1 - &r2).abs()
    } else {
        (&r1 - &r2).abs() / r2.abs()
    };
    if r2.abs() < Scalar::parse("1e-6", prec)? {
        return Err(Error::DegenerateSlope(r2.to_display(6)));
    }
    Ok(SlopeEstimate {
        slope: r2,
        differences,
        relative_spread,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSolution {
    pub c1: Scalar,
    pub c2: Scalar,
    #[serde(rename = "A")]
    pub attractor: BoundaryPoint,
    #[serde(rename = "R")]
    pub repeller: BoundaryPoint,
    pub slope_s: Scalar,
    pub slope: SlopeEstimate,
}

fn in_orbit(x: &BoundaryPoint, orbit: &[BoundaryPoint], tol: &Scalar) -> bool {
    orbit.iter().any(|o| chordal_distance(x, o) <= *tol)
}

/// Coefficients `(c1, c2)` such that `v = c1·v₁ + c2·v₂` vanishes at `R`,
/// repels there (`v′(R) > 0`) and attracts at its other zero `A`.
///
/// The pair is scaled so that the multiplier slope is `s = −1`. Fails
/// with `RInOrbit` for `R ∈ C_a` and with `ExceptionalR` where the
/// fields do not determine a nondegenerate combination.
pub fn solve_lemma(a: &Scalar, q: usize, r: &BoundaryPoint) -> Result<LemmaSolution> {
    let prec = a.prec();
    let orbit = orbit_of_zero(a, q)?;
    let tol = point_tol(prec);
    if in_orbit(r, &orbit, &tol) {
        return Err(Error::RInOrbit);
    }
    let x = match r {
        BoundaryPoint::Finite(x) => x.clone(),
        BoundaryPoint::Infinity => return Err(Error::ExceptionalR("R = inf".into())),
    };
    let f1 = vector_field_v1(a, r);
    let f2 = vector_field_v2(a, r);
    if f1.abs() <= tol && f2.abs() <= tol {
        return Err(Error::ExceptionalR(format!("both fields vanish at {x}")));
    }
    let (mut c1, mut c2) = (f2, -f1);
    let (_, dv_r) = field_and_slope(a, &c1, &c2, &x);
    if dv_r.abs() <= tol {
        return Err(Error::ExceptionalR(format!("double zero at {x}")));
    }
    if dv_r.is_negative() {
        c1 = -c1;
        c2 = -c2;
    }
    // zeros of v: x·(c1/a − c2(a + x)/a²) = 0, i.e. 0 and c1·a/c2 − a
    let other = if c2.is_zero() {
        BoundaryPoint::Infinity
    } else {
        BoundaryPoint::Finite(&c1 * a / &c2 - a)
    };
    let zero = BoundaryPoint::Finite(Scalar::zero(prec));
    let attractor = if chordal_distance(&zero, r) > chordal_distance(&other, r) {
        zero
    } else {
        other
    };
    if chordal_distance(&attractor, r) <= tol {
        return Err(Error::ExceptionalR(format!("A = R at {x}")));
    }

    // the closed forms are only trusted after a finite-difference check
    let probe = [x.clone(), Scalar::ratio(1, 3, prec), -(a / Scalar::from_int(3, prec))];
    let fields = check_fields(a, q, &probe[..if x.is_zero() { 1 } else { 3 }])?;
    if fields.max_relative_error > Scalar::parse("1e-6", prec)? {
        return Err(Error::FieldMismatch(fields.max_relative_error.to_display(6)));
    }

    let raw = multiplier_slope(a, q, &c1, &c2)?;
    if raw.slope.is_positive() {
        return Err(Error::DegenerateSlope(format!(
            "slope {} makes the target a repeller",
            raw.slope.to_display(6)
        )));
    }
    let scale = raw.slope.abs();
    c1 = &c1 / &scale;
    c2 = &c2 / &scale;
    let slope = multiplier_slope(a, q, &c1, &c2)?;
    Ok(LemmaSolution {
        c1,
        c2,
        attractor,
        repeller: r.clone(),
        slope_s: slope.slope.clone(),
        slope,
    })
}

/// Largest margin that can make sense: points of the circle are at most
/// π apart.
fn check_margin(margin: &Scalar) -> Result<()> {
    if !margin.is_positive() || *margin > Scalar::pi(margin.prec()) {
        return Err(Error::NoAdmissibleR);
    }
    Ok(())
}

const ATTEMPTS: usize = 2000;

/// Seeded pick of `R` at chordal distance at least `margin` from
/// `C_a ∪ {0, ∞}` and from every point of `avoid`.
///
/// Candidates come first from the arc between `T_a(0) = −a` and 0, where
/// both lemma coefficients come out positive, and then from the whole
/// circle.
pub fn choose_r_avoiding(
    a: &Scalar,
    q: usize,
    margin: &Scalar,
    seed: u64,
    avoid: &[BoundaryPoint],
) -> Result<(BoundaryPoint, LemmaSolution)> {
    check_margin(margin)?;
    let prec = a.prec();
    let mut forbidden = orbit_of_zero(a, q)?;
    forbidden.push(BoundaryPoint::Finite(Scalar::zero(prec)));
    forbidden.push(BoundaryPoint::Infinity);
    let pi = Scalar::pi(prec);
    let arc_lo = &pi / Scalar::from_int(2, prec);
    let arc_hi = BoundaryPoint::Finite(-a).half_angle(prec);
    let blocked: Vec<Scalar> = forbidden.iter().chain(avoid).map(|p| p.half_angle(prec)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..2 * ATTEMPTS {
        let u = Scalar::from_f64(rng.gen::<f64>(), prec);
        let phi = if attempt < ATTEMPTS {
            &arc_lo + u * (&arc_hi - &arc_lo)
        } else {
            u * &pi
        };
        if blocked.iter().any(|b| half_angle_distance(&phi, b) < *margin) {
            continue;
        }
        let candidate = BoundaryPoint::from_half_angle(&phi);
        match solve_lemma(a, q, &candidate) {
            Ok(lemma) => return Ok((candidate, lemma)),
            Err(Error::ExceptionalR(_)) | Err(Error::RInOrbit) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoAdmissibleR)
}

#[allow(non_snake_case)]
pub fn choose_R(a: &Scalar, q: usize, margin: &Scalar, seed: u64) -> Result<BoundaryPoint> {
    choose_r_avoiding(a, q, margin, seed, &[]).map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::rho_inverse;

    const P: u32 = 256;

    fn s(v: f64) -> Scalar {
        Scalar::from_f64(v, P)
    }

    fn fin(v: f64) -> BoundaryPoint {
        BoundaryPoint::Finite(s(v))
    }

    fn a_of(p: i64, q: i64) -> Scalar {
        rho_inverse(&Scalar::ratio(p, q, P)).unwrap()
    }

    fn close(x: &BoundaryPoint, y: &BoundaryPoint) -> bool {
        chordal_distance(x, y).to_f64() < 1e-60
    }

    #[test]
    fn orbits() {
        let o = orbit_of_zero(&s(1.0), 3).unwrap();
        assert_eq!(o, vec![fin(0.0), fin(-1.0), BoundaryPoint::Infinity]);
        let o = orbit_of_zero(&a_of(1, 4), 4).unwrap();
        for (x, y) in o.iter().zip([fin(0.0), fin(-0.5), fin(-1.0), BoundaryPoint::Infinity]) {
            assert!(close(x, &y), "{x} vs {y}");
        }
        let o = orbit_of_zero(&a_of(1, 6), 6).unwrap();
        assert!(close(&o[1], &BoundaryPoint::Finite(-Scalar::ratio(1, 3, P))));
        assert!(close(&o[2], &fin(-0.5)));
        assert_eq!(orbit_of_zero(&s(0.7), 3), Err(Error::NotPeriodic(3)));
    }

    #[test]
    fn field_values() {
        let one = s(1.0);
        assert_eq!(vector_field_v1(&one, &fin(2.0)), s(2.0));
        assert_eq!(vector_field_v1(&one, &fin(-3.0)), s(-3.0));
        assert!(vector_field_v1(&one, &fin(0.0)).is_zero());
        assert!(vector_field_v2(&one, &fin(-1.0)).is_zero());
        assert_eq!(vector_field_v2(&one, &fin(1.0)), s(-2.0));
    }

    #[test]
    fn fields_match_differences() {
        for (a, q) in [(s(1.0), 3usize), (a_of(1, 4), 4), (a_of(1, 6), 6)] {
            let pts: Vec<Scalar> = [-3.0, -0.7, -0.2, 0.4, 2.0].iter().map(|&v| s(v)).collect();
            let check = check_fields(&a, q, &pts).unwrap();
            assert!(check.max_relative_error.to_f64() < 1e-6, "q = {q}");
        }
        let one = s(1.0);
        let fd = field_by_difference(&one, 3, &s(2.0), Field::Alpha, &s(1e-10)).unwrap();
        assert!((fd.to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn v2_is_pushforward_of_v1() {
        let a = a_of(1, 4);
        let t = t_map(&a).unwrap();
        let inv = t.inverse();
        for x in [-2.0, -0.3, 0.8, 5.0] {
            let y = inv.apply_boundary(&fin(x));
            let push = t.derivative_at(&y).unwrap() * vector_field_v1(&a, &y);
            let v2 = vector_field_v2(&a, &fin(x));
            assert!((push - v2).abs().to_f64() < 1e-60);
        }
    }

    #[test]
    fn lemma_at_one() {
        let one = s(1.0);
        let sol = solve_lemma(&one, 3, &fin(2.0)).unwrap();
        // proportional to (c1, c2) = (3, 1) up to sign
        let ratio = &sol.c1 / &sol.c2;
        assert!((ratio.to_f64() - 3.0).abs() < 1e-40);
        assert!(close(&sol.attractor, &fin(0.0)));
        assert!((sol.slope_s.to_f64() + 1.0).abs() < 1e-6);
        let (v, dv) = field_and_slope(&one, &sol.c1, &sol.c2, &s(2.0));
        assert!(v.abs().to_f64() < 1e-60);
        assert!(dv.is_positive());
        let (_, dv0) = field_and_slope(&one, &sol.c1, &sol.c2, &s(0.0));
        assert!(dv0.is_negative());
        assert_eq!(solve_lemma(&one, 3, &fin(-1.0)), Err(Error::RInOrbit));
        assert_eq!(solve_lemma(&one, 3, &BoundaryPoint::Infinity), Err(Error::RInOrbit));
    }

    #[test]
    fn lemma_at_half() {
        let a = a_of(1, 4);
        let sol = solve_lemma(&a, 4, &fin(1.0)).unwrap();
        assert!(close(&sol.attractor, &fin(0.0)));
        let t = s(1e-3);
        let psi = family_map(&a, 4, &(&a + &sol.c1 * &t), &(&a + &sol.c2 * &t)).unwrap();
        let (att, rep, mu) = psi.fixed_points_hyperbolic().unwrap();
        assert!(chordal_distance(&att, &fin(0.0)).to_f64() < 1e-40);
        assert!(chordal_distance(&rep, &fin(1.0)).to_f64() < 1e-40);
        assert!(mu < s(1.0));
    }

    #[test]
    fn slope_properties() {
        let one = s(1.0);
        let (c1, c2) = (s(3.0), s(1.0));
        let base = multiplier_slope(&one, 3, &-&c1, &-&c2).unwrap();
        assert!(base.slope.is_negative() && base.slope.abs().to_f64() > 1e-3);
        assert!(base.relative_spread.to_f64() < 0.01);
        let scaled = multiplier_slope(&one, 3, &-(s(2.5) * &c1), &-(s(2.5) * &c2)).unwrap();
        assert!((scaled.slope.to_f64() / base.slope.to_f64() - 2.5).abs() < 1e-6);
        let flipped = multiplier_slope(&one, 3, &c1, &c2).unwrap();
        assert!(flipped.slope.is_positive());
        let t = s(1e-3);
        let mu = mu_at_zero(&one, 3, &c1, &c2, &t).unwrap();
        assert!(mu > s(1.0));
        assert!(matches!(
            multiplier_slope(&one, 3, &s(0.0), &s(0.0)),
            Err(Error::DegenerateSlope(_))
        ));
    }

    #[test]
    fn choose_r_is_deterministic_and_admissible() {
        let one = s(1.0);
        let margin = s(0.05);
        let r1 = choose_R(&one, 3, &margin, 0).unwrap();
        let r2 = choose_R(&one, 3, &margin, 0).unwrap();
        assert_eq!(r1, r2);
        for p in orbit_of_zero(&one, 3).unwrap() {
            assert!(chordal_distance(&r1, &p) >= margin);
        }
        assert_ne!(choose_R(&one, 3, &margin, 1).unwrap(), r1);
        let half = a_of(1, 4);
        let r = choose_R(&half, 4, &margin, 0).unwrap();
        for p in orbit_of_zero(&half, 4).unwrap() {
            assert!(chordal_distance(&r, &p) >= margin);
        }
        assert_eq!(choose_R(&one, 3, &s(3.2), 0), Err(Error::NoAdmissibleR));
    }
}

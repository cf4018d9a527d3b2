use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::irrational::approx::Approximation;
use crate::moebius::{
    chordal_diameter, chordal_distance, half_angle_distance, t_map, BoundaryPoint, MapClass, MoebiusMap,
};
use crate::rational::{choose_r_avoiding, family_map, LemmaSolution};
use crate::scalar::Scalar;

/// One period `ψ_n = T_{α_n}∘T_{β_n}∘T_{ã_n}^{q_n−2}` of the nested
/// construction, with everything the later stages need.
#[derive(Clone, Debug)]
pub struct StageData {
    /// 1-based stage index.
    pub n: usize,
    pub p: u64,
    pub q: u64,
    pub a: Scalar,
    pub alpha: Scalar,
    pub beta: Scalar,
    pub t: Scalar,
    pub lemma: LemmaSolution,
    pub psi: MoebiusMap,
    /// `ψ_{n,l}` for `0 ≤ l < q`: the first `l` factors of `ψ_n`.
    pub partials: Vec<MoebiusMap>,
    pub attractor: BoundaryPoint,
    pub repeller: BoundaryPoint,
    pub mu: Scalar,
    /// `N_n`, once chosen.
    pub power: Option<u64>,
    /// Truncated `M_n`; empty for the auxiliary last stage.
    pub m_points: Vec<BoundaryPoint>,
    pub r_max: Option<usize>,
    /// Smallest chordal distance from `R_n` to `M_n`.
    pub min_margin: Option<Scalar>,
}

impl StageData {
    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    /// Coefficient at 0-based position `j` of a block of this stage.
    pub fn coefficient_in_block(&self, j: usize) -> &Scalar {
        match j % self.q as usize {
            0 => &self.alpha,
            1 => &self.beta,
            _ => &self.a,
        }
    }
}

/// Chordal distance the truncated tails must reach.
pub const TAIL_TOLERANCE: f64 = 1e-3;

/// `⌈ln(10³)/(−ln μ)⌉`.
pub fn rate_r_max(mu: &Scalar) -> usize {
    let rate = -mu.ln().to_f64();
    if rate.is_nan() || rate <= 0.0 {
        return 0;
    }
    (1e3f64.ln() / rate).ceil() as usize
}

/// `A` and its orbit under `T_a`.
fn limit_orbit(a: &Scalar, q: u64, attractor: &BoundaryPoint) -> Result<Vec<BoundaryPoint>> {
    let t = t_map(a)?;
    Ok(
        std::iter::successors(Some(attractor.clone()), |x| Some(t.apply_boundary(x)))
            .take(q as usize)
            .collect(),
    )
}

/// Smallest `r ≥ ⌈ln(10³)/(−ln μ)⌉` at which every `ψ^r∘ψ_l(0)` is within
/// [`TAIL_TOLERANCE`] of the limit orbit of `A`. The rate bound alone
/// ignores how slowly points near `R` start to move.
pub fn auto_r_max(stage: &StageData) -> Result<usize> {
    let floor = rate_r_max(&stage.mu);
    let prec = stage.prec();
    let zero = BoundaryPoint::Finite(Scalar::zero(prec));
    let orbit = limit_orbit(&stage.a, stage.q, &stage.attractor)?;
    let tol = Scalar::from_f64(TAIL_TOLERANCE, prec);
    let near = |y: &BoundaryPoint| orbit.iter().any(|o| chordal_distance(y, o) < tol);
    let mut ys: Vec<BoundaryPoint> = stage.partials.iter().map(|p| p.apply_boundary(&zero)).collect();
    let mut r = 0usize;
    let cap = 100 * floor.max(1);
    loop {
        if r >= floor && ys.iter().all(&near) || r >= cap {
            return Ok(r);
        }
        ys = ys.iter().map(|y| stage.psi.apply_boundary(y)).collect();
        r += 1;
    }
}

fn dedup_points(mut points: Vec<BoundaryPoint>, prec: u32) -> Vec<BoundaryPoint> {
    let tol = Scalar::pow2(-((prec / 2) as i32), prec);
    let mut keyed: Vec<(Scalar, BoundaryPoint)> = points.drain(..).map(|p| (p.half_angle(prec), p)).collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut out: Vec<BoundaryPoint> = Vec::with_capacity(keyed.len());
    for (_, p) in keyed {
        if out.last().is_none_or(|l| chordal_distance(l, &p) > tol) {
            out.push(p);
        }
    }
    // the sort is on [0, π), so the ends may also coincide
    if out.len() > 1 && chordal_distance(&out[0], &out[out.len() - 1]) <= tol {
        out.pop();
    }
    out
}

/// Truncated `M_n` built from stage `n + 1`: `A_{n+1}`, 0, the points
/// `ψ_{n+1,l}(A_{n+1})`, the orbits `ψ_{n+1}^r∘ψ_{n+1,l}(0)` for
/// `r ≤ r_max`, and the limit orbits of `A_{n+1}` under `T_{ã_{n+1}}` and
/// `T_{ã_n}`. Points closer than `2^-(prec/2)` are merged.
pub fn build_m(current: &Approximation, next: &StageData, r_max: usize) -> Result<Vec<BoundaryPoint>> {
    let prec = next.prec();
    let zero = BoundaryPoint::Finite(Scalar::zero(prec));
    let mut pts = vec![next.attractor.clone(), zero.clone()];
    for part in &next.partials {
        pts.push(part.apply_boundary(&next.attractor));
        let mut y = part.apply_boundary(&zero);
        for _ in 0..=r_max {
            let fy = next.psi.apply_boundary(&y);
            pts.push(y);
            y = fy;
        }
    }
    pts.extend(limit_orbit(&next.a, next.q, &next.attractor)?);
    pts.extend(limit_orbit(&current.a, current.q, &next.attractor)?);
    Ok(dedup_points(pts, prec))
}

/// `ψ_{n,0}, …, ψ_{n,q−1}`.
pub fn partial_products(a: &Scalar, q: usize, alpha: &Scalar, beta: &Scalar) -> Result<Vec<MoebiusMap>> {
    let prec = a.prec();
    let mut parts = vec![MoebiusMap::identity(prec)];
    let steps = [t_map(alpha)?, t_map(beta)?];
    let ta = t_map(a)?;
    for l in 1..q {
        let factor = if l <= 2 { &steps[l - 1] } else { &ta };
        let next = parts[l - 1].compose(factor);
        parts.push(next);
    }
    Ok(parts)
}

/// Settings shared by all stages.
#[derive(Clone, Debug)]
pub struct StageSettings {
    pub t: Scalar,
    pub margin: Scalar,
    pub seed: u64,
}

const RETRIES: u64 = 16;

/// Builds stage `n` at `ã_n` with `R_n` kept `margin` away from `avoid`
/// (the truncated `M_n`), halving `t` until `ψ_n` is hyperbolic with
/// positive coefficients.
pub fn build_stage(
    n: usize,
    approx: &Approximation,
    avoid: &[BoundaryPoint],
    settings: &StageSettings,
) -> Result<StageData> {
    let prec = approx.a.prec();
    let q = approx.q as usize;
    let a = &approx.a;
    let avoid_angles: Vec<Scalar> = avoid.iter().map(|p| p.half_angle(prec)).collect();
    let mut last_err = Error::NoAdmissibleR;
    for attempt in 0..RETRIES {
        let seed = settings.seed.wrapping_add((n as u64) << 32).wrapping_add(attempt);
        let (_, lemma) = choose_r_avoiding(a, q, &settings.margin, seed, avoid)?;
        let mut t = settings.t.clone();
        let mut found = None;
        for _ in 0..64 {
            let alpha = a + &lemma.c1 * &t;
            let beta = a + &lemma.c2 * &t;
            if alpha.is_positive() && beta.is_positive() {
                let psi = family_map(a, q, &alpha, &beta)?;
                if let MapClass::Hyperbolic {
                    attractor,
                    repeller,
                    multiplier,
                } = psi.classify_default()
                {
                    found = Some((alpha, beta, psi, attractor, repeller, multiplier));
                    break;
                }
            }
            t = &t / Scalar::from_int(2, prec);
        }
        let Some((alpha, beta, psi, attractor, repeller, mu)) = found else {
            last_err = Error::StageNotHyperbolic(n);
            continue;
        };
        let phi_r = repeller.half_angle(prec);
        let min_margin = avoid_angles
            .iter()
            .map(|m| half_angle_distance(&phi_r, m))
            .reduce(Scalar::min);
        if min_margin.as_ref().is_some_and(|d| *d < settings.margin) {
            last_err = Error::NoAdmissibleR;
            continue;
        }
        let partials = partial_products(a, q, &alpha, &beta)?;
        return Ok(StageData {
            n,
            p: approx.p,
            q: approx.q,
            a: a.clone(),
            alpha,
            beta,
            t,
            lemma,
            psi,
            partials,
            attractor,
            repeller,
            mu,
            power: None,
            m_points: avoid.to_vec(),
            r_max: None,
            min_margin,
        });
    }
    Err(last_err)
}

fn image_diameter(map: &MoebiusMap, points: &[BoundaryPoint]) -> Scalar {
    let image: Vec<BoundaryPoint> = points.iter().map(|x| map.apply_boundary(x)).collect();
    chordal_diameter(&image)
}

/// Stretch factor of `map` at `x` for the chordal metric:
/// `det·(1 + x²)/((m11·x + m12)² + (m21·x + m22)²)`.
pub fn chordal_derivative(map: &MoebiusMap, x: &BoundaryPoint) -> Scalar {
    let prec = map.prec();
    let det = map.det();
    let [m11, m12, m21, m22] = map.entries();
    match x {
        BoundaryPoint::Finite(v) => {
            let num = Scalar::one(prec) + v.square();
            det * num / ((m11 * v + m12).square() + (m21 * v + m22).square())
        }
        BoundaryPoint::Infinity => det / (m11.square() + m21.square()),
    }
}

/// `ln(diam₀·D/bound)/(−ln μ)`: the power predicted by the contraction
/// rate, where `D` is the chordal stretch of `prefix` at the attractor.
pub fn power_estimate(prefix: &MoebiusMap, stage: &StageData, bound: &Scalar) -> Result<f64> {
    let diam0 = chordal_diameter(&stage.m_points).to_f64();
    let stretch = chordal_derivative(prefix, &stage.attractor).to_f64();
    let rate = -stage.mu.ln().to_f64();
    Ok(((diam0 * stretch / bound.to_f64()).ln() / rate).max(0.0))
}

/// Smallest `N ≤ n_cap` (found by doubling and bisection) with
/// `diam(prefix∘ψ^N(M)) < bound`.
pub fn choose_n(
    k: usize,
    prefix: &MoebiusMap,
    psi: &MoebiusMap,
    m_points: &[BoundaryPoint],
    bound: &Scalar,
    n_cap: u64,
) -> Result<u64> {
    let passes = |n: u64| image_diameter(&prefix.compose(&psi.power(n)), m_points) < *bound;
    if passes(0) {
        return Ok(0);
    }
    let (mut lo, mut hi) = (0u64, 1u64);
    while !passes(hi) {
        lo = hi;
        if hi >= n_cap {
            let diam0 = image_diameter(prefix, m_points).to_f64();
            let rate = psi.multiplier().map(|m| -m.ln().to_f64()).unwrap_or(0.0);
            let estimate = if rate > 0.0 {
                ((diam0 / bound.to_f64()).ln() / rate).ceil().max(0.0) as u64
            } else {
                u64::MAX
            };
            return Err(Error::PowerCapExceeded {
                stage: k,
                cap: n_cap,
                estimate,
            });
        }
        hi = (2 * hi).min(n_cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Serializable view of a stage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageSummary {
    pub n: usize,
    pub p: u64,
    pub q: u64,
    pub a: Scalar,
    pub alpha: Scalar,
    pub beta: Scalar,
    pub t: Scalar,
    pub c1: Scalar,
    pub c2: Scalar,
    pub hyperbolic: bool,
    #[serde(rename = "A")]
    pub attractor: BoundaryPoint,
    #[serde(rename = "R")]
    pub repeller: BoundaryPoint,
    pub mu: Scalar,
    #[serde(rename = "N")]
    pub power: Option<u64>,
    pub r_max: Option<usize>,
    pub m_size: usize,
    pub min_margin: Option<Scalar>,
}

impl From<&StageData> for StageSummary {
    fn from(s: &StageData) -> Self {
        StageSummary {
            n: s.n,
            p: s.p,
            q: s.q,
            a: s.a.clone(),
            alpha: s.alpha.clone(),
            beta: s.beta.clone(),
            t: s.t.clone(),
            c1: s.lemma.c1.clone(),
            c2: s.lemma.c2.clone(),
            hyperbolic: s.psi.classify_default().is_hyperbolic(),
            attractor: s.attractor.clone(),
            repeller: s.repeller.clone(),
            mu: s.mu.clone(),
            power: s.power,
            r_max: s.r_max,
            m_size: s.m_points.len(),
            min_margin: s.min_margin.clone(),
        }
    }
}

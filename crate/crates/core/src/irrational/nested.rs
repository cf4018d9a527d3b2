use serde::Serialize;

use crate::cf::{trace_by_composition, CoefficientSource};
use crate::error::{Error, Result};
use crate::irrational::approx::{rational_approximations, Approximation, RhoSpec};
use crate::irrational::stage::{
    auto_r_max, build_m, build_stage, choose_n, power_estimate, StageData, StageSettings, StageSummary,
};
use crate::moebius::{chordal_diameter, chordal_distance, rho_inverse, BoundaryPoint, MoebiusMap};
use crate::scalar::Scalar;

pub const DEFAULT_N_CAP: u64 = 1_000_000;
pub const DEFAULT_T: f64 = 1e-2;
pub const DEFAULT_MARGIN_IRRATIONAL: f64 = 2e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RMax {
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug)]
pub struct IrrationalParams {
    pub rho: RhoSpec,
    /// `K ≥ 2`.
    pub stages: usize,
    pub r_max: RMax,
    pub n_cap: u64,
    pub seed: u64,
    pub prec: u32,
    /// Starting `t_n`, halved per stage until hyperbolic.
    pub t: Scalar,
    /// `δ`: required distance from `R_n` to `M_n`.
    pub margin: Scalar,
}

impl IrrationalParams {
    pub fn new(rho: RhoSpec, stages: usize, prec: u32) -> Self {
        IrrationalParams {
            rho,
            stages,
            r_max: RMax::Auto,
            n_cap: DEFAULT_N_CAP,
            seed: 0,
            prec,
            t: Scalar::from_f64(DEFAULT_T, prec),
            margin: Scalar::from_f64(DEFAULT_MARGIN_IRRATIONAL, prec),
        }
    }

    pub fn golden(stages: usize, prec: u32) -> Self {
        Self::new(RhoSpec::golden(), stages, prec)
    }

    fn validate(&self) -> Result<()> {
        if self.stages < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 stages, got {}",
                self.stages
            )));
        }
        if self.n_cap == 0 {
            return Err(Error::InvalidConfig("N_cap must be positive".into()));
        }
        Ok(())
    }
}

/// `2^-k`.
pub fn schedule_bound(k: usize, prec: u32) -> Scalar {
    Scalar::pow2(-(k as i32), prec)
}

/// Coefficients laid out block by block: block `k` repeats the period
/// `α_k, β_k, ã_k, …, ã_k` (length `q_k`) `N_k` times.
#[derive(Clone, Debug)]
pub struct NestedSequence {
    stages: Vec<StageData>,
    /// `n_0 = 0, n_1, …, n_K`.
    boundaries: Vec<usize>,
    limit: Option<Scalar>,
}

/// Lays out the blocks of `stages`, each of which must carry its power.
pub fn assemble(stages: &[StageData]) -> Result<NestedSequence> {
    let mut boundaries = vec![0usize];
    for s in stages {
        let n = s
            .power
            .ok_or_else(|| Error::InvalidConfig(format!("stage {} has no power N", s.n)))?;
        let len = (n as usize)
            .checked_mul(s.q as usize)
            .ok_or_else(|| Error::InvalidConfig("block too long".into()))?;
        boundaries.push(boundaries.last().unwrap() + len);
    }
    Ok(NestedSequence {
        stages: stages.to_vec(),
        boundaries,
        limit: None,
    })
}

impl NestedSequence {
    pub fn with_limit(mut self, a: Scalar) -> Self {
        self.limit = Some(a);
        self
    }

    pub fn stages(&self) -> &[StageData] {
        &self.stages
    }

    /// `n_k` for `k = 0..=K`.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn total_len(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    /// `θ_k = ψ_1^{N_1}∘…∘ψ_k^{N_k}` for `k = 0..=K`.
    pub fn thetas(&self) -> Vec<MoebiusMap> {
        let prec = self.prec();
        let mut out = vec![MoebiusMap::identity(prec)];
        for s in &self.stages {
            let next = out.last().unwrap().compose(&s.psi.power(s.power.unwrap_or(0)));
            out.push(next);
        }
        out
    }
}

impl CoefficientSource for NestedSequence {
    fn coefficient(&self, i: usize) -> Result<Scalar> {
        if i == 0 || i > self.total_len() {
            return Err(Error::IndexOutOfRange(i));
        }
        // first block whose end reaches i
        let k = self.boundaries.partition_point(|&b| b < i);
        let j = i - self.boundaries[k - 1] - 1;
        Ok(self.stages[k - 1].coefficient_in_block(j).clone())
    }
    fn limit(&self) -> Option<Scalar> {
        self.limit.clone()
    }
    fn len(&self) -> Option<usize> {
        Some(self.total_len())
    }
    fn prec(&self) -> u32 {
        self.stages
            .first()
            .map_or(crate::scalar::DEFAULT_PRECISION, StageData::prec)
    }
    fn kind(&self) -> &'static str {
        "irrational"
    }
}

/// Output of [`construct`]: the stages `1..=K` with their powers, the
/// auxiliary stage `K + 1` used only for `M_K`, and the sequence.
#[derive(Clone, Debug)]
pub struct IrrationalConstruction {
    pub approximations: Vec<Approximation>,
    pub auxiliary: StageData,
    pub sequence: NestedSequence,
    /// Contraction-rate prediction for each `N_k`.
    pub power_estimates: Vec<f64>,
}

/// Builds stages `K + 1, K, …, 1` (each `M_n` needs stage `n + 1`), then
/// picks `N_1, …, N_K` forward so that `diam θ_k(M_k) < 2^-k`.
pub fn construct(params: &IrrationalParams) -> Result<IrrationalConstruction> {
    params.validate()?;
    let k_max = params.stages;
    let prec = params.prec;
    let approximations = rational_approximations(&params.rho, k_max + 1, prec)?;
    let settings = StageSettings {
        t: params.t.clone(),
        margin: params.margin.clone(),
        seed: params.seed,
    };
    let auxiliary = build_stage(k_max + 1, &approximations[k_max], &[], &settings)?;
    let mut built: Vec<StageData> = Vec::with_capacity(k_max);
    for n in (1..=k_max).rev() {
        let next = built.last().unwrap_or(&auxiliary);
        let r_max = match params.r_max {
            RMax::Auto => auto_r_max(next)?,
            RMax::Fixed(r) => r,
        };
        let m = build_m(&approximations[n - 1], next, r_max)?;
        let mut stage = build_stage(n, &approximations[n - 1], &m, &settings)?;
        stage.r_max = Some(r_max);
        built.push(stage);
    }
    built.reverse();

    let mut prefix = MoebiusMap::identity(prec);
    let mut power_estimates = Vec::with_capacity(k_max);
    for (idx, stage) in built.iter_mut().enumerate() {
        let k = idx + 1;
        let bound = schedule_bound(k, prec);
        power_estimates.push(power_estimate(&prefix, stage, &bound)?);
        let n = choose_n(k, &prefix, &stage.psi, &stage.m_points, &bound, params.n_cap)?;
        stage.power = Some(n);
        prefix = prefix.compose(&stage.psi.power(n));
    }
    let limit = rho_inverse(&params.rho.value(prec)?)?;
    let sequence = assemble(&built)?.with_limit(limit);
    Ok(IrrationalConstruction {
        approximations,
        auxiliary,
        sequence,
        power_estimates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleRow {
    pub k: usize,
    pub diameter: Scalar,
    pub bound: Scalar,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistsRow {
    pub k: usize,
    pub s: usize,
    pub distance: Scalar,
    pub bound: Scalar,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyRow {
    pub k: usize,
    pub n_k: usize,
    /// Number of `m ∈ (n_k, n_max]` checked; 0 for the last `k`.
    pub checked: usize,
    pub worst_m: Option<usize>,
    pub worst_distance: Scalar,
    pub bound: Scalar,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyCertificate {
    pub max_k: usize,
    pub n_max: usize,
    pub schedule: Vec<ScheduleRow>,
    pub dists: Vec<DistsRow>,
    pub cauchy: Vec<CauchyRow>,
    pub passes: bool,
    pub note: String,
}

impl CauchyCertificate {
    /// The first failing check as a [`Error::CauchyViolation`].
    pub fn violation(&self, seq: &NestedSequence) -> Option<Error> {
        let r_max = |k: usize| {
            seq.stages()
                .get(k - 1)
                .and_then(|s| s.r_max)
                .map_or("none".to_string(), |r| r.to_string())
        };
        let b = seq.boundaries();
        for k in 1..=self.max_k {
            if let Some(row) = self.schedule.iter().find(|r| r.k == k && !r.ok) {
                return Some(Error::CauchyViolation {
                    k,
                    m: b[k],
                    detail: format!(
                        "diam θ_k(M_k) = {} is not below {}; power N_k too small or M_k truncated at r_max = {}",
                        row.diameter.to_display(6),
                        row.bound.to_display(6),
                        r_max(k)
                    ),
                });
            }
            if let Some(row) = self.dists.iter().find(|r| r.k == k && !r.ok) {
                return Some(Error::CauchyViolation {
                    k,
                    m: b[row.s],
                    detail: format!(
                        "dist(θ_k(0), θ_{}(0)) = {} is not below {}; M_k truncated at r_max = {}",
                        row.s,
                        row.distance.to_display(6),
                        row.bound.to_display(6),
                        r_max(k)
                    ),
                });
            }
            if let Some(row) = self.cauchy.iter().find(|r| r.k == k && !r.ok) {
                return Some(Error::CauchyViolation {
                    k,
                    m: row.worst_m.unwrap_or(row.n_k),
                    detail: format!(
                        "dist(τ_n_k, τ_m) = {} is not below {}; M_k truncated at r_max = {}",
                        row.worst_distance.to_display(6),
                        row.bound.to_display(6),
                        r_max(k)
                    ),
                });
            }
        }
        None
    }
}

/// Measures the schedule `diam θ_k(M_k) < 2^-k`, the estimate
/// `dist(θ_k(0), θ_s(0)) < 2^-(k−1)` for `k < s ≤ max_k`, and
/// `dist(τ_{n_k}, τ_m) < 2^-(k−2)` for every `m ∈ (n_k, n_max_k]`.
#[allow(clippy::needless_range_loop)]
pub fn cauchy_tables(seq: &NestedSequence, max_k: usize) -> Result<CauchyCertificate> {
    let k_total = seq.stages().len();
    if max_k == 0 || max_k > k_total {
        return Err(Error::InvalidConfig(format!(
            "max_k must be in 1..={k_total}, got {max_k}"
        )));
    }
    let prec = seq.prec();
    let thetas = seq.thetas();
    let zero = BoundaryPoint::Finite(Scalar::zero(prec));
    let b = seq.boundaries();
    let n_max = b[max_k];

    let mut schedule = Vec::new();
    for k in 1..=max_k {
        let image: Vec<BoundaryPoint> = seq.stages()[k - 1]
            .m_points
            .iter()
            .map(|x| thetas[k].apply_boundary(x))
            .collect();
        let diameter = chordal_diameter(&image);
        let bound = schedule_bound(k, prec);
        schedule.push(ScheduleRow {
            k,
            ok: diameter < bound,
            diameter,
            bound,
        });
    }

    let anchors: Vec<BoundaryPoint> = thetas.iter().map(|t| t.apply_boundary(&zero)).collect();
    let mut dists = Vec::new();
    for k in 1..max_k {
        for s in k + 1..=max_k {
            let distance = chordal_distance(&anchors[k], &anchors[s]);
            let bound = Scalar::pow2(1 - k as i32, prec);
            dists.push(DistsRow {
                k,
                s,
                ok: distance < bound,
                distance,
                bound,
            });
        }
    }

    let trace = trace_by_composition(seq, n_max)?;
    let mut cauchy = Vec::new();
    for k in 1..=max_k {
        let n_k = b[k];
        let bound = Scalar::pow2(2 - k as i32, prec);
        let base = if n_k == 0 {
            zero.clone()
        } else {
            trace.get(n_k).cloned().unwrap_or(zero.clone())
        };
        let mut worst = Scalar::zero(prec);
        let mut worst_m = None;
        for m in n_k + 1..=n_max {
            let d = chordal_distance(&base, trace.get(m).expect("trace covers n_max"));
            if d > worst || worst_m.is_none() {
                worst = d;
                worst_m = Some(m);
            }
        }
        cauchy.push(CauchyRow {
            k,
            n_k,
            checked: n_max - n_k,
            ok: worst < bound,
            worst_m,
            worst_distance: worst,
            bound,
        });
    }

    let passes = schedule.iter().all(|r| r.ok) && dists.iter().all(|r| r.ok) && cauchy.iter().all(|r| r.ok);
    Ok(CauchyCertificate {
        max_k,
        n_max,
        schedule,
        dists,
        cauchy,
        passes,
        note: format!(
            "finite construction with {k_total} stages: the Cauchy estimate is only exercised for k < {max_k}"
        ),
    })
}

/// [`cauchy_tables`], failing with `CauchyViolation` at the first broken
/// check.
pub fn verify_cauchy(seq: &NestedSequence, max_k: usize) -> Result<CauchyCertificate> {
    let cert = cauchy_tables(seq, max_k)?;
    match cert.violation(seq) {
        Some(e) => Err(e),
        None => Ok(cert),
    }
}

/// Per-stage records plus the check tables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrrationalCertificate {
    pub stages: Vec<StageSummary>,
    pub power_estimates: Vec<f64>,
    pub boundaries: Vec<usize>,
    pub all_hyperbolic: bool,
    pub margins_ok: bool,
    pub check: CauchyCertificate,
    pub passes: bool,
}

pub fn certify_irrational(construction: &IrrationalConstruction, margin: &Scalar) -> Result<IrrationalCertificate> {
    let seq = &construction.sequence;
    let stages: Vec<StageSummary> = seq.stages().iter().map(StageSummary::from).collect();
    let all_hyperbolic = stages.iter().all(|s| s.hyperbolic);
    let margins_ok = stages.iter().all(|s| s.min_margin.as_ref().is_none_or(|m| m >= margin));
    let check = cauchy_tables(seq, seq.stages().len())?;
    let passes = all_hyperbolic && margins_ok && check.passes;
    Ok(IrrationalCertificate {
        stages,
        power_estimates: construction.power_estimates.clone(),
        boundaries: seq.boundaries().to_vec(),
        all_hyperbolic,
        margins_ok,
        check,
        passes,
    })
}

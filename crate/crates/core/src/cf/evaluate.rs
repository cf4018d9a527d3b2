use serde::Serialize;

use crate::cf::source::CoefficientSource;
use crate::cf::trace::{trace_by_composition, ConvergentTrace};
use crate::error::{Error, Result};
use crate::moebius::{half_angle_diameter, half_angle_distance, BoundaryPoint};
use crate::scalar::Scalar;

pub const DEFAULT_THRESHOLD: &str = "1e-6";
pub const DEFAULT_WINDOWS: usize = 5;
pub const DEFAULT_MAX_N: usize = 30_000;
pub const DEFAULT_MAX_PERIOD: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    DivergedPeriodic { period: usize },
    Undecided,
}

impl Verdict {
    pub fn label(&self) -> String {
        match self {
            Verdict::Converged => "Converged".into(),
            Verdict::DivergedPeriodic { period } => format!("DivergedPeriodic({period})"),
            Verdict::Undecided => "Undecided".into(),
        }
    }
}

/// Diameter of `{τ_n : start ≤ n ≤ end}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowDiameter {
    pub start: usize,
    pub end: usize,
    pub diameter: Scalar,
}

/// `sup_{m, n ≥ from} dist(τ_m, τ_n)` over the computed trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyPoint {
    pub from: usize,
    pub sup_distance: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub verdict: Verdict,
    pub limit_estimate: Option<BoundaryPoint>,
    /// One limit per residue class `n mod period`, in residue order.
    pub sub_limits: Vec<BoundaryPoint>,
    pub window_oscillation: Vec<WindowDiameter>,
    pub cauchy_profile: Vec<CauchyPoint>,
    pub max_n: usize,
    pub threshold: Scalar,
    /// Window diameters never increase by more than the rounding slack.
    pub decreasing_trend: bool,
}

impl ConvergenceReport {
    pub fn final_diameter(&self) -> Option<&Scalar> {
        self.window_oscillation.last().map(|w| &w.diameter)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub max_n: usize,
    pub threshold: Scalar,
    pub windows: usize,
    pub max_period: usize,
}

impl EvalConfig {
    pub fn new(max_n: usize, prec: u32) -> Self {
        EvalConfig {
            max_n,
            threshold: Scalar::parse(DEFAULT_THRESHOLD, prec).expect("literal threshold"),
            windows: DEFAULT_WINDOWS,
            max_period: DEFAULT_MAX_PERIOD,
        }
    }
}

/// Slack used when comparing window diameters: `2^-(prec/2)`.
fn trend_slack(prec: u32) -> Scalar {
    Scalar::pow2(-((prec / 2) as i32), prec)
}

/// Windows partition the last half of the trace; the last window ends at
/// the last computed index.
fn windows(trace: &ConvergentTrace, angles: &[Scalar], count: usize) -> Vec<WindowDiameter> {
    let n = angles.len();
    let start = n / 2;
    let len = (n - start) / count;
    (0..count)
        .map(|k| {
            let lo = start + k * len;
            let hi = if k + 1 == count { n } else { lo + len };
            WindowDiameter {
                start: trace.indices[lo],
                end: trace.indices[hi - 1],
                diameter: half_angle_diameter(angles[lo..hi].to_vec(), trace.prec),
            }
        })
        .collect()
}

fn cauchy_profile(trace: &ConvergentTrace, angles: &[Scalar]) -> Vec<CauchyPoint> {
    let n = angles.len();
    let mut starts: Vec<usize> = (0..10).map(|j| j * n / 10).collect();
    starts.dedup();
    starts
        .into_iter()
        .map(|lo| CauchyPoint {
            from: trace.indices[lo],
            sup_distance: half_angle_diameter(angles[lo..].to_vec(), trace.prec),
        })
        .collect()
}

/// Result of [`detect_periodicity`]: the period and the limit of each
/// residue class `n mod period`.
#[derive(Clone, Debug, PartialEq)]
pub struct Periodicity {
    pub period: usize,
    pub sub_limits: Vec<BoundaryPoint>,
}

/// Smallest `p ≤ max_period` such that every residue class of the last
/// half of the trace has diameter below `threshold` and the class limits
/// are pairwise more than `10·threshold` apart. `p = 1` is plain
/// convergence.
pub fn detect_periodicity(trace: &ConvergentTrace, max_period: usize, threshold: &Scalar) -> Option<Periodicity> {
    let angles = trace.half_angles();
    detect_on_angles(trace, &angles, max_period, threshold)
}

fn detect_on_angles(
    trace: &ConvergentTrace,
    angles: &[Scalar],
    max_period: usize,
    threshold: &Scalar,
) -> Option<Periodicity> {
    let n = angles.len();
    if max_period == 0 || n < 4 * max_period {
        return None;
    }
    let prec = trace.prec;
    let separation = Scalar::from_int(10, prec) * threshold;
    let start = n / 2;
    'period: for p in 1..=max_period {
        let mut limits: Vec<(usize, usize)> = Vec::with_capacity(p);
        for j in 0..p {
            let class: Vec<usize> = (start..n).filter(|&k| trace.indices[k] % p == j).collect();
            if class.len() < 2 {
                continue 'period;
            }
            let sub: Vec<Scalar> = class.iter().map(|&k| angles[k].clone()).collect();
            if half_angle_diameter(sub, prec) >= *threshold {
                continue 'period;
            }
            limits.push((j, *class.last().expect("non-empty")));
        }
        for x in 0..limits.len() {
            for y in x + 1..limits.len() {
                if half_angle_distance(&angles[limits[x].1], &angles[limits[y].1]) <= separation {
                    continue 'period;
                }
            }
        }
        return Some(Periodicity {
            period: p,
            sub_limits: limits.iter().map(|&(_, k)| trace.values[k].clone()).collect(),
        });
    }
    None
}

/// Computes the trace by composition and classifies its tail.
pub fn evaluate(src: &dyn CoefficientSource, config: &EvalConfig) -> Result<ConvergenceReport> {
    let trace = trace_by_composition(src, config.max_n)?;
    evaluate_trace(&trace, config)
}

pub fn evaluate_trace(trace: &ConvergentTrace, config: &EvalConfig) -> Result<ConvergenceReport> {
    let n = trace.len();
    if config.windows == 0 || n < 100 * config.windows {
        return Err(Error::InvalidConfig(format!(
            "need at least {} convergents for {} windows, have {n}",
            100 * config.windows.max(1),
            config.windows
        )));
    }
    let prec = trace.prec;
    let angles = trace.half_angles();
    let window_oscillation = windows(trace, &angles, config.windows);
    let slack = trend_slack(prec);
    let decreasing_trend = window_oscillation
        .windows(2)
        .all(|w| w[1].diameter <= &w[0].diameter + &slack);
    let last_three = &window_oscillation[window_oscillation.len().saturating_sub(3)..];
    let recent_trend = last_three.windows(2).all(|w| w[1].diameter <= &w[0].diameter + &slack);
    let final_small = window_oscillation.last().is_some_and(|w| w.diameter < config.threshold);

    let (verdict, limit_estimate, sub_limits) = if final_small && recent_trend {
        let limit = trace.values.last().cloned();
        (Verdict::Converged, limit.clone(), limit.into_iter().collect())
    } else {
        match detect_on_angles(trace, &angles, config.max_period, &config.threshold) {
            Some(p) if p.period > 1 => (Verdict::DivergedPeriodic { period: p.period }, None, p.sub_limits),
            _ => (Verdict::Undecided, None, Vec::new()),
        }
    };
    Ok(ConvergenceReport {
        verdict,
        limit_estimate,
        sub_limits,
        window_oscillation,
        cauchy_profile: cauchy_profile(trace, &angles),
        max_n: n,
        threshold: config.threshold.clone(),
        decreasing_trend,
    })
}

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cf::{
    evaluate_trace, gill_check, prefix, trace_by_composition, write_trace_csv, CoefficientSource, ConstantSource,
    ConvergenceReport, ConvergentTrace, ExplicitSource, GillProfile, GillSource, PerturbationRule, Verdict,
    DEFAULT_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::irrational::{certify_irrational, construct, schedule_bound, IrrationalCertificate, IrrationalParams};
use crate::moebius::BoundaryPoint;
use crate::rational::{
    build_sequence, certify, check_layout, contraction_profile, CertificateSummary, ContractionPoint, LayoutCheck,
    RChoice, RationalRotationParams, StageRecord, TRule, DEFAULT_MARGIN,
};
use crate::report::scenario::{Scenario, SourceSpec};
use crate::scalar::{check_precision, Scalar};

/// Coefficients stored verbatim in every artifact.
pub const PREFIX_LEN: usize = 100;
/// Stages certified for a rational scenario unless it says otherwise.
pub const DEFAULT_CERTIFY_STAGES: usize = 1000;
/// Terms covered by the layout check of a rational scenario.
pub const LAYOUT_TERMS: usize = 10_000;
/// Sample size and neighbourhood of `R` excluded for the contraction
/// profile.
pub const CONTRACTION_POINTS: usize = 20;
pub const CONTRACTION_AVOID: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub crate_version: &'static str,
    pub precision_bits: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalCertificate {
    pub summary: CertificateSummary,
    /// Stages 0–9 and every 100th after that, plus the last.
    pub sampled_stages: Vec<StageRecord>,
    pub layout: LayoutCheck,
    pub contraction: Vec<ContractionPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Rational(RationalCertificate),
    Irrational(IrrationalCertificate),
}

impl Certificate {
    pub fn passes(&self) -> bool {
        match self {
            Certificate::Rational(c) => c.summary.passes && c.layout.holds,
            Certificate::Irrational(c) => c.passes,
        }
    }
}

/// Everything numeric a run produces. Wall-clock time is kept out of it
/// so that identical runs serialize identically.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunArtifact {
    pub scenario: Scenario,
    pub source_kind: &'static str,
    pub coefficients: Vec<Scalar>,
    pub report: ConvergenceReport,
    pub gill: Option<GillProfile>,
    pub certificate: Option<Certificate>,
    /// Construction modes: converged and certified.
    pub passes: Option<bool>,
    pub environment: Environment,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub artifact: RunArtifact,
    pub trace: ConvergentTrace,
    pub wall_clock: Duration,
}

#[derive(Serialize)]
struct Timing {
    scenario: String,
    wall_clock_seconds: f64,
}

struct Built {
    source: Box<dyn CoefficientSource>,
    certificate: Option<Certificate>,
    default_threshold: Scalar,
}

fn parse_t_rule(text: &str) -> Result<TRule> {
    match text.trim().to_ascii_lowercase().as_str() {
        "harmonic" => Ok(TRule::Harmonic),
        "geometric" => Ok(TRule::Geometric),
        "zero" => Ok(TRule::Zero),
        _ => Ok(TRule::Custom(PerturbationRule::parse(text)?)),
    }
}

fn context(mode: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Scenario(_) | Error::Io(_) => e,
        other => Error::Scenario(format!("{mode} scenario: {other}")),
    }
}

fn sample_stages(stages: &[StageRecord]) -> Vec<StageRecord> {
    stages
        .iter()
        .enumerate()
        .filter(|(r, _)| *r < 10 || r % 100 == 0 || r + 1 == stages.len())
        .map(|(_, s)| s.clone())
        .collect()
}

fn build(scenario: &Scenario, prec: u32) -> Result<Built> {
    let default = Scalar::parse(DEFAULT_THRESHOLD, prec)?;
    let plain = |source: Box<dyn CoefficientSource>| Built {
        source,
        certificate: None,
        default_threshold: default.clone(),
    };
    match &scenario.source {
        SourceSpec::Constant { a } => Ok(plain(Box::new(ConstantSource::new(Scalar::parse(a, prec)?)?))),
        SourceSpec::Gill { a, rule } => Ok(plain(Box::new(GillSource::new(
            Scalar::parse(a, prec)?,
            PerturbationRule::parse(rule)?,
        )?))),
        SourceSpec::Explicit { values, limit } => {
            let values = values
                .iter()
                .map(|v| Scalar::parse(v, prec))
                .collect::<Result<Vec<_>>>()?;
            let mut src = ExplicitSource::new(values, prec)?;
            if let Some(l) = limit {
                src = src.with_limit(Scalar::parse(l, prec)?);
            }
            Ok(plain(Box::new(src)))
        }
        SourceSpec::Rational {
            p,
            q,
            t_rule,
            r,
            margin,
            amplitude,
            certify_stages,
        } => {
            let choice = match r {
                Some(r) if r == "inf" => RChoice::Fixed(BoundaryPoint::Infinity),
                Some(r) => RChoice::Fixed(BoundaryPoint::Finite(Scalar::parse(r, prec)?)),
                None => RChoice::Auto {
                    seed: scenario.seed(),
                    margin: match margin {
                        Some(m) => Scalar::parse(m, prec)?,
                        None => Scalar::from_f64(DEFAULT_MARGIN, prec),
                    },
                },
            };
            let mut params = RationalRotationParams::new(*p, *q, prec, choice, parse_t_rule(t_rule)?)?;
            if let Some(t0) = amplitude {
                params = params.with_amplitude(Scalar::parse(t0, prec)?);
            }
            let seq = build_sequence(&params);
            let stages = certify_stages.unwrap_or(DEFAULT_CERTIFY_STAGES);
            let certificate = match certify(&params, stages) {
                Ok(cert) => {
                    let layout = check_layout(&seq, LAYOUT_TERMS)?;
                    let contraction = contraction_profile(
                        &params,
                        stages,
                        CONTRACTION_POINTS,
                        &Scalar::from_f64(CONTRACTION_AVOID, prec),
                    )?;
                    Some(Certificate::Rational(RationalCertificate {
                        sampled_stages: sample_stages(&cert.stages),
                        summary: cert.summary,
                        layout,
                        contraction,
                    }))
                }
                // a rule that leaves some stage elliptic still gets evaluated
                Err(Error::StageNotHyperbolic(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(Built {
                source: Box::new(seq),
                certificate,
                default_threshold: default,
            })
        }
        SourceSpec::Irrational {
            rho,
            stages,
            r_max,
            n_cap,
            t,
            margin,
        } => {
            let mut params = IrrationalParams::new(rho.to_spec(), *stages, prec);
            params.r_max = (*r_max).into();
            params.n_cap = *n_cap;
            params.seed = scenario.seed();
            if let Some(t) = t {
                params.t = Scalar::parse(t, prec)?;
            }
            if let Some(m) = margin {
                params.margin = Scalar::parse(m, prec)?;
            }
            let construction = construct(&params)?;
            let cert = certify_irrational(&construction, &params.margin)?;
            Ok(Built {
                source: Box::new(construction.sequence),
                certificate: Some(Certificate::Irrational(cert)),
                // a finite prefix is only certified to the last schedule bound
                default_threshold: schedule_bound(stages.saturating_sub(1), prec),
            })
        }
    }
}

/// Builds the source, evaluates it, and certifies construction modes.
pub fn run(scenario: &Scenario) -> Result<RunOutcome> {
    let started = Instant::now();
    let prec = check_precision(scenario.precision())?;
    let mode = scenario.source.mode();
    let built = build(scenario, prec).map_err(context(mode))?;
    let src = built.source.as_ref();
    let eval = scenario.eval_spec();
    let config = eval.to_config(prec, built.default_threshold.clone())?;
    let n = src.len().map_or(config.max_n, |len| len.min(config.max_n));
    let trace = trace_by_composition(src, n).map_err(context(mode))?;
    let report = evaluate_trace(&trace, &config).map_err(context(mode))?;
    let coefficients = prefix(src, PREFIX_LEN.min(n))?;
    let gill = match src.limit() {
        Some(a) => Some(gill_check(src, &a, n)?),
        None => None,
    };
    let passes = match mode {
        "rational" | "irrational" => {
            Some(report.verdict == Verdict::Converged && built.certificate.as_ref().is_some_and(Certificate::passes))
        }
        _ => None,
    };
    let artifact = RunArtifact {
        scenario: scenario.clone(),
        source_kind: src.kind(),
        coefficients,
        report,
        gill,
        certificate: built.certificate,
        passes,
        environment: Environment {
            crate_version: env!("CARGO_PKG_VERSION"),
            precision_bits: prec,
            seed: scenario.seed(),
        },
    };
    Ok(RunOutcome {
        artifact,
        trace,
        wall_clock: started.elapsed(),
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Writes `trace.csv`, `report.json`, `artifact.json`, `timing.json` and,
/// when present, `certificate.json` into `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let file = fs::File::create(dir.join("trace.csv"))?;
    write_trace_csv(&outcome.trace, std::io::BufWriter::new(file))?;
    fs::write(dir.join("report.json"), to_json(&outcome.artifact.report)?)?;
    fs::write(dir.join("artifact.json"), to_json(&outcome.artifact)?)?;
    if let Some(cert) = &outcome.artifact.certificate {
        fs::write(dir.join("certificate.json"), to_json(cert)?)?;
    }
    let timing = Timing {
        scenario: outcome.artifact.scenario.label(),
        wall_clock_seconds: outcome.wall_clock.as_secs_f64(),
    };
    fs::write(dir.join("timing.json"), to_json(&timing)?)?;
    Ok(())
}

/// Runs scenarios on at most `available_parallelism` threads, keeping
/// input order.
pub fn run_batch(scenarios: &[Scenario]) -> Vec<Result<RunOutcome>> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(scenarios.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let mut results: Vec<(usize, Result<RunOutcome>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(s) = scenarios.get(i) else { break };
                        done.push((i, run(s)));
                    }
                    done
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("batch worker panicked"))
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

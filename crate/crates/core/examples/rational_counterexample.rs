//! a_i -> 1 with sum |a_i - 1| = infinity and a convergent fraction:
//! build the rational-rotation sequence, evaluate it, certify it.

use ramcf::cf::{evaluate, gill_check, EvalConfig};
use ramcf::rational::{build_sequence, certify, RChoice, RationalRotationParams, TRule, DEFAULT_MARGIN};
use ramcf::{Result, Scalar};

fn main() -> Result<()> {
    let prec = 256;
    let r = RChoice::Auto {
        seed: 0,
        margin: Scalar::from_f64(DEFAULT_MARGIN, prec),
    };
    let params = RationalRotationParams::new(1, 3, prec, r, TRule::Harmonic)?;
    println!(
        "a = {}  R = {}  A = {}",
        params.a.to_decimal(),
        params.lemma.repeller.to_display(10),
        params.lemma.attractor.to_display(10)
    );

    let seq = build_sequence(&params);
    let report = evaluate(&seq, &EvalConfig::new(30_000, prec))?;
    println!(
        "verdict {}  limit {}",
        report.verdict.label(),
        report
            .limit_estimate
            .as_ref()
            .map(|l| l.to_display(12))
            .unwrap_or_default()
    );

    let gill = gill_check(&seq, &params.a, 30_000)?;
    for (n, s) in gill
        .checkpoints
        .iter()
        .filter(|(n, _)| n.is_power_of_two() && *n >= 1024)
    {
        println!("  sum up to {n:>6}: {}", s.to_display(8));
    }

    let cert = certify(&params, 1000)?;
    let s = &cert.summary;
    println!(
        "certificate: hyperbolic {}  sum -ln mu {}  fit ok {}  passes {}",
        s.all_hyperbolic,
        s.neg_log_mu_total.to_display(6),
        s.fit_ok,
        s.passes
    );
    Ok(())
}

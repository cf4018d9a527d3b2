//! Constant coefficients: converge for a ≤ 1/4, cycle when ρ(a) is
//! rational, and stay undecided otherwise.

use ramcf::cf::{evaluate, trace_by_composition, write_trace_csv, ConstantSource, EvalConfig};
use ramcf::{Result, Scalar};

fn main() -> Result<()> {
    let prec = 256;
    let config = EvalConfig::new(5000, prec);
    for a in ["0.2", "0.25", "1", "0.5", "2"] {
        let src = ConstantSource::new(Scalar::parse(a, prec)?)?;
        let report = evaluate(&src, &config)?;
        let limit = report
            .limit_estimate
            .as_ref()
            .map(|l| l.to_display(15))
            .unwrap_or_default();
        println!("a = {a:<5} {:<20} {limit}", report.verdict.label());
    }

    // first few convergents of a = 0.2 as CSV
    let src = ConstantSource::new(Scalar::parse("0.2", prec)?)?;
    let trace = trace_by_composition(&src, 5)?;
    write_trace_csv(&trace, std::io::stdout())?;
    Ok(())
}

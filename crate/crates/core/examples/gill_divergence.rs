//! Summable perturbations of a = 1 keep the 3-cycle; the partial sums
//! of |a_i - 1| are printed next to the verdict.

use ramcf::cf::{evaluate, gill_check, EvalConfig, GillSource, PerturbationRule};
use ramcf::{Result, Scalar};

fn main() -> Result<()> {
    let prec = 256;
    let n = 4096;
    let a = Scalar::one(prec);
    for rule in ["0", "2^-i", "1/i^2"] {
        let src = GillSource::new(a.clone(), PerturbationRule::parse(rule)?)?;
        let report = evaluate(&src, &EvalConfig::new(n, prec))?;
        let gill = gill_check(&src, &a, n)?;
        let total = gill.total().map(|s| s.to_display(8)).unwrap_or_default();
        println!(
            "a_i = 1 + {rule:<6} sum {total:<12} summable {:<5} {}",
            gill.summable_heuristic,
            report.verdict.label()
        );
    }
    Ok(())
}

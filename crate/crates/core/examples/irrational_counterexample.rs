//! Golden-mean rotation number: three nested stages built from the
//! convergents 1/3, 2/5, 3/8, then the Cauchy schedule check.

use ramcf::cf::{evaluate, EvalConfig};
use ramcf::irrational::{certify_irrational, construct, schedule_bound, IrrationalParams};
use ramcf::Result;

fn main() -> Result<()> {
    let prec = 256;
    let params = IrrationalParams::golden(3, prec);
    let c = construct(&params)?;
    for (s, est) in c.sequence.stages().iter().zip(&c.power_estimates) {
        println!(
            "stage {}: {}/{}  N = {:?} (estimate {est:.0})  mu = {}",
            s.n,
            s.p,
            s.q,
            s.power,
            s.mu.to_display(4)
        );
    }
    println!("coefficients: {}", c.sequence.total_len());

    let cert = certify_irrational(&c, &params.margin)?;
    for row in &cert.check.schedule {
        println!("diam theta_{}(M_{}) = {}", row.k, row.k, row.diameter.to_display(4));
    }
    println!("passes {}", cert.passes);

    let mut config = EvalConfig::new(c.sequence.total_len(), prec);
    config.threshold = schedule_bound(params.stages - 1, prec);
    let report = evaluate(&c.sequence, &config)?;
    println!("verdict {}", report.verdict.label());
    Ok(())
}

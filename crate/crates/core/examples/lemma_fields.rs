//! The vector fields behind the lemma at a = 1, q = 3: closed forms
//! against finite differences, the lemma coefficients for a chosen R,
//! and the multiplier slope.

use ramcf::moebius::BoundaryPoint;
use ramcf::rational::{check_fields, multiplier_slope, orbit_of_zero, solve_lemma};
use ramcf::{Result, Scalar};

fn main() -> Result<()> {
    let prec = 256;
    let a = Scalar::one(prec);
    let q = 3;

    let orbit = orbit_of_zero(&a, q)?;
    let orbit: Vec<String> = orbit.iter().map(BoundaryPoint::to_decimal).collect();
    println!("orbit of 0: {orbit:?}");

    let points: Vec<Scalar> = ["-3", "-0.4", "0.7", "5"]
        .iter()
        .map(|p| Scalar::parse(p, prec))
        .collect::<Result<_>>()?;
    let fields = check_fields(&a, q, &points)?;
    println!(
        "fields vs differences: max relative error {}",
        fields.max_relative_error.to_display(3)
    );

    let r = BoundaryPoint::finite(Scalar::ratio(1, 2, prec));
    let lemma = solve_lemma(&a, q, &r)?;
    println!("R = {}  A = {}", r.to_decimal(), lemma.attractor.to_display(12));
    println!("c1 = {}  c2 = {}", lemma.c1.to_display(12), lemma.c2.to_display(12));

    let slope = multiplier_slope(&a, q, &lemma.c1, &lemma.c2)?;
    println!("multiplier slope {}", serde_json::to_string(&slope)?);
    Ok(())
}

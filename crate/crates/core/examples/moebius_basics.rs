//! T_a for a few parameters: class, rotation number, and the finite
//! order of T_1.

use ramcf::moebius::{rho_inverse, rotation_number, t_map, BoundaryPoint};
use ramcf::{Result, Scalar};

fn main() -> Result<()> {
    let prec = 256;
    for a in ["0.1875", "0.25", "0.5", "1", "3"] {
        let t = t_map(&Scalar::parse(a, prec)?)?;
        let class = t.classify_default();
        print!("T_{a:<6} {:<10} trace {:>8}", class.name(), t.trace().to_display(6));
        if let Ok(rho) = rotation_number(&Scalar::parse(a, prec)?) {
            print!("  rho = {}", rho.to_display(12));
        }
        println!();
    }

    let t1 = t_map(&Scalar::one(prec))?;
    let zero = BoundaryPoint::finite(Scalar::zero(prec));
    let mut x = zero.clone();
    for n in 1..=3 {
        x = t1.apply_boundary(&x);
        println!("T_1^{n}(0) = {}", x.to_decimal());
    }
    println!(
        "T_1^3 = id: {}",
        t1.power(3).is_projective_identity(&Scalar::epsilon(prec))
    );

    let a = rho_inverse(&Scalar::ratio(2, 5, prec))?;
    println!("rho^-1(2/5) = {}", a.to_display(20));
    Ok(())
}

use proptest::prelude::*;

use super::*;
use crate::scalar::Scalar;

fn s(v: f64, prec: u32) -> Scalar {
    Scalar::from_f64(v, prec)
}

fn arb_map(prec: u32) -> impl Strategy<Value = MoebiusMap> {
    (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
        .prop_filter("det > 0.1", |(a, b, c, d)| a * d - b * c > 0.1)
        .prop_map(move |(a, b, c, d)| MoebiusMap::new(s(a, prec), s(b, prec), s(c, prec), s(d, prec)).unwrap())
}

fn arb_point(prec: u32) -> impl Strategy<Value = BoundaryPoint> {
    prop_oneof![
        8 => (-20.0f64..20.0).prop_map(move |x| BoundaryPoint::Finite(s(x, prec))),
        1 => Just(BoundaryPoint::Infinity),
    ]
}

#[test]
fn trace_criterion_on_grid() {
    let prec = 128;
    for k in 1..=1000 {
        if k == 125 {
            continue;
        }
        let b = Scalar::ratio(k, 500, prec);
        let class = t_map(&b).unwrap().classify_default();
        if k < 125 {
            assert!(class.is_hyperbolic(), "b = {k}/500");
        } else {
            assert!(matches!(class, MapClass::Elliptic { .. }), "b = {k}/500");
        }
    }
}

#[test]
fn rotation_number_inverts_rho_inverse() {
    let prec = 256;
    let tol = Scalar::from_int(10, prec) * Scalar::epsilon(prec);
    for k in 1..=49 {
        let rho = Scalar::ratio(k, 100, prec);
        let back = rotation_number(&rho_inverse(&rho).unwrap()).unwrap();
        assert!((back - &rho).abs() <= tol, "rho = {k}/100");
    }
}

#[test]
fn rational_rotation_has_finite_order() {
    let prec = 256;
    let tol = Scalar::epsilon(prec - 20);
    for q in 3..=12i64 {
        for p in 1..q {
            if 2 * p >= q || gcd(p, q) != 1 {
                continue;
            }
            let a = rho_inverse(&Scalar::ratio(p, q, prec)).unwrap();
            let m = t_map(&a).unwrap().power(q as u64);
            assert!(m.is_projective_identity(&tol), "{p}/{q}");
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn long_product_matches_pointwise_iteration() {
    use rand::{Rng, SeedableRng};
    let prec = 256;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let bs: Vec<Scalar> = (0..1000).map(|_| s(rng.gen_range(0.3..2.0), prec)).collect();
    let mut product = MoebiusMap::identity(prec);
    for b in &bs {
        product = product.compose(&t_map(b).unwrap());
    }
    let mut x = BoundaryPoint::Finite(Scalar::zero(prec));
    for b in bs.iter().rev() {
        x = t_map(b).unwrap().apply_boundary(&x);
    }
    let y = product.apply_boundary(&BoundaryPoint::Finite(Scalar::zero(prec)));
    assert!(chordal_distance(&x, &y).to_f64() < 1e-20);
}

#[test]
fn composition_of_three_t_ones_is_identity() {
    let t = t_map(&Scalar::one(256)).unwrap();
    let m = compose(&t, &compose(&t, &t));
    assert!(m.is_projective_identity(&Scalar::epsilon(250)));
    assert_eq!(compose(&t, &MoebiusMap::identity(256)), t);
}

#[test]
fn hyperbolic_iteration_approaches_attractor() {
    let prec = 256;
    let m = t_map(&s(0.2, prec)).unwrap();
    let (attractor, _, mu) = m.fixed_points_hyperbolic().unwrap();
    let mut x = BoundaryPoint::Finite(s(5.0, prec));
    let mut prev = chordal_distance(&x, &attractor);
    let mut ratio = 0.0;
    for _ in 0..60 {
        x = m.apply_boundary(&x);
        let d = chordal_distance(&x, &attractor);
        assert!(d < prev);
        ratio = (&d / &prev).to_f64();
        prev = d;
    }
    assert!((ratio - mu.to_f64()).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn compose_is_a_homomorphism(f in arb_map(256), g in arb_map(256), x in arb_point(256)) {
        let lhs = f.compose(&g).apply_boundary(&x);
        let rhs = f.apply_boundary(&g.apply_boundary(&x));
        prop_assert!(chordal_distance(&lhs, &rhs).to_f64() < 1e-60);
    }

    #[test]
    fn compose_handles_poles(f in arb_map(256), g in arb_map(256)) {
        let x = g.pole();
        let lhs = f.compose(&g).apply_boundary(&x);
        let rhs = f.apply_boundary(&g.apply_boundary(&x));
        prop_assert!(chordal_distance(&lhs, &rhs).to_f64() < 1e-50);
    }

    #[test]
    fn composition_is_associative(f in arb_map(256), g in arb_map(256), h in arb_map(256)) {
        let lhs = f.compose(&g).compose(&h);
        let rhs = f.compose(&g.compose(&h));
        prop_assert!(lhs.compose(&rhs.inverse()).distance_to_identity().to_f64() < 1e-60);
    }

    #[test]
    fn derivative_matches_central_difference(m in arb_map(128), x in -5.0f64..5.0) {
        let prec = 128;
        let xs = s(x, prec);
        let pole_gap = match m.pole() {
            BoundaryPoint::Finite(p) => (&p - &xs).abs().to_f64(),
            BoundaryPoint::Infinity => f64::INFINITY,
        };
        prop_assume!(pole_gap > 1e-2);
        let h = s(1e-8, prec);
        let f = |v: Scalar| match m.apply_boundary(&BoundaryPoint::Finite(v)) {
            BoundaryPoint::Finite(y) => y,
            BoundaryPoint::Infinity => unreachable!(),
        };
        let fd = (f(&xs + &h) - f(&xs - &h)) / (Scalar::from_int(2, prec) * &h);
        let d = m.derivative_at(&BoundaryPoint::Finite(xs.clone())).unwrap();
        let rel = ((&fd - &d) / &d).abs().to_f64();
        prop_assert!(rel < 1e-6, "rel = {rel}");
    }

    #[test]
    fn maps_preserve_the_upper_half_plane(m in arb_map(128), re in -5.0f64..5.0, im in 0.0f64..5.0) {
        let z = HalfPlanePoint { re: s(re, 128), im: s(im, 128) };
        if let Ok(w) = m.apply_interior(&z) {
            prop_assert!(!w.im.is_negative());
        }
    }

    #[test]
    fn chordal_triangle_inequality(x in arb_point(128), y in arb_point(128), z in arb_point(128)) {
        let xy = chordal_distance(&x, &y);
        let yz = chordal_distance(&y, &z);
        let xz = chordal_distance(&x, &z);
        prop_assert!(xz.to_f64() <= (xy + yz).to_f64() + 1e-30);
        prop_assert_eq!(chordal_distance(&x, &y), chordal_distance(&y, &x));
        prop_assert!(xz.to_f64() <= std::f64::consts::PI + 1e-15);
    }
}

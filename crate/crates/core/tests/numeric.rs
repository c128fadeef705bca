use cubature_adversary::numeric::{
    format_rational, format_scientific, int, normalize, parse_rational, rat, Enclosure, LogMagnitude,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-10_000i64..10_000, 1i64..5_000).prop_map(|(p, q)| rat(p, q))
}

fn positive_rational() -> impl Strategy<Value = BigRational> {
    (1i64..1_000_000, 1i64..1_000_000).prop_map(|(p, q)| rat(p, q))
}

#[test]
fn normalize_examples() {
    let n = |a: i64, b: i64| normalize(BigInt::from(a), BigInt::from(b)).unwrap();
    assert_eq!(n(2, 4), rat(1, 2));
    assert_eq!(n(3, -6), rat(-1, 2));
    let z = n(0, 7);
    assert_eq!((z.numer().clone(), z.denom().clone()), (BigInt::from(0), BigInt::from(1)));
}

#[test]
fn decimal_text_is_exact() {
    assert_eq!(parse_rational("0.3").unwrap(), rat(3, 10));
    assert_eq!(parse_rational("-2/4").unwrap(), rat(-1, 2));
    assert_eq!(parse_rational("  5/7 ").unwrap(), rat(5, 7));
    assert_eq!(parse_rational("1.5e2").unwrap(), int(150));
}

#[test]
fn log_examples() {
    assert_eq!(LogMagnitude::from_rational(&int(1)), LogMagnitude::one());
    let z = LogMagnitude::from_rational(&int(0));
    assert!(z.is_zero());
    assert_eq!(z.ln_abs(), f64::NEG_INFINITY);
    let e = LogMagnitude::from_rational(&rat(1, 8));
    assert!((e.ln_abs() - (0.125f64).ln()).abs() < 1e-14);
    assert!((e.ln_abs() + 2.0794).abs() < 1e-4);
}

#[test]
fn log_of_huge_values() {
    // 10^5000 is far past f64 range
    let big = BigRational::from_integer(num_traits::pow(BigInt::from(10), 5000));
    let l = LogMagnitude::from_rational(&big);
    assert_eq!(l.log10_string(6), "5000.000000");
    assert_eq!(l.powi(3).log10_string(3), "15000.000");
}

#[test]
fn hull_examples() {
    let e = |a: i64, b: i64| Enclosure::new(int(a), int(b)).unwrap();
    assert_eq!(e(0, 1).hull(&e(2, 3)), e(0, 3));
    assert_eq!(e(1, 1).hull(&e(1, 1)), e(1, 1));
    assert_eq!(e(-1, 0).hull(&e(-2, 5)), e(-2, 5));
    assert!(Enclosure::new(int(1), int(0)).is_err());
}

#[test]
fn scientific_truncates_toward_zero() {
    assert_eq!(format_scientific(&rat(2, 3), 4), "6.666e-1");
    assert_eq!(format_scientific(&rat(-2, 3), 4), "-6.666e-1");
    assert_eq!(format_scientific(&int(1), 3), "1.00e0");
    assert_eq!(format_scientific(&int(0), 3), "0");
}

proptest! {
    #[test]
    fn canonical_form_is_a_congruence(a in small_rational(), b in small_rational(), k in 1i64..1000) {
        let scaled = normalize(a.numer() * k, a.denom() * k).unwrap();
        prop_assert_eq!(&scaled, &a);
        prop_assert_eq!(&scaled + &b, &a + &b);
        prop_assert_eq!(&scaled * &b, &a * &b);
    }

    #[test]
    fn text_round_trip(a in small_rational()) {
        prop_assert_eq!(parse_rational(&format_rational(&a)).unwrap(), a);
    }

    #[test]
    fn log_is_monotone(a in positive_rational(), b in positive_rational()) {
        let (la, lb) = (LogMagnitude::from_rational(&a), LogMagnitude::from_rational(&b));
        if a < b {
            prop_assert!(la <= lb);
        } else if a > b {
            prop_assert!(la >= lb);
        } else {
            prop_assert_eq!(la, lb);
        }
    }

    #[test]
    fn log_multiplication_adds(a in positive_rational(), b in positive_rational()) {
        let prod = LogMagnitude::from_rational(&(&a * &b));
        let sum = LogMagnitude::from_rational(&a).mul(&LogMagnitude::from_rational(&b));
        prop_assert!((prod.ln_abs() - sum.ln_abs()).abs() < 1e-12);
    }

    #[test]
    fn log_sign_follows_value(a in small_rational()) {
        let l = LogMagnitude::from_rational(&a);
        let neg = LogMagnitude::from_rational(&-a.clone());
        prop_assert_eq!(l.ln_abs(), neg.ln_abs());
        if a > int(0) { prop_assert!(l > LogMagnitude::zero()); }
        if a < int(0) { prop_assert!(l < LogMagnitude::zero()); }
    }

    #[test]
    fn hull_laws(v in proptest::collection::vec(small_rational(), 6)) {
        let e = |x: &BigRational, y: &BigRational| Enclosure::new(x.clone().min(y.clone()), x.clone().max(y.clone())).unwrap();
        let (a, b, c) = (e(&v[0], &v[1]), e(&v[2], &v[3]), e(&v[4], &v[5]));
        prop_assert_eq!(a.hull(&b).hull(&c), a.hull(&b.hull(&c)));
        prop_assert_eq!(a.hull(&b), b.hull(&a));
        prop_assert_eq!(a.hull(&a), a.clone());
        prop_assert!(a.hull(&b).contains(&a.lo) && a.hull(&b).contains(&b.hi));
    }

    #[test]
    fn scientific_never_exceeds_value(a in positive_rational()) {
        let s = format_scientific(&a, 6);
        let back = parse_rational(&s).unwrap();
        prop_assert!(back <= a);
        prop_assert!(&a - &back <= &a / int(10_000));
    }
}

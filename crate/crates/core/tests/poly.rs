use cubature_adversary::numeric::{int, rat, to_f64};
use cubature_adversary::oracle::PolyOracle;
use cubature_adversary::poly::{certify_bounds, range_enclosure, BernsteinForm, DEFAULT_DEPTH_LIMIT};
use cubature_adversary::{Error, Poly};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = BigRational> {
    (-50i64..50, 1i64..20).prop_map(|(p, q)| rat(p, q))
}

fn poly(max_len: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec(coeff(), 1..=max_len).prop_map(|c| Poly::from_coeffs(&c))
}

fn naive_product(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let (ca, cb) = (a.coeffs(), b.coeffs());
    let mut out = vec![BigRational::zero(); ca.len() + cb.len() - 1];
    for (i, x) in ca.iter().enumerate() {
        for (j, y) in cb.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    Poly::from_coeffs(&out)
}

#[test]
fn multiply_examples() {
    let p = Poly::from_i64(&[1, 1]);
    let q = Poly::from_i64(&[1, -1]);
    assert_eq!(&p * &q, Poly::from_i64(&[1, 0, -1]));
    assert!((&p * &Poly::zero()).is_zero());
}

#[test]
fn square_is_even_and_nonnegative() {
    let p1 = Poly::from_coeffs(&[rat(-3, 7), rat(5, 2), int(-4), rat(1, 3)]);
    let sq = p1.square();
    assert_eq!(sq.degree() % 2, 0);
    assert_eq!(sq, &p1 * &p1);
    let oracle = PolyOracle::new(&sq);
    for i in 0..100 {
        let x = i as f64 / 99.0;
        let direct = PolyOracle::new(&p1).eval(x);
        assert!(oracle.eval(x) >= 0.0);
        assert!((oracle.eval(x) - direct * direct).abs() <= 1e-12 * (1.0 + direct * direct));
    }
}

#[test]
fn differentiate_examples() {
    assert_eq!(Poly::from_i64(&[0, 0, 1]).differentiate(), Poly::from_i64(&[0, 2]));
    assert!(Poly::from_i64(&[5]).differentiate().is_zero());
}

#[test]
fn integral_examples() {
    assert_eq!(Poly::x().definite_integral_01(), rat(1, 2));
    assert_eq!(Poly::from_i64(&[0, 0, 3]).definite_integral_01(), int(1));
}

#[test]
fn taylor_shift_examples() {
    assert_eq!(Poly::from_i64(&[0, 0, 1]).taylor_shift(&int(1)), Poly::from_i64(&[1, 2, 1]));
    let p = Poly::from_i64(&[3, -1, 4, 1]);
    assert_eq!(p.taylor_shift(&int(0)), p);
}

#[test]
fn eval_examples() {
    assert_eq!(Poly::from_i64(&[1, 0, -1]).eval(&int(1)), int(0));
    let p = Poly::from_coeffs(&[rat(2, 9), int(1), int(7)]);
    assert_eq!(p.eval(&int(0)), rat(2, 9));
}

#[test]
fn json_format() {
    let p = Poly::from_coeffs(&[int(1), rat(-3, 2), int(0), rat(1, 4)]);
    assert_eq!(p.to_json(), serde_json::json!(["1", "-3/2", "0", "1/4"]));
    assert_eq!(Poly::from_json(&p.to_json()).unwrap(), p);
    assert!(Poly::from_json(&serde_json::json!(["1", "x"])).is_err());
}

#[test]
fn range_examples() {
    let (zero, one) = (int(0), int(1));
    let tol = rat(1, 1000);
    let p = Poly::from_i64(&[0, 1, -1]);
    let (_, max) = range_enclosure(&p, &zero, &one, &tol, DEFAULT_DEPTH_LIMIT).unwrap();
    assert!(max.contains(&rat(1, 4)) && max.width() <= tol);

    let c = Poly::constant(&int(5));
    let (min, max) = range_enclosure(&c, &int(-3), &int(2), &tol, DEFAULT_DEPTH_LIMIT).unwrap();
    assert_eq!((min.lo, min.hi, max.lo, max.hi), (int(5), int(5), int(5), int(5)));

    let t = Poly::from_i64(&[1, -8, 8]);
    let (min, max) = range_enclosure(&t, &zero, &one, &tol, DEFAULT_DEPTH_LIMIT).unwrap();
    assert!(max.contains(&int(1)) && min.contains(&int(-1)));
}

#[test]
fn range_too_wide_carries_best() {
    let p = Poly::from_i64(&[0, -1, 0, 1]);
    match range_enclosure(&p, &int(0), &int(1), &rat(1, 1 << 40), 4) {
        Err(Error::EnclosureTooWide { depth, best }) => {
            assert_eq!(depth, 4);
            // the true minimum is -2/(3 sqrt 3) ~ -0.3849
            assert!(to_f64(&best.0.lo) <= -0.3849 && to_f64(&best.0.hi) >= -0.385);
        }
        other => panic!("expected too-wide error, got {other:?}"),
    }
}

#[test]
fn bernstein_hull_encloses_values() {
    let p = Poly::from_coeffs(&[rat(1, 3), int(-2), rat(5, 2), int(-1)]);
    let b = BernsteinForm::new(&p, &rat(-1, 2), &rat(3, 2));
    let hull = b.hull();
    for k in 0..=40 {
        let x = rat(-1, 2) + rat(k, 20);
        assert!(hull.contains(&p.eval(&x)));
    }
    let (ya, yb) = b.endpoint_values();
    assert_eq!((ya, yb), (p.eval(&rat(-1, 2)), p.eval(&rat(3, 2))));
}

#[test]
fn certify_bounds_detects_violation() {
    let p = Poly::from_i64(&[0, 4, -4]);
    let (zero, one) = (int(0), int(1));
    assert!(certify_bounds(&p, &zero, &one, &zero, &one, DEFAULT_DEPTH_LIMIT).is_ok());
    let fail = certify_bounds(&p, &zero, &one, &zero, &rat(99, 100), DEFAULT_DEPTH_LIMIT).unwrap_err();
    let (x, v) = fail.violation.expect("the midpoint value 1 is found");
    assert_eq!(p.eval(&x), v);
    assert!(v > rat(99, 100));
}

#[test]
fn large_products_match_schoolbook() {
    let a: Vec<BigRational> = (0..90).map(|k| rat((k * 37 % 101) - 50, 1 + k % 7)).collect();
    let b: Vec<BigRational> = (0..70).map(|k| rat(1 - (k * 53 % 97), 3 + k % 5)).collect();
    let (pa, pb) = (Poly::from_coeffs(&a), Poly::from_coeffs(&b));
    assert_eq!(&pa * &pb, naive_product(&pa, &pb));
    assert_eq!(pa.square(), naive_product(&pa, &pa));
    let neg = -&pa;
    assert_eq!(&neg * &pb, -naive_product(&pa, &pb));
}

#[test]
fn dyadic_round_stays_close() {
    let p = Poly::from_coeffs(&[rat(1, 3), rat(-2, 7), rat(5, 11)]);
    let r = p.dyadic_round(20);
    assert!((&p - &r).l1_norm() <= rat(3, 1 << 21));
    assert!(cubature_adversary::numeric::is_dyadic(&r.coeff(0)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_schoolbook(a in poly(30), b in poly(30)) {
        prop_assert_eq!(&a * &b, naive_product(&a, &b));
    }

    #[test]
    fn multiplication_commutes_and_associates(a in poly(8), b in poly(8), c in poly(8)) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn product_degree_adds(a in poly(10), b in poly(10)) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        prop_assert_eq!((&a * &b).degree(), a.degree() + b.degree());
    }

    #[test]
    fn taylor_shift_round_trip(c in proptest::collection::vec(coeff(), 21)) {
        let p = Poly::from_coeffs(&c);
        let s = rat(7, 13);
        prop_assert_eq!(p.taylor_shift(&s).taylor_shift(&-s.clone()), p.clone());
        prop_assert_eq!(p.taylor_shift(&s).degree(), p.degree());
        prop_assert_eq!(p.taylor_shift(&s).eval(&rat(2, 5)), p.eval(&(rat(2, 5) + s)));
    }

    #[test]
    fn fundamental_theorem(p in poly(15)) {
        prop_assert_eq!(p.differentiate().definite_integral_01(), p.eval(&int(1)) - p.eval(&int(0)));
    }

    #[test]
    fn product_rule(a in poly(8), b in poly(8)) {
        prop_assert_eq!((&a * &b).differentiate(), &(&a.differentiate() * &b) + &(&a * &b.differentiate()));
    }

    #[test]
    fn high_derivatives_vanish(p in poly(12)) {
        prop_assert!(p.nth_derivative(p.degree() + 1).is_zero());
    }

    #[test]
    fn eval_matches_float(p in poly(10), x in -1.0f64..1.0) {
        let xr = cubature_adversary::numeric::from_f64(x).unwrap();
        let exact = to_f64(&p.eval(&xr));
        let float: f64 = p.to_f64_coeffs().iter().rev().fold(0.0, |acc, c| acc * x + c);
        let scale: f64 = p.to_f64_coeffs().iter().map(|c| c.abs()).sum::<f64>() + 1.0;
        prop_assert!((exact - float).abs() <= 1e-12 * scale);
    }

    #[test]
    fn division_by_linear(p in poly(10), r in coeff()) {
        let (q, rem) = p.divide_linear(&r);
        prop_assert_eq!(rem.clone(), p.eval(&r));
        let lin = Poly::linear(&-r.clone(), &BigRational::one());
        prop_assert_eq!(&(&q * &lin) + &Poly::constant(&rem), p);
    }

    #[test]
    fn compose_affine_matches_eval(p in poly(8), a in coeff(), h in coeff(), t in coeff()) {
        prop_assert_eq!(p.compose_affine(&a, &h).eval(&t), p.eval(&(&a + &h * &t)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn range_encloses_dense_grid(p in poly(7)) {
        let (a, b) = (int(0), int(1));
        let (min, max) = range_enclosure(&p, &a, &b, &rat(1, 1 << 16), DEFAULT_DEPTH_LIMIT).unwrap();
        let step = rat(1, 10_000);
        let mut x = int(0);
        for _ in 0..=10_000 {
            let v = p.eval(&x);
            prop_assert!(min.lo <= v && v <= max.hi);
            x += &step;
        }
    }

    #[test]
    fn bernstein_split_is_exact(p in poly(9)) {
        let b = BernsteinForm::new(&p, &int(0), &int(1));
        let (l, r) = b.split();
        let coeffs = |f: &BernsteinForm| (0..=f.degree()).map(|j| f.coeff(j)).collect::<Vec<_>>();
        prop_assert_eq!(coeffs(&l), coeffs(&BernsteinForm::new(&p, &int(0), &rat(1, 2))));
        prop_assert_eq!(coeffs(&r), coeffs(&BernsteinForm::new(&p, &rat(1, 2), &int(1))));
    }
}

use std::sync::{Mutex, OnceLock};

use cubature_adversary::certificate::{
    assemble, replay, Certifier, ErrorCertificate, Mode, QuadratureRule, Regime, SeparableFunction,
};
use cubature_adversary::numeric::{int, rat, to_f64};
use cubature_adversary::oracle::PolyOracle;
use cubature_adversary::Error;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn certifier() -> &'static Mutex<Certifier> {
    static C: OnceLock<Mutex<Certifier>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(Certifier::default()))
}

fn certify(rule: &QuadratureRule, eta: &BigRational, mode: Mode) -> ErrorCertificate {
    certifier().lock().unwrap().certify(rule, eta, mode).unwrap()
}

fn diagonal(d: usize, coords: &[BigRational]) -> QuadratureRule {
    let rows = coords.iter().map(|y| vec![y.clone(); d]).collect();
    QuadratureRule::with_unit_weights(d, rows, "diagonal").unwrap()
}

#[test]
fn rule_validation() {
    let bad = QuadratureRule::with_unit_weights(2, vec![vec![rat(1, 2), rat(3, 2)]], "bad");
    match bad {
        Err(Error::OutOfRange { row, column, .. }) => assert_eq!((row, column), (1, 2)),
        other => panic!("expected out-of-range, got {other:?}"),
    }
    assert!(QuadratureRule::with_unit_weights(2, vec![vec![rat(1, 2)]], "short").is_err());
    assert!(QuadratureRule::new(1, vec![vec![int(0)]], vec![], "weights").is_err());
    assert!(QuadratureRule::with_unit_weights(0, vec![], "empty").is_err());
}

#[test]
fn profiles_deduplicate_axes() {
    let rule = QuadratureRule::with_unit_weights(
        3,
        vec![vec![rat(1, 4), rat(3, 4), rat(1, 4)], vec![rat(3, 4), rat(1, 4), rat(1, 2)]],
        "mixed",
    )
    .unwrap();
    let (profiles, axis) = rule.profiles();
    assert_eq!(profiles, vec![vec![rat(1, 4), rat(3, 4)], vec![rat(1, 4), rat(1, 2)]]);
    assert_eq!(axis, vec![0, 0, 1]);
}

#[test]
fn hash_ignores_weights() {
    let a = QuadratureRule::new(1, vec![vec![rat(1, 3)], vec![rat(2, 3)]], vec![rat(1, 2), rat(1, 2)], "a").unwrap();
    let b = QuadratureRule::new(1, vec![vec![rat(1, 3)], vec![rat(2, 3)]], vec![int(5), rat(-1, 7)], "b").unwrap();
    let c = QuadratureRule::with_unit_weights(1, vec![vec![rat(1, 3)], vec![rat(3, 4)]], "c").unwrap();
    assert_eq!(a.points_hash(), b.points_hash());
    assert_ne!(a.points_hash(), c.points_hash());
    assert_eq!(QuadratureRule::from_json(&a.to_json()).unwrap(), a);
}

#[test]
fn family_single_point_bound() {
    let cert = certify(&diagonal(1, &[rat(1, 2)]), &rat(7, 10), Mode::Family);
    assert!(cert.bound >= rat(56, 125));
    assert!(cert.bound >= rat(3, 10));
    assert_eq!(cert.d, None);
    assert_eq!(cert.regime, Regime::Plateau);
    let d_min = cert.d_min.clone().unwrap();
    assert!(BigRational::from_integer(d_min) >= cert.k_max);
    assert!(replay(&cert).accepted());
}

#[test]
fn concrete_one_dimension_scales_by_k() {
    let cert = certify(&diagonal(1, &[rat(1, 2)]), &rat(7, 10), Mode::Concrete);
    let w = &cert.witnesses[0];
    assert!(cert.k_max > int(1));
    assert_eq!(cert.regime, Regime::Scaled);
    assert_eq!(cert.bound, &w.integral / &cert.k_max);
    assert!(cert.a_f_zero && cert.membership);
}

#[test]
fn concrete_bound_grows_with_dimension() {
    let mut last = BigRational::zero();
    for d in 1..=4 {
        let cert = certify(&diagonal(d, &[rat(1, 2)]), &rat(7, 10), Mode::Concrete);
        assert!(cert.bound >= last, "d = {d}");
        last = cert.bound;
    }
    let family = certify(&diagonal(1, &[rat(1, 2)]), &rat(7, 10), Mode::Family);
    let dims = [1usize, 10, 1000, usize::MAX];
    let bounds: Vec<BigRational> = dims.iter().map(|&d| family.bound_at(d)).collect();
    assert!(bounds.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn best_bound_picks_the_largest() {
    let rule = diagonal(1, &[rat(1, 2)]);
    let mut c = certifier().lock().unwrap();
    let (eta, cert) = c.best_bound(&rule, &[rat(7, 10)]).unwrap();
    assert_eq!(eta, rat(7, 10));
    assert_eq!(cert.eta, eta);

    let grid = [rat(9, 10), rat(7, 10)];
    let (_, best) = c.best_bound(&rule, &grid).unwrap();
    for eta in &grid {
        let single = c.certify(&rule, eta, Mode::Concrete).unwrap();
        assert!(best.bound >= single.bound);
    }
    assert!(c.best_bound(&rule, &[]).is_err());
}

#[test]
fn ties_go_to_the_smaller_eta() {
    let rule = QuadratureRule::with_unit_weights(3, vec![], "zero").unwrap();
    let (eta, cert) = certifier().lock().unwrap().best_bound(&rule, &[rat(1, 2), rat(1, 10), rat(9, 10)]).unwrap();
    assert_eq!(eta, rat(1, 10));
    assert_eq!(cert.bound, int(1));
}

#[test]
fn zero_rule_bound_is_one() {
    for d in [1, 5] {
        let rule = QuadratureRule::with_unit_weights(d, vec![], "zero").unwrap();
        for mode in [Mode::Concrete, Mode::Family] {
            let cert = certify(&rule, &rat(1, 2), mode);
            assert_eq!(cert.bound, int(1));
            assert!(replay(&cert).accepted());
        }
    }
}

#[test]
fn replay_accepts_and_survives_json() {
    let rule = QuadratureRule::with_unit_weights(2, vec![vec![rat(1, 2), rat(1, 3)]], "pair").unwrap();
    let cert = certify(&rule, &rat(7, 10), Mode::Concrete);
    let report = replay(&cert);
    assert!(report.accepted(), "{report}");
    let back = ErrorCertificate::from_json(&cert.to_json()).unwrap();
    assert_eq!(back.bound, cert.bound);
    assert!(replay(&back).accepted());
}

#[test]
fn replay_ignores_weights_but_not_points() {
    let cert = certify(&diagonal(1, &[rat(1, 2)]), &rat(7, 10), Mode::Concrete);

    let mut reweighted = cert.clone();
    reweighted.rule.as_mut().unwrap().weights = vec![rat(-13, 3)];
    assert!(replay(&reweighted).accepted());

    let mut moved = cert.clone();
    moved.rule.as_mut().unwrap().points[0][0] = rat(1, 3);
    let report = replay(&moved);
    assert!(!report.accepted());
    assert!(report.rejections().contains(&"A_f_zero"));
}

#[test]
fn replay_rejects_inflated_bound() {
    let mut cert = certify(&diagonal(1, &[rat(1, 2)]), &rat(7, 10), Mode::Family);
    cert.bound += rat(1, 100);
    assert!(replay(&cert).rejections().contains(&"bound"));
}

#[test]
fn bounds_approach_one() {
    for (t, eta) in [(rat(1, 2), rat(2, 5)), (rat(7, 10), rat(1, 4))] {
        assert!(eta < BigRational::one() - &t);
        for n in 1..=2i64 {
            let coords: Vec<BigRational> = (0..n).map(|k| rat(2 * k + 1, 2 * n)).collect();
            let cert = certify(&diagonal(1, &coords), &eta, Mode::Family);
            assert!(cert.bound >= BigRational::one() - &eta && cert.bound > t);
            assert!(cert.d_min.is_some());
            let d_min = BigRational::from_integer(cert.d_min.clone().unwrap());
            assert!(d_min >= cert.k_max);
        }
    }
}

#[test]
fn assembled_function_matches_mean() {
    let cert = certify(&diagonal(1, &[rat(1, 4)]), &rat(9, 10), Mode::Family);
    let other = certify(&diagonal(1, &[rat(3, 4)]), &rat(9, 10), Mode::Family);
    let ws = vec![cert.witnesses[0].clone(), other.witnesses[0].clone()];
    let f: SeparableFunction = assemble(&ws, 2).unwrap();
    assert_eq!(f.integral_mean, (&ws[0].integral + &ws[1].integral) / int(2));
    assert_eq!(f.eval(&[rat(1, 4), rat(3, 4)]), int(0));
    let (o0, o1) = (PolyOracle::new(&ws[0].f), PolyOracle::new(&ws[1].f));
    let float_mean = (o0.numeric_integral(1e-12) + o1.numeric_integral(1e-12)) / 2.0;
    assert!((float_mean - to_f64(&f.integral_mean)).abs() < 1e-9);
    assert_eq!(f.partial(&[1, 1]).unwrap().1, cubature_adversary::Poly::zero());
    let (axis, p) = f.partial(&[0, 2]).unwrap();
    assert_eq!((axis, p), (1, ws[1].f.nth_derivative(2).scale(&rat(1, 2))));
    assert!(assemble(&ws, 3).is_err());
}

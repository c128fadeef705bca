use std::sync::{Mutex, OnceLock};

use cubature_adversary::fooling::{
    build_witness, compute_delta, derivative_bound, derivative_bound_with_sup, integral_chain, verify_witness,
    FoolingBuilder, FoolingWitness, WitnessConfig, CONDITION_BOUNDED, CONDITION_DERIVATIVES, CONDITION_INTEGRAL,
    CONDITION_VANISHING,
};
use cubature_adversary::numeric::{int, rat, to_f64};
use cubature_adversary::oracle::PolyOracle;
use cubature_adversary::profile::certify_sup_error;
use cubature_adversary::Poly;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn shared_builder() -> &'static Mutex<FoolingBuilder> {
    static B: OnceLock<Mutex<FoolingBuilder>> = OnceLock::new();
    B.get_or_init(|| Mutex::new(FoolingBuilder::new(WitnessConfig::default())))
}

fn build(points: &[BigRational], eta: &BigRational) -> FoolingWitness {
    shared_builder().lock().unwrap().build(points, eta).unwrap()
}

fn single() -> FoolingWitness {
    build(&[rat(1, 2)], &rat(7, 10))
}

#[test]
fn single_point_witness() {
    let w = single();
    assert_eq!(w.delta, rat(1, 10));
    assert_eq!(w.f.eval(&rat(1, 2)), int(0));
    assert!(w.integral > rat(3, 10));
    assert!(w.sup.hi <= int(1));
    let report = verify_witness(&w);
    assert!(report.passed(), "{report}");
    for name in [CONDITION_BOUNDED, CONDITION_DERIVATIVES, CONDITION_INTEGRAL, CONDITION_VANISHING] {
        assert!(report.condition(name).unwrap().passed, "{name}");
    }
}

#[test]
fn repeated_point_witness() {
    let w = build(&[rat(1, 3), rat(1, 3)], &rat(7, 10));
    assert_eq!(w.delta, rat(1, 20));
    assert_eq!(w.point_multiset(), vec![rat(1, 3), rat(1, 3)]);
    assert!(verify_witness(&w).passed());
}

#[test]
fn empty_points_give_one() {
    let w = build_witness(&[], &rat(1, 2)).unwrap();
    assert_eq!(w.f, Poly::one());
    assert_eq!(w.integral, int(1));
    assert!(verify_witness(&w).passed());
}

#[test]
fn invalid_inputs_rejected() {
    assert!(build_witness(&[rat(1, 2)], &int(1)).is_err());
    assert!(build_witness(&[rat(1, 2)], &int(0)).is_err());
    assert!(build_witness(&[rat(3, 2)], &rat(1, 2)).is_err());
    assert!(compute_delta(&rat(1, 2), 0).is_err());
}

#[test]
fn shifted_polynomial_fails_vanishing() {
    let mut w = single();
    w.f = w.f.add_constant(&rat(1, 1000));
    let report = verify_witness(&w);
    assert!(!report.passed());
    assert!(!report.condition(CONDITION_VANISHING).unwrap().passed);
}

#[test]
fn altered_integral_fails() {
    let mut w = single();
    w.integral += rat(1, 1_000_000);
    let report = verify_witness(&w);
    assert!(!report.condition(CONDITION_INTEGRAL).unwrap().passed);
}

#[test]
fn understated_sup_fails() {
    let mut w = single();
    w.sup.hi = rat(1, 100);
    w.sup.lo = int(0);
    let report = verify_witness(&w);
    assert!(!report.condition(CONDITION_BOUNDED).unwrap().passed);
}

#[test]
fn understated_derivative_bound_fails() {
    let mut w = single();
    w.k = derivative_bound_with_sup(&Poly::one(), &int(1), 600);
    assert!(!verify_witness(&w).condition(CONDITION_DERIVATIVES).unwrap().passed);
}

#[test]
fn json_round_trip_verifies() {
    let w = single();
    let back = FoolingWitness::from_json(&w.to_json()).unwrap();
    assert_eq!(back.f, w.f);
    assert_eq!(back.integral, w.integral);
    assert_eq!(back.sup, w.sup);
    assert!(verify_witness(&back).passed());
}

#[test]
fn second_tier_dominates_first() {
    let w = single();
    let t1 = derivative_bound_with_sup(&w.f, &w.sup.hi, 600);
    let t2 = derivative_bound_with_sup(&w.f, &w.sup.hi, 0);
    assert_eq!((t1.tier, t2.tier), (1, 2));
    assert!(t2.value >= t1.value);
    assert!(t1.value >= w.sup.hi);
}

#[test]
fn derivative_bound_covers_true_derivatives() {
    let p = Poly::from_coeffs(&[rat(1, 5), int(-3), rat(7, 2), int(-1)]);
    let k = derivative_bound(&p);
    for order in 1..=3 {
        let dp = p.nth_derivative(order);
        for i in 0..=50 {
            let x = rat(i, 50);
            assert!(dp.eval(&x).abs() <= k.value);
        }
    }
}

#[test]
fn witness_is_nonnegative_and_sampled_below_bound() {
    let w = build(&[rat(1, 5), rat(4, 5)], &rat(7, 10));
    let oracle = PolyOracle::new(&w.f);
    let hi = to_f64(&w.sup.hi);
    for i in 0..=2000 {
        let v = oracle.eval(i as f64 / 2000.0);
        assert!(v >= -1e-12 && v <= hi + 1e-12);
    }
    assert!(oracle.grid_max(0.0, 1.0, 4001) <= hi + 1e-12);
}

#[test]
fn stage_root_and_recertification() {
    let w = single();
    let stage = w.stage.as_ref().unwrap();
    let delta = &w.delta;
    assert!(stage.root_hat > int(1) && stage.root_hat < rat(11, 10));
    assert!(stage.correction.abs() <= delta / int(2));
    assert!(stage.corrected.eval(&stage.root_hat).is_zero());
    assert!(stage.eps_total < *delta);
    assert!(certify_sup_error(&stage.corrected, &stage.profile, &stage.eps_total).is_ok());
}

#[test]
fn integral_chain_small_cases() {
    for n in 1..=10usize {
        for k in 1..=69i64 {
            let delta = rat(k, 70 * n as i64);
            let (lhs, rhs) = integral_chain(n, &delta);
            assert!(lhs >= rhs, "n = {n}, delta = {delta}");
        }
    }
}

fn point() -> impl Strategy<Value = BigRational> {
    (0i64..=64).prop_map(|k| rat(k, 64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn random_witnesses_verify(points in proptest::collection::vec(point(), 1..=2), high in any::<bool>()) {
        let eta = if high { rat(9, 10) } else { rat(7, 10) };
        let w = build(&points, &eta);
        let report = verify_witness(&w);
        prop_assert!(report.passed(), "{}", report);
        prop_assert!(w.integral > BigRational::one() - &eta);
        for y in &points {
            prop_assert!(w.f.eval(y).is_zero());
        }
        prop_assert!(w.sup.lo <= w.sup.hi && w.sup.hi <= BigRational::one());
        prop_assert!(w.f.eval(&rat(1, 7)) >= BigRational::zero());
    }
}

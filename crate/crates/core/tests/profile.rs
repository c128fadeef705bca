use cubature_adversary::numeric::{int, rat, to_f64};
use cubature_adversary::profile::{
    build_profile, certify_sup_error, propose_approx, propose_approx_with, ApproxCertificate, ProposalMethod,
};
use cubature_adversary::{Error, Poly};
use num_rational::BigRational;
use proptest::prelude::*;

#[test]
fn profile_values() {
    let g = build_profile(&rat(1, 10)).unwrap();
    assert_eq!(g.value(&int(0)), Some(rat(9, 10)));
    assert_eq!(g.value(&int(1)), Some(rat(-1, 5)));
    assert_eq!(g.value(&rat(19, 20)), Some(rat(7, 20)));
    assert_eq!(g.value(&rat(21, 10)), Some(rat(9, 10)));
    assert_eq!(g.value(&rat(22, 10)), None);
    assert_eq!(g.right_end(), rat(21, 10));
}

#[test]
fn profile_is_continuous() {
    let g = build_profile(&rat(3, 17)).unwrap();
    for w in g.segments.windows(2) {
        assert_eq!(w[0].b, w[1].a);
        assert_eq!(w[0].value(&w[0].b), w[1].value(&w[1].a));
    }
}

#[test]
fn profile_rejects_bad_width() {
    assert!(matches!(build_profile(&int(0)), Err(Error::InvalidParameter(_))));
    assert!(build_profile(&rat(1, 2)).is_err());
}

#[test]
fn window_is_dyadic_and_covers() {
    for delta in [rat(1, 10), rat(1, 42), rat(1, 7), rat(1, 700)] {
        let g = build_profile(&delta).unwrap();
        let l = g.window_half_width();
        assert!(l >= int(1) + &delta);
        assert!(cubature_adversary::numeric::is_dyadic(&(int(1) / &l)));
    }
}

#[test]
fn constant_candidate_fails() {
    let g = build_profile(&rat(1, 10)).unwrap();
    let p = Poly::constant(&rat(9, 10));
    match certify_sup_error(&p, &g, &rat(1, 20)) {
        Err(Error::CertificationFailed { segment, .. }) => assert!(segment == 1 || segment == 2),
        other => panic!("expected failure, got {other:?}"),
    }
}

#[test]
fn proposal_meets_float_target() {
    let g = build_profile(&rat(1, 10)).unwrap();
    let prop = propose_approx(&g, &rat(1, 20), 4096).unwrap();
    assert!(prop.float_error < 0.05);
    assert!(prop.degree >= 1);
}

#[test]
fn quarter_target_certifies_at_half() {
    let delta = rat(1, 10);
    let g = build_profile(&delta).unwrap();
    let prop = propose_approx(&g, &(&delta / int(4)), 4096).unwrap();
    let cert = certify_sup_error(&prop.poly, &g, &(&delta / int(2))).unwrap();
    assert_eq!(cert.segments.len(), 4);
    for (_, _, e) in &cert.segments {
        assert!(e.lo >= -&cert.eps && e.hi <= cert.eps);
    }
    // the approximation sits below zero at the dip and above at its edge
    assert!(prop.poly.eval(&int(1)) < int(0));
    assert!(prop.poly.eval(&(int(1) + &delta)) > int(0));
}

#[test]
fn interpolation_method_also_certifies() {
    let delta = rat(1, 10);
    let g = build_profile(&delta).unwrap();
    let prop = propose_approx_with(&g, &(&delta / int(4)), 4096, ProposalMethod::Interpolation).unwrap();
    assert_eq!(prop.method, ProposalMethod::Interpolation);
    assert!(certify_sup_error(&prop.poly, &g, &(&delta / int(2))).is_ok());
}

#[test]
fn degree_cap_is_reported() {
    let g = build_profile(&rat(1, 50)).unwrap();
    assert!(matches!(propose_approx(&g, &rat(1, 1000), 8), Err(Error::DegreeExhausted { .. })));
}

#[test]
fn error_shrinks_with_degree_budget() {
    let g = build_profile(&rat(1, 10)).unwrap();
    let targets = [rat(1, 10), rat(1, 40), rat(1, 160)];
    let errs: Vec<f64> = targets
        .iter()
        .map(|t| propose_approx(&g, t, 8192).unwrap().float_error)
        .collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn sampled_error_respects_certificate() {
    let delta = rat(1, 14);
    let g = build_profile(&delta).unwrap();
    let prop = propose_approx(&g, &(&delta / int(4)), 8192).unwrap();
    let eps = &delta / int(2);
    certify_sup_error(&prop.poly, &g, &eps).unwrap();
    let end = g.right_end();
    for k in 0..=400 {
        let x = &end * rat(k, 400);
        let gap = &prop.poly.eval(&x) - g.value(&x).unwrap();
        assert!(gap.clone() <= eps && gap >= -eps.clone(), "x = {x}");
    }
}

#[test]
fn certificate_json_round_trip() {
    let delta = rat(1, 10);
    let g = build_profile(&delta).unwrap();
    let prop = propose_approx(&g, &rat(1, 20), 4096).unwrap();
    let cert = certify_sup_error(&prop.poly, &g, &rat(1, 10)).unwrap();
    let back = ApproxCertificate::from_json(&cert.to_json()).unwrap();
    assert_eq!(back, cert);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_bounds(num in 1i64..49, x in 0.0f64..1.0) {
        let delta = rat(num, 100);
        let g = build_profile(&delta).unwrap();
        let xr = g.right_end() * cubature_adversary::numeric::from_f64(x).unwrap();
        let v = g.value(&xr).unwrap();
        let plateau: BigRational = int(1) - &delta;
        prop_assert!(v <= plateau);
        prop_assert!(v >= -(&delta + &delta));
        prop_assert!((g.value_f64(to_f64(&xr)) - to_f64(&v)).abs() < 1e-9);
    }
}

//! Univariate fooling polynomials: a nonnegative polynomial bounded by 1 on
//! `[0, 1]` that vanishes at prescribed points yet has integral above `1 - eta`.
//!
//! Construction, for `n` points and `delta = eta / (7n)`:
//!
//! 1. approximate the dip profile by `P` with a certified error bound;
//! 2. find a dyadic `r` in `(1, 1 + delta)` where `|P(r)|` is small and subtract
//!    `P(r)` so the corrected polynomial vanishes exactly at `r`;
//! 3. for each point `y`, shift the corrected polynomial so its zero lands on `y`,
//!    round the cofactor of `(x - y)` to a dyadic grid, and keep the exact
//!    `(x - y)` factor;
//! 4. multiply the squared factors.
//!
//! The shifted approximation errors, the rounding errors and the correction are
//! all tracked exactly, so the final sup bound is a rigorous rational.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numeric::{factorial, format_rational, int, parse_rational, pow2, rat, Enclosure, LogMagnitude};
use crate::poly::{certify_bounds, range_enclosure, BernsteinForm, Poly, DEFAULT_DEPTH_LIMIT};
use crate::profile::{
    build_profile, certify_sup_error_with_depth, propose_approx_with, ApproxCertificate,
    PiecewiseLinearProfile, ProposalMethod,
};

pub const ROOT_DEPTH_LIMIT: u32 = 200;

/// Tunable budgets and limits for witness construction.
#[derive(Clone, Debug)]
pub struct WitnessConfig {
    /// Certified approximation error as a fraction of delta.
    pub approx_share: BigRational,
    /// Float target for proposals as a fraction of the certified budget.
    pub proposal_share: BigRational,
    /// Root tolerance, and so the constant correction, as a fraction of delta.
    pub root_share: BigRational,
    /// Absolute root tolerance overriding `root_share`.
    pub root_tol: Option<BigRational>,
    pub max_degree: usize,
    pub round_bits: u32,
    pub depth_limit: u32,
    /// Degrees up to this get the Bernstein-based derivative bound.
    pub tier_threshold: usize,
    pub method: ProposalMethod,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            approx_share: rat(7, 8),
            proposal_share: rat(4, 5),
            root_share: rat(1, 16),
            root_tol: None,
            max_degree: 8192,
            round_bits: 64,
            depth_limit: DEFAULT_DEPTH_LIMIT,
            tier_threshold: 600,
            method: ProposalMethod::Minimax,
        }
    }
}

pub fn compute_delta(eta: &BigRational, n: usize) -> Result<BigRational> {
    check_eta(eta)?;
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one point".into()));
    }
    Ok(eta / int(7 * n as i64))
}

fn check_eta(eta: &BigRational) -> Result<()> {
    if !eta.is_positive() || *eta >= BigRational::one() {
        return Err(Error::InvalidParameter(format!("eta {eta} must lie in (0, 1)")));
    }
    Ok(())
}

/// The dyadic rational with the smallest denominator strictly inside `(lo, hi)`.
fn simplest_dyadic_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    let mut k = 0i64;
    loop {
        let scale = pow2(k);
        let m = (lo * &scale).floor() + BigRational::one();
        let cand = m / &scale;
        if &cand < hi {
            return cand;
        }
        k += 1;
    }
}

/// Finds a dyadic `r` in `(1, 1 + delta)` with `|P(r)| <= tol` by sign bisection.
pub fn isolate_root(p: &Poly, delta: &BigRational, tol: &BigRational) -> Result<BigRational> {
    use num_bigint::Sign;
    let mut lo = BigRational::one();
    let mut hi = BigRational::one() + delta;
    if p.sign_at(&lo) != Sign::Minus || p.sign_at(&hi) != Sign::Plus {
        return Err(Error::NoBracket(format!(
            "need P(1) < 0 < P(1 + {delta}); got P(1) = {}, P(1 + delta) = {}",
            p.eval(&lo),
            p.eval(&hi)
        )));
    }
    for _ in 0..ROOT_DEPTH_LIMIT {
        let m = simplest_dyadic_between(&lo, &hi);
        let v = p.eval(&m);
        if v.abs() <= *tol {
            return Ok(m);
        }
        if v.is_negative() {
            lo = m;
        } else {
            hi = m;
        }
    }
    Err(Error::RootDepthExceeded(ROOT_DEPTH_LIMIT))
}

/// `P - P(r)`, which vanishes exactly at `r`.
pub fn correct_constant(p: &Poly, root_hat: &BigRational, budget: &BigRational) -> Result<Poly> {
    let v = p.eval(root_hat);
    if v.abs() > *budget {
        return Err(Error::CorrectionTooLarge {
            value: v.to_string(),
            budget: budget.to_string(),
        });
    }
    Ok(p.add_constant(&-v))
}

/// `(1 - 3 n delta)(1 - 2 delta)^(2n)` and `1 - 7 n delta`.
pub fn integral_chain(n: usize, delta: &BigRational) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let nn = int(n as i64);
    let base = &one - int(2) * delta;
    let lhs = (&one - int(3) * &nn * delta) * num_traits::pow(base, 2 * n);
    (lhs, one - int(7) * nn * delta)
}

/// Everything that depends only on delta: the certified approximation and its corrected form.
#[derive(Clone, Debug)]
pub struct ApproxStage {
    pub profile: PiecewiseLinearProfile,
    pub certificate: ApproxCertificate,
    pub float_error: f64,
    pub root_hat: BigRational,
    /// `P(root_hat)`, subtracted from `P`.
    pub correction: BigRational,
    pub corrected: Poly,
    /// Certified bound on `|corrected - g|`.
    pub eps_total: BigRational,
    /// `corrected(x + root_hat) / x`.
    cofactor: Poly,
}

impl ApproxStage {
    pub fn degree(&self) -> usize {
        self.certificate.poly.degree()
    }
}

/// Exact upper bound `K` on every derivative sup of `f` over `[0, 1]`, orders 0 through degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeBound {
    pub value: BigRational,
    pub log: LogMagnitude,
    /// 1 for the Bernstein-hull bound, 2 for the Markov-only bound.
    pub tier: u8,
}

impl DerivativeBound {
    fn new(value: BigRational, tier: u8) -> Self {
        DerivativeBound {
            log: LogMagnitude::from_rational(&value),
            value,
            tier,
        }
    }

    pub fn log10_string(&self) -> String {
        self.log.log10_string(6)
    }
}

/// `2^k T_D^(k)(1) s` for `k = 0..=D`: Markov's bound on the k-th derivative over `[0, 1]`.
fn markov_cascade(d: usize, s: &BigRational) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(d + 1);
    let mut m = s.clone();
    out.push(m.clone());
    let dd = (d * d) as i64;
    for k in 1..=d {
        let j = (k - 1) as i64;
        m = m * int(2 * (dd - j * j)) / int(2 * j + 1);
        out.push(m.clone());
    }
    out
}

/// Derivative bound given a certified `s >= max |f|` on `[0, 1]`.
pub fn derivative_bound_with_sup(f: &Poly, s: &BigRational, tier_threshold: usize) -> DerivativeBound {
    let d = f.degree();
    if d == 0 || f.is_zero() {
        return DerivativeBound::new(s.clone(), 1);
    }
    if d > tier_threshold {
        let k = s * BigRational::from_integer(factorial(d) << (2 * d - 1));
        return DerivativeBound::new(k, 2);
    }
    let markov = markov_cascade(d, s);
    let form = BernsteinForm::new(f, &BigRational::zero(), &BigRational::one());
    let (_, den) = form.integer_parts();
    let mut best = s.clone();
    let mut falling = BigInt::one();
    for (k, diffs) in form.forward_differences().enumerate().skip(1) {
        falling *= d + 1 - k;
        let peak = diffs.iter().map(|c| c.abs()).max().unwrap_or_default();
        let hull = BigRational::new(peak * &falling, den.clone());
        let bound = hull.min(markov[k].clone());
        if bound > best {
            best = bound;
        }
    }
    DerivativeBound::new(best, 1)
}

/// Derivative bound with the sup of `|f|` on `[0, 1]` taken from a range enclosure.
pub fn derivative_bound(f: &Poly) -> DerivativeBound {
    let s = sup_upper_bound(f);
    derivative_bound_with_sup(f, &s, WitnessConfig::default().tier_threshold)
}

fn sup_upper_bound(f: &Poly) -> BigRational {
    if f.degree() == 0 {
        return f.coeff(0).abs();
    }
    let tol = rat(1, 1 << 20);
    let (min, max) = match range_enclosure(f, &BigRational::zero(), &BigRational::one(), &tol, DEFAULT_DEPTH_LIMIT) {
        Ok(r) => r,
        Err(Error::EnclosureTooWide { best, .. }) => *best,
        Err(e) => unreachable!("range enclosure on [0, 1]: {e}"),
    };
    min.lo.abs().max(max.hi.abs())
}

/// One fooling polynomial with its exact evidence.
#[derive(Clone, Debug)]
pub struct FoolingWitness {
    pub eta: BigRational,
    pub delta: BigRational,
    pub points: Vec<BigRational>,
    pub stage: Option<Arc<ApproxStage>>,
    /// `(x - y_i) * round(cofactor)` for each point, in point order.
    pub factors: Vec<Poly>,
    pub round_bits: u32,
    pub f: Poly,
    pub integral: BigRational,
    pub sup: Enclosure,
    pub k: DerivativeBound,
}

impl FoolingWitness {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn degree(&self) -> usize {
        self.f.degree()
    }

    fn constant(eta: BigRational) -> Self {
        FoolingWitness {
            eta,
            delta: BigRational::zero(),
            points: Vec::new(),
            stage: None,
            factors: Vec::new(),
            round_bits: 0,
            f: Poly::one(),
            integral: BigRational::one(),
            sup: Enclosure::point(BigRational::one()),
            k: DerivativeBound::new(BigRational::one(), 1),
        }
    }

    /// Sorted copy of the points, the key used to share witnesses between axes.
    pub fn point_multiset(&self) -> Vec<BigRational> {
        let mut v = self.points.clone();
        v.sort();
        v
    }
}

/// Builds witnesses, reusing the per-delta approximation across calls.
#[derive(Debug, Default)]
pub struct FoolingBuilder {
    config: WitnessConfig,
    stages: HashMap<BigRational, Arc<ApproxStage>>,
}

impl FoolingBuilder {
    pub fn new(config: WitnessConfig) -> Self {
        FoolingBuilder {
            config,
            stages: HashMap::new(),
        }
    }

    pub fn config(&self) -> &WitnessConfig {
        &self.config
    }

    /// Certified approximation and root correction for one delta.
    pub fn stage(&mut self, delta: &BigRational) -> Result<Arc<ApproxStage>> {
        if let Some(s) = self.stages.get(delta) {
            return Ok(s.clone());
        }
        let stage = Arc::new(self.make_stage(delta)?);
        self.stages.insert(delta.clone(), stage.clone());
        Ok(stage)
    }

    fn make_stage(&self, delta: &BigRational) -> Result<ApproxStage> {
        let cfg = &self.config;
        let profile = build_profile(delta)?;
        let budget = &cfg.approx_share * delta;
        let target = &cfg.proposal_share * &budget;
        let proposal = propose_approx_with(&profile, &target, cfg.max_degree, cfg.method)?;
        let certificate = certify_sup_error_with_depth(&proposal.poly, &profile, &budget, cfg.depth_limit)?;
        let tol = cfg
            .root_tol
            .clone()
            .unwrap_or_else(|| &cfg.root_share * delta);
        let p = &certificate.poly;
        let root_hat = isolate_root(p, delta, &tol)?;
        let correction = p.eval(&root_hat);
        let corrected = correct_constant(p, &root_hat, &tol)?;
        let eps_total = &certificate.eps + correction.abs();
        if eps_total >= *delta {
            return Err(Error::ConditionViolation(format!(
                "approximation plus correction {eps_total} is not below delta {delta}"
            )));
        }
        let (cofactor, rem) = corrected.taylor_shift(&root_hat).divide_linear(&BigRational::zero());
        if !rem.is_zero() {
            return Err(Error::InternalInconsistency("corrected polynomial does not vanish at its root".into()));
        }
        Ok(ApproxStage {
            profile,
            certificate,
            float_error: proposal.float_error,
            root_hat,
            correction,
            corrected,
            eps_total,
            cofactor,
        })
    }

    pub fn build(&mut self, points: &[BigRational], eta: &BigRational) -> Result<FoolingWitness> {
        check_eta(eta)?;
        check_points(points)?;
        if points.is_empty() {
            return Ok(FoolingWitness::constant(eta.clone()));
        }
        let delta = compute_delta(eta, points.len())?;
        let stage = self.stage(&delta)?;
        witness_from_stage(&stage, points, eta, &self.config)
    }
}

fn check_points(points: &[BigRational]) -> Result<()> {
    for (i, y) in points.iter().enumerate() {
        if y.is_negative() || *y > BigRational::one() {
            return Err(Error::InvalidParameter(format!("point {i} = {y} is outside [0, 1]")));
        }
    }
    Ok(())
}

/// Builds the witness for `points` from an already certified stage.
/// The stage must belong to `delta = eta / (7 n)` with `n = points.len() >= 1`.
pub fn witness_from_stage(
    stage: &Arc<ApproxStage>,
    points: &[BigRational],
    eta: &BigRational,
    config: &WitnessConfig,
) -> Result<FoolingWitness> {
    check_eta(eta)?;
    check_points(points)?;
    let n = points.len();
    let delta = compute_delta(eta, n)?;
    if stage.certificate.delta != delta {
        return Err(Error::InvalidParameter(format!(
            "stage belongs to delta {}, points need {delta}",
            stage.certificate.delta
        )));
    }
    let bits = config.round_bits;

    let mut cache: HashMap<&BigRational, (Poly, BigRational)> = HashMap::new();
    let mut factors = Vec::with_capacity(n);
    let mut rhos = Vec::with_capacity(n);
    for y in points {
        let (factor, rho) = cache
            .entry(y)
            .or_insert_with(|| {
                let q = stage.cofactor.taylor_shift(&-y.clone());
                let q_hat = q.dyadic_round(bits);
                let lin = Poly::linear(&-y.clone(), &BigRational::one());
                let rho = (&lin * &(&q - &q_hat)).l1_norm();
                (&lin * &q_hat, rho)
            })
            .clone();
        factors.push(factor);
        rhos.push(rho);
    }
    let f = Poly::product(&factors).square();

    let one = BigRational::one();
    let base = &one - &delta + &stage.eps_total;
    let hi = rhos.iter().fold(one.clone(), |acc, rho| {
        let b = &base + rho;
        acc * &b * &b
    });
    if hi > one {
        return Err(Error::ConditionViolation(format!("sup bound {hi} exceeds 1")));
    }
    let lo = sample_abs_max(&f);
    let integral = f.definite_integral_01();
    if integral <= &one - eta {
        return Err(Error::ConditionViolation(format!(
            "integral {integral} is not above 1 - eta"
        )));
    }
    for y in points.iter().collect::<BTreeSet<_>>() {
        if !f.eval(y).is_zero() {
            return Err(Error::ConditionViolation(format!("f({y}) is not zero")));
        }
    }
    let k = derivative_bound_with_sup(&f, &hi, config.tier_threshold);
    Ok(FoolingWitness {
        eta: eta.clone(),
        delta,
        points: points.to_vec(),
        stage: Some(stage.clone()),
        factors,
        round_bits: bits,
        f,
        integral,
        sup: Enclosure { lo, hi },
        k,
    })
}

/// Largest `|f|` over the exact samples `0, 1/2, 1`.
fn sample_abs_max(f: &Poly) -> BigRational {
    [int(0), rat(1, 2), int(1)]
        .iter()
        .map(|x| f.eval(x).abs())
        .max()
        .expect("three samples")
}

/// Builds one witness with the default configuration.
pub fn build_witness(points: &[BigRational], eta: &BigRational) -> Result<FoolingWitness> {
    FoolingBuilder::new(WitnessConfig::default()).build(points, eta)
}

/// One verified statement with its evidence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub evidence: String,
}

impl Check {
    fn new(name: &str, passed: bool, evidence: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            evidence: evidence.into(),
        }
    }
}

/// Outcome of re-checking a witness: the four conditions plus structural checks.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub conditions: Vec<Check>,
    pub structure: Vec<Check>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().chain(&self.structure).all(|c| c.passed)
    }

    pub fn condition(&self, name: &str) -> Option<&Check> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.conditions.iter().chain(&self.structure).filter(|c| !c.passed).collect()
    }
}

impl std::fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in self.conditions.iter().chain(&self.structure) {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.evidence)?;
        }
        Ok(())
    }
}

pub const CONDITION_BOUNDED: &str = "bounded";
pub const CONDITION_DERIVATIVES: &str = "derivatives";
pub const CONDITION_INTEGRAL: &str = "integral";
pub const CONDITION_VANISHING: &str = "vanishing";

/// Independent re-checker. Caches approximation certificates, which many witnesses share.
#[derive(Debug)]
pub struct Verifier {
    depth_limit: u32,
    tier_threshold: usize,
    /// Up to this degree `|f|` is bounded directly instead of through its factors.
    pub direct_threshold: usize,
    certified: HashMap<(BigRational, BigRational, Poly), std::result::Result<(), String>>,
}

impl Default for Verifier {
    fn default() -> Self {
        let cfg = WitnessConfig::default();
        Verifier {
            depth_limit: cfg.depth_limit,
            tier_threshold: cfg.tier_threshold,
            direct_threshold: 600,
            certified: HashMap::new(),
        }
    }
}

impl Verifier {
    pub fn verify(&mut self, w: &FoolingWitness) -> WitnessReport {
        let mut structure = Vec::new();
        let one = BigRational::one();
        let n = w.points.len();

        let eta_ok = w.eta.is_positive() && w.eta < one;
        structure.push(Check::new("eta", eta_ok, format!("eta = {}", w.eta)));
        let in_range = w.points.iter().all(|y| !y.is_negative() && *y <= one);
        structure.push(Check::new("points", in_range, format!("{n} points in [0, 1]")));
        if n > 0 && eta_ok {
            let expected = &w.eta / int(7 * n as i64);
            structure.push(Check::new(
                "delta",
                expected == w.delta,
                format!("delta = {}, eta / 7n = {expected}", w.delta),
            ));
        }

        let bounded = self.check_bounded(w, &mut structure);

        let derivatives = if bounded.passed {
            let kv = derivative_bound_with_sup(&w.f, &w.sup.hi, self.tier_threshold);
            let covers = w.k.value >= kv.value && w.k.value >= w.sup.hi;
            let log_ok = w.k.log == LogMagnitude::from_rational(&w.k.value);
            Check::new(
                CONDITION_DERIVATIVES,
                covers && log_ok,
                format!(
                    "stored K ~ 10^{}, recomputed tier-{} bound ~ 10^{}; orders above {} vanish",
                    w.k.log10_string(),
                    kv.tier,
                    kv.log10_string(),
                    w.f.degree()
                ),
            )
        } else {
            Check::new(CONDITION_DERIVATIVES, false, "no certified sup to scale from")
        };

        let integral = w.f.definite_integral_01();
        let integral_check = Check::new(
            CONDITION_INTEGRAL,
            integral == w.integral && integral > &one - &w.eta,
            if integral == w.integral {
                format!("exact integral ~ {:.12} > 1 - eta", crate::numeric::to_f64(&integral))
            } else {
                format!("recomputed integral ~ {:.12} differs from stored", crate::numeric::to_f64(&integral))
            },
        );

        let nonzero: Vec<String> = w
            .points
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .filter(|y| !w.f.eval(y).is_zero())
            .map(|y| y.to_string())
            .collect();
        let vanishing = Check::new(
            CONDITION_VANISHING,
            nonzero.is_empty(),
            if nonzero.is_empty() {
                format!("f(y) = 0 exactly at all {n} points")
            } else {
                format!("f nonzero at {}", nonzero.join(", "))
            },
        );

        WitnessReport {
            conditions: vec![bounded, derivatives, integral_check, vanishing],
            structure,
        }
    }

    fn check_bounded(&mut self, w: &FoolingWitness, structure: &mut Vec<Check>) -> Check {
        let one = BigRational::one();
        let fail = |why: String| Check::new(CONDITION_BOUNDED, false, why);
        if w.sup.hi > one {
            return fail(format!("stored sup bound {} exceeds 1", w.sup.hi));
        }
        let lo_ok = w.sup.lo <= w.sup.hi && sample_abs_max(&w.f) >= w.sup.lo;
        structure.push(Check::new("sup-lower", lo_ok, "stored lower bound attained at 0, 1/2 or 1"));
        if w.points.is_empty() {
            let ok = w.f == Poly::one() && w.sup.hi == one;
            return Check::new(CONDITION_BOUNDED, ok, "f = 1");
        }
        if w.f.degree() <= self.direct_threshold {
            let hi = w.sup.hi.clone();
            return match certify_bounds(&w.f, &BigRational::zero(), &one, &-hi.clone(), &hi, self.depth_limit) {
                Ok(enc) => Check::new(
                    CONDITION_BOUNDED,
                    true,
                    format!("Bernstein hull of f on [0,1] within [-s, s], s ~ {:.9}; hull max ~ {:.9}", crate::numeric::to_f64(&hi), crate::numeric::to_f64(&enc.hi)),
                ),
                Err(e) => fail(format!("direct bound failed: {e}")),
            };
        }
        self.check_bounded_by_factors(w, structure)
    }

    fn check_bounded_by_factors(&mut self, w: &FoolingWitness, structure: &mut Vec<Check>) -> Check {
        let one = BigRational::one();
        let fail = |why: String| Check::new(CONDITION_BOUNDED, false, why);
        let Some(stage) = &w.stage else {
            return fail("no approximation evidence attached".into());
        };
        if w.factors.len() != w.points.len() {
            return fail("factor count differs from point count".into());
        }
        let delta = &w.delta;
        if stage.eps_total >= *delta || !stage.eps_total.is_positive() {
            return fail(format!("approximation bound {} is not in (0, delta)", stage.eps_total));
        }
        let key = (delta.clone(), stage.eps_total.clone(), stage.corrected.clone());
        let depth = self.depth_limit;
        let cert = self
            .certified
            .entry(key)
            .or_insert_with(|| {
                let profile = build_profile(delta).map_err(|e| e.to_string())?;
                certify_sup_error_with_depth(&stage.corrected, &profile, &stage.eps_total, depth)
                    .map(|_| ())
                    .map_err(|e| e.to_string())
            })
            .clone();
        if let Err(e) = cert {
            return fail(format!("corrected polynomial not within its bound of the profile: {e}"));
        }
        let r = &stage.root_hat;
        let root_ok = *r >= one && *r <= &one + delta && stage.corrected.eval(r).is_zero();
        structure.push(Check::new(
            "root",
            root_ok,
            format!("corrected polynomial vanishes at {r} in [1, 1 + delta]"),
        ));
        if !root_ok {
            return fail("root evidence invalid".into());
        }
        let product_ok = Poly::product(&w.factors).square() == w.f;
        structure.push(Check::new("product", product_ok, "f equals the product of squared factors"));
        if !product_ok {
            return fail("f is not the product of its factors".into());
        }
        let base = &one - delta + &stage.eps_total;
        let mut bound = one.clone();
        let mut shifts: HashMap<&BigRational, Poly> = HashMap::new();
        for (y, factor) in w.points.iter().zip(&w.factors) {
            let shifted = shifts
                .entry(y)
                .or_insert_with(|| stage.corrected.taylor_shift(&(r - y)));
            let rho = (&*shifted - factor).l1_norm();
            let b = &base + rho;
            bound = bound * &b * &b;
        }
        let ok = bound <= w.sup.hi;
        Check::new(
            CONDITION_BOUNDED,
            ok,
            format!(
                "|f| <= prod (1 - delta + eps + rho_i)^2 ~ {:.9} <= stored {:.9} <= 1",
                crate::numeric::to_f64(&bound),
                crate::numeric::to_f64(&w.sup.hi)
            ),
        )
    }
}

/// Re-checks the four conditions of a witness with a fresh verifier.
pub fn verify_witness(w: &FoolingWitness) -> WitnessReport {
    Verifier::default().verify(w)
}

fn rational_field(v: &Value, name: &str) -> Result<BigRational> {
    let s = v[name]
        .as_str()
        .ok_or_else(|| Error::parse(format!("witness.{name}"), "expected rational string"))?;
    parse_rational(s).map_err(|e| Error::parse(format!("witness.{name}"), e.to_string()))
}

fn rational_list(v: &Value, name: &str) -> Result<Vec<BigRational>> {
    v[name]
        .as_array()
        .ok_or_else(|| Error::parse(format!("witness.{name}"), "expected array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str()
                .ok_or_else(|| Error::parse(format!("witness.{name}[{i}]"), "expected string"))
                .and_then(parse_rational)
        })
        .collect()
}

impl FoolingWitness {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "eta": format_rational(&self.eta),
            "delta": format_rational(&self.delta),
            "points": self.points.iter().map(format_rational).collect::<Vec<_>>(),
            "degree": self.degree(),
            "f": self.f.to_json(),
            "integral": format_rational(&self.integral),
            "sup_lo": format_rational(&self.sup.lo),
            "sup_hi": format_rational(&self.sup.hi),
            "K": format_rational(&self.k.value),
            "K_log10": json_number(&self.k.log10_string()),
            "K_tier": self.k.tier,
            "round_bits": self.round_bits,
            "factors": self.factors.iter().map(Poly::to_json).collect::<Vec<_>>(),
            "checks": {
                CONDITION_BOUNDED: self.sup.hi <= BigRational::one(),
                CONDITION_DERIVATIVES: self.k.value >= self.sup.hi,
                CONDITION_INTEGRAL: self.integral > BigRational::one() - &self.eta,
                CONDITION_VANISHING: true,
            },
        });
        if let Some(stage) = &self.stage {
            v["approx"] = stage.certificate.to_json();
            v["approx_degree"] = json!(stage.degree());
            v["root_hat"] = json!(format_rational(&stage.root_hat));
            v["correction"] = json!(format_rational(&stage.correction));
            v["corrected"] = stage.corrected.to_json();
            v["eps_total"] = json!(format_rational(&stage.eps_total));
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let eta = rational_field(v, "eta")?;
        let points = rational_list(v, "points")?;
        let f = Poly::from_json(&v["f"])?;
        let k_value = rational_field(v, "K")?;
        let tier = v["K_tier"].as_u64().unwrap_or(1) as u8;
        let factors = match v.get("factors").and_then(Value::as_array) {
            Some(arr) => arr.iter().map(Poly::from_json).collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let stage = match v.get("approx") {
            Some(a) if !a.is_null() => {
                let certificate = ApproxCertificate::from_json(a)?;
                let delta = certificate.delta.clone();
                let corrected = Poly::from_json(&v["corrected"])?;
                let root_hat = rational_field(v, "root_hat")?;
                Some(Arc::new(ApproxStage {
                    profile: build_profile(&delta)?,
                    float_error: f64::NAN,
                    correction: rational_field(v, "correction")?,
                    eps_total: rational_field(v, "eps_total")?,
                    cofactor: corrected.taylor_shift(&root_hat).divide_linear(&BigRational::zero()).0,
                    root_hat,
                    corrected,
                    certificate,
                }))
            }
            _ => None,
        };
        Ok(FoolingWitness {
            eta,
            delta: rational_field(v, "delta")?,
            points,
            stage,
            factors,
            round_bits: v["round_bits"].as_u64().unwrap_or(0) as u32,
            f,
            integral: rational_field(v, "integral")?,
            sup: Enclosure::new(rational_field(v, "sup_lo")?, rational_field(v, "sup_hi")?)?,
            k: DerivativeBound::new(k_value, tier),
        })
    }
}

/// JSON number from decimal text, keeping the exact digits.
pub(crate) fn json_number(s: &str) -> Value {
    s.parse::<serde_json::Number>()
        .map(Value::Number)
        .unwrap_or_else(|_| Value::String(s.to_string()))
}

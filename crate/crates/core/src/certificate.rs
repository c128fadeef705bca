//! Multivariate error certificates for quadrature rules.
//!
//! A rule with sample points `x_j` in `[0,1]^d` is fooled by the separable
//! function `f(t) = (1/d) sum_i f_i(t_i)`, where `f_i` is a fooling witness for
//! the `i`-th coordinates of the sample points. Every `f_i` vanishes at those
//! coordinates, so the rule returns 0 whatever its weights, while the integral
//! of `f` is the mean of the witness integrals. Mixed partials of `f` vanish,
//! and pure partials along axis `i` are `f_i^(k) / d`, so `f / s` with
//! `s = max(1, K / d)` lies in the unit ball.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fooling::{
    compute_delta, json_number, witness_from_stage, FoolingBuilder, FoolingWitness, WitnessConfig, Verifier,
};
use crate::numeric::{format_rational, format_scientific, parse_rational, LogMagnitude};
use crate::poly::Poly;

pub const SCHEMA: &str = "cubature-adversary/cert-v1";

/// A linear rule `A(f) = sum_j a_j f(x_j)` on `[0,1]^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadratureRule {
    pub d: usize,
    pub points: Vec<Vec<BigRational>>,
    pub weights: Vec<BigRational>,
    pub label: String,
}

impl QuadratureRule {
    /// Checks the shape and that every coordinate lies in `[0, 1]`.
    pub fn new(d: usize, points: Vec<Vec<BigRational>>, weights: Vec<BigRational>, label: impl Into<String>) -> Result<Self> {
        let rule = QuadratureRule {
            d,
            points,
            weights,
            label: label.into(),
        };
        rule.validate()?;
        Ok(rule)
    }

    /// Rule with equal weights `1/n`.
    pub fn with_unit_weights(d: usize, points: Vec<Vec<BigRational>>, label: impl Into<String>) -> Result<Self> {
        let n = points.len();
        let w = if n == 0 {
            Vec::new()
        } else {
            vec![BigRational::new(BigInt::one(), BigInt::from(n)); n]
        };
        QuadratureRule::new(d, points, w, label)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if self.weights.len() != self.points.len() {
            return Err(Error::InvalidSpec(format!(
                "{} points but {} weights",
                self.points.len(),
                self.weights.len()
            )));
        }
        let one = BigRational::one();
        for (j, row) in self.points.iter().enumerate() {
            if row.len() != self.d {
                return Err(Error::InvalidSpec(format!(
                    "row {} has {} coordinates, expected {}",
                    j + 1,
                    row.len(),
                    self.d
                )));
            }
            for (i, x) in row.iter().enumerate() {
                if x.is_negative() || *x > one {
                    return Err(Error::OutOfRange {
                        row: j + 1,
                        column: i + 1,
                        value: format_rational(x),
                    });
                }
            }
        }
        Ok(())
    }

    /// Sorted coordinates of all sample points along axis `i`.
    pub fn column(&self, i: usize) -> Vec<BigRational> {
        let mut c: Vec<BigRational> = self.points.iter().map(|row| row[i].clone()).collect();
        c.sort();
        c
    }

    /// Distinct axis columns in first-appearance order, and the column index of each axis.
    pub fn profiles(&self) -> (Vec<Vec<BigRational>>, Vec<usize>) {
        let mut seen: HashMap<Vec<BigRational>, usize> = HashMap::new();
        let mut profiles = Vec::new();
        let mut axis = Vec::with_capacity(self.d);
        for i in 0..self.d {
            let col = self.column(i);
            let idx = *seen.entry(col.clone()).or_insert_with(|| {
                profiles.push(col);
                profiles.len() - 1
            });
            axis.push(idx);
        }
        (profiles, axis)
    }

    /// SHA-256 over the canonical text of the sample points. Weights are left out.
    pub fn points_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("n={};d={}\n", self.n(), self.d));
        for row in &self.points {
            let line: Vec<String> = row.iter().map(format_rational).collect();
            h.update(line.join(","));
            h.update("\n");
        }
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "label": self.label,
            "points": self.points.iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "weights": self.weights.iter().map(format_rational).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let d = v["d"]
            .as_u64()
            .ok_or_else(|| Error::parse("rule.d", "expected positive integer"))? as usize;
        let label = v["label"].as_str().unwrap_or("").to_string();
        let rows = v["points"]
            .as_array()
            .ok_or_else(|| Error::parse("rule.points", "expected array"))?;
        let mut points = Vec::with_capacity(rows.len());
        for (j, row) in rows.iter().enumerate() {
            let cells = row
                .as_array()
                .ok_or_else(|| Error::parse(format!("rule.points[{j}]"), "expected array"))?;
            points.push(
                cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| parse_cell(c, &format!("rule.points[{j}][{i}]")))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let weights = match v.get("weights").and_then(Value::as_array) {
            Some(ws) => ws
                .iter()
                .enumerate()
                .map(|(j, w)| parse_cell(w, &format!("rule.weights[{j}]")))
                .collect::<Result<Vec<_>>>()?,
            None if points.is_empty() => Vec::new(),
            None => vec![BigRational::new(BigInt::one(), BigInt::from(points.len())); points.len()],
        };
        QuadratureRule::new(d, points, weights, label)
    }
}

fn parse_cell(v: &Value, loc: &str) -> Result<BigRational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(Error::parse(loc, "expected rational")),
    };
    parse_rational(&text).map_err(|e| Error::parse(loc, e.to_string()))
}

/// `f(t) = scale * sum_i f_i(t_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparableFunction {
    pub components: Vec<Poly>,
    pub scale: BigRational,
    pub integral_mean: BigRational,
}

impl SeparableFunction {
    pub fn d(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, t: &[BigRational]) -> BigRational {
        assert_eq!(t.len(), self.d(), "point dimension");
        let sum: BigRational = self.components.iter().zip(t).map(|(p, x)| p.eval(x)).sum();
        sum * &self.scale
    }

    /// Exact value of `A(f)`.
    pub fn apply_rule(&self, rule: &QuadratureRule) -> BigRational {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(x, a)| a * self.eval(x))
            .sum()
    }

    /// A mixed partial of a separable function is identically zero; only
    /// derivatives along a single axis survive, and those are `scale * f_i^(k)`.
    pub fn partial(&self, multi_index: &[usize]) -> Option<(usize, Poly)> {
        let nonzero: Vec<usize> = (0..multi_index.len()).filter(|&i| multi_index[i] > 0).collect();
        match nonzero.as_slice() {
            [] => None,
            [i] => Some((*i, self.components[*i].nth_derivative(multi_index[*i]).scale(&self.scale))),
            _ => Some((0, Poly::zero())),
        }
    }
}

/// Separable function from exactly `d` witnesses, one per axis.
pub fn assemble(witnesses: &[FoolingWitness], d: usize) -> Result<SeparableFunction> {
    if witnesses.len() != d || d == 0 {
        return Err(Error::InvalidAssembly(format!(
            "{} witnesses for dimension {d}",
            witnesses.len()
        )));
    }
    let scale = BigRational::new(BigInt::one(), BigInt::from(d));
    let total: BigRational = witnesses.iter().map(|w| &w.integral).sum();
    Ok(SeparableFunction {
        components: witnesses.iter().map(|w| w.f.clone()).collect(),
        integral_mean: total * &scale,
        scale,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// A bound for the given rule in its own dimension.
    Concrete,
    /// A bound for every dimension `d >= d_min` whose axes use the rule's coordinate profiles.
    Family,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Concrete => "concrete",
            Mode::Family => "family",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concrete" => Ok(Mode::Concrete),
            "family" => Ok(Mode::Family),
            other => Err(Error::InvalidParameter(format!("unknown mode {other}"))),
        }
    }
}

/// Whether the fooling function needed rescaling to enter the unit ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `d >= K`: no scaling, the bound is the mean integral.
    Plateau,
    /// `d < K`: divided by `K / d`.
    Scaled,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Plateau => "plateau",
            Regime::Scaled => "scaled",
        }
    }
}

/// Evidence that `err(rule) >= bound`.
#[derive(Clone, Debug)]
pub struct ErrorCertificate {
    pub mode: Mode,
    /// The full rule in concrete mode.
    pub rule: Option<QuadratureRule>,
    pub rule_hash: String,
    /// Coordinate multisets, one per witness.
    pub profiles: Vec<Vec<BigRational>>,
    pub eta: BigRational,
    pub d: Option<usize>,
    pub d_min: Option<BigInt>,
    pub witnesses: Vec<FoolingWitness>,
    /// Witness index per axis (concrete mode).
    pub axis_witness: Vec<usize>,
    pub k_max: BigRational,
    pub k_max_log: LogMagnitude,
    pub scale: BigRational,
    pub integral_mean: BigRational,
    pub bound: BigRational,
    pub regime: Regime,
    pub a_f_zero: bool,
    pub membership: bool,
}

impl ErrorCertificate {
    pub fn k_max_log10(&self) -> String {
        self.k_max_log.log10_string(6)
    }

    /// Family-mode bound specialised to dimension `d`: `integral * min(1, d / K)`.
    pub fn bound_at(&self, d: usize) -> BigRational {
        let ratio = BigRational::from_integer(BigInt::from(d)) / &self.k_max;
        if ratio >= BigRational::one() {
            self.integral_mean.clone()
        } else {
            &self.integral_mean * ratio
        }
    }

    pub fn to_json(&self) -> Value {
        let rule = match (&self.rule, self.mode) {
            (Some(r), Mode::Concrete) => r.to_json(),
            _ => json!({
                "hash": self.rule_hash,
                "profiles": self.profiles.iter().map(|p| p.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
        };
        json!({
            "schema": SCHEMA,
            "mode": self.mode.as_str(),
            "rule": rule,
            "eta": format_rational(&self.eta),
            "d": self.d,
            "d_min": self.d_min.as_ref().map(|k| json_number(&k.to_string())),
            "K_max_log10": json_number(&self.k_max_log10()),
            "K_max": format_rational(&self.k_max),
            "scale": format_rational(&self.scale),
            "integral_mean": format_rational(&self.integral_mean),
            "bound": format_rational(&self.bound),
            "regime": self.regime.as_str(),
            "axis_witness": self.axis_witness,
            "witnesses": self.witnesses.iter().map(FoolingWitness::to_json).collect::<Vec<_>>(),
            "checks": {
                "A_f_zero": self.a_f_zero,
                "membership": self.membership,
            },
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let schema = v["schema"].as_str().unwrap_or_default();
        if schema != SCHEMA {
            return Err(Error::parse("schema", format!("expected {SCHEMA}, found {schema:?}")));
        }
        let mode: Mode = v["mode"]
            .as_str()
            .ok_or_else(|| Error::parse("mode", "expected string"))?
            .parse()?;
        let rational = |name: &str| -> Result<BigRational> {
            v[name]
                .as_str()
                .ok_or_else(|| Error::parse(name, "expected rational string"))
                .and_then(parse_rational)
        };
        let witnesses = v["witnesses"]
            .as_array()
            .ok_or_else(|| Error::parse("witnesses", "expected array"))?
            .iter()
            .map(FoolingWitness::from_json)
            .collect::<Result<Vec<_>>>()?;
        let (rule, rule_hash, profiles) = match mode {
            Mode::Concrete => {
                let r = QuadratureRule::from_json(&v["rule"])?;
                let hash = r.points_hash();
                let (profiles, _) = r.profiles();
                (Some(r), hash, profiles)
            }
            Mode::Family => {
                let hash = v["rule"]["hash"]
                    .as_str()
                    .ok_or_else(|| Error::parse("rule.hash", "expected hex string"))?
                    .to_string();
                let profiles = v["rule"]["profiles"]
                    .as_array()
                    .ok_or_else(|| Error::parse("rule.profiles", "expected array"))?
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        p.as_array()
                            .ok_or_else(|| Error::parse(format!("rule.profiles[{k}]"), "expected array"))?
                            .iter()
                            .enumerate()
                            .map(|(j, c)| parse_cell(c, &format!("rule.profiles[{k}][{j}]")))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                (None, hash, profiles)
            }
        };
        let d_min = match &v["d_min"] {
            Value::Null => None,
            Value::Number(n) => Some(
                n.to_string()
                    .parse::<BigInt>()
                    .map_err(|e| Error::parse("d_min", e.to_string()))?,
            ),
            _ => return Err(Error::parse("d_min", "expected integer or null")),
        };
        let regime = match v["regime"].as_str() {
            Some("plateau") => Regime::Plateau,
            Some("scaled") => Regime::Scaled,
            other => return Err(Error::parse("regime", format!("unknown regime {other:?}"))),
        };
        let axis_witness = v["axis_witness"]
            .as_array()
            .map(|a| a.iter().map(|x| x.as_u64().map(|u| u as usize)).collect::<Option<Vec<_>>>())
            .unwrap_or(Some(Vec::new()))
            .ok_or_else(|| Error::parse("axis_witness", "expected indices"))?;
        let k_max = rational("K_max")?;
        Ok(ErrorCertificate {
            mode,
            rule,
            rule_hash,
            profiles,
            eta: rational("eta")?,
            d: v["d"].as_u64().map(|d| d as usize),
            d_min,
            witnesses,
            axis_witness,
            k_max_log: LogMagnitude::from_rational(&k_max),
            k_max,
            scale: rational("scale")?,
            integral_mean: rational("integral_mean")?,
            bound: rational("bound")?,
            regime,
            a_f_zero: v["checks"]["A_f_zero"].as_bool().unwrap_or(false),
            membership: v["checks"]["membership"].as_bool().unwrap_or(false),
        })
    }
}

/// Builds certificates, sharing witness stages across calls.
#[derive(Debug)]
pub struct Certifier {
    builder: FoolingBuilder,
    /// Parallel witness builds per certificate.
    pub workers: usize,
}

impl Default for Certifier {
    fn default() -> Self {
        Certifier::new(WitnessConfig::default())
    }
}

impl Certifier {
    pub fn new(config: WitnessConfig) -> Self {
        Certifier {
            builder: FoolingBuilder::new(config),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    pub fn builder(&mut self) -> &mut FoolingBuilder {
        &mut self.builder
    }

    fn witnesses(&mut self, profiles: &[Vec<BigRational>], n: usize, eta: &BigRational) -> Result<Vec<FoolingWitness>> {
        if n == 0 {
            return profiles.iter().map(|p| self.builder.build(p, eta)).collect();
        }
        let stage = self.builder.stage(&compute_delta(eta, n)?)?;
        let config = self.builder.config().clone();
        let workers = self.workers.max(1).min(profiles.len().max(1));
        if workers == 1 {
            return profiles
                .iter()
                .map(|p| witness_from_stage(&stage, p, eta, &config))
                .collect();
        }
        let mut slots: Vec<Option<Result<FoolingWitness>>> = (0..profiles.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let chunk = profiles.len().div_ceil(workers);
            for (ps, out) in profiles.chunks(chunk).zip(slots.chunks_mut(chunk)) {
                let (stage, config) = (&stage, &config);
                scope.spawn(move || {
                    for (p, slot) in ps.iter().zip(out.iter_mut()) {
                        *slot = Some(witness_from_stage(stage, p, eta, config));
                    }
                });
            }
        });
        slots.into_iter().map(|s| s.expect("every slot filled")).collect()
    }

    pub fn certify(&mut self, rule: &QuadratureRule, eta: &BigRational, mode: Mode) -> Result<ErrorCertificate> {
        rule.validate()?;
        if !eta.is_positive() || *eta >= BigRational::one() {
            return Err(Error::InvalidParameter(format!("eta {eta} must lie in (0, 1)")));
        }
        let (profiles, axis) = rule.profiles();
        let witnesses = self.witnesses(&profiles, rule.n(), eta)?;

        let zero = apply_by_axis(rule, &witnesses, &axis);
        if !zero.is_zero() {
            return Err(Error::InternalInconsistency(format!("A(f) = {zero}, expected 0")));
        }
        let k_max = witnesses
            .iter()
            .map(|w| w.k.value.clone())
            .max()
            .unwrap_or_else(BigRational::one);
        let k_max_log = LogMagnitude::from_rational(&k_max);
        let one = BigRational::one();
        let sup_ok = witnesses.iter().all(|w| w.sup.hi <= one);

        let cert = match mode {
            Mode::Concrete => {
                let d = BigRational::from_integer(BigInt::from(rule.d));
                let ratio = &k_max / &d;
                let (scale, regime) = if ratio > one {
                    (ratio, Regime::Scaled)
                } else {
                    (one.clone(), Regime::Plateau)
                };
                let integral_mean = axis.iter().map(|&i| &witnesses[i].integral).sum::<BigRational>() / &d;
                let membership = sup_ok && &k_max / (&d * &scale) <= one;
                ErrorCertificate {
                    mode,
                    rule: Some(rule.clone()),
                    rule_hash: rule.points_hash(),
                    profiles,
                    eta: eta.clone(),
                    d: Some(rule.d),
                    d_min: None,
                    bound: &integral_mean / &scale,
                    integral_mean,
                    witnesses,
                    axis_witness: axis,
                    k_max,
                    k_max_log,
                    scale,
                    regime,
                    a_f_zero: true,
                    membership,
                }
            }
            Mode::Family => {
                let d_min = ceil_int(&k_max);
                let integral_min = witnesses
                    .iter()
                    .map(|w| w.integral.clone())
                    .min()
                    .expect("at least one profile");
                ErrorCertificate {
                    mode,
                    rule: None,
                    rule_hash: rule.points_hash(),
                    profiles,
                    eta: eta.clone(),
                    d: None,
                    d_min: Some(d_min),
                    bound: integral_min.clone(),
                    integral_mean: integral_min,
                    witnesses,
                    axis_witness: Vec::new(),
                    k_max,
                    k_max_log,
                    scale: one,
                    regime: Regime::Plateau,
                    a_f_zero: true,
                    membership: sup_ok,
                }
            }
        };
        Ok(cert)
    }

    /// Concrete certificates over `eta_grid`; returns the best, smallest `eta` on ties.
    pub fn best_bound(&mut self, rule: &QuadratureRule, eta_grid: &[BigRational]) -> Result<(BigRational, ErrorCertificate)> {
        if eta_grid.is_empty() {
            return Err(Error::InvalidParameter("empty eta grid".into()));
        }
        let mut grid = eta_grid.to_vec();
        grid.sort();
        grid.dedup();
        let mut best: Option<ErrorCertificate> = None;
        for eta in &grid {
            let cert = self.certify(rule, eta, Mode::Concrete)?;
            if best.as_ref().is_none_or(|b| cert.bound > b.bound) {
                best = Some(cert);
            }
        }
        let best = best.expect("nonempty grid");
        Ok((best.eta.clone(), best))
    }
}

fn ceil_int(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

/// `A(f)` with `f = (1/d) sum_i f_{w(i)}(t_i)`, caching evaluations per witness and value.
fn apply_by_axis(rule: &QuadratureRule, witnesses: &[FoolingWitness], axis: &[usize]) -> BigRational {
    let mut cache: HashMap<(usize, &BigRational), BigRational> = HashMap::new();
    let mut total = BigRational::zero();
    for (row, a) in rule.points.iter().zip(&rule.weights) {
        let mut s = BigRational::zero();
        for (x, &w) in row.iter().zip(axis) {
            s += cache
                .entry((w, x))
                .or_insert_with(|| witnesses[w].f.eval(x))
                .clone();
        }
        total += a * s;
    }
    total / BigRational::from_integer(BigInt::from(rule.d))
}

pub fn certify_rule(rule: &QuadratureRule, eta: &BigRational, mode: Mode) -> Result<ErrorCertificate> {
    Certifier::default().certify(rule, eta, mode)
}

pub fn best_bound(rule: &QuadratureRule, eta_grid: &[BigRational]) -> Result<(BigRational, ErrorCertificate)> {
    Certifier::default().best_bound(rule, eta_grid)
}

/// Outcome of an independent re-check of a certificate.
#[derive(Clone, Debug)]
pub struct ReplayReport {
    pub checks: Vec<(String, bool, String)>,
    pub notes: Vec<String>,
}

impl ReplayReport {
    pub fn accepted(&self) -> bool {
        self.checks.iter().all(|(_, ok, _)| *ok)
    }

    pub fn rejections(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, ok, _)| !ok)
            .map(|(name, _, _)| name.as_str())
            .collect()
    }

    fn push(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push((name.into(), ok, detail.into()));
    }
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, ok, detail) in &self.checks {
            writeln!(f, "{} {name}: {detail}", if *ok { "PASS" } else { "FAIL" })?;
        }
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        write!(f, "{}", if self.accepted() { "ACCEPT" } else { "REJECT" })
    }
}

/// Re-derives every claim of `cert` from its raw data.
pub fn replay(cert: &ErrorCertificate) -> ReplayReport {
    replay_with(cert, &mut Verifier::default())
}

pub fn replay_with(cert: &ErrorCertificate, verifier: &mut Verifier) -> ReplayReport {
    let mut report = ReplayReport {
        checks: Vec::new(),
        notes: Vec::new(),
    };
    let one = BigRational::one();
    let eta_ok = cert.eta.is_positive() && cert.eta < one;
    report.push("eta", eta_ok, format!("eta = {}", cert.eta));
    if cert.witnesses.is_empty() {
        report.push("witnesses", false, "certificate carries no witnesses");
        return report;
    }

    let mut all_witnesses = true;
    for (k, w) in cert.witnesses.iter().enumerate() {
        let r = verifier.verify(w);
        let same_eta = w.eta == cert.eta;
        if !r.passed() || !same_eta {
            all_witnesses = false;
            let failed: Vec<String> = r.failures().iter().map(|c| format!("{} ({})", c.name, c.evidence)).collect();
            report.push(
                format!("witness {k}"),
                false,
                if same_eta { failed.join("; ") } else { format!("eta {} differs", w.eta) },
            );
        }
    }
    if all_witnesses {
        report.push("witnesses", true, format!("{} witnesses pass all four conditions", cert.witnesses.len()));
    }

    // profiles must be exactly the witness point multisets
    let multisets: Vec<Vec<BigRational>> = cert.witnesses.iter().map(FoolingWitness::point_multiset).collect();
    let profiles_ok = multisets == cert.profiles;
    report.push("profiles", profiles_ok, "witness point sets match the coordinate profiles");

    let k_max = cert.witnesses.iter().map(|w| w.k.value.clone()).max().expect("nonempty");
    let k_ok = k_max == cert.k_max && LogMagnitude::from_rational(&k_max) == cert.k_max_log;
    report.push("K_max", k_ok, format!("max witness K ~ 10^{}", LogMagnitude::from_rational(&k_max).log10_string(6)));
    let sup_ok = cert.witnesses.iter().all(|w| w.sup.hi <= one);

    match cert.mode {
        Mode::Concrete => replay_concrete(cert, &multisets, &k_max, sup_ok, &mut report),
        Mode::Family => replay_family(cert, &k_max, sup_ok, &mut report),
    }
    report
}

fn replay_concrete(
    cert: &ErrorCertificate,
    multisets: &[Vec<BigRational>],
    k_max: &BigRational,
    sup_ok: bool,
    report: &mut ReplayReport,
) {
    let one = BigRational::one();
    let Some(rule) = &cert.rule else {
        report.push("rule", false, "concrete certificate without a rule");
        return;
    };
    if let Err(e) = rule.validate() {
        report.push("rule", false, e.to_string());
        return;
    }
    if cert.d != Some(rule.d) || cert.axis_witness.len() != rule.d || cert.axis_witness.iter().any(|&w| w >= cert.witnesses.len()) {
        report.push("axes", false, "axis-to-witness map does not cover the rule's dimension");
        return;
    }
    let mut axes_ok = true;
    for (i, &w) in cert.axis_witness.iter().enumerate() {
        if rule.column(i) != multisets[w] {
            axes_ok = false;
            report.push(format!("axis {i}"), false, format!("coordinates differ from witness {w} points"));
        }
    }
    if axes_ok {
        report.push("axes", true, format!("all {} axes use a witness built for their coordinates", rule.d));
    }

    // evaluate the separable function at every sample point, never trusting the axis check
    let mut nonzero = None;
    let mut cache: HashMap<(usize, &BigRational), BigRational> = HashMap::new();
    'rows: for (j, row) in rule.points.iter().enumerate() {
        for (i, (x, &w)) in row.iter().zip(&cert.axis_witness).enumerate() {
            let v = cache.entry((w, x)).or_insert_with(|| cert.witnesses[w].f.eval(x));
            if !v.is_zero() {
                nonzero = Some((j, i, v.clone()));
                break 'rows;
            }
        }
    }
    let a_f = apply_by_axis(rule, &cert.witnesses, &cert.axis_witness);
    let zero_ok = nonzero.is_none() && a_f.is_zero() && cert.a_f_zero;
    report.push(
        "A_f_zero",
        zero_ok,
        match &nonzero {
            None => format!("f vanishes at all {} sample points, so A(f) = 0 for any weights", rule.n()),
            Some((j, i, v)) => format!("f_{i} at row {} is {}", j + 1, format_scientific(v, 7)),
        },
    );
    if zero_ok {
        report.notes.push("weights are immaterial: every sample value of f is zero".into());
    }

    let d = BigRational::from_integer(BigInt::from(rule.d));
    let ratio = k_max / &d;
    let expect_scale = if ratio > one { ratio } else { one.clone() };
    let regime = if expect_scale > one { Regime::Scaled } else { Regime::Plateau };
    let membership = sup_ok && cert.scale == expect_scale && k_max / (&d * &cert.scale) <= one && cert.membership;
    report.push(
        "membership",
        membership,
        format!("s = max(1, K/d) = {}, K/(d s) <= 1, every |f_i| <= 1", short(&expect_scale)),
    );
    report.push("regime", cert.regime == regime, format!("regime {}", regime.as_str()));

    let mean = cert.axis_witness.iter().map(|&w| &cert.witnesses[w].integral).sum::<BigRational>() / &d;
    let bound_ok = mean == cert.integral_mean && cert.bound == &mean / &cert.scale;
    let min_factor = if &d >= k_max { one.clone() } else { &d / k_max };
    let claim_ok = cert.bound > (&one - &cert.eta) * min_factor;
    report.push(
        "bound",
        bound_ok && claim_ok,
        format!("bound = mean integral / s ~ {} > (1 - eta) min(1, d/K)", format_scientific(&cert.bound, 7)),
    );
}

fn replay_family(cert: &ErrorCertificate, k_max: &BigRational, sup_ok: bool, report: &mut ReplayReport) {
    let one = BigRational::one();
    let n = cert.witnesses[0].n();
    let same_n = cert.witnesses.iter().all(|w| w.n() == n);
    report.push("profiles-n", same_n, format!("every profile has {n} points"));
    let zero_ok = cert.a_f_zero
        && cert
            .witnesses
            .iter()
            .all(|w| w.points.iter().all(|y| w.f.eval(y).is_zero()));
    report.push("A_f_zero", zero_ok, "each profile witness vanishes at all of its points");
    if zero_ok {
        report.notes.push("weights are immaterial: every sample value of f is zero".into());
    }
    let d_min = ceil_int(k_max);
    let dmin_ok = cert.d_min.as_ref() == Some(&d_min) && cert.d.is_none();
    report.push("d_min", dmin_ok, format!("d_min = ceil(K_max), {} digits", d_min.to_string().len()));
    let membership = sup_ok && cert.scale == one && cert.membership && cert.regime == Regime::Plateau;
    report.push("membership", membership, "for d >= d_min every pure partial is at most K/d <= 1");
    let min = cert.witnesses.iter().map(|w| w.integral.clone()).min().expect("nonempty");
    let bound_ok = min == cert.integral_mean && cert.bound == min && cert.bound > &one - &cert.eta;
    report.push(
        "bound",
        bound_ok,
        format!("bound = smallest profile integral ~ {:.12} > 1 - eta", crate::numeric::to_f64(&cert.bound)),
    );
}

fn short(x: &BigRational) -> String {
    let s = format_rational(x);
    if s.len() <= 32 {
        s
    } else {
        format!("~{}", format_scientific(x, 7))
    }
}

/// Groups witnesses by profile for display.
pub fn profile_summary(cert: &ErrorCertificate) -> BTreeMap<usize, String> {
    cert.witnesses
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let pts: Vec<String> = w.point_multiset().iter().map(format_rational).collect();
            (
                k,
                format!(
                    "{{{}}}: degree {}, integral ~ {:.9}, K ~ 10^{}",
                    pts.join(", "),
                    w.degree(),
                    crate::numeric::to_f64(&w.integral),
                    w.k.log10_string()
                ),
            )
        })
        .collect()
}

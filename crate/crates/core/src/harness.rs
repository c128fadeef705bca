//! Point-set generation, point-file ingestion and parameter sweeps.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::certificate::{Certifier, Mode, QuadratureRule};
use crate::error::{Error, Result};
use crate::fooling::WitnessConfig;
use crate::numeric::{format_rational, format_scientific, parse_rational, pow2, rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointKind {
    GridProduct,
    MidpointProduct,
    UniformRandom,
    VanDerCorput,
}

impl PointKind {
    pub const ALL: [PointKind; 4] = [
        PointKind::GridProduct,
        PointKind::MidpointProduct,
        PointKind::UniformRandom,
        PointKind::VanDerCorput,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PointKind::GridProduct => "grid-product",
            PointKind::MidpointProduct => "midpoint-product",
            PointKind::UniformRandom => "uniform-random",
            PointKind::VanDerCorput => "van-der-corput",
        }
    }
}

impl FromStr for PointKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PointKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown point kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSetSpec {
    pub kind: PointKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

/// Base-2 radical inverse of `i`.
pub fn radical_inverse(mut i: u64) -> BigRational {
    let mut num = BigInt::zero();
    let mut bits = 0i64;
    while i > 0 {
        num = (num << 1) + (i & 1);
        i >>= 1;
        bits += 1;
    }
    BigRational::from_integer(num) / pow2(bits)
}

fn exact_root(n: usize, d: usize) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / d as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&m| m.checked_pow(d as u32) == Some(n))
}

fn product_rule(m: usize, d: usize, axis: &[BigRational]) -> Vec<Vec<BigRational>> {
    let n = m.pow(d as u32);
    (0..n)
        .map(|mut idx| {
            let mut row = vec![BigRational::zero(); d];
            for k in (0..d).rev() {
                row[k] = axis[idx % m].clone();
                idx /= m;
            }
            row
        })
        .collect()
}

/// Deterministic rule for `spec`, with weights `1/n`.
pub fn generate_points(spec: &PointSetSpec) -> Result<QuadratureRule> {
    let (n, d) = (spec.n, spec.d);
    if d == 0 {
        return Err(Error::InvalidSpec("dimension must be at least 1".into()));
    }
    let label = format!("{} n={n} d={d}", spec.kind.as_str());
    if n == 0 {
        return QuadratureRule::with_unit_weights(d, Vec::new(), label);
    }
    let points = match spec.kind {
        PointKind::GridProduct | PointKind::MidpointProduct => {
            let m = exact_root(n, d)
                .ok_or_else(|| Error::InvalidSpec(format!("n = {n} is not a {d}-th power")))?;
            let axis: Vec<BigRational> = (0..m)
                .map(|i| match spec.kind {
                    PointKind::GridProduct if m == 1 => rat(1, 2),
                    PointKind::GridProduct => rat(i as i64, (m - 1) as i64),
                    _ => rat(2 * i as i64 + 1, 2 * m as i64),
                })
                .collect();
            product_rule(m, d, &axis)
        }
        PointKind::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let scale = pow2(53);
            (0..n)
                .map(|_| {
                    (0..d)
                        .map(|_| BigRational::from_integer(BigInt::from(rng.next_u64() >> 11)) / &scale)
                        .collect()
                })
                .collect()
        }
        PointKind::VanDerCorput => (0..n)
            .map(|i| (0..d).map(|k| radical_inverse((i * d + k) as u64)).collect())
            .collect(),
    };
    QuadratureRule::with_unit_weights(d, points, label)
}

/// Merges repeated sample points, summing their weights. Order of first appearance is kept.
pub fn dedup_points(rule: &QuadratureRule) -> Result<QuadratureRule> {
    let mut index: std::collections::HashMap<&Vec<BigRational>, usize> = std::collections::HashMap::new();
    let mut points: Vec<Vec<BigRational>> = Vec::new();
    let mut weights: Vec<BigRational> = Vec::new();
    for (row, w) in rule.points.iter().zip(&rule.weights) {
        match index.get(row) {
            Some(&i) => weights[i] += w,
            None => {
                index.insert(row, points.len());
                points.push(row.clone());
                weights.push(w.clone());
            }
        }
    }
    QuadratureRule::new(rule.d, points, weights, format!("{} dedup", rule.label))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?}"))),
        }
    }
}

/// Parses a point file in the given format.
pub fn ingest_points(path: &Path, format: Format) -> Result<QuadratureRule> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        Format::Csv => parse_points_csv(&text),
        Format::Json => QuadratureRule::from_json(&serde_json::from_str(&text)?),
    }
}

/// CSV points: optional `# d=<int>` header, one point per row, optional `| weight` suffix.
pub fn parse_points_csv(text: &str) -> Result<QuadratureRule> {
    let mut d: Option<usize> = None;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut any_weight = false;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("d=") {
                if !points.is_empty() {
                    return Err(Error::parse(format!("line {}", ln + 1), "dimension header after data"));
                }
                d = Some(
                    v.trim()
                        .parse()
                        .map_err(|_| Error::parse(format!("line {}", ln + 1), format!("bad dimension {v:?}")))?,
                );
            }
            continue;
        }
        let (coords, weight) = match line.split_once('|') {
            Some((c, w)) => (c, Some(w.trim())),
            None => (line, None),
        };
        let row = points.len() + 1;
        let cells: Vec<BigRational> = coords
            .split(',')
            .enumerate()
            .map(|(c, cell)| {
                parse_rational(cell.trim()).map_err(|e| {
                    Error::parse(format!("line {} (row {row}) column {}", ln + 1, c + 1), e.to_string())
                })
            })
            .collect::<Result<_>>()?;
        match d {
            None => d = Some(cells.len()),
            Some(dd) if dd != cells.len() => {
                return Err(Error::parse(
                    format!("line {} (row {row})", ln + 1),
                    format!("expected {dd} coordinates, found {}", cells.len()),
                ))
            }
            _ => {}
        }
        points.push(cells);
        match weight {
            Some(w) => {
                any_weight = true;
                weights.push(
                    parse_rational(w)
                        .map_err(|e| Error::parse(format!("line {} (row {row}) weight", ln + 1), e.to_string()))?,
                );
            }
            None => weights.push(BigRational::zero()),
        }
    }
    let d = d.unwrap_or(1);
    if any_weight {
        if weights.len() != points.len() || points.len() != text.lines().filter(|l| l.contains('|')).count() {
            return Err(Error::parse("weights", "either every row or no row carries a weight"));
        }
        QuadratureRule::new(d, points, weights, "ingested")
    } else {
        QuadratureRule::with_unit_weights(d, points, "ingested")
    }
}

/// Serialises a rule in the ingest format. CSV always carries explicit weights.
pub fn emit_points(rule: &QuadratureRule, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rule.to_json()).expect("rule json");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = format!("# d={}\n", rule.d);
            for (row, w) in rule.points.iter().zip(&rule.weights) {
                let cells: Vec<String> = row.iter().map(format_rational).collect();
                let _ = writeln!(s, "{} | {}", cells.join(","), format_rational(w));
            }
            s
        }
    }
}

/// One entry of a sweep's dimension list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimSpec {
    Concrete(usize),
    /// Family mode: one row per eta, valid for all `d >= d_min`.
    Symbolic,
}

impl FromStr for DimSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "symbolic" | "family" | "any" => Ok(DimSpec::Symbolic),
            t => t
                .parse::<usize>()
                .ok()
                .filter(|&d| d > 0)
                .map(DimSpec::Concrete)
                .ok_or_else(|| Error::InvalidParameter(format!("bad dimension {t:?}"))),
        }
    }
}

pub fn parse_dim_list(s: &str) -> Result<Vec<DimSpec>> {
    s.split(',').map(str::parse).collect()
}

pub fn parse_rational_list(s: &str) -> Result<Vec<BigRational>> {
    s.split(',').map(|t| parse_rational(t.trim())).collect()
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub n: usize,
    pub eta_grid: Vec<BigRational>,
    pub d_list: Vec<DimSpec>,
    pub kind: PointKind,
    pub seed: u64,
    /// Dimension used to generate coordinate profiles for family rows.
    pub template_d: usize,
    pub workers: usize,
    pub record_runtime: bool,
    pub config: WitnessConfig,
}

impl SweepSpec {
    pub fn new(n: usize, eta_grid: Vec<BigRational>, d_list: Vec<DimSpec>, kind: PointKind) -> Self {
        SweepSpec {
            n,
            eta_grid,
            d_list,
            kind,
            seed: 0,
            template_d: 1,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            record_runtime: false,
            config: WitnessConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub n: usize,
    pub d: String,
    pub eta: String,
    pub bound: Option<BigRational>,
    pub k_max_log10: String,
    pub status: String,
    pub runtime_ms: Option<u128>,
}

pub const SWEEP_HEADER: &str = "n,d,eta,bound,K_max_log10,status,runtime_ms";
const BOUND_DIGITS: usize = 12;
const MAX_PLAIN_DIGITS: usize = 30;

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            self.d,
            self.eta,
            self.bound.as_ref().map(|b| format_scientific(b, BOUND_DIGITS)).unwrap_or_default(),
            self.k_max_log10,
            self.status,
            self.runtime_ms.map(|t| t.to_string()).unwrap_or_default()
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "d": self.d,
            "eta": self.eta,
            "bound": self.bound.as_ref().map(format_rational),
            "K_max_log10": self.k_max_log10,
            "status": self.status,
            "runtime_ms": self.runtime_ms.map(|t| t as u64),
        })
    }
}

/// `>=d_min`, or `>=1e<k>` with `10^k > d_min` when `d_min` is too long to print.
fn dim_label(d_min: &BigInt) -> String {
    let digits = d_min.to_string();
    if digits.len() <= MAX_PLAIN_DIGITS {
        format!(">={digits}")
    } else {
        format!(">=1e{}", digits.len())
    }
}

#[derive(Clone, Debug)]
enum Cell {
    Zero,
    Concrete(usize),
    Family(BigRational),
}

fn cells(spec: &SweepSpec) -> Vec<Cell> {
    if spec.n == 0 {
        return vec![Cell::Zero];
    }
    let mut out = Vec::new();
    for d in &spec.d_list {
        match d {
            DimSpec::Concrete(d) => out.push(Cell::Concrete(*d)),
            DimSpec::Symbolic => out.extend(spec.eta_grid.iter().cloned().map(Cell::Family)),
        }
    }
    out
}

fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::InvalidSpec(_) | Error::InvalidParameter(_) | Error::OutOfRange { .. } | Error::Parse { .. } => "invalid-spec",
        Error::DegreeExhausted { .. } => "degree-exhausted",
        Error::CertificationFailed { .. } => "certification-failed",
        Error::NoBracket(_) | Error::RootDepthExceeded(_) => "root-isolation",
        Error::CorrectionTooLarge { .. } | Error::ConditionViolation(_) => "lemma-violation",
        _ => "internal",
    }
}

fn run_cell(spec: &SweepSpec, cell: &Cell, certifier: &mut Certifier) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        n: spec.n,
        d: String::new(),
        eta: String::new(),
        bound: None,
        k_max_log10: String::new(),
        status: "ok".into(),
        runtime_ms: None,
    };
    let outcome: Result<()> = (|| {
        match cell {
            Cell::Zero => {
                row.d = "any".into();
                row.eta = "any".into();
                row.bound = Some(BigRational::one());
                row.k_max_log10 = "0".into();
            }
            Cell::Concrete(d) => {
                row.d = d.to_string();
                let rule = generate_points(&PointSetSpec {
                    kind: spec.kind,
                    n: spec.n,
                    d: *d,
                    seed: spec.seed,
                })?;
                let (eta, cert) = certifier.best_bound(&rule, &spec.eta_grid)?;
                row.eta = format_rational(&eta);
                row.bound = Some(cert.bound.clone());
                row.k_max_log10 = cert.k_max_log10();
            }
            Cell::Family(eta) => {
                row.eta = format_rational(eta);
                row.d = ">=?".into();
                let rule = generate_points(&PointSetSpec {
                    kind: spec.kind,
                    n: spec.n,
                    d: spec.template_d,
                    seed: spec.seed,
                })?;
                let cert = certifier.certify(&rule, eta, Mode::Family)?;
                row.d = dim_label(cert.d_min.as_ref().expect("family certificates carry d_min"));
                row.bound = Some(cert.bound.clone());
                row.k_max_log10 = cert.k_max_log10();
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.status = format!("error:{}", error_tag(&e));
        row.bound = None;
    }
    if spec.record_runtime {
        row.runtime_ms = Some(start.elapsed().as_millis());
    }
    row
}

/// Runs every cell, concurrently up to `spec.workers`, and returns rows in spec order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.eta_grid.is_empty() || (spec.n > 0 && spec.d_list.is_empty()) {
        return Err(Error::InvalidSpec("sweep needs a nonempty eta grid and dimension list".into()));
    }
    let all = cells(spec);
    let slots: Vec<Mutex<Option<SweepRow>>> = all.iter().map(|_| Mutex::new(None)).collect();
    let next = Mutex::new(0usize);
    let workers = spec.workers.max(1).min(all.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut certifier = Certifier::new(spec.config.clone());
                certifier.workers = 1;
                loop {
                    let i = {
                        let mut guard = next.lock().expect("index lock");
                        let i = *guard;
                        *guard += 1;
                        i
                    };
                    let Some(cell) = all.get(i) else { break };
                    let row = run_cell(spec, cell, &mut certifier);
                    *slots[i].lock().expect("slot lock") = Some(row);
                }
            });
        }
    });
    Ok(slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every cell ran"))
        .collect())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

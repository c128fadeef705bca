use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use cubature_adversary::certificate::{replay, Certifier, ErrorCertificate, Mode, QuadratureRule};
use cubature_adversary::fooling::{verify_witness, FoolingBuilder, WitnessConfig};
use cubature_adversary::harness::{
    dedup_points, emit_points, generate_points, ingest_points, parse_dim_list, parse_rational_list, run_sweep, sweep_csv, Format,
    PointKind, PointSetSpec, SweepSpec,
};
use cubature_adversary::numeric::{format_rational, format_scientific, parse_rational, to_f64};
use cubature_adversary::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_CERTIFY: u8 = 2;
const EXIT_REJECT: u8 = 3;

#[derive(Parser)]
#[command(name = "cubature-adversary", version, about = "Certified worst-case error lower bounds for cubature rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify one univariate fooling polynomial.
    Witness(Common),
    /// Certify an error lower bound for a rule.
    Certify(Common),
    /// Re-check a certificate from its JSON.
    Replay {
        /// Certificate file.
        cert: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep bounds over eta and dimension, CSV output.
    Sweep(Common),
    /// Write a generated point set.
    GenPoints(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Number of sample points.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value = "7/10")]
    eta: String,
    /// Comma-separated eta values; `certify` picks the best, `sweep` iterates.
    #[arg(long)]
    eta_grid: Option<String>,
    /// Dimension; `sweep` takes a comma-separated list that may include `symbolic`.
    #[arg(long, default_value = "1")]
    d: String,
    /// Point file to use instead of a generated set.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Output format; JSON by default, CSV for `sweep`.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "midpoint-product", value_parser = ["grid-product", "midpoint-product", "uniform-random", "van-der-corput"])]
    kind: String,
    #[arg(long, default_value_t = 8192)]
    max_degree: usize,
    /// Root isolation tolerance.
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "concrete", value_parser = ["concrete", "family"])]
    mode: String,
    /// Record wall-clock time per sweep row.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Merge repeated sample points before building witnesses.
    #[arg(long)]
    dedup: bool,
}

enum Failure {
    Usage(String),
    Certify(String),
    Reject(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::InvalidScalar(_)
            | Error::InvalidSpec(_)
            | Error::Parse { .. }
            | Error::OutOfRange { .. }
            | Error::Io { .. }
            | Error::Json(_) => Failure::Usage(e.to_string()),
            other => Failure::Certify(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

impl Common {
    fn config(&self) -> Result<WitnessConfig, Failure> {
        let mut cfg = WitnessConfig {
            max_degree: self.max_degree,
            ..WitnessConfig::default()
        };
        if let Some(t) = &self.tol {
            cfg.root_tol = Some(parse_rational(t)?);
        }
        Ok(cfg)
    }

    fn format(&self) -> Format {
        self.format_or(Format::Json)
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.as_deref().map_or(default, |f| f.parse().expect("validated by clap"))
    }

    fn eta(&self) -> Result<BigRational, Failure> {
        Ok(parse_rational(&self.eta)?)
    }

    fn dim(&self) -> Result<usize, Failure> {
        self.d
            .parse()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| Failure::Usage(format!("--d must be a positive integer, got {:?}", self.d)))
    }

    fn rule(&self, d: usize) -> Result<QuadratureRule, Failure> {
        if let Some(path) = &self.points {
            let format = match path.extension().and_then(|e| e.to_str()) {
                Some("json") => Format::Json,
                Some("csv") => Format::Csv,
                _ => self.format(),
            };
            let rule = ingest_points(path, format)?;
            return Ok(if self.dedup { dedup_points(&rule)? } else { rule });
        }
        let rule = generate_points(&PointSetSpec {
            kind: self.kind.parse::<PointKind>()?,
            n: self.n,
            d,
            seed: self.seed,
        })?;
        Ok(if self.dedup { dedup_points(&rule)? } else { rule })
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(format!("stdout: {e}")))
        }
    }
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string(v).expect("serialisable");
    s.push('\n');
    s
}

fn witness(c: &Common) -> Outcome {
    let rule = c.rule(1)?;
    let points: Vec<BigRational> = rule.points.iter().map(|p| p[0].clone()).collect();
    let mut builder = FoolingBuilder::new(c.config()?);
    let w = builder.build(&points, &c.eta()?)?;
    let report = verify_witness(&w);
    eprint!("{report}");
    let text = match c.format() {
        Format::Json => json_text(&w.to_json()),
        Format::Csv => format!(
            "n,eta,delta,degree,integral,sup_hi,K_log10\n{},{},{},{},{},{},{}\n",
            w.n(),
            format_rational(&w.eta),
            format_rational(&w.delta),
            w.degree(),
            format_scientific(&w.integral, 12),
            format_scientific(&w.sup.hi, 12),
            w.k.log10_string()
        ),
    };
    emit(&c.out, &text)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Certify("witness failed verification".into()))
    }
}

fn certify(c: &Common) -> Outcome {
    let mode: Mode = c.mode.parse()?;
    let d = if c.points.is_some() { 1 } else { c.dim()? };
    let rule = c.rule(d)?;
    let mut certifier = Certifier::new(c.config()?);
    if let Some(w) = c.workers {
        certifier.workers = w;
    }
    let cert = match (&c.eta_grid, mode) {
        (Some(grid), Mode::Concrete) => certifier.best_bound(&rule, &parse_rational_list(grid)?)?.1,
        (Some(_), Mode::Family) => return Err(Failure::Usage("--eta-grid applies to concrete mode only".into())),
        (None, _) => certifier.certify(&rule, &c.eta()?, mode)?,
    };
    eprintln!(
        "{} bound {} (eta {}, K ~ 10^{}, {})",
        cert.mode.as_str(),
        format_scientific(&cert.bound, 12),
        format_rational(&cert.eta),
        cert.k_max_log10(),
        cert.regime.as_str()
    );
    let text = match c.format() {
        Format::Json => json_text(&cert.to_json()),
        Format::Csv => format!(
            "mode,n,d,eta,bound,K_max_log10,d_min\n{},{},{},{},{},{},{}\n",
            cert.mode.as_str(),
            rule.n(),
            cert.d.map(|d| d.to_string()).unwrap_or_else(|| "any".into()),
            format_rational(&cert.eta),
            format_scientific(&cert.bound, 12),
            cert.k_max_log10(),
            cert.d_min.as_ref().map(|k| k.to_string()).unwrap_or_default()
        ),
    };
    emit(&c.out, &text)?;
    if cert.a_f_zero && cert.membership {
        Ok(())
    } else {
        Err(Failure::Certify("certificate checks did not pass".into()))
    }
}

fn replay_cmd(path: &Path, out: &Option<PathBuf>) -> Outcome {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Reject(format!("not JSON: {e}")))?;
    let cert = ErrorCertificate::from_json(&value).map_err(|e| Failure::Reject(e.to_string()))?;
    let report = replay(&cert);
    emit(out, &format!("{report}\n"))?;
    if report.accepted() {
        Ok(())
    } else {
        Err(Failure::Reject(format!("rejected: {}", report.rejections().join(", "))))
    }
}

fn sweep(c: &Common) -> Outcome {
    let grid = parse_rational_list(c.eta_grid.as_deref().unwrap_or(&c.eta))?;
    let mut spec = SweepSpec::new(c.n, grid, parse_dim_list(&c.d)?, c.kind.parse()?);
    spec.seed = c.seed;
    spec.record_runtime = c.timing;
    spec.config = c.config()?;
    if let Some(w) = c.workers {
        spec.workers = w;
    }
    let rows = run_sweep(&spec)?;
    let text = match c.format_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows),
        Format::Json => json_text(&serde_json::Value::Array(rows.iter().map(|r| r.to_json()).collect())),
    };
    for r in rows.iter().filter(|r| r.status != "ok") {
        eprintln!("row d={} eta={}: {}", r.d, r.eta, r.status);
    }
    if let Some(best) = rows.iter().filter_map(|r| r.bound.as_ref()).max() {
        eprintln!("largest bound ~ {:.9}", to_f64(best));
    }
    emit(&c.out, &text)
}

fn gen_points(c: &Common) -> Outcome {
    let rule = c.rule(c.dim()?)?;
    emit(&c.out, &emit_points(&rule, c.format()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let outcome = match &cli.command {
        Command::Witness(c) => witness(c),
        Command::Certify(c) => certify(c),
        Command::Replay { cert, out } => replay_cmd(cert, out),
        Command::Sweep(c) => sweep(c),
        Command::GenPoints(c) => gen_points(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Certify(m)) => {
            eprintln!("certification failed: {m}");
            ExitCode::from(EXIT_CERTIFY)
        }
        Err(Failure::Reject(m)) => {
            eprintln!("{m}");
            ExitCode::from(EXIT_REJECT)
        }
    }
}

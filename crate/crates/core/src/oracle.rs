//! Untrusted double-precision cross-checks for the exact path.
//!
//! Polynomials built here have coefficients of thousands of bits that cancel
//! down to values of order one, so plain float Horner is useless. Values are
//! instead computed by fixed-point integer Horner at exact dyadic arguments and
//! only the final result is rounded to `f64`. Integration and grid scans sample
//! a Chebyshev interpolant fitted to those values.

use std::cell::OnceCell;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fooling::FoolingWitness;
use crate::numeric::{format_rational, from_f64, to_f64};
use crate::poly::Poly;
use crate::profile::chebyshev::{chebyshev_coefficients, clenshaw};

/// Slack allowed when a float sample is compared against a certified bound.
pub const FLOAT_SLACK: f64 = 1e-12;

/// One comparison between a certified quantity and its float estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub certified: String,
    pub oracle: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: certified {}, oracle {:.15e}, discrepancy {:.3e} (tol {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.quantity,
            self.certified,
            self.oracle,
            self.discrepancy,
            self.tolerance
        )
    }
}

/// Fixed-point Horner evaluation with `bits` fractional bits.
#[derive(Clone, Debug)]
pub struct FixedPointEvaluator {
    coeffs: Vec<BigInt>,
    bits: u32,
}

impl FixedPointEvaluator {
    pub fn new(p: &Poly) -> Self {
        let bits = 96 + usize::BITS - p.len().leading_zeros();
        let (num, den) = p.parts();
        let coeffs = num
            .iter()
            .map(|c| {
                let scaled: BigInt = c << bits;
                num_integer::Integer::div_floor(&scaled, den)
            })
            .collect();
        FixedPointEvaluator { coeffs, bits }
    }

    /// `p(x) * 2^bits`, floored at each step.
    pub fn eval_fixed(&self, x: f64) -> BigInt {
        assert!(x.is_finite(), "evaluation point must be finite");
        let Some(last) = self.coeffs.last() else {
            return BigInt::zero();
        };
        let (mantissa, exp, sign) = num_traits::float::FloatCore::integer_decode(x);
        let mut acc = last.clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc *= mantissa;
            if sign < 0 {
                acc = -acc;
            }
            if exp < 0 {
                acc >>= (-exp) as usize;
            } else {
                acc <<= exp as usize;
            }
            acc += c;
        }
        acc
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.to_float(self.eval_fixed(x))
    }

    pub fn to_float(&self, v: BigInt) -> f64 {
        to_f64(&BigRational::new_raw(v, BigInt::from(1) << self.bits))
    }
}

/// Chebyshev interpolant of `p` on `[a, b]` through `degree + 1` fixed-point samples.
#[derive(Clone, Debug)]
pub struct ChebyshevModel {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl ChebyshevModel {
    pub fn new(p: &Poly, a: f64, b: f64) -> Self {
        let fixed = FixedPointEvaluator::new(p);
        let m = p.degree() + 1;
        let values: Vec<f64> = (0..m)
            .map(|k| {
                let t = (PI * (k as f64 + 0.5) / m as f64).cos();
                fixed.eval(a + (b - a) * (1.0 + t) / 2.0)
            })
            .collect();
        ChebyshevModel {
            a,
            b,
            coeffs: chebyshev_coefficients(&values),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, (2.0 * x - self.a - self.b) / (self.b - self.a))
    }
}

/// Float model of `p` on an interval, either direct or as a power of a product.
#[derive(Clone, Debug)]
enum Model {
    Direct(ChebyshevModel),
    Product { factors: Vec<ChebyshevModel>, power: i32 },
}

impl Model {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Model::Direct(m) => m.eval(x),
            Model::Product { factors, power } => factors.iter().map(|m| m.eval(x)).product::<f64>().powi(*power),
        }
    }
}

/// Lazily built float views of one polynomial.
pub struct PolyOracle<'a> {
    p: &'a Poly,
    factors: Option<(&'a [Poly], u32)>,
    fixed: OnceCell<FixedPointEvaluator>,
    unit_model: OnceCell<Model>,
    derivative: OnceCell<Poly>,
}

impl<'a> PolyOracle<'a> {
    pub fn new(p: &'a Poly) -> Self {
        PolyOracle {
            p,
            factors: None,
            fixed: OnceCell::new(),
            unit_model: OnceCell::new(),
            derivative: OnceCell::new(),
        }
    }

    /// Integration and grid scans sample `(prod factors)^power` in place of `p`,
    /// which is much cheaper when `p` is a high power of low-degree factors.
    /// Point values and derivatives still come from `p` itself.
    pub fn factored(p: &'a Poly, factors: &'a [Poly], power: u32) -> Self {
        PolyOracle {
            factors: Some((factors, power)),
            ..PolyOracle::new(p)
        }
    }

    fn fixed(&self) -> &FixedPointEvaluator {
        self.fixed.get_or_init(|| FixedPointEvaluator::new(self.p))
    }

    fn build_model(&self, a: f64, b: f64) -> Model {
        match self.factors {
            Some((factors, power)) => Model::Product {
                factors: factors.iter().map(|q| ChebyshevModel::new(q, a, b)).collect(),
                power: power as i32,
            },
            None => Model::Direct(ChebyshevModel::new(self.p, a, b)),
        }
    }

    fn model(&self, a: f64, b: f64) -> std::borrow::Cow<'_, Model> {
        if a == 0.0 && b == 1.0 {
            std::borrow::Cow::Borrowed(self.unit_model.get_or_init(|| self.build_model(0.0, 1.0)))
        } else {
            std::borrow::Cow::Owned(self.build_model(a, b))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.fixed().eval(x)
    }

    /// Adaptive Simpson estimate of the integral over `[0, 1]`.
    pub fn numeric_integral(&self, tol: f64) -> f64 {
        assert!(tol > 0.0, "tolerance must be positive");
        if self.p.is_zero() {
            return 0.0;
        }
        let model = self.model(0.0, 1.0);
        let f = |x: f64| model.eval(x);
        const PANELS: usize = 64;
        let mut total = 0.0;
        for i in 0..PANELS {
            let a = i as f64 / PANELS as f64;
            let b = (i + 1) as f64 / PANELS as f64;
            let (fa, fm, fb) = (f(a), f((a + b) / 2.0), f(b));
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            total += simpson(&f, a, b, fa, fm, fb, whole, tol / PANELS as f64, 40);
        }
        total
    }

    /// Largest `|p|` over `samples` equispaced points of `[a, b]`.
    pub fn grid_max(&self, a: f64, b: f64, samples: usize) -> f64 {
        assert!(samples >= 2, "need at least two samples");
        let direct = self.p.degree() <= 64 && self.factors.is_none();
        let model = (!direct).then(|| self.model(a, b));
        (0..samples)
            .map(|i| {
                let x = if i + 1 == samples {
                    b
                } else {
                    a + (b - a) * i as f64 / (samples - 1) as f64
                };
                match &model {
                    Some(m) => m.eval(x).abs(),
                    None => self.eval(x).abs(),
                }
            })
            .fold(0.0, f64::max)
    }

    /// Central difference at `x` against the exact derivative value.
    pub fn fd_derivative_check(&self, x: f64, h: f64) -> OracleReport {
        assert!(h > 0.0, "step must be positive");
        let fixed = self.fixed();
        let (xp, xm) = (x + h, x - h);
        let diff = fixed.eval_fixed(xp) - fixed.eval_fixed(xm);
        let fd = fixed.to_float(diff) / (xp - xm);
        let derivative = self.derivative.get_or_init(|| self.p.differentiate());
        let exact = derivative.eval(&from_f64(x).expect("finite point"));
        let exact_f = to_f64(&exact);
        let discrepancy = (fd - exact_f).abs();
        let tolerance = 1e-6 * (1.0 + exact_f.abs());
        OracleReport {
            quantity: format!("p'({x})"),
            certified: format!("{exact_f:.15e}"),
            oracle: fd,
            discrepancy,
            tolerance,
            passed: discrepancy <= tolerance,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = (a + b) / 2.0;
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

pub fn numeric_integral(p: &Poly, tol: f64) -> f64 {
    PolyOracle::new(p).numeric_integral(tol)
}

pub fn grid_max(p: &Poly, a: f64, b: f64, samples: usize) -> f64 {
    PolyOracle::new(p).grid_max(a, b, samples)
}

pub fn fd_derivative_check(p: &Poly, x: f64, h: f64) -> OracleReport {
    PolyOracle::new(p).fd_derivative_check(x, h)
}

/// Float cross-checks of one witness: integral, sup and derivative samples.
pub fn check_witness(w: &FoolingWitness, grid: usize, fd_points: usize, seed: u64) -> Vec<OracleReport> {
    let oracle = if w.factors.is_empty() {
        PolyOracle::new(&w.f)
    } else {
        PolyOracle::factored(&w.f, &w.factors, 2)
    };
    let mut out = Vec::with_capacity(fd_points + 2);

    let exact = to_f64(&w.integral);
    let numeric = oracle.numeric_integral(1e-12);
    let rel = (numeric - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
    out.push(OracleReport {
        quantity: "integral".into(),
        certified: format_rational_short(&w.integral),
        oracle: numeric,
        discrepancy: rel,
        tolerance: 1e-9,
        passed: rel <= 1e-9,
    });

    let hi = to_f64(&w.sup.hi);
    let gm = oracle.grid_max(0.0, 1.0, grid);
    out.push(OracleReport {
        quantity: "grid max".into(),
        certified: format!("<= {hi:.15e}"),
        oracle: gm,
        discrepancy: (gm - hi).max(0.0),
        tolerance: FLOAT_SLACK,
        passed: gm <= hi + FLOAT_SLACK,
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..fd_points {
        let x = rng.gen_range(0..=1u64 << 20) as f64 / (1u64 << 20) as f64;
        out.push(oracle.fd_derivative_check(x, 2f64.powi(-30)));
    }
    out
}

fn format_rational_short(x: &BigRational) -> String {
    let s = format_rational(x);
    if s.len() <= 40 {
        s
    } else {
        format!("{:.15e}", to_f64(x))
    }
}

//! The piecewise-linear dip profile and certified polynomial approximations of it.

pub(crate) mod chebyshev;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numeric::{format_rational, parse_rational, rat, to_f64, Enclosure};
use crate::poly::{certify_bounds, Poly, DEFAULT_DEPTH_LIMIT};

use chebyshev::Target;

/// One linear piece `slope * x + intercept` on `[a, b]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub a: BigRational,
    pub b: BigRational,
    pub slope: BigRational,
    pub intercept: BigRational,
}

impl Segment {
    pub fn line(&self) -> Poly {
        Poly::linear(&self.intercept, &self.slope)
    }

    pub fn value(&self, x: &BigRational) -> BigRational {
        &self.slope * x + &self.intercept
    }
}

/// `1 - delta` on `[0, 1 - delta]` and `[1 + delta, 2 + delta]`, `-2 delta` at 1, linear between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinearProfile {
    pub delta: BigRational,
    pub segments: Vec<Segment>,
}

pub fn build_profile(delta: &BigRational) -> Result<PiecewiseLinearProfile> {
    if !delta.is_positive() || *delta >= rat(1, 2) {
        return Err(Error::InvalidParameter(format!(
            "profile width {delta} must lie in (0, 1/2)"
        )));
    }
    let one = BigRational::one();
    let d = delta.clone();
    let plateau = &one - &d;
    let dip = -(&d + &d);
    let steep = (&one + &d) / &d;
    let flat = |a: BigRational, b: BigRational| Segment {
        a,
        b,
        slope: BigRational::zero(),
        intercept: plateau.clone(),
    };
    let segments = vec![
        flat(BigRational::zero(), &one - &d),
        Segment {
            a: &one - &d,
            b: one.clone(),
            slope: -steep.clone(),
            intercept: &dip + &steep,
        },
        Segment {
            a: one.clone(),
            b: &one + &d,
            slope: steep.clone(),
            intercept: &dip - &steep,
        },
        flat(&one + &d, &one + &one + &d),
    ];
    Ok(PiecewiseLinearProfile { delta: d, segments })
}

impl PiecewiseLinearProfile {
    pub fn right_end(&self) -> BigRational {
        self.segments.last().expect("four segments").b.clone()
    }

    /// Exact value; `None` outside `[0, 2 + delta]`.
    pub fn value(&self, x: &BigRational) -> Option<BigRational> {
        self.segments
            .iter()
            .find(|s| &s.a <= x && x <= &s.b)
            .map(|s| s.value(x))
    }

    pub fn value_f64(&self, x: f64) -> f64 {
        self.target().g(x)
    }

    /// Exponent `j` of the approximation window `[1 - L, 1 + L]`, `L = 2^j / (2^j - 1)`.
    ///
    /// `j` is the largest integer with `2^-j >= delta / (1 + delta)`, so that
    /// `L >= 1 + delta` and `1/L = 1 - 2^-j` is dyadic.
    pub fn window_exponent(&self) -> u32 {
        let ratio = (BigRational::one() + &self.delta) / &self.delta;
        let mut j = 0u32;
        while BigRational::from_integer(BigInt::one() << (j + 1) as usize) <= ratio {
            j += 1;
        }
        j
    }

    pub fn window_half_width(&self) -> BigRational {
        let p = BigInt::one() << self.window_exponent() as usize;
        BigRational::new(p.clone(), p - 1)
    }

    fn target(&self) -> Target {
        Target {
            delta: to_f64(&self.delta),
            scale: to_f64(&self.window_half_width()),
        }
    }
}

/// Exact per-segment evidence that `|P - g| <= eps` on `[0, 2 + delta]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxCertificate {
    pub delta: BigRational,
    pub eps: BigRational,
    pub poly: Poly,
    /// `(a, b, enclosure of P - line on [a, b])` for each segment.
    pub segments: Vec<(BigRational, BigRational, Enclosure)>,
}

impl ApproxCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "delta": format_rational(&self.delta),
            "eps": format_rational(&self.eps),
            "P": self.poly.to_json(),
            "segments": self.segments.iter().map(|(a, b, e)| json!({
                "interval": [format_rational(a), format_rational(b)],
                "enclosure": [format_rational(&e.lo), format_rational(&e.hi)],
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |name: &str| -> Result<BigRational> {
            let s = v[name]
                .as_str()
                .ok_or_else(|| Error::parse(format!("approx.{name}"), "expected rational string"))?;
            parse_rational(s)
        };
        let pair = |x: &Value, what: &str| -> Result<(BigRational, BigRational)> {
            let arr = x.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                Error::parse(format!("approx.segments.{what}"), "expected two rationals")
            })?;
            let get = |i: usize| {
                arr[i]
                    .as_str()
                    .ok_or_else(|| Error::parse(format!("approx.segments.{what}"), "expected string"))
                    .and_then(parse_rational)
            };
            Ok((get(0)?, get(1)?))
        };
        let segments = v["segments"]
            .as_array()
            .ok_or_else(|| Error::parse("approx.segments", "expected array"))?
            .iter()
            .map(|s| {
                let (a, b) = pair(&s["interval"], "interval")?;
                let (lo, hi) = pair(&s["enclosure"], "enclosure")?;
                Ok((a, b, Enclosure::new(lo, hi)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ApproxCertificate {
            delta: field("delta")?,
            eps: field("eps")?,
            poly: Poly::from_json(&v["P"])?,
            segments,
        })
    }
}

pub fn certify_sup_error(
    p: &Poly,
    profile: &PiecewiseLinearProfile,
    eps: &BigRational,
) -> Result<ApproxCertificate> {
    certify_sup_error_with_depth(p, profile, eps, DEFAULT_DEPTH_LIMIT)
}

pub fn certify_sup_error_with_depth(
    p: &Poly,
    profile: &PiecewiseLinearProfile,
    eps: &BigRational,
    depth_limit: u32,
) -> Result<ApproxCertificate> {
    if !eps.is_positive() {
        return Err(Error::InvalidParameter(format!("eps {eps} must be positive")));
    }
    let lo = -eps.clone();
    let mut segments = Vec::with_capacity(profile.segments.len());
    for (i, seg) in profile.segments.iter().enumerate() {
        let diff = p - &seg.line();
        match certify_bounds(&diff, &seg.a, &seg.b, &lo, eps, depth_limit) {
            Ok(enc) => segments.push((seg.a.clone(), seg.b.clone(), enc)),
            Err(fail) => {
                return Err(Error::CertificationFailed {
                    segment: i,
                    interval: format!("{}, {}", seg.a, seg.b),
                    detail: fail.to_string(),
                })
            }
        }
    }
    Ok(ApproxCertificate {
        delta: profile.delta.clone(),
        eps: eps.clone(),
        poly: p.clone(),
        segments,
    })
}

/// How proposals are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProposalMethod {
    /// Chebyshev interpolation of a corner-mollified profile.
    Interpolation,
    /// Remez best approximation of the sharp profile.
    #[default]
    Minimax,
}

/// An uncertified candidate approximation.
#[derive(Clone, Debug)]
pub struct Proposal {
    pub poly: Poly,
    pub degree: usize,
    /// Largest `|P - g|` seen on a dense float grid over `[0, 2 + delta]`.
    pub float_error: f64,
    pub method: ProposalMethod,
}

/// Bits kept when rounding Chebyshev coefficients.
const CHEBYSHEV_BITS: u32 = 60;
const FIRST_DEGREE: usize = 16;

pub fn propose_approx(
    profile: &PiecewiseLinearProfile,
    target_eps: &BigRational,
    max_degree: usize,
) -> Result<Proposal> {
    propose_approx_with(profile, target_eps, max_degree, ProposalMethod::default())
}

pub fn propose_approx_with(
    profile: &PiecewiseLinearProfile,
    target_eps: &BigRational,
    max_degree: usize,
    method: ProposalMethod,
) -> Result<Proposal> {
    if !target_eps.is_positive() {
        return Err(Error::InvalidParameter(format!("target {target_eps} must be positive")));
    }
    let target = profile.target();
    let goal = to_f64(target_eps);
    if *target_eps >= BigRational::one() {
        let plateau = BigRational::one() - &profile.delta;
        return Ok(Proposal {
            poly: Poly::constant(&plateau),
            degree: 0,
            float_error: chebyshev::estimate_error(&target, &[to_f64(&plateau)]),
            method,
        });
    }
    let half_width = (goal * target.delta / (2.0 * (1.0 + target.delta))).min(target.delta / 4.0);
    let attempt = |n: usize| -> (Vec<BigInt>, f64) {
        let coeffs = match method {
            ProposalMethod::Interpolation => chebyshev::interpolate(&target, n, half_width),
            ProposalMethod::Minimax => chebyshev::remez(&target, n, 40),
        };
        let scale = 2f64.powi(CHEBYSHEV_BITS as i32);
        let rounded: Vec<BigInt> = coeffs
            .iter()
            .map(|c| BigInt::from_f64((c * scale).round()).unwrap_or_default())
            .collect();
        let back: Vec<f64> = rounded.iter().map(|m| to_f64(&BigRational::from_integer(m.clone())) / scale).collect();
        let err = chebyshev::estimate_error(&target, &back);
        (rounded, err)
    };

    let mut n = FIRST_DEGREE.min(max_degree.max(1));
    let mut below: Option<(usize, f64)> = None;
    let (mut hi_n, mut hi_coeffs, mut hi_err) = loop {
        let (c, e) = attempt(n);
        if e <= goal {
            break (n, c, e);
        }
        let best = below.map_or(e, |(_, b)| b.min(e));
        if n >= max_degree {
            return Err(Error::DegreeExhausted {
                target: goal,
                max_degree,
                best,
            });
        }
        below = Some((n, e));
        n = (2 * n).min(max_degree);
    };

    if method == ProposalMethod::Minimax {
        // error of a best approximation to a corner decays like 1/N
        for _ in 0..5 {
            let Some((lo_n, lo_err)) = below else { break };
            if hi_n - lo_n <= (hi_n / 64).max(2) {
                break;
            }
            let mut est = (hi_n as f64 * hi_err / goal * 1.03).ceil() as usize;
            if lo_err < 2.0 * goal {
                est = est.max((lo_n as f64 * lo_err / goal * 1.03).ceil() as usize);
            }
            let cand = est.clamp(lo_n + 1, hi_n - 1);
            let (c, e) = attempt(cand);
            if e <= goal {
                hi_n = cand;
                hi_coeffs = c;
                hi_err = e;
            } else {
                below = Some((cand, e));
            }
        }
    }

    Ok(Proposal {
        poly: chebyshev_to_monomial(&hi_coeffs, CHEBYSHEV_BITS, profile.window_exponent()),
        degree: hi_n,
        float_error: hi_err,
        method,
    })
}

/// Exact monomial form of `Σ m_k 2^-s T_k(u)` with `u = (x - 1)(1 - 2^-j)`.
fn chebyshev_to_monomial(m: &[BigInt], s: u32, j: u32) -> Poly {
    let n = m.len() - 1;
    let j = j as usize;
    // S_k = 2^(jk) T_k(u) has integer coefficients: S_{k+1} = 2 U S_k - 4^j S_{k-1}
    let c = (BigInt::one() << j) - 1u32;
    let two_c = &c << 1usize;
    let four_j = BigInt::one() << (2 * j);
    let mut acc = vec![BigInt::zero(); n + 1];
    let mut prev = vec![BigInt::one()];
    acc[0] += &m[0] << (j * n);
    if n == 0 {
        return Poly::from_parts(acc, BigInt::one() << s as usize);
    }
    let mut cur = vec![-c.clone(), c.clone()];
    for k in 1..=n {
        if !m[k].is_zero() {
            let factor = &m[k] << (j * (n - k));
            for (a, v) in acc.iter_mut().zip(&cur) {
                *a += &factor * v;
            }
        }
        if k == n {
            break;
        }
        let mut next = vec![BigInt::zero(); k + 2];
        for (i, v) in cur.iter().enumerate() {
            // 2U v x^i = 2c (x - 1) v x^i
            let t = &two_c * v;
            next[i + 1] += &t;
            next[i] -= t;
        }
        for (i, v) in prev.iter().enumerate() {
            next[i] -= &four_j * v;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Poly::from_parts(acc, BigInt::one() << (s as usize + j * n))
}

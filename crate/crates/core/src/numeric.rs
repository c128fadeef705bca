//! Exact scalar helpers: rational normalization and parsing, log-magnitudes for
//! astronomically large bounds, and closed rational intervals.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Builds `num/den` in canonical form (positive denominator, reduced).
pub fn normalize(num: BigInt, den: BigInt) -> Result<BigRational> {
    if den.is_zero() {
        return Err(Error::InvalidScalar(format!("{num}/0")));
    }
    Ok(BigRational::new(num, den))
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Parses `p`, `p/q` or a finite decimal literal such as `-0.125` or `3e-2`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = |why: &str| Error::InvalidScalar(format!("{s:?}: {why}"));
    if s.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| bad("numerator"))?;
        let den: BigInt = q.trim().parse().map_err(|_| bad("denominator"))?;
        return normalize(num, den).map_err(|_| bad("zero denominator"));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| bad("exponent"))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad("no digits"));
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad("not a number"));
    }
    let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad("digits"))?;
    let scale = exponent - frac.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(bad("exponent out of range"));
    }
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// `p/q`, or `p` for integers.
pub fn format_rational(x: &BigRational) -> String {
    x.to_string()
}

/// Nearest-ish `f64` for any rational, including ones whose parts overflow `f64`.
pub fn to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift = 64 - (nb - db);
    let scaled = if shift >= 0 {
        (x.numer() << shift as usize) / x.denom()
    } else {
        x.numer() / (x.denom() << (-shift) as usize)
    };
    let mant = scaled.to_f64().unwrap_or(f64::NAN);
    mant * 2f64.powi(-(shift.clamp(-2000, 2000) as i32))
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidScalar(format!("{x}")))
}

pub fn is_dyadic(x: &BigRational) -> bool {
    let d = x.denom();
    d.is_positive() && (d.clone() & (d - BigInt::one())).is_zero()
}

/// Smallest `k` with `2^k >= x` for positive `x`.
pub fn ceil_log2(x: &BigRational) -> i64 {
    assert!(x.is_positive());
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    loop {
        let p = pow2(k);
        if &p >= x {
            if pow2(k - 1) < *x {
                return k;
            }
            k -= 1;
        } else {
            k += 1;
        }
    }
}

/// `2^k` as a rational, for any integer `k`.
pub fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// `lcm(1, 2, ..., n)`.
pub fn lcm_upto(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc = acc.lcm(&BigInt::from(k));
    }
    acc
}

pub fn factorial(n: usize) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Formats `x` in scientific notation with `digits` significant digits, truncated toward zero.
pub fn format_scientific(x: &BigRational, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let a = x.abs();
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut e = ((a.numer().bits() as f64 - a.denom().bits() as f64) * std::f64::consts::LOG10_2) as i64;
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            num_traits::pow(ten.clone(), k as usize)
        } else {
            num_traits::pow(ten.clone(), (-k) as usize).recip()
        }
    };
    while pow10(e) > a {
        e -= 1;
    }
    while pow10(e + 1) <= a {
        e += 1;
    }
    let mant = a / pow10(e) * pow10(digits as i64 - 1);
    let m = mant.to_integer().to_string();
    let (head, tail) = m.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidParameter(format!("empty enclosure [{lo}, {hi}]")));
        }
        Ok(Enclosure { lo, hi })
    }

    pub fn point(x: BigRational) -> Self {
        Enclosure { lo: x.clone(), hi: x }
    }

    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_within(&self, lo: &BigRational, hi: &BigRational) -> bool {
        lo <= &self.lo && &self.hi <= hi
    }

    /// Upper bound on `|x|` over the interval.
    pub fn abs_max(&self) -> BigRational {
        self.lo.abs().max(self.hi.abs())
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

const LOG_FRAC_BITS: usize = 128;
const LOG_GUARD_BITS: usize = 192;

/// A signed magnitude stored as `sign * exp(log)`, with `log` fixed-point at 128 fractional bits.
///
/// Natural logs are computed to within `2^-120` of the true value; comparisons of
/// quantities that differ by less than that are not meaningful.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LogMagnitude {
    sign: Sign,
    log: BigInt,
}

fn ln2_fixed() -> &'static BigInt {
    static LN2: OnceLock<BigInt> = OnceLock::new();
    LN2.get_or_init(|| {
        // ln 2 = 2 atanh(1/3)
        let one = BigInt::one() << LOG_GUARD_BITS;
        atanh_fixed(&(one / 3)) * 2
    })
}

/// atanh(z) for fixed-point `z` (scale 2^GUARD), |z| <= 1/3.
fn atanh_fixed(z: &BigInt) -> BigInt {
    let z2 = (z * z) >> LOG_GUARD_BITS;
    let mut term = z.clone();
    let mut sum = BigInt::zero();
    let mut k = 1u64;
    while !term.is_zero() {
        sum += &term / k;
        term = (term * &z2) >> LOG_GUARD_BITS;
        k += 2;
    }
    sum
}

/// ln(m) for m >= 1, fixed-point at GUARD bits.
fn ln_biguint(m: &BigUint) -> BigInt {
    let e = m.bits() as usize - 1;
    let u: BigInt = if e <= LOG_GUARD_BITS {
        BigInt::from(m.clone()) << (LOG_GUARD_BITS - e)
    } else {
        BigInt::from(m >> (e - LOG_GUARD_BITS))
    };
    let one = BigInt::one() << LOG_GUARD_BITS;
    // ln u = 2 atanh((u-1)/(u+1)), with (u-1)/(u+1) in [0, 1/3)
    let z = ((&u - &one) << LOG_GUARD_BITS) / (&u + &one);
    ln2_fixed() * e + atanh_fixed(&z) * 2
}

impl LogMagnitude {
    pub fn zero() -> Self {
        LogMagnitude {
            sign: Sign::NoSign,
            log: BigInt::zero(),
        }
    }

    pub fn one() -> Self {
        LogMagnitude {
            sign: Sign::Plus,
            log: BigInt::zero(),
        }
    }

    pub fn from_rational(x: &BigRational) -> Self {
        if x.is_zero() {
            return Self::zero();
        }
        let ln_num = ln_biguint(x.numer().magnitude());
        let ln_den = ln_biguint(x.denom().magnitude());
        let shift = LOG_GUARD_BITS - LOG_FRAC_BITS;
        let diff = ln_num - ln_den + (BigInt::one() << (shift - 1));
        LogMagnitude {
            sign: x.numer().sign(),
            log: diff >> shift,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::NoSign
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn mul(&self, other: &LogMagnitude) -> LogMagnitude {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        LogMagnitude {
            sign: self.sign * other.sign,
            log: &self.log + &other.log,
        }
    }

    pub fn powi(&self, k: u32) -> LogMagnitude {
        if k == 0 {
            return Self::one();
        }
        if self.is_zero() {
            return Self::zero();
        }
        let sign = if self.sign == Sign::Minus && k % 2 == 1 {
            Sign::Minus
        } else {
            Sign::Plus
        };
        LogMagnitude {
            sign,
            log: &self.log * k,
        }
    }

    /// Natural log of the magnitude.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let int_part = &self.log >> LOG_FRAC_BITS;
        let frac = &self.log - (&int_part << LOG_FRAC_BITS);
        int_part.to_f64().unwrap_or(f64::INFINITY)
            + frac.to_f64().unwrap_or(0.0) * 2f64.powi(-(LOG_FRAC_BITS as i32))
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs() / std::f64::consts::LN_10
    }

    /// `log10|x|` rendered with `decimals` fractional digits.
    pub fn log10_string(&self, decimals: usize) -> String {
        if self.is_zero() {
            return "-inf".to_string();
        }
        format!("{:.*}", decimals, self.log10_abs())
    }
}

impl PartialOrd for LogMagnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogMagnitude {
    fn cmp(&self, other: &Self) -> Ordering {
        let rank = |s: Sign| match s {
            Sign::Minus => 0,
            Sign::NoSign => 1,
            Sign::Plus => 2,
        };
        match rank(self.sign).cmp(&rank(other.sign)) {
            Ordering::Equal => match self.sign {
                Sign::NoSign => Ordering::Equal,
                Sign::Plus => self.log.cmp(&other.log),
                Sign::Minus => other.log.cmp(&self.log),
            },
            ord => ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_reduces_and_fixes_sign() {
        assert_eq!(normalize(BigInt::from(6), BigInt::from(-4)).unwrap(), rat(-3, 2));
        assert!(matches!(
            normalize(BigInt::from(1), BigInt::zero()),
            Err(Error::InvalidScalar(_))
        ));
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/10").unwrap(), rat(1, 10));
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rational("3e-2").unwrap(), rat(3, 100));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn log_magnitude_matches_float_logs() {
        let x = rat(1000, 1);
        let l = LogMagnitude::from_rational(&x);
        assert!((l.log10_abs() - 3.0).abs() < 1e-12);
        let tiny = rat(1, 1 << 40);
        assert!((LogMagnitude::from_rational(&tiny).ln_abs() + 40.0 * 2f64.ln()).abs() < 1e-12);
        let big = BigRational::from_integer(BigInt::one() << 5000usize);
        assert!((LogMagnitude::from_rational(&big).log10_abs() - 5000.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn log_magnitude_orders_like_values() {
        let a = LogMagnitude::from_rational(&rat(3, 7));
        let b = LogMagnitude::from_rational(&rat(4, 7));
        let c = LogMagnitude::from_rational(&rat(-5, 1));
        assert!(a < b);
        assert!(c < LogMagnitude::zero());
        assert!(LogMagnitude::zero() < a);
        assert_eq!(a.mul(&b).powi(2).sign(), Sign::Plus);
    }

    #[test]
    fn scientific_truncates() {
        assert_eq!(format_scientific(&rat(2, 3), 4), "6.666e-1");
        assert_eq!(format_scientific(&int(12345), 3), "1.23e4");
        assert_eq!(format_scientific(&int(1), 3), "1.00e0");
    }

    #[test]
    fn ceil_log2_exact_powers() {
        assert_eq!(ceil_log2(&rat(1, 1)), 0);
        assert_eq!(ceil_log2(&rat(3, 1)), 2);
        assert_eq!(ceil_log2(&rat(1, 42)), -5);
        assert_eq!(ceil_log2(&rat(1, 32)), -5);
    }

    #[test]
    fn enclosure_hull_and_checks() {
        let a = Enclosure::new(rat(-1, 2), rat(1, 3)).unwrap();
        let b = Enclosure::point(rat(2, 1));
        let h = a.hull(&b);
        assert_eq!(h, Enclosure::new(rat(-1, 2), int(2)).unwrap());
        assert!(Enclosure::new(int(1), int(0)).is_err());
        assert_eq!(a.abs_max(), rat(1, 2));
    }
}

//! Dense univariate polynomials with exact rational coefficients.
//!
//! A [`Poly`] stores integer numerators over one shared positive denominator,
//! reduced so that the numerators and the denominator have no common factor.
//! Coefficients are exposed as [`BigRational`] values in ascending powers.

mod bernstein;

pub use bernstein::{certify_bounds, range_enclosure, BernsteinForm, BoundsFailure, DEFAULT_DEPTH_LIMIT};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::{lcm_upto, parse_rational};

/// Below this length (of the shorter operand) products use the schoolbook loop.
const KRONECKER_THRESHOLD: usize = 24;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    num: Vec<BigInt>,
    den: BigInt,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs().iter().map(|c| c.to_string())).finish()
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly {
            num: Vec::new(),
            den: BigInt::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(&BigRational::one())
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn constant(c: &BigRational) -> Self {
        Self::from_parts(vec![c.numer().clone()], c.denom().clone())
    }

    /// `c0 + c1 x`.
    pub fn linear(c0: &BigRational, c1: &BigRational) -> Self {
        Self::from_coeffs(&[c0.clone(), c1.clone()])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_parts(coeffs.iter().map(|&c| BigInt::from(c)).collect(), BigInt::one())
    }

    pub fn from_coeffs(coeffs: &[BigRational]) -> Self {
        let den = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Self::from_parts(num, den)
    }

    /// Builds `(Σ num_k x^k) / den`. Panics if `den` is zero.
    pub fn from_parts(mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        assert!(!den.is_zero(), "polynomial denominator must be nonzero");
        while num.last().is_some_and(|c| c.is_zero()) {
            num.pop();
        }
        if num.is_empty() {
            return Self::zero();
        }
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -std::mem::take(c);
            }
        }
        let mut g = den.clone();
        for c in &num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() {
            for c in num.iter_mut() {
                *c /= &g;
            }
            den /= &g;
        }
        Poly { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.num.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.num.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num.is_empty()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        match self.num.get(k) {
            Some(c) => BigRational::new(c.clone(), self.den.clone()),
            None => BigRational::zero(),
        }
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        (0..self.num.len()).map(|k| self.coeff(k)).collect()
    }

    /// Largest bit length among numerators and the denominator.
    pub fn max_bits(&self) -> u64 {
        self.num
            .iter()
            .map(|c| c.bits())
            .max()
            .unwrap_or(0)
            .max(self.den.bits())
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        Self::from_parts(
            self.num.iter().map(|v| v * c.numer()).collect(),
            &self.den * c.denom(),
        )
    }

    pub fn add_constant(&self, c: &BigRational) -> Poly {
        self + &Poly::constant(c)
    }

    pub fn square(&self) -> Poly {
        self * self
    }

    /// Product of all factors, multiplied in a balanced tree.
    pub fn product(factors: &[Poly]) -> Poly {
        match factors.len() {
            0 => Poly::one(),
            1 => factors[0].clone(),
            n => {
                let (a, b) = factors.split_at(n / 2);
                &Poly::product(a) * &Poly::product(b)
            }
        }
    }

    pub fn differentiate(&self) -> Poly {
        if self.num.len() <= 1 {
            return Poly::zero();
        }
        let num = self
            .num
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k)
            .collect();
        Self::from_parts(num, self.den.clone())
    }

    pub fn nth_derivative(&self, k: usize) -> Poly {
        (0..k).fold(self.clone(), |p, _| p.differentiate())
    }

    /// Exact value of the integral over `[0, 1]`.
    pub fn definite_integral_01(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let l = lcm_upto(self.num.len());
        let mut acc = BigInt::zero();
        for (k, c) in self.num.iter().enumerate() {
            acc += c * (&l / (k + 1));
        }
        BigRational::new(acc, l * &self.den)
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let num = self.eval_scaled(x.numer(), x.denom());
        let den = self.eval_den(x.denom());
        if !is_power_of_two(x.denom()) {
            return BigRational::new(num, den);
        }
        if num.is_zero() {
            return BigRational::zero();
        }
        // the odd part of the denominator is small, so reduce by hand
        let tz = num.trailing_zeros().unwrap_or(0).min(den.trailing_zeros().unwrap_or(0));
        let (num, den) = (num >> tz, den >> tz);
        let g = den.gcd(&(&num % &den));
        BigRational::new_raw(num / &g, den / &g)
    }

    /// Sign of the value at `x`, without building the reduced rational.
    pub fn sign_at(&self, x: &BigRational) -> Sign {
        self.eval_scaled(x.numer(), x.denom()).sign()
    }

    /// `Σ num_k p^k q^(D-k)`, the homogeneous numerator of `p(p/q)`.
    fn eval_scaled(&self, p: &BigInt, q: &BigInt) -> BigInt {
        let Some(last) = self.num.last() else {
            return BigInt::zero();
        };
        let mut acc = last.clone();
        if q.is_one() {
            for c in self.num.iter().rev().skip(1) {
                acc = acc * p + c;
            }
            return acc;
        }
        if is_power_of_two(q) {
            let e = q.bits() as usize - 1;
            for (k, c) in self.num.iter().rev().skip(1).enumerate() {
                acc = acc * p + (c << (e * (k + 1)));
            }
            return acc;
        }
        let mut qpow = BigInt::one();
        for c in self.num.iter().rev().skip(1) {
            qpow *= q;
            acc = acc * p + c * &qpow;
        }
        acc
    }

    fn eval_den(&self, q: &BigInt) -> BigInt {
        num_traits::pow(q.clone(), self.degree()) * &self.den
    }

    /// `p(x + c)`.
    pub fn taylor_shift(&self, c: &BigRational) -> Poly {
        if self.num.len() <= 1 || c.is_zero() {
            return self.clone();
        }
        let d = self.degree();
        let a = c.numer();
        let b = c.denom();
        let b_pows = powers(b, d);
        let mut w: Vec<BigInt> = self
            .num
            .iter()
            .enumerate()
            .map(|(k, v)| v * &b_pows[d - k])
            .collect();
        shift_integer(&mut w, a);
        for (k, v) in w.iter_mut().enumerate() {
            *v *= &b_pows[k];
        }
        Self::from_parts(w, &self.den * &b_pows[d])
    }

    /// `p(h x)`.
    pub fn scale_variable(&self, h: &BigRational) -> Poly {
        let d = self.degree();
        let up = powers(h.numer(), d);
        let down = powers(h.denom(), d);
        let num = self
            .num
            .iter()
            .enumerate()
            .map(|(k, v)| v * &up[k] * &down[d - k])
            .collect();
        Self::from_parts(num, &self.den * &down[d])
    }

    /// `p(a + h x)`, mapping `[0, 1]` onto `[a, a + h]`.
    pub fn compose_affine(&self, a: &BigRational, h: &BigRational) -> Poly {
        self.taylor_shift(a).scale_variable(h)
    }

    /// Divides by `(x - r)`, returning the quotient and the remainder `p(r)`.
    pub fn divide_linear(&self, r: &BigRational) -> (Poly, BigRational) {
        if self.num.len() <= 1 {
            return (Poly::zero(), self.coeff(0));
        }
        let d = self.degree();
        let a = r.numer();
        let b = r.denom();
        let b_pows = powers(b, d);
        // q_k scaled by den * b^(d-1-k)
        let mut q = vec![BigInt::zero(); d];
        q[d - 1] = self.num[d].clone();
        for k in (1..d).rev() {
            q[k - 1] = &self.num[k] * &b_pows[d - k] + a * &q[k];
        }
        let rem = &self.num[0] * &b_pows[d] + a * &q[0];
        for (k, v) in q.iter_mut().enumerate() {
            *v *= &b_pows[k];
        }
        (
            Self::from_parts(q, &self.den * &b_pows[d - 1]),
            BigRational::new(rem, &self.den * &b_pows[d]),
        )
    }

    /// Rounds every coefficient to the nearest multiple of `2^-bits` (ties away from zero).
    pub fn dyadic_round(&self, bits: u32) -> Poly {
        let two_den = &self.den << 1usize;
        let num = self
            .num
            .iter()
            .map(|c| {
                let scaled = (c << (bits as usize + 1)) + if c.is_negative() { -&self.den } else { self.den.clone() };
                // truncating division rounds the half-offset value to nearest
                &scaled / &two_den
            })
            .collect();
        Self::from_parts(num, BigInt::one() << bits as usize)
    }

    /// `Σ |c_k|`, a bound for `|p|` on `[-1, 1]`.
    pub fn l1_norm(&self) -> BigRational {
        let s = self.num.iter().fold(BigInt::zero(), |acc, c| acc + c.abs());
        BigRational::new(s, self.den.clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs()
                .iter()
                .map(|c| serde_json::Value::String(c.to_string()))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Poly> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::parse("polynomial", "expected an array of rational strings"))?;
        let coeffs = arr
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let s = c
                    .as_str()
                    .ok_or_else(|| Error::parse(format!("coefficient {k}"), "expected a string"))?;
                parse_rational(s).map_err(|e| Error::parse(format!("coefficient {k}"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::from_coeffs(&coeffs))
    }

    /// Floating-point coefficients, lossy. Only meaningful for small, well-scaled polynomials.
    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs().iter().map(crate::numeric::to_f64).collect()
    }

    /// Exact integer numerator vector scaled to a given common denominator multiple.
    pub(crate) fn parts(&self) -> (&[BigInt], &BigInt) {
        (&self.num, &self.den)
    }
}

fn powers(b: &BigInt, d: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(d + 1);
    out.push(BigInt::one());
    if b.is_one() {
        out.resize(d + 1, BigInt::one());
        return out;
    }
    for k in 1..=d {
        let next = &out[k - 1] * b;
        out.push(next);
    }
    out
}

fn is_power_of_two(q: &BigInt) -> bool {
    q.is_positive() && q.trailing_zeros() == Some(q.bits() - 1)
}

/// In place, replaces the coefficients of `w(z)` by those of `w(z + a)`.
pub(crate) fn shift_integer(w: &mut [BigInt], a: &BigInt) {
    let n = w.len();
    if n <= 1 || a.is_zero() {
        return;
    }
    let small = a.to_i64();
    for i in 0..n - 1 {
        for j in (i..n - 1).rev() {
            let (lo, hi) = w.split_at_mut(j + 1);
            let next = &hi[0];
            match small {
                Some(1) => lo[j] += next,
                Some(-1) => lo[j] -= next,
                _ => lo[j] += next * a,
            }
        }
    }
}

pub(crate) fn mul_integer_vectors(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) < KRONECKER_THRESHOLD {
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    kronecker(a, b)
}

/// Packs both coefficient vectors into single integers, multiplies once, and unpacks.
fn kronecker(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let bits = |v: &[BigInt]| v.iter().map(|c| c.bits()).max().unwrap_or(0);
    let shorter = a.len().min(b.len()) as u64;
    let slot_bits = bits(a) + bits(b) + (64 - shorter.leading_zeros() as u64) + 2;
    let w = slot_bits.div_ceil(32) as usize;
    let count = a.len() + b.len() - 1;
    let product = pack(a, w) * pack(b, w);
    unpack(&product, w, count)
}

fn pack(v: &[BigInt], w: usize) -> BigInt {
    let mut pos = vec![0u32; v.len() * w];
    let mut neg = vec![0u32; v.len() * w];
    let mut any_neg = false;
    for (i, c) in v.iter().enumerate() {
        let (sign, digits) = c.to_u32_digits();
        let target = if sign == Sign::Minus {
            any_neg = true;
            &mut neg
        } else {
            &mut pos
        };
        target[i * w..i * w + digits.len()].copy_from_slice(&digits);
    }
    let p = BigInt::from_biguint(Sign::Plus, BigUint::new(pos));
    if any_neg {
        p - BigInt::from_biguint(Sign::Plus, BigUint::new(neg))
    } else {
        p
    }
}

fn unpack(c: &BigInt, w: usize, count: usize) -> Vec<BigInt> {
    let total = count * w;
    let residue: BigUint = if c.sign() == Sign::Minus {
        (BigUint::one() << (32 * total)) - c.magnitude()
    } else {
        c.magnitude().clone()
    };
    let mut digits = residue.to_u32_digits();
    digits.resize(total, 0);
    let half = BigUint::one() << (32 * w - 1);
    let full = BigInt::one() << (32 * w);
    let mut carry = false;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut v = BigUint::from_slice(&digits[i * w..(i + 1) * w]);
        if carry {
            v += 1u32;
        }
        if v >= half {
            out.push(BigInt::from(v) - &full);
            carry = true;
        } else {
            out.push(BigInt::from(v));
            carry = false;
        }
    }
    out
}

fn add_sub(p: &Poly, q: &Poly, negate_q: bool) -> Poly {
    let n = p.num.len().max(q.num.len());
    let (mp, mq, den) = if p.den == q.den {
        (BigInt::one(), BigInt::one(), p.den.clone())
    } else {
        let l = p.den.lcm(&q.den);
        (&l / &p.den, &l / &q.den, l)
    };
    let mut num = Vec::with_capacity(n);
    for k in 0..n {
        let a = p.num.get(k).map(|v| v * &mp).unwrap_or_default();
        let b = q.num.get(k).map(|v| v * &mq).unwrap_or_default();
        num.push(if negate_q { a - b } else { a + b });
    }
    Poly::from_parts(num, den)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        add_sub(self, rhs, false)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        add_sub(self, rhs, true)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        Poly::from_parts(mul_integer_vectors(&self.num, &rhs.num), &self.den * &rhs.den)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    fn p(c: &[i64]) -> Poly {
        Poly::from_i64(c)
    }

    #[test]
    fn multiply_small_cases() {
        assert_eq!(&p(&[1, 1]) * &p(&[1, -1]), p(&[1, 0, -1]));
        assert!((&p(&[3, 4, 5]) * &Poly::zero()).is_zero());
    }

    #[test]
    fn kronecker_matches_schoolbook() {
        let a: Vec<BigInt> = (0..60).map(|k| BigInt::from((k * 7919 % 101) as i64 - 50) << (k % 9 * 13)).collect();
        let b: Vec<BigInt> = (0..45).map(|k| BigInt::from((k * 104729 % 97) as i64 - 48) * BigInt::from(k + 1).pow(5)).collect();
        let mut school = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                school[i + j] += x * y;
            }
        }
        assert_eq!(kronecker(&a, &b), school);
    }

    #[test]
    fn derivative_and_integral_basics() {
        assert_eq!(p(&[0, 0, 1]).differentiate(), p(&[0, 2]));
        assert!(p(&[5]).differentiate().is_zero());
        assert_eq!(p(&[0, 1]).definite_integral_01(), rat(1, 2));
        assert_eq!(p(&[0, 0, 3]).definite_integral_01(), int(1));
    }

    #[test]
    fn taylor_shift_examples() {
        assert_eq!(p(&[0, 0, 1]).taylor_shift(&int(1)), p(&[1, 2, 1]));
        let q = p(&[3, -1, 4, 1, -5]);
        assert_eq!(q.taylor_shift(&BigRational::zero()), q);
        let c = rat(7, 13);
        assert_eq!(q.taylor_shift(&c).taylor_shift(&-c), q);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p(&[1, 0, -1]).eval(&int(1)), BigRational::zero());
        assert_eq!(p(&[4, 2]).eval(&BigRational::zero()), int(4));
        assert_eq!(p(&[1, 1, 1]).eval(&rat(1, 2)), rat(7, 4));
    }

    #[test]
    fn divide_linear_recovers_factor() {
        let r = rat(2, 3);
        let q = p(&[1, -2, 0, 5]);
        let prod = &q * &Poly::linear(&-r.clone(), &int(1));
        let (quot, rem) = prod.divide_linear(&r);
        assert_eq!(quot, q);
        assert!(rem.is_zero());
        let (_, rem) = q.divide_linear(&r);
        assert_eq!(rem, q.eval(&r));
    }

    #[test]
    fn dyadic_round_is_nearest() {
        let q = Poly::from_coeffs(&[rat(1, 3), rat(-1, 3), rat(3, 8)]);
        let r = q.dyadic_round(4);
        assert_eq!(r.coeffs(), vec![rat(5, 16), rat(-5, 16), rat(6, 16)]);
    }

    #[test]
    fn json_round_trip() {
        let q = Poly::from_coeffs(&[int(1), rat(-3, 2), int(0), rat(1, 4)]);
        let v = q.to_json();
        assert_eq!(v, serde_json::json!(["1", "-3/2", "0", "1/4"]));
        assert_eq!(Poly::from_json(&v).unwrap(), q);
    }

    #[test]
    fn canonical_form_is_unique() {
        let a = Poly::from_parts(vec![BigInt::from(2), BigInt::from(4)], BigInt::from(-6));
        let b = Poly::from_coeffs(&[rat(-1, 3), rat(-2, 3)]);
        assert_eq!(a, b);
        assert_eq!(b.denominator(), &BigInt::from(3));
    }
}

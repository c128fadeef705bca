use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{shift_integer, Poly};
use crate::error::{Error, Result};
use crate::numeric::{lcm_upto, Enclosure};

pub const DEFAULT_DEPTH_LIMIT: u32 = 40;

/// Bernstein coefficients `coeffs[j] / den` of a polynomial on `[a, b]`.
#[derive(Clone, Debug)]
pub struct BernsteinForm {
    coeffs: Vec<BigInt>,
    den: BigInt,
    a: BigRational,
    b: BigRational,
    depth: u32,
}

impl BernsteinForm {
    pub fn new(p: &Poly, a: &BigRational, b: &BigRational) -> Self {
        let n = p.degree();
        let local = p.compose_affine(a, &(b - a));
        let (num, den) = local.parts();
        let mut rev: Vec<BigInt> = (0..=n)
            .map(|k| num.get(n - k).cloned().unwrap_or_default())
            .collect();
        shift_integer(&mut rev, &BigInt::one());
        // b_j = rev[n-j] / C(n, j); scale everything by lcm_j C(n, j)
        let m = lcm_upto(n + 1) / (n + 1);
        let mut binom = BigInt::one();
        let mut coeffs = Vec::with_capacity(n + 1);
        for j in 0..=n {
            coeffs.push(&rev[n - j] * (&m / &binom));
            binom = binom * (n - j) / (j + 1);
        }
        let mut form = BernsteinForm {
            coeffs,
            den: den * m,
            a: a.clone(),
            b: b.clone(),
            depth: 0,
        };
        form.reduce_content();
        form
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn interval(&self) -> (&BigRational, &BigRational) {
        (&self.a, &self.b)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn coeff(&self, j: usize) -> BigRational {
        BigRational::new(self.coeffs[j].clone(), self.den.clone())
    }

    pub(crate) fn integer_parts(&self) -> (&[BigInt], &BigInt) {
        (&self.coeffs, &self.den)
    }

    /// Coefficient hull, which contains the range of the polynomial on the interval.
    pub fn hull(&self) -> Enclosure {
        let (lo, hi) = self.min_max();
        Enclosure {
            lo: BigRational::new(lo.clone(), self.den.clone()),
            hi: BigRational::new(hi.clone(), self.den.clone()),
        }
    }

    fn min_max(&self) -> (&BigInt, &BigInt) {
        let mut lo = &self.coeffs[0];
        let mut hi = &self.coeffs[0];
        for c in &self.coeffs[1..] {
            if c < lo {
                lo = c;
            }
            if c > hi {
                hi = c;
            }
        }
        (lo, hi)
    }

    /// Exact values at the left and right endpoints.
    pub fn endpoint_values(&self) -> (BigRational, BigRational) {
        (self.coeff(0), self.coeff(self.degree()))
    }

    /// Splits at the midpoint by de Casteljau's algorithm.
    pub fn split(&self) -> (BernsteinForm, BernsteinForm) {
        let n = self.degree();
        let mut work = self.coeffs.clone();
        let mut left = Vec::with_capacity(n + 1);
        let mut right = vec![BigInt::zero(); n + 1];
        left.push(&work[0] << n);
        right[n] = &work[n] << n;
        for level in 1..=n {
            for i in 0..=n - level {
                let (lo, hi) = work.split_at_mut(i + 1);
                lo[i] += &hi[0];
            }
            // work[i] now holds 2^level times the level-th de Casteljau value
            left.push(&work[0] << (n - level));
            right[n - level] = &work[n - level] << (n - level);
        }
        let mid = (&self.a + &self.b) / BigRational::from_integer(BigInt::from(2));
        let den = &self.den << n;
        let mut l = BernsteinForm {
            coeffs: left,
            den: den.clone(),
            a: self.a.clone(),
            b: mid.clone(),
            depth: self.depth + 1,
        };
        let mut r = BernsteinForm {
            coeffs: right,
            den,
            a: mid,
            b: self.b.clone(),
            depth: self.depth + 1,
        };
        l.reduce_twos();
        r.reduce_twos();
        (l, r)
    }

    fn reduce_twos(&mut self) {
        let mut t = self.den.trailing_zeros().unwrap_or(0);
        for c in &self.coeffs {
            if t == 0 {
                return;
            }
            if let Some(z) = c.trailing_zeros() {
                t = t.min(z);
            }
        }
        if t > 0 {
            for c in self.coeffs.iter_mut() {
                *c >>= t as usize;
            }
            self.den >>= t as usize;
        }
    }

    fn reduce_content(&mut self) {
        let mut g = self.den.clone();
        for c in &self.coeffs {
            if g.is_one() {
                return;
            }
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            for c in self.coeffs.iter_mut() {
                *c /= &g;
            }
            self.den /= &g;
        }
    }

    /// Forward differences of order `k` of the integer coefficients.
    pub(crate) fn forward_differences(&self) -> impl Iterator<Item = Vec<BigInt>> + '_ {
        let mut current = self.coeffs.clone();
        let mut first = true;
        std::iter::from_fn(move || {
            if first {
                first = false;
                return Some(current.clone());
            }
            if current.len() <= 1 {
                return None;
            }
            current = current.windows(2).map(|w| &w[1] - &w[0]).collect();
            Some(current.clone())
        })
    }
}

/// Why a bounds check did not go through.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsFailure {
    /// Subinterval where the check stopped.
    pub interval: (BigRational, BigRational),
    /// Coefficient hull on that subinterval.
    pub hull: Enclosure,
    /// An exact value outside the bounds, when one was found.
    pub violation: Option<(BigRational, BigRational)>,
}

impl std::fmt::Display for BoundsFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.violation {
            Some((x, v)) => write!(f, "value {v} at x = {x} is out of bounds"),
            None => write!(
                f,
                "hull {} on [{}, {}] not resolved within the depth limit",
                self.hull, self.interval.0, self.interval.1
            ),
        }
    }
}

/// Up to this degree [`certify_bounds`] subdivides in exact arithmetic, which
/// also settles bounds that are attained exactly.
const EXACT_DEGREE_LIMIT: usize = 24;

fn certify_bounds_exact(
    p: &Poly,
    a: &BigRational,
    b: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
    depth_limit: u32,
) -> std::result::Result<Enclosure, BoundsFailure> {
    let mut stack = vec![BernsteinForm::new(p, a, b)];
    let mut acc: Option<Enclosure> = None;
    while let Some(node) = stack.pop() {
        let den = BigRational::from_integer(node.den.clone());
        let t_lo = (lo * &den).ceil().to_integer();
        let t_hi = (hi * &den).floor().to_integer();
        let (cmin, cmax) = node.min_max();
        if *cmin >= t_lo && *cmax <= t_hi {
            let h = node.hull();
            acc = Some(match acc {
                Some(e) => e.hull(&h),
                None => h,
            });
            continue;
        }
        let n = node.degree();
        for (idx, x) in [(0, &node.a), (n, &node.b)] {
            let c = &node.coeffs[idx];
            if *c < t_lo || *c > t_hi {
                return Err(BoundsFailure {
                    interval: (node.a.clone(), node.b.clone()),
                    hull: node.hull(),
                    violation: Some((x.clone(), node.coeff(idx))),
                });
            }
        }
        if node.depth >= depth_limit {
            return Err(BoundsFailure {
                interval: (node.a.clone(), node.b.clone()),
                hull: node.hull(),
                violation: None,
            });
        }
        let (l, r) = node.split();
        stack.push(r);
        stack.push(l);
    }
    Ok(acc.expect("at least one leaf"))
}

/// Fractional bits of the fixed-point grid used by [`certify_bounds`].
const FIXED_BITS: usize = 96;

#[derive(Clone, Debug)]
enum FixedCoeffs {
    Big(Vec<BigInt>),
    Small(Vec<i128>),
}

/// Bernstein coefficients on a `2^-FIXED_BITS` grid; each stored value is within
/// `err` grid units of the exact coefficient.
#[derive(Clone, Debug)]
struct FixedNode {
    coeffs: FixedCoeffs,
    err: u64,
    a: BigRational,
    b: BigRational,
    depth: u32,
}

impl FixedNode {
    fn from_exact(form: &BernsteinForm) -> Self {
        let coeffs = form
            .coeffs
            .iter()
            .map(|c| (c << FIXED_BITS).div_floor(&form.den))
            .collect();
        let mut node = FixedNode {
            coeffs: FixedCoeffs::Big(coeffs),
            err: 1,
            a: form.a.clone(),
            b: form.b.clone(),
            depth: form.depth,
        };
        node.compact();
        node
    }

    fn compact(&mut self) {
        if let FixedCoeffs::Big(v) = &self.coeffs {
            if v.iter().all(|c| c.bits() < 125) {
                let small = v.iter().map(|c| c.to_i128().expect("fits")).collect();
                self.coeffs = FixedCoeffs::Small(small);
            }
        }
    }

    fn degree(&self) -> usize {
        match &self.coeffs {
            FixedCoeffs::Big(v) => v.len() - 1,
            FixedCoeffs::Small(v) => v.len() - 1,
        }
    }

    /// `(min, max, left endpoint, right endpoint)` of the stored values.
    fn summary(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        match &self.coeffs {
            FixedCoeffs::Big(v) => (
                v.iter().min().expect("nonempty").clone(),
                v.iter().max().expect("nonempty").clone(),
                v[0].clone(),
                v[v.len() - 1].clone(),
            ),
            FixedCoeffs::Small(v) => (
                BigInt::from(*v.iter().min().expect("nonempty")),
                BigInt::from(*v.iter().max().expect("nonempty")),
                BigInt::from(v[0]),
                BigInt::from(v[v.len() - 1]),
            ),
        }
    }

    fn split(&self) -> (FixedNode, FixedNode) {
        let n = self.degree();
        let (lc, rc) = match &self.coeffs {
            FixedCoeffs::Small(v) => {
                let (l, r) = casteljau_halving(v, |x, y| *x = (*x + *y) >> 1);
                (FixedCoeffs::Small(l), FixedCoeffs::Small(r))
            }
            FixedCoeffs::Big(v) => {
                let (l, r) = casteljau_halving(v, |x, y| {
                    *x += y;
                    *x >>= 1usize;
                });
                (FixedCoeffs::Big(l), FixedCoeffs::Big(r))
            }
        };
        let mid = (&self.a + &self.b) / BigRational::from_integer(BigInt::from(2));
        // each halving level floors once, adding at most half a unit
        let err = self.err + n as u64;
        let mut l = FixedNode {
            coeffs: lc,
            err,
            a: self.a.clone(),
            b: mid.clone(),
            depth: self.depth + 1,
        };
        let mut r = FixedNode {
            coeffs: rc,
            err,
            a: mid,
            b: self.b.clone(),
            depth: self.depth + 1,
        };
        l.compact();
        r.compact();
        (l, r)
    }

    fn to_rational(&self, v: &BigInt) -> BigRational {
        BigRational::new(v.clone(), BigInt::one() << FIXED_BITS)
    }
}

/// De Casteljau at the midpoint where `avg` replaces its first argument by the rounded mean.
fn casteljau_halving<T: Clone>(v: &[T], avg: impl Fn(&mut T, &T)) -> (Vec<T>, Vec<T>) {
    let n = v.len() - 1;
    let mut work = v.to_vec();
    let mut left = Vec::with_capacity(n + 1);
    let mut right = v.to_vec();
    left.push(work[0].clone());
    for level in 1..=n {
        for i in 0..=n - level {
            let (lo, hi) = work.split_at_mut(i + 1);
            avg(&mut lo[i], &hi[0]);
        }
        left.push(work[0].clone());
        right[n - level] = work[n - level].clone();
    }
    (left, right)
}

/// Proves `lo <= p(x) <= hi` on `[a, b]` by subdividing only where the hull escapes.
///
/// The Bernstein form on `[a, b]` is computed exactly; subdivision then runs on a
/// fixed-point grid with a tracked error bound, so every accepted hull is still a
/// rigorous enclosure. On success returns the hull of all accepted leaf hulls.
pub fn certify_bounds(
    p: &Poly,
    a: &BigRational,
    b: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
    depth_limit: u32,
) -> std::result::Result<Enclosure, BoundsFailure> {
    if p.degree() <= EXACT_DEGREE_LIMIT {
        return certify_bounds_exact(p, a, b, lo, hi, depth_limit);
    }
    let scale = BigRational::from_integer(BigInt::one() << FIXED_BITS);
    let t_lo = (lo * &scale).ceil().to_integer();
    let t_hi = (hi * &scale).floor().to_integer();
    let mut stack = vec![FixedNode::from_exact(&BernsteinForm::new(p, a, b))];
    let mut acc: Option<Enclosure> = None;
    while let Some(node) = stack.pop() {
        let e = BigInt::from(node.err);
        let (cmin, cmax, left, right) = node.summary();
        if &cmin - &e >= t_lo && &cmax + &e <= t_hi {
            let h = Enclosure {
                lo: node.to_rational(&(&cmin - &e)),
                hi: node.to_rational(&(&cmax + &e)),
            };
            acc = Some(match acc {
                Some(prev) => prev.hull(&h),
                None => h,
            });
            continue;
        }
        let hull = Enclosure {
            lo: node.to_rational(&(&cmin - &e)),
            hi: node.to_rational(&(&cmax + &e)),
        };
        for (c, x) in [(&left, &node.a), (&right, &node.b)] {
            if c + &e < t_lo || c - &e > t_hi {
                return Err(BoundsFailure {
                    interval: (node.a.clone(), node.b.clone()),
                    hull,
                    violation: Some((x.clone(), p.eval(x))),
                });
            }
        }
        if node.depth >= depth_limit {
            return Err(BoundsFailure {
                interval: (node.a.clone(), node.b.clone()),
                hull,
                violation: None,
            });
        }
        let (l, r) = node.split();
        stack.push(r);
        stack.push(l);
    }
    Ok(acc.expect("at least one leaf"))
}

/// Guaranteed enclosures of the minimum and maximum of `p` on `[a, b]`, each of width at most `tol`.
pub fn range_enclosure(
    p: &Poly,
    a: &BigRational,
    b: &BigRational,
    tol: &BigRational,
    depth_limit: u32,
) -> Result<(Enclosure, Enclosure)> {
    if a >= b {
        return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
    }
    if !tol.is_positive() {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    struct Leaf {
        form: BernsteinForm,
        hull: Enclosure,
    }
    let root = BernsteinForm::new(p, a, b);
    let (va, vb) = root.endpoint_values();
    let mut max_lo = va.clone().max(vb.clone());
    let mut min_hi = va.min(vb);
    let mut leaves = vec![Leaf {
        hull: root.hull(),
        form: root,
    }];
    loop {
        let max_hi = leaves.iter().map(|l| &l.hull.hi).max().expect("nonempty").clone().max(max_lo.clone());
        let min_lo = leaves.iter().map(|l| &l.hull.lo).min().expect("nonempty").clone().min(min_hi.clone());
        let max_enc = Enclosure {
            lo: max_lo.clone(),
            hi: max_hi.clone(),
        };
        let min_enc = Enclosure {
            lo: min_lo.clone(),
            hi: min_hi.clone(),
        };
        let max_open = &max_enc.width() > tol;
        let min_open = &min_enc.width() > tol;
        if !max_open && !min_open {
            return Ok((min_enc, max_enc));
        }
        let pick = if max_open {
            leaves.iter().position(|l| l.hull.hi == max_hi)
        } else {
            leaves.iter().position(|l| l.hull.lo == min_lo)
        }
        .expect("extremal leaf exists");
        if leaves[pick].form.depth >= depth_limit {
            return Err(Error::EnclosureTooWide {
                depth: depth_limit,
                best: Box::new((min_enc, max_enc)),
            });
        }
        let leaf = leaves.swap_remove(pick);
        let (l, r) = leaf.form.split();
        let (_, mid_value) = l.endpoint_values();
        if mid_value > max_lo {
            max_lo = mid_value.clone();
        }
        if mid_value < min_hi {
            min_hi = mid_value;
        }
        for form in [l, r] {
            leaves.push(Leaf {
                hull: form.hull(),
                form,
            });
        }
        leaves.retain(|l| l.hull.hi > max_lo || l.hull.lo < min_hi);
        if leaves.is_empty() {
            // every remaining value is pinned by an exact sample
            return Ok((
                Enclosure::point(min_hi.clone()),
                Enclosure::point(max_lo.clone()),
            ));
        }
    }
}

//! Exact scalars of the form `p + q·α` with rational `p`, `q` and a fixed,
//! certified irrational `α`.
//!
//! Every endpoint in the crate lives in one of these fields. With `q = 0` a
//! scalar is an ordinary rational; rotation orbits by an irrational angle need
//! the `α` component to stay exact. Equality is componentwise (α is
//! irrational), and order is decided by refining rational brackets around α
//! taken from its continued-fraction convergents until the difference is
//! separated from zero.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Default number of oracle refinements a comparison may use.
pub const DEFAULT_REFINEMENT_BUDGET: u32 = 256;

static REFINEMENT_BUDGET: AtomicU32 = AtomicU32::new(DEFAULT_REFINEMENT_BUDGET);

/// Current comparison refinement budget.
pub fn refinement_budget() -> u32 {
    REFINEMENT_BUDGET.load(AtomicOrdering::Relaxed)
}

/// Replaces the process-wide comparison refinement budget and returns the old one.
pub fn set_refinement_budget(budget: u32) -> u32 {
    REFINEMENT_BUDGET.swap(budget.max(1), AtomicOrdering::Relaxed)
}

/// Builds `n / d` from machine integers. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `2^-k` as an exact rational.
/// `x·2^k` without a gcd: only powers of two move between the numerator
/// and the denominator, so a reduced input stays reduced.
pub fn shift_pow2(x: &Rational, k: i32) -> Rational {
    if x.is_zero() || k == 0 {
        return x.clone();
    }
    let (n, d) = (x.numer(), x.denom());
    let k_abs = k.unsigned_abs() as u64;
    if k > 0 {
        let s = d.trailing_zeros().unwrap_or(0).min(k_abs);
        Rational::new_raw(n << (k_abs - s) as usize, d >> s as usize)
    } else {
        let s = n.trailing_zeros().unwrap_or(0).min(k_abs);
        Rational::new_raw(n >> s as usize, d << (k_abs - s) as usize)
    }
}

pub fn dyadic(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

/// A built-in irrational with a known continued fraction.
///
/// User-supplied decimal angles are deliberately not representable: order
/// decisions depend on the number actually being irrational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IrrationalTag {
    /// `(√5 − 1)/2 = [0; 1, 1, 1, …]`
    GoldenConjugate,
    /// `√2 − 1 = [0; 2, 2, 2, …]`
    SqrtTwoMinusOne,
}

impl IrrationalTag {
    pub const ALL: [IrrationalTag; 2] = [IrrationalTag::GoldenConjugate, IrrationalTag::SqrtTwoMinusOne];

    pub fn name(self) -> &'static str {
        match self {
            IrrationalTag::GoldenConjugate => "golden",
            IrrationalTag::SqrtTwoMinusOne => "sqrt2m1",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }

    fn partial_quotient(self, index: usize) -> u32 {
        match (self, index) {
            (_, 0) => 0,
            (IrrationalTag::GoldenConjugate, _) => 1,
            (IrrationalTag::SqrtTwoMinusOne, _) => 2,
        }
    }

    /// Coefficients `(r, s)` with `α² = r + s·α`.
    fn square_reduction(self) -> (Rational, Rational) {
        match self {
            IrrationalTag::GoldenConjugate => (ratio(1, 1), ratio(-1, 1)),
            IrrationalTag::SqrtTwoMinusOne => (ratio(1, 1), ratio(-2, 1)),
        }
    }

    /// Continued-fraction convergents `p_n / q_n`, starting at `n = 0`.
    pub fn convergents(self) -> Convergents {
        Convergents {
            tag: self,
            index: 0,
            prev: (BigInt::one(), BigInt::zero()),
            prev2: (BigInt::zero(), BigInt::one()),
        }
    }

    /// Rational bracket `[l, u]` around α with `u − l ≤ 2^-precision`.
    ///
    /// Built from the consecutive convergents `n, n+1` with `n` the first index
    /// `≥ precision + 1` whose bracket is narrow enough, so brackets are nested
    /// as the precision grows.
    pub fn bounds(self, precision: u32) -> (Rational, Rational) {
        let target = BigInt::one() << precision as usize;
        let mut conv = self.convergents().skip(precision as usize + 1);
        let mut current = conv.next().expect("infinite expansion");
        loop {
            let next = conv.next().expect("infinite expansion");
            if current.1.clone() * next.1.clone() >= target {
                let a = Rational::new(current.0, current.1);
                let b = Rational::new(next.0, next.1);
                return if a <= b { (a, b) } else { (b, a) };
            }
            current = next;
        }
    }

    /// Successive brackets for `precision = 0, 1, 2, …`.
    fn refiner(self) -> Refiner {
        let mut conv = self.convergents();
        conv.next();
        let first = conv.next().expect("infinite expansion");
        Refiner { conv, current: first }
    }
}

impl fmt::Display for IrrationalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Iterator over `(p_n, q_n)`.
#[derive(Clone, Debug)]
pub struct Convergents {
    tag: IrrationalTag,
    index: usize,
    prev: (BigInt, BigInt),
    prev2: (BigInt, BigInt),
}

impl Iterator for Convergents {
    type Item = (BigInt, BigInt);

    fn next(&mut self) -> Option<Self::Item> {
        let a = BigInt::from(self.tag.partial_quotient(self.index));
        let p = &a * &self.prev.0 + &self.prev2.0;
        let q = &a * &self.prev.1 + &self.prev2.1;
        self.prev2 = std::mem::replace(&mut self.prev, (p.clone(), q.clone()));
        self.index += 1;
        Some((p, q))
    }
}

/// Walks consecutive convergent pairs. For both built-in tags the product of
/// consecutive denominators grows by more than 2 per step, so step `k` has
/// width at most `2^-k` (checked in tests against [`IrrationalTag::bounds`]).
struct Refiner {
    conv: Convergents,
    current: (BigInt, BigInt),
}

impl Refiner {
    fn next_bracket(&mut self) -> (Rational, Rational) {
        let next = self.conv.next().expect("infinite expansion");
        let a = Rational::new(self.current.0.clone(), self.current.1.clone());
        let b = Rational::new(next.0.clone(), next.1.clone());
        self.current = next;
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

/// Exact value `p + q·α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    p: Rational,
    q: Rational,
    tag: Option<IrrationalTag>,
}

impl Scalar {
    /// Canonical constructor: the tag is dropped when `q = 0`.
    pub fn new(p: Rational, q: Rational, tag: Option<IrrationalTag>) -> Result<Self> {
        if !q.is_zero() && tag.is_none() {
            return Err(Error::IncompatibleBasis(
                "irrational coefficient without an irrational tag".into(),
            ));
        }
        Ok(Self::canonical(p, q, tag))
    }

    fn canonical(p: Rational, q: Rational, tag: Option<IrrationalTag>) -> Self {
        let tag = if q.is_zero() { None } else { tag };
        Scalar { p, q, tag }
    }

    pub fn rational(p: Rational) -> Self {
        Scalar { p, q: Rational::zero(), tag: None }
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::rational(ratio(n, d))
    }

    pub fn integer(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    /// `2^-k`.
    pub fn dyadic(k: u32) -> Self {
        Self::rational(dyadic(k))
    }

    /// The irrational itself.
    pub fn alpha(tag: IrrationalTag) -> Self {
        Scalar { p: Rational::zero(), q: Rational::one(), tag: Some(tag) }
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn tag(&self) -> Option<IrrationalTag> {
        self.tag
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.p)
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    fn joint_tag(&self, other: &Scalar) -> Result<Option<IrrationalTag>> {
        match (self.tag, other.tag) {
            (None, t) | (t, None) => Ok(t),
            (Some(a), Some(b)) if a == b => Ok(Some(a)),
            (Some(a), Some(b)) => Err(Error::IncompatibleBasis(format!("{a} vs {b}"))),
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        let tag = self.joint_tag(other)?;
        Ok(Self::canonical(&self.p + &other.p, &self.q + &other.q, tag))
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar> {
        let tag = self.joint_tag(other)?;
        Ok(Self::canonical(&self.p - &other.p, &self.q - &other.q, tag))
    }

    pub fn neg(&self) -> Scalar {
        Self::canonical(-self.p.clone(), -self.q.clone(), self.tag)
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        let tag = self.joint_tag(other)?;
        let (mut p, mut q) = (&self.p * &other.p, &self.p * &other.q + &self.q * &other.p);
        let qq = &self.q * &other.q;
        if let (Some(tag), false) = (tag, qq.is_zero()) {
            let (r, s) = tag.square_reduction();
            p += &qq * r;
            q += qq * s;
        }
        Ok(Self::canonical(p, q, tag))
    }

    /// Multiplication by a rational; never fails.
    pub fn scale(&self, factor: &Rational) -> Scalar {
        Self::canonical(&self.p * factor, &self.q * factor, self.tag)
    }

    /// Multiplication by `2^k`, done by shifting.
    pub fn scale_pow2(&self, k: i32) -> Scalar {
        Self::canonical(shift_pow2(&self.p, k), shift_pow2(&self.q, k), self.tag)
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let tag = self.joint_tag(other)?;
        match (tag, other.is_rational()) {
            (_, true) => Ok(self.scale(&other.p.recip())),
            (None, false) => unreachable!("irrational divisor always carries a tag"),
            (Some(tag), false) => {
                // For c + dα the product with its conjugate (c + d·s) − dα is the
                // rational norm c² + c·d·s − d²·r, which is non-zero because α is irrational.
                let (r, s) = tag.square_reduction();
                let (c, d) = (&other.p, &other.q);
                let conj = Self::canonical(c + d * &s, -d.clone(), Some(tag));
                let norm = c * c + c * d * &s - d * d * &r;
                Ok(self.try_mul(&conj)?.scale(&norm.recip()))
            }
        }
    }

    /// Exact comparison under the process-wide refinement budget.
    pub fn try_cmp(&self, other: &Scalar) -> Result<Ordering> {
        self.cmp_with_budget(other, refinement_budget()).map(|(ord, _)| ord)
    }

    /// Exact comparison, also reporting how many oracle refinements were needed.
    pub fn cmp_with_budget(&self, other: &Scalar, budget: u32) -> Result<(Ordering, u32)> {
        let tag = self.joint_tag(other)?;
        if self.q == other.q {
            return Ok((self.p.cmp(&other.p), 0));
        }
        let dp = &self.p - &other.p;
        let dq = &self.q - &other.q;
        let tag = match tag {
            Some(tag) if !dq.is_zero() => tag,
            _ => return Ok((dp.cmp(&Rational::zero()), 0)),
        };
        let mut refiner = tag.refiner();
        for step in 1..=budget {
            let (l, u) = refiner.next_bracket();
            let (lo, hi) = value_range(&dp, &dq, &l, &u);
            if lo.is_positive() {
                return Ok((Ordering::Greater, step));
            }
            if hi.is_negative() {
                return Ok((Ordering::Less, step));
            }
        }
        Err(Error::RefinementBudgetExhausted { budget })
    }

    pub fn lt(&self, other: &Scalar) -> Result<bool> {
        Ok(self.try_cmp(other)? == Ordering::Less)
    }

    pub fn le(&self, other: &Scalar) -> Result<bool> {
        Ok(self.try_cmp(other)? != Ordering::Greater)
    }

    pub fn signum(&self) -> Result<Ordering> {
        self.try_cmp(&Scalar::zero())
    }

    pub fn is_positive(&self) -> Result<bool> {
        Ok(self.signum()? == Ordering::Greater)
    }

    pub fn try_min(&self, other: &Scalar) -> Result<Scalar> {
        Ok(if self.le(other)? { self.clone() } else { other.clone() })
    }

    pub fn try_max(&self, other: &Scalar) -> Result<Scalar> {
        Ok(if self.le(other)? { other.clone() } else { self.clone() })
    }

    pub fn abs(&self) -> Result<Scalar> {
        Ok(if self.signum()? == Ordering::Less { self.neg() } else { self.clone() })
    }

    /// Rational bracket containing the value, refined `steps` times.
    pub fn bracket(&self, steps: u32) -> (Rational, Rational) {
        match self.tag {
            None => (self.p.clone(), self.p.clone()),
            Some(tag) => {
                let mut refiner = tag.refiner();
                let mut b = refiner.next_bracket();
                for _ in 0..steps {
                    b = refiner.next_bracket();
                }
                value_range(&self.p, &self.q, &b.0, &b.1)
            }
        }
    }

    /// The integer `k` with `k ≤ self < k + 1`.
    pub fn floor(&self) -> Result<BigInt> {
        let Some(tag) = self.tag else {
            return Ok(self.p.floor().to_integer());
        };
        let mut refiner = tag.refiner();
        let budget = refinement_budget();
        for _ in 0..budget {
            let (l, u) = refiner.next_bracket();
            let (lo, hi) = value_range(&self.p, &self.q, &l, &u);
            // The value is irrational, so it is never an integer and the
            // brackets eventually fall inside one unit cell.
            let (fl, fh) = (lo.floor(), hi.floor());
            if fl == fh && hi != fh {
                return Ok(fl.to_integer());
            }
        }
        Err(Error::RefinementBudgetExhausted { budget })
    }

    /// `self − k` for the integer `k` putting the result in `[0, 1)`.
    pub fn mod1(&self) -> Result<Scalar> {
        let k = self.floor()?;
        Ok(Self::canonical(&self.p - Rational::from_integer(k), self.q.clone(), self.tag))
    }

    /// Fixed-point decimal with `digits` fractional digits, rounded toward zero.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), digits));
        let truncate = |x: &Rational| (x * &scale).trunc().to_integer();
        let t = match self.tag {
            None => truncate(&self.p),
            Some(tag) => {
                let mut refiner = tag.refiner();
                let mut last = BigInt::zero();
                for _ in 0..refinement_budget().saturating_mul(4) {
                    let (l, u) = refiner.next_bracket();
                    let (lo, hi) = value_range(&self.p, &self.q, &l, &u);
                    let (a, b) = (truncate(&lo), truncate(&hi));
                    // Truncation is monotone except across zero, where both
                    // ends truncate to 0 exactly when |value| < 10^-digits.
                    if a == b {
                        last = a;
                        break;
                    }
                    last = a;
                }
                last
            }
        };
        render_fixed(&t, digits, self.is_negative_hint())
    }

    fn is_negative_hint(&self) -> bool {
        matches!(self.signum(), Ok(Ordering::Less))
    }

    /// Lossy conversion for plotting.
    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.bracket(40);
        let mid = (lo + hi) / Rational::from_integer(BigInt::from(2));
        mid.to_f64().unwrap_or(f64::NAN)
    }

    /// Report rendering: decimal with a leading `~` when the value is irrational.
    pub fn to_report_decimal(&self, digits: usize) -> String {
        let d = self.to_decimal(digits);
        if self.is_rational() {
            d
        } else {
            format!("~{d}")
        }
    }

    /// Parses `p`, `p+q*alpha` or `p-q*alpha`; `alpha` resolves to `tag`.
    pub fn parse(text: &str, tag: Option<IrrationalTag>) -> Result<Scalar> {
        let text = text.trim();
        let parse_rational = |s: &str| -> Result<Rational> {
            let s = s.trim();
            Rational::from_str(s).map_err(|_| Error::Parse(format!("bad rational `{s}`")))
        };
        let Some(body) = text.strip_suffix("*alpha") else {
            return Ok(Scalar::rational(parse_rational(text)?));
        };
        let tag = tag.ok_or_else(|| {
            Error::Parse(format!("`{text}` uses alpha but no irrational is in scope"))
        })?;
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| (c == '+' || c == '-') && !body[..i].ends_with('/'))
            .map(|(i, _)| i)
            .last();
        let (p, q) = match split {
            Some(i) => {
                let q = &body[i..];
                (parse_rational(&body[..i])?, parse_rational(q.strip_prefix('+').unwrap_or(q))?)
            }
            None => (Rational::zero(), parse_rational(body)?),
        };
        Ok(Self::canonical(p, q, Some(tag)))
    }
}

fn value_range(p: &Rational, q: &Rational, l: &Rational, u: &Rational) -> (Rational, Rational) {
    let a = p + q * l;
    let b = p + q * u;
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn render_fixed(truncated: &BigInt, digits: usize, negative: bool) -> String {
    let (quot, rem) = truncated.abs().div_rem(&num_traits::pow(BigInt::from(10), digits));
    let sign = if negative && !truncated.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{quot}")
    } else {
        format!("{sign}{quot}.{rem:0>digits$}")
    }
}

impl fmt::Display for Scalar {
    /// Exact form: `p` or `p+q*alpha` / `p-q*alpha`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            write!(f, "{}", self.p)
        } else if self.q.is_negative() {
            write!(f, "{}-{}*alpha", self.p, -self.q.clone())
        } else {
            write!(f, "{}+{}*alpha", self.p, self.q)
        }
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::rational(r)
    }
}

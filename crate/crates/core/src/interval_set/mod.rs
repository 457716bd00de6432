//! Exact algebra of measurable subsets of `[0, 1)`.
//!
//! A set is a normalized finite union of half-open intervals together with a
//! few *parity tails*. A tail is anchored at a dyadic point `c` approached from
//! one side and consists of every other block of the geometric partition
//! accumulating at `c`:
//!
//! ```text
//! below c:  block k = [c − 2^-k, c − 2^-(k+1))
//! above c:  block k = [c + 2^-(k+1), c + 2^-k)
//! ```
//!
//! The Kakutani blocks `I_n = [1 − 2^-n, 1 − 2^-(n+1))` are the blocks below 1
//! (`tail(one, …)`), and `D_n = [2^-(n+1), 2^-n)` are the blocks above 0
//! (`tail(zero, …)`). Consecutive blocks of both parities always collapse into
//! an interval, so a canonical set holds at most one tail per anchor.
//!
//! Boolean operations pick a common depth `M` at which every anchor has a small
//! neighbourhood free of finite endpoints, run the interval algebra outside
//! those neighbourhoods and a two-bit parity algebra inside them, and then
//! re-extend each surviving tail downward as far as the set allows. The result
//! is a unique normal form, so set equality is structural equality.

mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{dyadic, shift_pow2, Rational, Scalar};

/// Default maximum number of parity tails in one set.
pub const DEFAULT_TAIL_BUDGET: usize = 64;

static TAIL_BUDGET: AtomicUsize = AtomicUsize::new(DEFAULT_TAIL_BUDGET);

pub fn tail_budget() -> usize {
    TAIL_BUDGET.load(AtomicOrdering::Relaxed)
}

/// Replaces the process-wide tail budget, returning the previous value.
pub fn set_tail_budget(budget: usize) -> usize {
    TAIL_BUDGET.swap(budget, AtomicOrdering::Relaxed)
}

/// Common interface of the set types the dynamics and splinter code work on.
pub trait SetAlgebra: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn empty() -> Self;
    fn union(&self, other: &Self) -> Result<Self>;
    fn intersect(&self, other: &Self) -> Result<Self>;
    fn subtract(&self, other: &Self) -> Result<Self>;
    fn measure(&self) -> Result<Scalar>;
    fn is_empty(&self) -> bool;
    /// Number of stored pieces (intervals plus tails).
    fn component_count(&self) -> usize;
}

/// Half-open interval `[lo, hi)` with `0 ≤ lo < hi ≤ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Scalar,
    hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<Self> {
        if lo.signum()? == Ordering::Less || hi.try_cmp(&Scalar::one())? == Ordering::Greater {
            return Err(Error::InvalidInterval(format!("[{lo}, {hi}) leaves [0, 1)")));
        }
        if !lo.lt(&hi)? {
            return Err(Error::InvalidInterval(format!("[{lo}, {hi}) is empty")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn from_ratios(lo: (i64, i64), hi: (i64, i64)) -> Result<Self> {
        Self::new(Scalar::from_ratio(lo.0, lo.1), Scalar::from_ratio(hi.0, hi.1))
    }

    /// Builds an interval from exact rationals already known to be ordered and in range.
    fn rational(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo < hi && !lo.is_negative() && hi <= Rational::one());
        Interval { lo: lo.into(), hi: hi.into() }
    }

    pub fn lo(&self) -> &Scalar {
        &self.lo
    }

    pub fn hi(&self) -> &Scalar {
        &self.hi
    }

    pub fn length(&self) -> Result<Scalar> {
        self.hi.try_sub(&self.lo)
    }

    pub fn contains_interval(&self, other: &Interval) -> Result<bool> {
        Ok(self.lo.le(&other.lo)? && other.hi.le(&self.hi)?)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// Which side of its anchor a tail approaches from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Below,
    Above,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(k: u32) -> Parity {
        if k.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn matches(self, k: u32) -> bool {
        Parity::of(k) == self
    }

    /// Smallest index `≥ k` with this parity.
    pub fn round_up(self, k: u32) -> u32 {
        if self.matches(k) {
            k
        } else {
            k + 1
        }
    }
}

/// Accumulation point of a tail: a dyadic rational approached from one side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    point: Rational,
    side: Side,
}

impl Anchor {
    pub fn new(point: Rational, side: Side) -> Result<Self> {
        if dyadic_level(&point).is_none() {
            return Err(Error::InvalidTail(format!("anchor {point} is not dyadic")));
        }
        let ok = match side {
            Side::Below => point.is_positive() && point <= Rational::one(),
            Side::Above => !point.is_negative() && point < Rational::one(),
        };
        if !ok {
            return Err(Error::InvalidTail(format!("no room {side:?} anchor {point}")));
        }
        Ok(Anchor { point, side })
    }

    /// Blocks `I_n` accumulating at 1.
    pub fn at_one() -> Self {
        Anchor { point: Rational::one(), side: Side::Below }
    }

    /// Blocks `D_n` accumulating at 0.
    pub fn at_zero() -> Self {
        Anchor { point: Rational::zero(), side: Side::Above }
    }

    pub fn point(&self) -> &Rational {
        &self.point
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Dyadic level of the anchor point: the least `ℓ` with `2^ℓ·c` integral.
    pub fn level(&self) -> u32 {
        dyadic_level(&self.point).expect("anchors are dyadic")
    }

    /// Least block index whose block lies inside `[0, 1)`.
    pub fn first_index(&self) -> u32 {
        let room = match self.side {
            Side::Below => self.point.clone(),
            Side::Above => Rational::one() - &self.point,
        };
        (0..).find(|&k| dyadic(k) <= room).expect("room is positive")
    }

    /// Block `k`; callers keep `k ≥ first_index()`.
    pub fn block(&self, k: u32) -> Interval {
        let (near, far) = (dyadic(k + 1), dyadic(k));
        match self.side {
            Side::Below => Interval::rational(&self.point - far, &self.point - near),
            Side::Above => Interval::rational(&self.point + near, &self.point + far),
        }
    }

    /// The union of all blocks from `k` on: `[c − 2^-k, c)` or `[c, c + 2^-k)`.
    pub fn region(&self, k: u32) -> Interval {
        match self.side {
            Side::Below => Interval::rational(&self.point - dyadic(k), self.point.clone()),
            Side::Above => Interval::rational(self.point.clone(), &self.point + dyadic(k)),
        }
    }

    /// The same geometric blocks moved by a dyadic translation.
    pub fn translated(&self, shift: &Rational) -> Result<Anchor> {
        Anchor::new(&self.point + shift, self.side)
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Anchor::at_one() {
            f.write_str("one")
        } else if *self == Anchor::at_zero() {
            f.write_str("zero")
        } else {
            let side = match self.side {
                Side::Below => "below",
                Side::Above => "above",
            };
            write!(f, "{side} {}", self.point)
        }
    }
}

fn dyadic_level(x: &Rational) -> Option<u32> {
    let d = x.denom();
    let tz = d.trailing_zeros().unwrap_or(0);
    (d >> tz as usize == BigInt::one()).then_some(tz as u32)
}

/// Every other block from `start` on, accumulating at `anchor`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParityTail {
    anchor: Anchor,
    start: u32,
    parity: Parity,
}

impl ParityTail {
    /// Denotes the blocks `k ≥ start` with `k ≡ parity (mod 2)`. The stored
    /// start is rounded up to the first block actually included.
    pub fn new(anchor: Anchor, start: u32, parity: Parity) -> Result<Self> {
        let start = parity.round_up(start);
        if start < anchor.first_index() {
            return Err(Error::InvalidTail(format!(
                "block {start} of {anchor} leaves [0, 1)"
            )));
        }
        Ok(ParityTail { anchor, start, parity })
    }

    pub fn anchor(&self) -> &Anchor {
        &self.anchor
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// `Σ_{k ≥ start, k ≡ parity} 2^-(k+1) = (4/3)·2^-(start+1)`.
    pub fn measure(&self) -> Rational {
        dyadic(self.start + 1) * Rational::new(BigInt::from(4), BigInt::from(3))
    }

    /// Included blocks with index below `end`.
    pub fn blocks_below(&self, end: u32) -> impl Iterator<Item = Interval> + '_ {
        (self.start..end).step_by(2).map(|k| self.anchor.block(k))
    }

    pub fn region(&self) -> Interval {
        self.anchor.region(self.start)
    }
}

impl fmt::Display for ParityTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parity = match self.parity {
            Parity::Even => "even",
            Parity::Odd => "odd",
        };
        write!(f, "tail({}, {}, {parity})", self.anchor, self.start)
    }
}

/// Canonical measurable subset of `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
    tails: Vec<ParityTail>,
}

/// A set whose tails were cut to finitely many blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub set: IntervalSet,
    /// Exact measure of the dropped blocks.
    pub residual: Rational,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// `[0, 1)`.
    pub fn full() -> Self {
        IntervalSet { intervals: vec![Interval::rational(Rational::zero(), Rational::one())], tails: vec![] }
    }

    pub fn from_interval(interval: Interval) -> Self {
        IntervalSet { intervals: vec![interval], tails: vec![] }
    }

    /// `[lo, hi)` with rational endpoints given as `(numerator, denominator)`.
    pub fn interval(lo: (i64, i64), hi: (i64, i64)) -> Result<Self> {
        Ok(Self::from_interval(Interval::from_ratios(lo, hi)?))
    }

    /// Normalizes an arbitrary family of intervals and tails.
    pub fn from_parts(intervals: Vec<Interval>, tails: Vec<ParityTail>) -> Result<Self> {
        let mut acc = IntervalSet { intervals: normalize(intervals)?, tails: vec![] };
        for tail in tails {
            acc = acc.union(&IntervalSet { intervals: vec![], tails: vec![tail] })?;
        }
        Ok(acc)
    }

    pub fn from_intervals(intervals: Vec<Interval>) -> Result<Self> {
        Self::from_parts(intervals, vec![])
    }

    pub fn tail(tail: ParityTail) -> Self {
        IntervalSet { intervals: vec![], tails: vec![tail] }
    }

    /// `A = ∪_n I_{2n}`, the even blocks below 1 (measure 2/3).
    pub fn kakutani_base() -> Self {
        Self::tail(ParityTail::new(Anchor::at_one(), 0, Parity::Even).expect("valid"))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn tails(&self) -> &[ParityTail] {
        &self.tails
    }

    pub fn has_tails(&self) -> bool {
        !self.tails.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.tails.is_empty()
    }

    pub fn is_full(&self) -> bool {
        *self == Self::full()
    }

    pub fn component_count(&self) -> usize {
        self.intervals.len() + self.tails.len()
    }

    pub fn measure(&self) -> Result<Scalar> {
        let mut total = Scalar::rational(self.tails.iter().map(ParityTail::measure).sum());
        for iv in &self.intervals {
            total = total.try_add(&iv.length()?)?;
        }
        Ok(total)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        combine(self, other, BoolOp::Union)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        combine(self, other, BoolOp::Intersect)
    }

    pub fn subtract(&self, other: &Self) -> Result<Self> {
        combine(self, other, BoolOp::Subtract)
    }

    pub fn complement(&self) -> Result<Self> {
        Self::full().subtract(self)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Result<Self> {
        self.subtract(other)?.union(&other.subtract(self)?)
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        Ok(self.subtract(other)?.is_empty())
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        Ok(self.intersect(other)?.is_empty())
    }

    /// Translation mod 1 (rotation of the circle). Tails are not supported.
    pub fn translate_mod1(&self, shift: &Scalar) -> Result<Self> {
        if self.has_tails() {
            return Err(Error::UnsupportedRepresentation(
                "translation of parity tails is not tail-representable".into(),
            ));
        }
        let one = Scalar::one();
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        for iv in &self.intervals {
            let lo = iv.lo.try_add(shift)?.mod1()?;
            let hi = lo.try_add(&iv.length()?)?;
            if hi.le(&one)? {
                out.push(Interval { lo, hi });
            } else {
                out.push(Interval { lo, hi: one.clone() });
                out.push(Interval { lo: Scalar::zero(), hi: hi.try_sub(&one)? });
            }
        }
        Self::from_intervals(out)
    }

    /// Largest dyadic level among endpoints and anchors, or `None` when some
    /// endpoint is not a dyadic rational.
    pub fn dyadic_depth(&self) -> Option<u32> {
        let mut depth = 0;
        for iv in &self.intervals {
            for x in [&iv.lo, &iv.hi] {
                depth = depth.max(dyadic_level(x.as_rational()?)?);
            }
        }
        for t in &self.tails {
            depth = depth.max(t.anchor.level()).max(t.start + 1);
        }
        Some(depth)
    }

    /// Replaces each tail by its first `blocks` included blocks.
    pub fn truncate_tails(&self, blocks: u32) -> Result<Truncation> {
        let mut intervals = self.intervals.clone();
        let mut residual = Rational::zero();
        for t in &self.tails {
            let end = t.start + 2 * blocks;
            intervals.extend(t.blocks_below(end));
            residual += ParityTail { start: end, ..t.clone() }.measure();
        }
        Ok(Truncation { set: Self::from_intervals(intervals)?, residual })
    }

    /// Membership of a single point.
    pub fn contains(&self, x: &Scalar) -> Result<bool> {
        for iv in &self.intervals {
            if iv.lo.le(x)? && x.lt(&iv.hi)? {
                return Ok(true);
            }
        }
        for t in &self.tails {
            let c = Scalar::rational(t.anchor.point.clone());
            let d = match t.anchor.side {
                Side::Below => c.try_sub(x)?,
                Side::Above => x.try_sub(&c)?,
            };
            if !d.is_positive()? || Scalar::dyadic(t.start).lt(&d)? {
                continue;
            }
            let mut k = t.start;
            while !Scalar::dyadic(k + 1).le(&d)? {
                k += 1;
            }
            // d lies in [2^-(k+1), 2^-k]; the closed end belongs to the block on the far side
            let k = match t.anchor.side {
                Side::Below if d == Scalar::dyadic(k + 1) => k + 1,
                Side::Above if d == Scalar::dyadic(k) => continue,
                _ => k,
            };
            if t.parity.matches(k) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Image under `x ↦ 2^log2_scale·x + shift`, which must carry the set
    /// into `[0, 1)`. Tails follow their blocks: block `k` of anchor `c` lands
    /// on block `k − log2_scale` of the image anchor.
    pub fn dyadic_affine(&self, log2_scale: i32, shift: &Rational) -> Result<Self> {
        let offset = Scalar::rational(shift.clone());
        let image = |x: &Scalar| {
            let scaled = x.scale_pow2(log2_scale);
            if shift.is_zero() {
                Ok(scaled)
            } else {
                scaled.try_add(&offset)
            }
        };
        let mut intervals = Vec::with_capacity(self.intervals.len());
        for iv in &self.intervals {
            intervals.push(Interval { lo: image(&iv.lo)?, hi: image(&iv.hi)? });
        }
        // increasing maps keep the list sorted and separated; only the ends need checking
        if let (Some(first), Some(last)) = (intervals.first(), intervals.last()) {
            if first.lo.signum()? == Ordering::Less || Scalar::one().lt(&last.hi)? {
                return Err(Error::InvalidInterval(format!("{first}…{last} leaves [0, 1)")));
            }
        }
        if self.tails.is_empty() {
            return Ok(IntervalSet { intervals, tails: vec![] });
        }
        let mut tails = Vec::with_capacity(self.tails.len());
        for t in &self.tails {
            let start = i64::from(t.start) - i64::from(log2_scale);
            let start = u32::try_from(start)
                .map_err(|_| Error::InvalidTail(format!("{t} does not fit after scaling")))?;
            let parity = if log2_scale % 2 == 0 { t.parity } else { t.parity.flip() };
            let anchor = Anchor::new(shift_pow2(&t.anchor.point, log2_scale) + shift, t.anchor.side)?;
            tails.push(ParityTail::new(anchor, start, parity)?);
        }
        Self::from_parts(intervals, tails)
    }

    fn check_budget(self) -> Result<Self> {
        let budget = tail_budget();
        if self.tails.len() > budget {
            return Err(Error::RepresentationOverflow(format!(
                "{} parity tails exceed the budget of {budget}",
                self.tails.len()
            )));
        }
        Ok(self)
    }
}

impl SetAlgebra for IntervalSet {
    fn empty() -> Self {
        IntervalSet::empty()
    }
    fn union(&self, other: &Self) -> Result<Self> {
        IntervalSet::union(self, other)
    }
    fn intersect(&self, other: &Self) -> Result<Self> {
        IntervalSet::intersect(self, other)
    }
    fn subtract(&self, other: &Self) -> Result<Self> {
        IntervalSet::subtract(self, other)
    }
    fn measure(&self) -> Result<Scalar> {
        IntervalSet::measure(self)
    }
    fn is_empty(&self) -> bool {
        IntervalSet::is_empty(self)
    }
    fn component_count(&self) -> usize {
        IntervalSet::component_count(self)
    }
}

// ---------------------------------------------------------------------------
// Finite interval lists (sorted, disjoint, non-adjacent).
// ---------------------------------------------------------------------------

fn normalize(mut intervals: Vec<Interval>) -> Result<Vec<Interval>> {
    // Sorting needs a fallible comparator; do it with a checked pass first.
    let mut err = None;
    intervals.sort_by(|a, b| match a.lo.try_cmp(&b.lo) {
        Ok(o) => o,
        Err(e) => {
            err.get_or_insert(e);
            Ordering::Equal
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.lo.le(&last.hi)? => {
                if last.hi.lt(&iv.hi)? {
                    last.hi = iv.hi;
                }
            }
            _ => out.push(iv),
        }
    }
    Ok(out)
}

fn list_union(a: &[Interval], b: &[Interval]) -> Result<Vec<Interval>> {
    if let (Some(x), Some(y)) = (a.last(), b.first()) {
        if x.hi.lt(&y.lo)? {
            return Ok(a.iter().chain(b).cloned().collect());
        }
    }
    if let (Some(x), Some(y)) = (b.last(), a.first()) {
        if x.hi.lt(&y.lo)? {
            return Ok(b.iter().chain(a).cloned().collect());
        }
    }
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].lo.le(&b[j].lo)?);
        let next = if take_a {
            i += 1;
            &a[i - 1]
        } else {
            j += 1;
            &b[j - 1]
        };
        match merged.last_mut() {
            Some(Interval { hi, .. }) if next.lo.le(hi)? => {
                if hi.lt(&next.hi)? {
                    *hi = next.hi.clone();
                }
            }
            _ => merged.push(next.clone()),
        }
    }
    Ok(merged)
}

fn list_intersect(a: &[Interval], b: &[Interval]) -> Result<Vec<Interval>> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].lo.try_max(&b[j].lo)?;
        let a_first = a[i].hi.le(&b[j].hi)?;
        let hi = if a_first { a[i].hi.clone() } else { b[j].hi.clone() };
        if lo.lt(&hi)? {
            out.push(Interval { lo, hi });
        }
        if a_first {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(out)
}

fn list_subtract(a: &[Interval], b: &[Interval]) -> Result<Vec<Interval>> {
    let mut out = Vec::new();
    let mut j = 0;
    for iv in a {
        let mut lo = iv.lo.clone();
        while j < b.len() && b[j].hi.le(&lo)? {
            j += 1;
        }
        let mut k = j;
        while k < b.len() && b[k].lo.lt(&iv.hi)? {
            if lo.lt(&b[k].lo)? {
                out.push(Interval { lo: lo.clone(), hi: b[k].lo.clone() });
            }
            if lo.lt(&b[k].hi)? {
                lo = b[k].hi.clone();
            }
            k += 1;
        }
        if lo.lt(&iv.hi)? {
            out.push(Interval { lo, hi: iv.hi.clone() });
        }
    }
    Ok(out)
}

fn list_covers(list: &[Interval], target: &Interval) -> Result<bool> {
    for iv in list {
        if iv.contains_interval(target)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn list_meets(list: &[Interval], target: &Interval) -> Result<bool> {
    for iv in list {
        if iv.lo.lt(&target.hi)? && target.lo.lt(&iv.hi)? {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Boolean operations on the full representation.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
enum BoolOp {
    Union,
    Intersect,
    Subtract,
}

/// Membership of blocks `k ≥ M` at one anchor: (even blocks, odd blocks).
type Bits = (bool, bool);

fn bits_of(parity: Parity) -> Bits {
    match parity {
        Parity::Even => (true, false),
        Parity::Odd => (false, true),
    }
}

impl BoolOp {
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::Union => a || b,
            BoolOp::Intersect => a && b,
            BoolOp::Subtract => a && !b,
        }
    }

    fn lists(self, a: &[Interval], b: &[Interval]) -> Result<Vec<Interval>> {
        match self {
            BoolOp::Union => list_union(a, b),
            BoolOp::Intersect => list_intersect(a, b),
            BoolOp::Subtract => list_subtract(a, b),
        }
    }
}

/// A set cut at depth `M`: finite intervals plus, per anchor, the parity of
/// the blocks `k ≥ M` that belong to it.
struct Expanded {
    depth: u32,
    finite: Vec<Interval>,
    patterns: BTreeMap<Anchor, Parity>,
}

fn combine(a: &IntervalSet, b: &IntervalSet, op: BoolOp) -> Result<IntervalSet> {
    if a.tails.is_empty() && b.tails.is_empty() {
        return Ok(IntervalSet { intervals: op.lists(&a.intervals, &b.intervals)?, tails: vec![] });
    }
    let keys: Vec<Anchor> = {
        let mut k: Vec<Anchor> = a.tails.iter().chain(&b.tails).map(|t| t.anchor.clone()).collect();
        k.sort();
        k.dedup();
        k
    };
    let depth = common_depth(&[a, b], &keys)?;
    let ea = expand(a, depth)?;
    let eb = expand(b, depth)?;
    let hoods: Vec<Interval> = keys.iter().map(|k| k.region(depth)).collect();
    let hoods = normalize(hoods)?;

    let mut patterns = BTreeMap::new();
    let mut full_hoods = Vec::new();
    for key in &keys {
        let hood = key.region(depth);
        let (x, y) = (pattern_bits(&ea, key, &hood)?, pattern_bits(&eb, key, &hood)?);
        let bits = (op.apply(x.0, y.0), op.apply(x.1, y.1));
        match bits {
            (true, true) => full_hoods.push(hood),
            (false, false) => {}
            (true, false) => {
                patterns.insert(key.clone(), Parity::Even);
            }
            (false, true) => {
                patterns.insert(key.clone(), Parity::Odd);
            }
        }
    }
    let fa = list_subtract(&ea.finite, &hoods)?;
    let fb = list_subtract(&eb.finite, &hoods)?;
    let finite = list_union(&op.lists(&fa, &fb)?, &normalize(full_hoods)?)?;
    canonicalize(Expanded { depth, finite, patterns })?.check_budget()
}

fn pattern_bits(e: &Expanded, key: &Anchor, hood: &Interval) -> Result<Bits> {
    if let Some(p) = e.patterns.get(key) {
        return Ok(bits_of(*p));
    }
    let covered = list_covers(&e.finite, hood)?;
    Ok((covered, covered))
}

/// Depth at which every anchor neighbourhood is free of finite endpoints,
/// contains no dyadic point of lower level, and lies beyond every tail start.
fn common_depth(sets: &[&IntervalSet], keys: &[Anchor]) -> Result<u32> {
    let mut depth = 1;
    for key in keys {
        depth = depth.max(key.level() + 1);
    }
    for set in sets {
        for t in &set.tails {
            depth = depth.max(t.start + 1);
        }
    }
    for set in sets {
        for iv in &set.intervals {
            for x in [&iv.lo, &iv.hi] {
                for key in keys {
                    let c = Scalar::rational(key.point.clone());
                    let gap = match key.side {
                        Side::Below => c.try_sub(x)?,
                        Side::Above => x.try_sub(&c)?,
                    };
                    if gap.is_positive()? {
                        depth = depth.max(separation_depth(&gap)?);
                    }
                }
            }
        }
    }
    Ok(depth)
}

/// Least `m` with `2^-m ≤ gap`, for `gap > 0`.
fn separation_depth(gap: &Scalar) -> Result<u32> {
    if let Some(r) = gap.as_rational() {
        let (n, d) = (r.numer(), r.denom());
        let mut m = (d.bits() as i64 - n.bits() as i64).max(0) as u32;
        while m > 0 && (n << (m - 1) as usize) >= *d {
            m -= 1;
        }
        while (n << m as usize) < *d {
            m += 1;
        }
        return Ok(m);
    }
    let mut m = 0;
    while !Scalar::dyadic(m).le(gap)? {
        m += 1;
    }
    Ok(m)
}

fn expand(set: &IntervalSet, depth: u32) -> Result<Expanded> {
    let mut finite = set.intervals.clone();
    let mut patterns = BTreeMap::new();
    for t in &set.tails {
        finite.extend(t.blocks_below(depth));
        patterns.insert(t.anchor.clone(), t.parity);
    }
    Ok(Expanded { depth, finite: normalize(finite)?, patterns })
}

/// Extends every pattern tail down through conforming blocks. A block that
/// contains another anchor point is never claimed. A block can also be a block
/// of one `Below` and one `Above` anchor at once; `Below` tails claim first.
fn canonicalize(e: Expanded) -> Result<IntervalSet> {
    let mut tails: Vec<ParityTail> = Vec::with_capacity(e.patterns.len());
    for side in [Side::Below, Side::Above] {
        let claimed: Vec<Interval> = tails.iter().map(ParityTail::region).collect();
        for (anchor, &parity) in e.patterns.iter().filter(|(a, _)| a.side == side) {
            let mut k = e.depth;
            let floor = anchor.first_index();
            'extend: while k > floor {
                let block = anchor.block(k - 1);
                let others = e.patterns.keys().filter(|o| *o != anchor).map(|o| o.region(e.depth));
                for region in others.chain(claimed.iter().cloned()) {
                    if region.lo.lt(&block.hi)? && block.lo.lt(&region.hi)? {
                        break 'extend;
                    }
                }
                let conforms = if parity.matches(k - 1) {
                    list_covers(&e.finite, &block)?
                } else {
                    !list_meets(&e.finite, &block)?
                };
                if !conforms {
                    break;
                }
                k -= 1;
            }
            tails.push(ParityTail { anchor: anchor.clone(), start: parity.round_up(k), parity });
        }
    }
    tails.sort_by(|a, b| a.anchor.cmp(&b.anchor));
    let regions = normalize(tails.iter().map(ParityTail::region).collect())?;
    let intervals = list_subtract(&e.finite, &regions)?;
    Ok(IntervalSet { intervals, tails })
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("empty");
        }
        let mut first = true;
        for item in self
            .intervals
            .iter()
            .map(|i| i.to_string())
            .chain(self.tails.iter().map(|t| t.to_string()))
        {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            f.write_str(&item)?;
        }
        Ok(())
    }
}

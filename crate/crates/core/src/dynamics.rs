//! Transformations with exact preimages and images on representable sets.
//!
//! * [`Rotation`]: `x ↦ x + θ mod 1`, tail-free sets only;
//! * [`Doubling`]: `x ↦ 2x mod 1`;
//! * [`Odometer`]: the piecewise translation `ψ` sending `I_n = [1 − 2^-n, 1 − 2^-(n+1))`
//!   onto `D_n = [2^-(n+1), 2^-n)`;
//! * [`KakutaniTower`]: the one-floor tower over `ψ` with roof `A = ∪ I_2n`.
//!
//! Everything holds modulo null sets.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::interval_set::{Anchor, Interval, IntervalSet, ParityTail, SetAlgebra, Side};
use crate::scalar::{dyadic, IrrationalTag, Rational, Scalar};

/// A measure-preserving map together with its exact set transforms.
pub trait Dynamics: Send + Sync {
    type Set: SetAlgebra;

    fn name(&self) -> String;

    /// `T⁻¹(S)`.
    fn preimage(&self, set: &Self::Set) -> Result<Self::Set>;

    /// `T(S)`.
    fn image(&self, set: &Self::Set) -> Result<Self::Set>;

    /// The whole phase space.
    fn full_space(&self) -> Self::Set;

    /// Declared ergodicity. Not proved here.
    fn is_ergodic(&self) -> bool;

    /// A period `p` with `T⁻ᵖ(S) = S` for every set generated from `sets`
    /// by the splinter recursion, when one is known for certain.
    fn certified_period(&self, _sets: &[&Self::Set]) -> Option<u64> {
        None
    }

    /// Breakpoints of the map in `[0, 1)`, listed up to `depth` where the
    /// list is infinite.
    fn discontinuities(&self, _depth: u32) -> Vec<Scalar> {
        Vec::new()
    }
}

// ---------------------------------------------------------------------------
// Rotation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rotation {
    angle: Scalar,
}

impl Rotation {
    pub fn new(angle: Scalar) -> Result<Self> {
        Ok(Rotation { angle: angle.mod1()? })
    }

    pub fn golden() -> Self {
        Rotation::new(Scalar::alpha(IrrationalTag::GoldenConjugate)).expect("alpha is finite")
    }

    pub fn angle(&self) -> &Scalar {
        &self.angle
    }
}

impl Dynamics for Rotation {
    type Set = IntervalSet;

    fn name(&self) -> String {
        match self.angle.tag() {
            Some(tag) if self.angle == Scalar::alpha(tag) => format!("rotation:{}", tag.name()),
            _ => format!("rotation:{}", self.angle),
        }
    }

    fn preimage(&self, set: &IntervalSet) -> Result<IntervalSet> {
        set.translate_mod1(&self.angle.neg())
    }

    fn image(&self, set: &IntervalSet) -> Result<IntervalSet> {
        set.translate_mod1(&self.angle)
    }

    fn full_space(&self) -> IntervalSet {
        IntervalSet::full()
    }

    fn is_ergodic(&self) -> bool {
        !self.angle.is_rational()
    }

    fn certified_period(&self, _sets: &[&IntervalSet]) -> Option<u64> {
        let r = self.angle.as_rational()?;
        u64::try_from(r.denom()).ok()
    }
}

// ---------------------------------------------------------------------------
// Doubling
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Doubling;

impl Dynamics for Doubling {
    type Set = IntervalSet;

    fn name(&self) -> String {
        "doubling".into()
    }

    /// `(S/2) ∪ (S/2 + 1/2)`.
    fn preimage(&self, set: &IntervalSet) -> Result<IntervalSet> {
        let lower = set.dyadic_affine(-1, &Rational::zero())?;
        let upper = set.dyadic_affine(-1, &dyadic(1))?;
        lower.union(&upper)
    }

    /// `2S mod 1`, by doubling each half separately.
    fn image(&self, set: &IntervalSet) -> Result<IntervalSet> {
        let half = Scalar::dyadic(1);
        let left = IntervalSet::from_interval(Interval::new(Scalar::zero(), half.clone())?);
        let right = IntervalSet::from_interval(Interval::new(half, Scalar::one())?);
        let a = set.intersect(&left)?.dyadic_affine(1, &Rational::zero())?;
        let b = set.intersect(&right)?.dyadic_affine(1, &-Rational::one())?;
        a.union(&b)
    }

    fn full_space(&self) -> IntervalSet {
        IntervalSet::full()
    }

    fn is_ergodic(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Odometer
// ---------------------------------------------------------------------------

/// Translates block `n` of `source` onto block `n` of `target` for every `n`.
/// The two anchors must have blocks of equal length, so both sit at
/// level 0 with first index 0.
#[derive(Clone, Debug)]
struct BlockMap {
    source: Anchor,
    target: Anchor,
}

impl BlockMap {
    fn shift(&self, n: u32) -> Rational {
        low(&self.target.block(n)) - low(&self.source.block(n))
    }

    /// Index of the source block whose closure holds the deep blocks of `anchor`.
    fn host_block(&self, anchor: &Anchor) -> u32 {
        let c = anchor.point();
        (0..)
            .find(|&n| {
                let b = self.source.block(n);
                let (lo, hi) = (low(&b), high(&b));
                match anchor.side() {
                    Side::Below => lo < *c && *c <= hi,
                    Side::Above => lo <= *c && *c < hi,
                }
            })
            .expect("anchors other than the source accumulate inside a block")
    }

    fn apply(&self, set: &IntervalSet) -> Result<IntervalSet> {
        let mut pending: Vec<Interval> = set.intervals().to_vec();
        let mut out: Vec<Interval> = Vec::new();
        let mut tails: Vec<ParityTail> = Vec::new();

        for t in set.tails() {
            if *t.anchor() == self.source {
                tails.push(ParityTail::new(self.target.clone(), t.start(), t.parity())?);
                continue;
            }
            let n = self.host_block(t.anchor());
            let block = self.source.block(n);
            let mut k = t.start();
            while !block.contains_interval(&t.anchor().region(k))? {
                k += 1;
            }
            pending.extend(t.blocks_below(k));
            let anchor = t.anchor().translated(&self.shift(n))?;
            tails.push(ParityTail::new(anchor, k, t.parity())?);
        }

        // pieces reaching the accumulation point map onto the target's neighbourhood
        let point = Scalar::rational(self.source.point().clone());
        for iv in std::mem::take(&mut pending) {
            let touches = match self.source.side() {
                Side::Below => *iv.hi() == point,
                Side::Above => *iv.lo() == point,
            };
            if !touches {
                pending.push(iv);
                continue;
            }
            let n = (0..)
                .find(|&n| iv.contains_interval(&self.source.region(n)).unwrap_or(false))
                .expect("an interval ending at the anchor contains a neighbourhood");
            out.push(self.target.region(n));
            let region = self.source.region(n);
            let rest = match self.source.side() {
                Side::Below => (iv.lo().clone(), region.lo().clone()),
                Side::Above => (region.hi().clone(), iv.hi().clone()),
            };
            if rest.0.lt(&rest.1)? {
                pending.push(Interval::new(rest.0, rest.1)?);
            }
        }

        for iv in &pending {
            for n in 0.. {
                let block = self.source.block(n);
                let beyond = match self.source.side() {
                    Side::Below => iv.hi().le(block.lo())?,
                    Side::Above => block.hi().le(iv.lo())?,
                };
                if beyond {
                    break;
                }
                let lo = iv.lo().try_max(block.lo())?;
                let hi = iv.hi().try_min(block.hi())?;
                if lo.lt(&hi)? {
                    let shift = Scalar::rational(self.shift(n));
                    out.push(Interval::new(lo.try_add(&shift)?, hi.try_add(&shift)?)?);
                }
            }
        }
        IntervalSet::from_parts(out, tails)
    }
}

fn low(iv: &Interval) -> Rational {
    iv.lo().as_rational().expect("blocks are dyadic").clone()
}

fn high(iv: &Interval) -> Rational {
    iv.hi().as_rational().expect("blocks are dyadic").clone()
}

/// The dyadic odometer `ψ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Odometer;

impl Odometer {
    fn forward() -> BlockMap {
        BlockMap { source: Anchor::at_one(), target: Anchor::at_zero() }
    }

    fn backward() -> BlockMap {
        BlockMap { source: Anchor::at_zero(), target: Anchor::at_one() }
    }
}

impl Dynamics for Odometer {
    type Set = IntervalSet;

    fn name(&self) -> String {
        "odometer".into()
    }

    fn preimage(&self, set: &IntervalSet) -> Result<IntervalSet> {
        Self::backward().apply(set)
    }

    fn image(&self, set: &IntervalSet) -> Result<IntervalSet> {
        Self::forward().apply(set)
    }

    fn full_space(&self) -> IntervalSet {
        IntervalSet::full()
    }

    fn is_ergodic(&self) -> bool {
        true
    }

    /// On level-`d` dyadic intervals `ψ` acts as one cycle of length `2^d`.
    fn certified_period(&self, sets: &[&IntervalSet]) -> Option<u64> {
        let mut depth = 0;
        for s in sets {
            if s.has_tails() {
                return None;
            }
            depth = depth.max(s.dyadic_depth()?);
        }
        (depth < 63).then(|| 1u64 << depth)
    }

    /// `{1 − 2^-n : 0 ≤ n ≤ depth}`.
    fn discontinuities(&self, depth: u32) -> Vec<Scalar> {
        (0..=depth).map(|n| Scalar::rational(Rational::one() - dyadic(n))).collect()
    }
}

// ---------------------------------------------------------------------------
// Kakutani tower
// ---------------------------------------------------------------------------

/// A subset of the tower `X ∪ A′`: `base ⊆ X = [0, 1)` and the top floor
/// pulled back to `top ⊆ A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TowerSet {
    base: IntervalSet,
    top: IntervalSet,
}

impl TowerSet {
    pub fn new(base: IntervalSet, top: IntervalSet) -> Result<Self> {
        if !top.is_subset(&IntervalSet::kakutani_base())? {
            return Err(Error::InvalidTowerSet(format!("top floor {top} is not inside A")));
        }
        Ok(TowerSet { base, top })
    }

    pub fn base_only(base: IntervalSet) -> Self {
        TowerSet { base, top: IntervalSet::empty() }
    }

    pub fn full() -> Self {
        TowerSet { base: IntervalSet::full(), top: IntervalSet::kakutani_base() }
    }

    pub fn base(&self) -> &IntervalSet {
        &self.base
    }

    pub fn top(&self) -> &IntervalSet {
        &self.top
    }

    /// `μ̃ = μ(base) + μ(top)`.
    pub fn tower_measure(&self) -> Result<Scalar> {
        self.base.measure()?.try_add(&self.top.measure()?)
    }

    fn zip(&self, other: &Self, op: impl Fn(&IntervalSet, &IntervalSet) -> Result<IntervalSet>) -> Result<Self> {
        Ok(TowerSet { base: op(&self.base, &other.base)?, top: op(&self.top, &other.top)? })
    }

    /// Parses `base: <set>; top: <set>`, or a bare set for the base alone.
    pub fn parse(text: &str, tag: Option<IrrationalTag>) -> Result<Self> {
        let text = text.trim();
        let Some(rest) = text.strip_prefix("base:") else {
            return Ok(TowerSet::base_only(IntervalSet::parse(text, tag)?));
        };
        let (base, top) = match rest.split_once(';') {
            Some((b, t)) => {
                let t = t.trim().strip_prefix("top:").ok_or_else(|| {
                    Error::Parse(format!("expected `top:` in tower set `{text}`"))
                })?;
                (b, t)
            }
            None => (rest, "empty"),
        };
        TowerSet::new(IntervalSet::parse(base, tag)?, IntervalSet::parse(top, tag)?)
    }
}

impl SetAlgebra for TowerSet {
    fn empty() -> Self {
        TowerSet::default()
    }
    fn union(&self, other: &Self) -> Result<Self> {
        self.zip(other, IntervalSet::union)
    }
    fn intersect(&self, other: &Self) -> Result<Self> {
        self.zip(other, IntervalSet::intersect)
    }
    fn subtract(&self, other: &Self) -> Result<Self> {
        self.zip(other, IntervalSet::subtract)
    }
    fn measure(&self) -> Result<Scalar> {
        self.tower_measure()
    }
    fn is_empty(&self) -> bool {
        self.base.is_empty() && self.top.is_empty()
    }
    fn component_count(&self) -> usize {
        self.base.component_count() + self.top.component_count()
    }
}

impl fmt::Display for TowerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "base: {}; top: {}", self.base, self.top)
    }
}

impl FromStr for TowerSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TowerSet::parse(s, None)
    }
}

/// `ψ̃`: climbs from `A` to its copy, falls from the copy through `ψ`, and
/// applies `ψ` on `X ∖ A`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KakutaniTower;

impl Dynamics for KakutaniTower {
    type Set = TowerSet;

    fn name(&self) -> String {
        "kakutani".into()
    }

    fn preimage(&self, set: &TowerSet) -> Result<TowerSet> {
        let a = IntervalSet::kakutani_base();
        let pulled = Odometer.preimage(&set.base)?;
        Ok(TowerSet {
            base: pulled.subtract(&a)?.union(&set.top)?,
            top: pulled.intersect(&a)?,
        })
    }

    fn image(&self, set: &TowerSet) -> Result<TowerSet> {
        let a = IntervalSet::kakutani_base();
        let low = Odometer.image(&set.base.subtract(&a)?)?;
        Ok(TowerSet {
            base: low.union(&Odometer.image(&set.top)?)?,
            top: set.base.intersect(&a)?,
        })
    }

    fn full_space(&self) -> TowerSet {
        TowerSet::full()
    }

    fn is_ergodic(&self) -> bool {
        true
    }

    fn discontinuities(&self, depth: u32) -> Vec<Scalar> {
        Odometer.discontinuities(depth)
    }
}

// ---------------------------------------------------------------------------
// Descriptors
// ---------------------------------------------------------------------------

/// The maps acting on plain subsets of `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntervalMap {
    Rotation(Rotation),
    Doubling(Doubling),
    Odometer(Odometer),
}

impl Dynamics for IntervalMap {
    type Set = IntervalSet;

    fn name(&self) -> String {
        match self {
            IntervalMap::Rotation(t) => t.name(),
            IntervalMap::Doubling(t) => t.name(),
            IntervalMap::Odometer(t) => t.name(),
        }
    }
    fn preimage(&self, set: &IntervalSet) -> Result<IntervalSet> {
        match self {
            IntervalMap::Rotation(t) => t.preimage(set),
            IntervalMap::Doubling(t) => t.preimage(set),
            IntervalMap::Odometer(t) => t.preimage(set),
        }
    }
    fn image(&self, set: &IntervalSet) -> Result<IntervalSet> {
        match self {
            IntervalMap::Rotation(t) => t.image(set),
            IntervalMap::Doubling(t) => t.image(set),
            IntervalMap::Odometer(t) => t.image(set),
        }
    }
    fn full_space(&self) -> IntervalSet {
        IntervalSet::full()
    }
    fn is_ergodic(&self) -> bool {
        match self {
            IntervalMap::Rotation(t) => t.is_ergodic(),
            IntervalMap::Doubling(t) => t.is_ergodic(),
            IntervalMap::Odometer(t) => t.is_ergodic(),
        }
    }
    fn certified_period(&self, sets: &[&IntervalSet]) -> Option<u64> {
        match self {
            IntervalMap::Rotation(t) => t.certified_period(sets),
            IntervalMap::Doubling(t) => t.certified_period(sets),
            IntervalMap::Odometer(t) => t.certified_period(sets),
        }
    }
    fn discontinuities(&self, depth: u32) -> Vec<Scalar> {
        match self {
            IntervalMap::Rotation(t) => t.discontinuities(depth),
            IntervalMap::Doubling(t) => t.discontinuities(depth),
            IntervalMap::Odometer(t) => t.discontinuities(depth),
        }
    }
}

/// Text names of systems: `rotation:golden`, `rotation:sqrt2m1`,
/// `rotation:1/3`, `doubling`, `odometer`, `kakutani`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemDescriptor {
    Interval(IntervalMap),
    Kakutani,
}

impl SystemDescriptor {
    /// Irrational tag used by the system's angle, which set endpoints may share.
    pub fn tag(&self) -> Option<IrrationalTag> {
        match self {
            SystemDescriptor::Interval(IntervalMap::Rotation(r)) => r.angle().tag(),
            _ => None,
        }
    }

    pub fn discontinuities(&self, depth: u32) -> Vec<Scalar> {
        match self {
            SystemDescriptor::Interval(t) => t.discontinuities(depth),
            SystemDescriptor::Kakutani => KakutaniTower.discontinuities(depth),
        }
    }
}

impl FromStr for SystemDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let map = match s {
            "doubling" => IntervalMap::Doubling(Doubling),
            "odometer" => IntervalMap::Odometer(Odometer),
            "kakutani" => return Ok(SystemDescriptor::Kakutani),
            _ => {
                let Some(angle) = s.strip_prefix("rotation:") else {
                    return Err(Error::Parse(format!("unknown system `{s}`")));
                };
                let angle = match IrrationalTag::from_name(angle.trim()) {
                    Some(tag) => Scalar::alpha(tag),
                    None => Scalar::parse(angle, None)?,
                };
                IntervalMap::Rotation(Rotation::new(angle)?)
            }
        };
        Ok(SystemDescriptor::Interval(map))
    }
}

impl fmt::Display for SystemDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemDescriptor::Interval(t) => f.write_str(&t.name()),
            SystemDescriptor::Kakutani => f.write_str("kakutani"),
        }
    }
}

// ---------------------------------------------------------------------------
// Measure preservation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreservationReport {
    pub measure: Scalar,
    pub preimage_measure: Scalar,
    pub pass: bool,
}

pub fn verify_measure_preserving<D: Dynamics>(system: &D, set: &D::Set) -> Result<PreservationReport> {
    let measure = set.measure()?;
    let preimage_measure = system.preimage(set)?.measure()?;
    let pass = measure == preimage_measure;
    Ok(PreservationReport { measure, preimage_measure, pass })
}

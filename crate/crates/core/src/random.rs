//! Seeded samplers of representable sets.
//!
//! Every sampler is a pure function of its seed, so randomized suites are
//! reproducible from the seed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::TowerSet;
use crate::error::Result;
use crate::interval_set::{Anchor, Interval, IntervalSet, Parity, ParityTail, Side};
use crate::scalar::{IrrationalTag, Rational, Scalar};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_2024_0d0e;

pub struct SetSampler {
    rng: ChaCha8Rng,
    /// Finest dyadic level of sampled endpoints.
    pub max_level: u32,
    /// Most intervals drawn per set, before normalization.
    pub max_intervals: usize,
}

impl SetSampler {
    pub fn new(seed: u64) -> Self {
        SetSampler { rng: ChaCha8Rng::seed_from_u64(seed), max_level: 20, max_intervals: 4 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A dyadic rational `k/2^l` in `[0, 1]` with `l ≤ max_level`.
    pub fn dyadic_point(&mut self) -> Rational {
        let level = self.rng.gen_range(1..=self.max_level);
        let k: i64 = self.rng.gen_range(0..=(1i64 << level));
        Rational::new(k.into(), (1i64 << level).into())
    }

    /// Finitely many intervals with dyadic endpoints.
    pub fn dyadic_set(&mut self) -> Result<IntervalSet> {
        let count = self.rng.gen_range(0..=self.max_intervals);
        let mut ivs = Vec::with_capacity(count);
        for _ in 0..count {
            let (a, b) = (self.dyadic_point(), self.dyadic_point());
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                ivs.push(Interval::new(lo.into(), hi.into())?);
            }
        }
        IntervalSet::from_intervals(ivs)
    }

    /// A dyadic set with a positive measure.
    pub fn nonnull_dyadic_set(&mut self) -> Result<IntervalSet> {
        loop {
            let s = self.dyadic_set()?;
            if !s.is_empty() {
                return Ok(s);
            }
        }
    }

    /// A parity tail at a random dyadic anchor of level at most 4.
    pub fn tail(&mut self) -> Result<ParityTail> {
        let anchor = loop {
            let level = self.rng.gen_range(0..=4u32);
            let k: i64 = self.rng.gen_range(0..=(1i64 << level));
            let point = Rational::new(k.into(), (1i64 << level).into());
            let side = if self.rng.gen() { Side::Below } else { Side::Above };
            if let Ok(a) = Anchor::new(point, side) {
                break a;
            }
        };
        let start = self.rng.gen_range(0..8u32).max(anchor.first_index());
        let parity = if self.rng.gen() { Parity::Even } else { Parity::Odd };
        ParityTail::new(anchor, start, parity)
    }

    /// A dyadic set joined with up to two tails.
    pub fn tailed_set(&mut self) -> Result<IntervalSet> {
        let mut s = self.dyadic_set()?;
        for _ in 0..self.rng.gen_range(0..=2) {
            s = s.union(&IntervalSet::tail(self.tail()?))?;
        }
        Ok(s)
    }

    /// Intervals with endpoints `(k/2^l + j·α) mod 1`, `j ∈ {−1, 0, 1}`.
    pub fn irrational_set(&mut self, tag: IrrationalTag) -> Result<IntervalSet> {
        let count = self.rng.gen_range(0..=self.max_intervals);
        let mut ivs = Vec::with_capacity(count);
        for _ in 0..count {
            let a = self.irrational_point(tag)?;
            let b = self.irrational_point(tag)?;
            match a.try_cmp(&b)? {
                std::cmp::Ordering::Less => ivs.push(Interval::new(a, b)?),
                std::cmp::Ordering::Greater => ivs.push(Interval::new(b, a)?),
                std::cmp::Ordering::Equal => {}
            }
        }
        IntervalSet::from_intervals(ivs)
    }

    fn irrational_point(&mut self, tag: IrrationalTag) -> Result<Scalar> {
        let base = Scalar::rational(self.dyadic_point());
        let j: i64 = self.rng.gen_range(-1..=1);
        if j == 0 {
            return Ok(base);
        }
        base.try_add(&Scalar::alpha(tag).scale(&Rational::from_integer(j.into())))?.mod1()
    }

    /// A tower set with tailed base and a top inside `A`.
    pub fn tower_set(&mut self) -> Result<TowerSet> {
        let base = self.tailed_set()?;
        let top = self.tailed_set()?.intersect(&IntervalSet::kakutani_base())?;
        TowerSet::new(base, top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samplers_are_deterministic() {
        let mut a = SetSampler::new(7);
        let mut b = SetSampler::new(7);
        for _ in 0..20 {
            assert_eq!(a.tailed_set().unwrap(), b.tailed_set().unwrap());
            let g = IrrationalTag::GoldenConjugate;
            assert_eq!(a.irrational_set(g).unwrap(), b.irrational_set(g).unwrap());
        }
    }

    #[test]
    fn tower_tops_stay_in_the_roof() {
        let mut s = SetSampler::new(DEFAULT_SEED);
        for _ in 0..20 {
            let t = s.tower_set().unwrap();
            assert!(t.top().is_subset(&IntervalSet::kakutani_base()).unwrap());
        }
    }
}

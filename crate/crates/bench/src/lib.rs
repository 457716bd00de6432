//! Shared inputs for the benchmarks.

use splinter_core::random::{SetSampler, DEFAULT_SEED};
use splinter_core::{IntervalSet, IrrationalTag, TowerSet};

/// Seeded random sets, one batch per kind.
pub struct Inputs {
    pub dyadic: Vec<IntervalSet>,
    pub tailed: Vec<IntervalSet>,
    pub golden: Vec<IntervalSet>,
    pub tower: Vec<TowerSet>,
}

impl Inputs {
    pub fn new(n: usize) -> Self {
        let mut s = SetSampler::new(DEFAULT_SEED);
        let mut batch = |f: &mut dyn FnMut(&mut SetSampler) -> IntervalSet| (0..n).map(|_| f(&mut s)).collect::<Vec<_>>();
        let dyadic = batch(&mut |s| s.dyadic_set().expect("sampler"));
        let tailed = batch(&mut |s| s.tailed_set().expect("sampler"));
        let golden = batch(&mut |s| s.irrational_set(IrrationalTag::GoldenConjugate).expect("sampler"));
        let mut s = SetSampler::new(DEFAULT_SEED ^ 1);
        let tower = (0..n).map(|_| s.tower_set().expect("sampler")).collect();
        Inputs { dyadic, tailed, golden, tower }
    }
}

//! Shipped splinter fixtures.
//!
//! The same fixtures exist as config files under `fixtures/` at the
//! workspace root; a test keeps the two in step.

use crate::dynamics::{IntervalMap, KakutaniTower, SystemDescriptor, TowerSet};
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::Scalar;
use crate::splinter::{splinter, SplinterConfig, SplinterDecomposition, SplinterStatus};

/// Step at which the golden-rotation fixture first has `μ(Bₙ) < 1/1000`.
/// Pinned by a 60-digit floating-point simulation of the recursion, which
/// shows nonempty splinters only at steps 1, 4, 7, 12, 25, 80, 135 and 224.
pub const GOLDEN_CONVERGENCE_STEP: usize = 224;

/// Invariant set of the rotation by 1/3 used by the transport fixtures.
pub const THIRD_INVARIANT_SET: &str = "0..1/6, 1/3..1/2, 2/3..5/6";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplinterFixture {
    pub name: &'static str,
    pub system: &'static str,
    pub j1: &'static str,
    pub j2: &'static str,
    pub epsilon: &'static str,
    pub n_max: usize,
    pub expected: SplinterStatus,
}

pub const SPLINTER_FIXTURES: &[SplinterFixture] = &[
    SplinterFixture {
        name: "doubling-half",
        system: "doubling",
        j1: "0..1/2",
        j2: "0..1/2",
        epsilon: "1/1048576",
        n_max: 64,
        expected: SplinterStatus::Converged,
    },
    SplinterFixture {
        name: "odometer-cover",
        system: "odometer",
        j1: "0..1/2",
        j2: "1/2..1",
        epsilon: "1/1024",
        n_max: 8,
        expected: SplinterStatus::Converged,
    },
    SplinterFixture {
        name: "odometer-cells",
        system: "odometer",
        j1: "0..1/8",
        j2: "5/8..3/4",
        epsilon: "1/1024",
        n_max: 64,
        expected: SplinterStatus::Converged,
    },
    SplinterFixture {
        // ψ⁻¹ subtracts one in the reversed binary digits, so the cell of
        // 0 reaches the cell of 28 after exactly 100 steps
        name: "odometer-deep",
        system: "odometer",
        j1: "0..1/128",
        j2: "7/32..29/128",
        epsilon: "1/1048576",
        n_max: 128,
        expected: SplinterStatus::Converged,
    },
    SplinterFixture {
        name: "golden-quarter",
        system: "rotation:golden",
        j1: "0..1/4",
        j2: "1/2..3/4",
        epsilon: "1/1000",
        n_max: GOLDEN_CONVERGENCE_STEP,
        expected: SplinterStatus::Converged,
    },
    SplinterFixture {
        name: "third-stall",
        system: "rotation:1/3",
        j1: "0..1/6",
        j2: "1/2..2/3",
        epsilon: "1/1024",
        n_max: 100,
        expected: SplinterStatus::Stalled,
    },
    SplinterFixture {
        name: "third-orbit",
        system: "rotation:1/3",
        j1: "0..1/6",
        j2: "1/3..1/2",
        epsilon: "1/1024",
        n_max: 100,
        expected: SplinterStatus::Converged,
    },
    SplinterFixture {
        name: "kakutani-cells",
        system: "kakutani",
        j1: "base: 0..1/4; top: empty",
        j2: "base: 1/2..3/4; top: empty",
        epsilon: "1/1024",
        n_max: 64,
        expected: SplinterStatus::Converged,
    },
];

pub fn fixture(name: &str) -> Option<&'static SplinterFixture> {
    SPLINTER_FIXTURES.iter().find(|f| f.name == name)
}

/// A fixture's decomposition, for either kind of phase space.
#[derive(Clone, Debug)]
pub enum FixtureRun {
    Interval(IntervalMap, SplinterDecomposition<IntervalSet>),
    Tower(SplinterDecomposition<TowerSet>),
}

impl FixtureRun {
    pub fn status(&self) -> SplinterStatus {
        match self {
            FixtureRun::Interval(_, d) => d.status,
            FixtureRun::Tower(d) => d.status,
        }
    }

    pub fn steps(&self) -> usize {
        match self {
            FixtureRun::Interval(_, d) => d.steps(),
            FixtureRun::Tower(d) => d.steps(),
        }
    }
}

impl SplinterFixture {
    pub fn descriptor(&self) -> Result<SystemDescriptor> {
        self.system.parse()
    }

    pub fn config(&self) -> Result<SplinterConfig> {
        Ok(SplinterConfig::new(Scalar::parse(self.epsilon, None)?, self.n_max))
    }

    pub fn run(&self) -> Result<FixtureRun> {
        self.run_with(&self.config()?)
    }

    pub fn run_with(&self, config: &SplinterConfig) -> Result<FixtureRun> {
        match self.descriptor()? {
            SystemDescriptor::Interval(map) => {
                let tag = SystemDescriptor::Interval(map.clone()).tag();
                let j1 = IntervalSet::parse(self.j1, tag)?;
                let j2 = IntervalSet::parse(self.j2, tag)?;
                let d = splinter(&map, &j1, &j2, config)?;
                Ok(FixtureRun::Interval(map, d))
            }
            SystemDescriptor::Kakutani => {
                let j1 = TowerSet::parse(self.j1, None)?;
                let j2 = TowerSet::parse(self.j2, None)?;
                Ok(FixtureRun::Tower(splinter(&KakutaniTower, &j1, &j2, config)?))
            }
        }
    }
}

/// Runs a fixture and insists on its expected status.
pub fn run_checked(f: &SplinterFixture) -> Result<FixtureRun> {
    let run = f.run()?;
    if run.status() != f.expected {
        return Err(Error::Precondition(format!(
            "fixture {} ended {} instead of {}",
            f.name,
            run.status(),
            f.expected
        )));
    }
    Ok(run)
}

//! Exact measure-theoretic dynamics on finitely representable subsets of `[0, 1)`.
//!
//! The crate is layered bottom-up:
//!
//! * [`scalar`]: exact endpoints `p + q·α`;
//! * [`interval_set`]: normalized unions of half-open intervals plus geometric
//!   parity tails, with exact Lebesgue measure;
//! * [`dynamics`]: rotations, the doubling map, the dyadic odometer and its
//!   one-floor Kakutani tower, each with exact preimages;
//! * [`splinter`]: the splinter decomposition of one window with respect to
//!   another under a map, plus the identities it must satisfy;
//! * [`caratheodory`]: measure bases, density witnesses, the θ-gap and
//!   correlation diagnostics.
//!
//! All set identities hold modulo null sets: points are never represented.
//! Wherever outer measure appears in the underlying theory, this crate works on
//! measurable representatives, where it coincides with Lebesgue measure.

pub mod caratheodory;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod interval_set;
pub mod random;
pub mod scalar;
pub mod splinter;

pub use caratheodory::{GapReport, MeasureBasis};
pub use dynamics::{
    Doubling, Dynamics, IntervalMap, KakutaniTower, Odometer, Rotation, SystemDescriptor, TowerSet,
};
pub use error::{Error, Result};
pub use interval_set::{Anchor, Interval, IntervalSet, Parity, ParityTail, SetAlgebra, Side};
pub use scalar::{IrrationalTag, Rational, Scalar};
pub use splinter::{SplinterConfig, SplinterDecomposition, SplinterStatus, StallWindow};


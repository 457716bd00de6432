//! Splinters of a window `J₁` with respect to a window `J₂` under a map `T`.
//!
//! `A₁ = T⁻¹J₁ ∩ J₂`, `B₁ = T⁻¹J₁ ∖ J₂`, and for `n ≥ 2`
//! `Aₙ = T⁻¹Bₙ₋₁ ∩ (J₂ ∖ ∪ᵢ<ₙ Aᵢ)`, `Bₙ = T⁻¹Bₙ₋₁ ∖ Aₙ`.
//!
//! The residual `Bₙ` is the part of `T⁻ⁿJ₁` that has not yet landed in `J₂`.
//! For ergodic `T` its measure tends to zero.

use std::fmt;

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::interval_set::SetAlgebra;
use crate::scalar::Scalar;

pub const DEFAULT_COMPONENT_BUDGET: usize = 1 << 16;
pub const MIN_STALL_WINDOW: usize = 8;

/// How long `Aₙ = ∅` must persist before the run is declared stalled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StallWindow {
    /// `max(8, p)` when the system certifies a period `p`, otherwise off.
    Auto,
    Fixed(usize),
    Off,
}

impl fmt::Display for StallWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StallWindow::Auto => f.write_str("auto"),
            StallWindow::Off => f.write_str("off"),
            StallWindow::Fixed(w) => write!(f, "{w}"),
        }
    }
}

impl std::str::FromStr for StallWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(StallWindow::Auto),
            "off" => Ok(StallWindow::Off),
            w => match w.parse::<usize>() {
                Ok(w) if w > 0 => Ok(StallWindow::Fixed(w)),
                _ => Err(Error::Parse(format!("stall window `{w}` is not auto, off or a positive count"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplinterConfig {
    pub epsilon: Scalar,
    pub n_max: usize,
    pub stall_window: StallWindow,
    /// Largest component count allowed for a residual before pulling it back.
    pub component_budget: usize,
}

impl SplinterConfig {
    pub fn new(epsilon: Scalar, n_max: usize) -> Self {
        SplinterConfig {
            epsilon,
            n_max,
            stall_window: StallWindow::Auto,
            component_budget: DEFAULT_COMPONENT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplinterStatus {
    /// `μ(Bₙ) < ε` at the last step.
    Converged,
    /// `Aₙ = ∅` across the stall window.
    Stalled,
    /// `n_max` reached, or a residual outgrew the component budget.
    BudgetExhausted,
}

impl fmt::Display for SplinterStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplinterStatus::Converged => "converged",
            SplinterStatus::Stalled => "stalled",
            SplinterStatus::BudgetExhausted => "budget-exhausted",
        })
    }
}

impl std::str::FromStr for SplinterStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "converged" => Ok(SplinterStatus::Converged),
            "stalled" => Ok(SplinterStatus::Stalled),
            "budget-exhausted" => Ok(SplinterStatus::BudgetExhausted),
            other => Err(Error::Parse(format!("unknown splinter status `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub step: usize,
    pub measure_a: Scalar,
    pub measure_b: Scalar,
    pub components_b: usize,
    /// `μ(∪ᵢ≤ₙ Aᵢ)`.
    pub covered: Scalar,
}

#[derive(Clone, Debug)]
pub struct SplinterDecomposition<S> {
    pub j1: S,
    pub j2: S,
    /// `A₁, …, Aₙ`.
    pub splinters: Vec<S>,
    /// `B₁, …, Bₙ`.
    pub residuals: Vec<S>,
    pub covered: S,
    pub trace: Vec<StepRecord>,
    pub status: SplinterStatus,
    /// Window actually used for stall detection.
    pub stall_window: Option<usize>,
}

impl<S: SetAlgebra> SplinterDecomposition<S> {
    pub fn steps(&self) -> usize {
        self.trace.len()
    }

    pub fn final_residual_measure(&self) -> Option<&Scalar> {
        self.trace.last().map(|r| &r.measure_b)
    }
}

pub fn splinter<D: Dynamics>(
    system: &D,
    j1: &D::Set,
    j2: &D::Set,
    config: &SplinterConfig,
) -> Result<SplinterDecomposition<D::Set>> {
    let m1 = j1.measure()?;
    if m1 != j2.measure()? || !m1.is_positive()? {
        return Err(Error::Precondition(format!(
            "windows need equal positive measure, got {m1} and {}",
            j2.measure()?
        )));
    }
    if !config.epsilon.is_positive()? {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let window = match config.stall_window {
        StallWindow::Auto => system
            .certified_period(&[j1, j2])
            .map(|p| usize::try_from(p).unwrap_or(usize::MAX).max(MIN_STALL_WINDOW)),
        StallWindow::Fixed(w) => Some(w.max(1)),
        StallWindow::Off => None,
    };

    let mut d = SplinterDecomposition {
        j1: j1.clone(),
        j2: j2.clone(),
        splinters: Vec::new(),
        residuals: Vec::new(),
        covered: D::Set::empty(),
        trace: Vec::new(),
        status: SplinterStatus::BudgetExhausted,
        stall_window: window,
    };
    let mut previous = j1.clone();
    let mut quiet = 0usize;
    for step in 1..=config.n_max {
        if previous.component_count() > config.component_budget {
            return Ok(d);
        }
        let pulled = system.preimage(&previous)?;
        let open = j2.subtract(&d.covered)?;
        let a = pulled.intersect(&open)?;
        let b = pulled.subtract(&a)?;
        d.covered = d.covered.union(&a)?;
        let record = StepRecord {
            step,
            measure_a: a.measure()?,
            measure_b: b.measure()?,
            components_b: b.component_count(),
            covered: d.covered.measure()?,
        };
        quiet = if a.is_empty() { quiet + 1 } else { 0 };
        let converged = record.measure_b.lt(&config.epsilon)?;
        d.trace.push(record);
        d.splinters.push(a);
        d.residuals.push(b.clone());
        if converged {
            d.status = SplinterStatus::Converged;
            return Ok(d);
        }
        if window.is_some_and(|w| quiet >= w) {
            d.status = SplinterStatus::Stalled;
            return Ok(d);
        }
        previous = b;
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

/// One exact comparison `lhs = rhs` (or `lhs ≤ rhs` for inequalities).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub step: usize,
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub pass: bool,
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

fn sum<'a>(values: impl IntoIterator<Item = &'a Scalar>) -> Result<Scalar> {
    values.into_iter().try_fold(Scalar::zero(), |acc, x| acc.try_add(x))
}

/// `μ(Bₙ) = μ(J₂ ∖ ∪ᵢ≤ₙ Aᵢ)` for every recorded step.
pub fn verify_residual_identity<S: SetAlgebra>(d: &SplinterDecomposition<S>) -> Result<Vec<Check>> {
    let mut covered = S::empty();
    let mut out = Vec::with_capacity(d.steps());
    for (i, (a, b)) in d.splinters.iter().zip(&d.residuals).enumerate() {
        covered = covered.union(a)?;
        let lhs = b.measure()?;
        let rhs = d.j2.subtract(&covered)?.measure()?;
        out.push(Check { step: i + 1, pass: lhs == rhs, lhs, rhs });
    }
    Ok(out)
}

/// `Σᵢ≤ₙ μ(Aᵢ) + μ(Bₙ) = μ(J₁)` for every recorded step.
pub fn verify_mass_conservation<S: SetAlgebra>(d: &SplinterDecomposition<S>) -> Result<Vec<Check>> {
    let total = d.j1.measure()?;
    let mut acc = Scalar::zero();
    let mut out = Vec::with_capacity(d.steps());
    for (i, (a, b)) in d.splinters.iter().zip(&d.residuals).enumerate() {
        acc = acc.try_add(&a.measure()?)?;
        let lhs = acc.try_add(&b.measure()?)?;
        out.push(Check { step: i + 1, pass: lhs == total, lhs, rhs: total.clone() });
    }
    Ok(out)
}

/// Splinters are pairwise disjoint and lie inside `J₂`.
pub fn verify_splinters_disjoint<S: SetAlgebra>(d: &SplinterDecomposition<S>) -> Result<bool> {
    let mut seen = S::empty();
    for a in &d.splinters {
        if !a.subtract(&d.j2)?.is_empty() || !a.intersect(&seen)?.is_empty() {
            return Ok(false);
        }
        seen = seen.union(a)?;
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitReport {
    pub step: usize,
    /// `T⁻ⁿJ₁ = Bₙ ∪ ∪ᵢ T^-(n-i)Aᵢ` as sets.
    pub equal: bool,
    pub disjoint: bool,
    /// `μ(T⁻ⁿJ₁)` against the sum of the parts' measures.
    pub measures: Check,
}

impl OrbitReport {
    pub fn pass(&self) -> bool {
        self.equal && self.disjoint && self.measures.pass
    }
}

/// Checks `T⁻ⁿ(J₁) = Bₙ ⊔ ⊔ᵢ₌₁ⁿ T^-(n-i)(Aᵢ)` using preimages only.
pub fn verify_orbit_decomposition<D: Dynamics>(
    system: &D,
    d: &SplinterDecomposition<D::Set>,
    n: usize,
    component_budget: usize,
) -> Result<OrbitReport> {
    if n == 0 || n > d.steps() {
        return Err(Error::Precondition(format!("step {n} outside 1..={}", d.steps())));
    }
    let guard = |s: &D::Set| -> Result<()> {
        let count = s.component_count();
        if count > component_budget {
            return Err(Error::ComponentBudget { count, budget: component_budget });
        }
        Ok(())
    };
    let mut pulled = d.j1.clone();
    // parts[i] holds T^-(k-i-1) A_{i+1} after k rounds
    let mut parts: Vec<D::Set> = Vec::with_capacity(n + 1);
    for a in d.splinters.iter().take(n) {
        pulled = system.preimage(&pulled)?;
        guard(&pulled)?;
        for p in parts.iter_mut() {
            *p = system.preimage(p)?;
            guard(p)?;
        }
        parts.push(a.clone());
    }
    parts.push(d.residuals[n - 1].clone());

    let mut union = D::Set::empty();
    let mut disjoint = true;
    for p in &parts {
        if !union.intersect(p)?.is_empty() {
            disjoint = false;
        }
        union = union.union(p)?;
    }
    let lhs = pulled.measure()?;
    let measures: Vec<Scalar> = parts.iter().map(|p| p.measure()).collect::<Result<_>>()?;
    let rhs = sum(&measures)?;
    Ok(OrbitReport {
        step: n,
        equal: union == pulled,
        disjoint,
        measures: Check { step: n, pass: lhs == rhs, lhs, rhs },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportReport {
    /// Whether `T⁻¹B = B` exactly.
    pub invariant: bool,
    /// `μ(J₁∩B) ≤ μ(Bₙ∩B) + Σᵢ≤ₙ μ(Aᵢ∩B)` per step.
    pub chain: Vec<Check>,
    /// `μ(J₁∩B) ≤ μ(J₂∩B) + μ(Bₙ)` at the last step.
    pub limit: Option<Check>,
    /// First step where the chain fails.
    pub first_break: Option<usize>,
}

impl TransportReport {
    pub fn pass(&self) -> bool {
        self.first_break.is_none() && self.limit.as_ref().is_none_or(|c| c.pass)
    }
}

pub fn transport_check<D: Dynamics>(
    system: &D,
    d: &SplinterDecomposition<D::Set>,
    b: &D::Set,
) -> Result<TransportReport> {
    let invariant = system.preimage(b)? == *b;
    let lhs = d.j1.intersect(b)?.measure()?;
    let mut acc = Scalar::zero();
    let mut chain = Vec::with_capacity(d.steps());
    for (i, (a, r)) in d.splinters.iter().zip(&d.residuals).enumerate() {
        acc = acc.try_add(&a.intersect(b)?.measure()?)?;
        let rhs = acc.try_add(&r.intersect(b)?.measure()?)?;
        chain.push(Check { step: i + 1, pass: lhs.le(&rhs)?, lhs: lhs.clone(), rhs });
    }
    let first_break = chain.iter().find(|c| !c.pass).map(|c| c.step);
    let limit = match d.residuals.last() {
        Some(last) => {
            let rhs = d.j2.intersect(b)?.measure()?.try_add(&last.measure()?)?;
            Some(Check { step: d.steps(), pass: lhs.le(&rhs)?, lhs, rhs })
        }
        None => None,
    };
    Ok(TransportReport { invariant, chain, limit, first_break })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditivityRow {
    pub k: usize,
    /// `μ(∪ᵢ≤ₖ (Aᵢ∩B))` against `Σᵢ≤ₖ μ(Aᵢ∩B)`.
    pub additivity: Check,
    /// `μ(∪ᵢ>ₖ Aᵢ)` over the finite family.
    pub tail_measure: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditivityReport {
    pub rows: Vec<AdditivityRow>,
    pub tails_non_increasing: bool,
}

impl AdditivityReport {
    pub fn pass(&self) -> bool {
        self.tails_non_increasing && self.rows.iter().all(|r| r.additivity.pass)
    }
}

/// Finite additivity of `Aᵢ ∩ B` over truncations `k ≤ n_tail`, with the
/// tail measures `μ(∪ᵢ>ₖ Aᵢ)` checked to be non-increasing.
pub fn additivity_check<S: SetAlgebra>(family: &[S], b: &S, n_tail: usize) -> Result<AdditivityReport> {
    let mut seen = S::empty();
    for (i, a) in family.iter().enumerate() {
        if !a.intersect(&seen)?.is_empty() {
            return Err(Error::Precondition(format!("set {} meets an earlier set", i + 1)));
        }
        seen = seen.union(a)?;
    }
    let k_max = n_tail.min(family.len());
    let mut suffix = vec![S::empty(); family.len() + 1];
    for i in (0..family.len()).rev() {
        suffix[i] = suffix[i + 1].union(&family[i])?;
    }
    let mut rows = Vec::with_capacity(k_max);
    let mut union = S::empty();
    let mut total = Scalar::zero();
    for k in 1..=k_max {
        let piece = family[k - 1].intersect(b)?;
        total = total.try_add(&piece.measure()?)?;
        union = union.union(&piece)?;
        let lhs = union.measure()?;
        rows.push(AdditivityRow {
            k,
            additivity: Check { step: k, pass: lhs == total, lhs, rhs: total.clone() },
            tail_measure: suffix[k].measure()?,
        });
    }
    let mut tails_non_increasing = true;
    for w in rows.windows(2) {
        if w[0].tail_measure.lt(&w[1].tail_measure)? {
            tails_non_increasing = false;
        }
    }
    Ok(AdditivityReport { rows, tails_non_increasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Doubling, Odometer, Rotation};
    use crate::interval_set::IntervalSet;
    use crate::scalar::{IrrationalTag, Rational};

    fn set(text: &str) -> IntervalSet {
        text.parse().unwrap()
    }

    fn cfg(eps: Scalar, n_max: usize) -> SplinterConfig {
        SplinterConfig::new(eps, n_max)
    }

    #[test]
    fn doubling_hand_iteration() {
        let j = set("0..1/2");
        let d = splinter(&Doubling, &j, &j, &cfg(Scalar::dyadic(20), 64)).unwrap();
        assert_eq!(d.splinters[0], set("0..1/4"));
        assert_eq!(d.splinters[1], set("1/4..3/8"));
        assert_eq!(d.splinters[2], set("3/8..7/16"));
        assert_eq!(d.residuals[2], set("7/8..15/16"));
        for (n, r) in d.trace.iter().enumerate() {
            assert_eq!(r.measure_b, Scalar::dyadic(n as u32 + 2));
        }
        assert_eq!(d.status, SplinterStatus::Converged);
        assert_eq!(d.steps(), 20);
        assert!(all_pass(&verify_residual_identity(&d).unwrap()));
        let third = &verify_residual_identity(&d).unwrap()[2];
        assert_eq!(third.rhs, Scalar::from_ratio(1, 16));
    }

    #[test]
    fn doubling_orbit_decomposition_at_two() {
        let j = set("0..1/2");
        let d = splinter(&Doubling, &j, &j, &cfg(Scalar::dyadic(20), 64)).unwrap();
        let r = verify_orbit_decomposition(&Doubling, &d, 2, DEFAULT_COMPONENT_BUDGET).unwrap();
        assert!(r.pass());
        assert_eq!(Doubling.preimage(&Doubling.preimage(&j).unwrap()).unwrap(),
                   set("0..1/8, 1/4..3/8, 1/2..5/8, 3/4..7/8"));
    }

    #[test]
    fn odometer_covers_in_one_step() {
        let d = splinter(&Odometer, &set("0..1/2"), &set("1/2..1"), &cfg(Scalar::dyadic(30), 8)).unwrap();
        assert_eq!(d.splinters[0], set("1/2..1"));
        assert!(d.residuals[0].is_empty());
        assert_eq!(d.status, SplinterStatus::Converged);
        assert_eq!(d.steps(), 1);
        assert!(verify_orbit_decomposition(&Odometer, &d, 1, 16).unwrap().pass());
    }

    #[test]
    fn golden_first_splinter() {
        let g = IrrationalTag::GoldenConjugate;
        let d = splinter(&Rotation::golden(), &set("0..1/4"), &set("1/2..3/4"), &cfg(Scalar::from_ratio(1, 1000), 1)).unwrap();
        let a1 = IntervalSet::parse("1/2..5/4-1*alpha", Some(g)).unwrap();
        assert_eq!(d.splinters[0], a1);
        let expected = Scalar::new(Rational::new(3.into(), 4.into()), -Rational::from_integer(1.into()), Some(g)).unwrap();
        assert_eq!(d.trace[0].measure_a, expected);
    }

    #[test]
    fn rational_rotation_stalls() {
        let t = Rotation::new(Scalar::from_ratio(1, 3)).unwrap();
        let d = splinter(&t, &set("0..1/6"), &set("1/2..2/3"), &cfg(Scalar::dyadic(20), 100)).unwrap();
        assert_eq!(d.status, SplinterStatus::Stalled);
        assert_eq!(d.stall_window, Some(8));
        assert!(d.trace.iter().all(|r| r.measure_a.is_zero() && r.measure_b == Scalar::from_ratio(1, 6)));
        let b = set("0..1/6, 1/3..1/2, 2/3..5/6");
        let rep = transport_check(&t, &d, &b).unwrap();
        assert!(rep.invariant && rep.pass());
    }

    #[test]
    fn full_windows_leave_nothing() {
        let f = IntervalSet::full();
        let d = splinter(&Doubling, &f, &f, &cfg(Scalar::dyadic(4), 4)).unwrap();
        assert!(d.residuals[0].is_empty());
        assert_eq!(verify_residual_identity(&d).unwrap()[0].lhs, Scalar::zero());
    }

    #[test]
    fn unequal_windows_are_rejected() {
        let r = splinter(&Doubling, &set("0..1/2"), &set("0..1/4"), &cfg(Scalar::dyadic(4), 4));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn additivity_examples() {
        let j = set("0..1/2");
        let d = splinter(&Doubling, &j, &j, &cfg(Scalar::dyadic(20), 64)).unwrap();
        let rep = additivity_check(&d.splinters, &set("0..1/3"), 10).unwrap();
        assert!(rep.pass());
        assert_eq!(rep.rows.len(), 10);
        let overlapping = [set("0..1/2"), set("1/4..3/4")];
        assert!(additivity_check(&overlapping, &IntervalSet::full(), 2).is_err());
    }

    #[test]
    fn transport_trivial_sets() {
        let j = set("0..1/2");
        let d = splinter(&Doubling, &j, &j, &cfg(Scalar::dyadic(10), 64)).unwrap();
        for b in [IntervalSet::empty(), IntervalSet::full()] {
            let rep = transport_check(&Doubling, &d, &b).unwrap();
            assert!(rep.invariant && rep.pass());
            assert!(rep.chain.iter().all(|c| c.lhs == c.rhs));
        }
    }
}

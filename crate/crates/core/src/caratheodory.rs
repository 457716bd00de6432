//! Measure bases, density witnesses, the θ-gap and correlation diagnostics.
//!
//! Outer measure only enters through representable, hence measurable, sets.
//! On those it equals Lebesgue measure, so every quantity here is exact.

use std::fmt;

use num_integer::Integer;

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::interval_set::{Interval, IntervalSet, SetAlgebra};
use crate::scalar::{Rational, Scalar};
use crate::splinter::{splinter, transport_check, SplinterConfig, SplinterStatus};

/// Printed at the top of every report.
pub const RESTRICTION_NOTICE: &str =
    "outer measure evaluated on representable (measurable) sets only, where it equals Lebesgue measure";

/// A countable family of intervals, enumerated level by level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureBasis {
    /// `[k·2^-d, (k+1)·2^-d)` for `0 ≤ d ≤ depth_max`.
    Dyadic { depth_max: u32 },
    /// `[a/q, b/q)` whose endpoints have least common denominator `q ≤ denominator_max`.
    Arcs { denominator_max: u32 },
}

impl MeasureBasis {
    pub fn levels(&self) -> u32 {
        match *self {
            MeasureBasis::Dyadic { depth_max } => depth_max + 1,
            MeasureBasis::Arcs { denominator_max } => denominator_max,
        }
    }

    /// Elements of one level, left to right (lexicographic for arcs).
    pub fn level(&self, index: u32) -> Vec<Interval> {
        let rat = |n: i64, d: i64| Scalar::rational(Rational::new(n.into(), d.into()));
        match *self {
            MeasureBasis::Dyadic { .. } => {
                let n = 1i64 << index;
                (0..n).map(|k| Interval::new(rat(k, n), rat(k + 1, n)).expect("dyadic cell")).collect()
            }
            MeasureBasis::Arcs { .. } => {
                let q = i64::from(index) + 1;
                let mut out = Vec::new();
                for a in 0..q {
                    for b in a + 1..=q {
                        let den = (q / a.gcd(&q)).lcm(&(q / b.gcd(&q)));
                        if den == q {
                            out.push(Interval::new(rat(a, q), rat(b, q)).expect("arc"));
                        }
                    }
                }
                out
            }
        }
    }

    /// All elements in enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = Interval> + '_ {
        (0..self.levels()).flat_map(move |l| self.level(l))
    }
}

impl fmt::Display for MeasureBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureBasis::Dyadic { depth_max } => write!(f, "dyadic:{depth_max}"),
            MeasureBasis::Arcs { denominator_max } => write!(f, "arcs:{denominator_max}"),
        }
    }
}

impl std::str::FromStr for MeasureBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, n) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("basis `{s}` needs the form kind:bound")))?;
        let n: u32 = n.trim().parse().map_err(|_| Error::Parse(format!("bad basis bound in `{s}`")))?;
        match kind.trim() {
            "dyadic" if n <= 24 => Ok(MeasureBasis::Dyadic { depth_max: n }),
            "arcs" if n >= 1 => Ok(MeasureBasis::Arcs { denominator_max: n }),
            _ => Err(Error::Parse(format!("unsupported basis `{s}`"))),
        }
    }
}

fn check_epsilon(epsilon: &Scalar) -> Result<()> {
    if !epsilon.is_positive()? || !epsilon.lt(&Scalar::one())? {
        return Err(Error::Precondition(format!("epsilon {epsilon} outside (0, 1)")));
    }
    Ok(())
}

/// `μ(S∩J) > (1 − ε)·μ(J)`, strictly.
pub fn is_density_set(s: &IntervalSet, j: &Interval, epsilon: &Scalar) -> Result<bool> {
    let j_set = IntervalSet::from_interval(j.clone());
    let inside = s.intersect(&j_set)?.measure()?;
    let bound = Scalar::one().try_sub(epsilon)?.try_mul(&j.length()?)?;
    bound.lt(&inside)
}

/// First basis element that is a set of density for `s` to within `epsilon`.
pub fn density_search(s: &IntervalSet, epsilon: &Scalar, basis: &MeasureBasis) -> Result<Option<Interval>> {
    check_epsilon(epsilon)?;
    if !s.measure()?.is_positive()? {
        return Err(Error::Precondition("density search needs a set of positive measure".into()));
    }
    for j in basis.elements() {
        if is_density_set(s, &j, epsilon)? {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairSearch {
    Found { j1: Interval, j2: Interval, level: u32 },
    /// Deepest witnesses found for each set separately.
    NotFound { j1: Option<Interval>, j2: Option<Interval> },
}

/// Equal-measure density witnesses for two sets, taken from a common level.
pub fn density_pair(a1: &IntervalSet, a2: &IntervalSet, epsilon: &Scalar, basis: &MeasureBasis) -> Result<PairSearch> {
    check_epsilon(epsilon)?;
    if !a1.measure()?.is_positive()? || !a2.measure()?.is_positive()? {
        return Err(Error::Precondition("density pair needs sets of positive measure".into()));
    }
    let (mut p1, mut p2) = (None, None);
    for level in 0..basis.levels() {
        let cells = basis.level(level);
        let mut w1 = Vec::new();
        let mut w2 = Vec::new();
        for j in &cells {
            if is_density_set(a1, j, epsilon)? {
                w1.push(j.clone());
            }
            if is_density_set(a2, j, epsilon)? {
                w2.push(j.clone());
            }
        }
        p1 = w1.first().cloned().or(p1);
        p2 = w2.first().cloned().or(p2);
        for j1 in &w1 {
            for j2 in &w2 {
                if j1.length()? == j2.length()? {
                    return Ok(PairSearch::Found { j1: j1.clone(), j2: j2.clone(), level });
                }
            }
        }
    }
    Ok(PairSearch::NotFound { j1: p1, j2: p2 })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapReport {
    pub theta: Scalar,
    pub j: IntervalSet,
    /// `(μ(B∩J), μ(Bᶜ∩J))`.
    pub parts: (Scalar, Scalar),
    pub caratheodory_equality: bool,
}

/// `θ = (μ(B∩J) + μ(Bᶜ∩J)) / μ(J)`.
pub fn gap_theta(b: &IntervalSet, j: &IntervalSet) -> Result<GapReport> {
    let mj = j.measure()?;
    if mj.is_zero() {
        return Err(Error::Precondition("gap of a null window".into()));
    }
    let inside = b.intersect(j)?.measure()?;
    let outside = b.complement()?.intersect(j)?.measure()?;
    let theta = inside.try_add(&outside)?.try_div(&mj)?;
    let caratheodory_equality = theta == Scalar::one();
    Ok(GapReport { theta, j: j.clone(), parts: (inside, outside), caratheodory_equality })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionPair {
    pub j: Interval,
    pub k: Interval,
    pub status: SplinterStatus,
    /// `μ(B∩K)` and `μ(B∩J) − ε`.
    pub inequality: (Scalar, Scalar),
    pub transport_holds: bool,
    /// Holds unless the pair converged and an inequality failed.
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionReport {
    pub invariant: bool,
    pub pairs: Vec<ReductionPair>,
}

impl ReductionReport {
    pub fn pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }

    pub fn unconverged(&self) -> usize {
        self.pairs.iter().filter(|p| p.status != SplinterStatus::Converged).count()
    }
}

/// Runs splinters between equal-measure basis pairs and checks
/// `μ(B∩K) ≥ μ(B∩J) − ε` on the converged ones. At most `sample` pairs are
/// used, spread evenly over the enumeration.
pub fn reduction_check<D: Dynamics<Set = IntervalSet>>(
    system: &D,
    b: &IntervalSet,
    basis: &MeasureBasis,
    sample: usize,
    epsilon: &Scalar,
    n_max: usize,
) -> Result<ReductionReport> {
    let invariant = system.preimage(b)? == *b;
    let cells: Vec<Interval> = basis.elements().collect();
    let mut candidates = Vec::new();
    for j in &cells {
        for k in &cells {
            if j != k && j.length()? == k.length()? {
                candidates.push((j.clone(), k.clone()));
            }
        }
    }
    let stride = candidates.len().div_ceil(sample.max(1)).max(1);
    let config = SplinterConfig::new(epsilon.clone(), n_max);
    let mut pairs = Vec::new();
    for (j, k) in candidates.into_iter().step_by(stride).take(sample) {
        let (js, ks) = (IntervalSet::from_interval(j.clone()), IntervalSet::from_interval(k.clone()));
        let d = splinter(system, &js, &ks, &config)?;
        let transport = transport_check(system, &d, b)?;
        let lhs = b.intersect(&ks)?.measure()?;
        let rhs = b.intersect(&js)?.measure()?.try_sub(epsilon)?;
        let holds = rhs.le(&lhs)?;
        let converged = d.status == SplinterStatus::Converged;
        pairs.push(ReductionPair {
            j,
            k,
            status: d.status,
            inequality: (lhs, rhs),
            transport_holds: transport.pass(),
            pass: !converged || !invariant || (holds && transport.pass()),
        });
    }
    Ok(ReductionReport { invariant, pairs })
}

/// `μ(T⁻ʲC ∩ D)` for `j = 1..=n`.
pub fn correlations<D: Dynamics>(
    system: &D,
    c: &D::Set,
    d: &D::Set,
    n: usize,
    component_budget: usize,
) -> Result<Vec<Scalar>> {
    let mut out = Vec::with_capacity(n);
    let mut pulled = c.clone();
    for _ in 0..n {
        pulled = system.preimage(&pulled)?;
        let count = pulled.component_count();
        if count > component_budget {
            return Err(Error::ComponentBudget { count, budget: component_budget });
        }
        out.push(pulled.intersect(d)?.measure()?);
    }
    Ok(out)
}

/// `(1/m)·Σⱼ₌₁ᵐ μ(T⁻ʲC ∩ D)`.
pub fn correlation_average<D: Dynamics>(
    system: &D,
    c: &D::Set,
    d: &D::Set,
    m: usize,
    component_budget: usize,
) -> Result<Scalar> {
    if m == 0 {
        return Err(Error::Precondition("average over zero steps".into()));
    }
    let values = correlations(system, c, d, m, component_budget)?;
    let total = values.iter().try_fold(Scalar::zero(), |acc, x| acc.try_add(x))?;
    Ok(total.scale(&Rational::new(1.into(), (m as i64).into())))
}

/// `μ(T⁻ʲC ∩ D) − μ(C)·μ(D)` for `j = 1..=n_max`.
pub fn mixing_trace<D: Dynamics>(
    system: &D,
    c: &D::Set,
    d: &D::Set,
    n_max: usize,
    component_budget: usize,
) -> Result<Vec<Scalar>> {
    let product = c.measure()?.try_mul(&d.measure()?)?;
    correlations(system, c, d, n_max, component_budget)?
        .into_iter()
        .map(|x| x.try_sub(&product))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvarianceReport {
    pub invariant: bool,
    /// `μ(T⁻¹B △ B)`.
    pub defect: Scalar,
}

pub fn invariance_check<D: Dynamics>(system: &D, b: &D::Set) -> Result<InvarianceReport> {
    let pulled = system.preimage(b)?;
    let defect = pulled.subtract(b)?.union(&b.subtract(&pulled)?)?.measure()?;
    Ok(InvarianceReport { invariant: pulled == *b, defect })
}
